#pragma once

// Small shared utilities: deterministic RNG streams and a bounded
// parallel-for whose result ordering never depends on the thread count.

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace sntrap {

// splitmix64: tiny, portable, and good enough for stratified sampling.
// Each stream is fully determined by its 64-bit state seed.
struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform double in [0, 1)
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

// Stateless mixing of several 64-bit labels into one stream seed.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c = 0) {
    SplitMix64 s(a);
    std::uint64_t x = s.next() ^ b;
    SplitMix64 t(x);
    return t.next() ^ (c * 0x9e3779b97f4a7c15ULL);
}

// Worker count: SN_TRAP_THREADS if set (>=1), else hardware concurrency.
inline unsigned thread_count() {
    if (const char* env = std::getenv("SN_TRAP_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1u;
}

// Runs body(i) for i in [0, count). Work is split into contiguous index
// blocks; each index is processed exactly once, so any result written to a
// preallocated slot i is independent of the number of workers.
inline void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
    const unsigned workers = std::min<std::size_t>(thread_count(), count ? count : 1);
    if (workers <= 1 || count < 2) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (count + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        const std::size_t lo = static_cast<std::size_t>(w) * chunk;
        const std::size_t hi = std::min(count, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &body] {
            for (std::size_t i = lo; i < hi; ++i) body(i);
        });
    }
    for (auto& t : pool) t.join();
}

} // namespace sntrap
