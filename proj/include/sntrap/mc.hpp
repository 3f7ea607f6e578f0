#pragma once

// Seeded stratified Monte-Carlo integration over a product of finite
// intervals. The leading dimensions are split into equal sub-boxes
// (strata); each stratum owns an independent deterministic RNG stream per
// sampling round, so results are bit-identical for a fixed seed no matter
// how many threads evaluate the strata.

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "sntrap/quadrature.hpp"
#include "sntrap/util.hpp"

namespace sntrap {

struct McConfig {
    std::uint64_t seed = 1;
    double target_rel_error = 1e-3;
    long max_samples = 200000000;
    int strata_per_dim = 8;   // along each stratified dimension
    int strata_dims = 2;      // leading dimensions to stratify
    long initial_per_stratum = 512;
};

// Integrates f over the box [lo_i, hi_i]^k. Sampling proceeds in rounds of
// geometrically growing size until the stratified standard error meets
// target_rel_error or the sample budget is exhausted (which throws a
// QuadratureError carrying the partial estimate).
inline QuadResult integrate_mc(const std::function<double(const double*)>& f,
                               const std::vector<double>& lo,
                               const std::vector<double>& hi,
                               const McConfig& cfg = {}) {
    const int dims = static_cast<int>(lo.size());
    if (dims < 1 || dims > 8 || hi.size() != lo.size())
        throw std::invalid_argument("integrate_mc: need 1..8 matching bounds");
    for (int d = 0; d < dims; ++d)
        if (!(hi[d] > lo[d]))
            throw std::invalid_argument("integrate_mc: empty interval");
    if (!(cfg.target_rel_error > 0.0) || cfg.strata_per_dim < 1 ||
        cfg.strata_dims < 0 || cfg.initial_per_stratum < 2)
        throw std::invalid_argument("integrate_mc: bad config");

    const int sdims = std::min(cfg.strata_dims, dims);
    long strata = 1;
    for (int d = 0; d < sdims; ++d) strata *= cfg.strata_per_dim;

    double volume = 1.0;
    for (int d = 0; d < dims; ++d) volume *= hi[d] - lo[d];
    const double stratum_volume = volume / static_cast<double>(strata);

    struct Tally {
        double sum = 0.0;
        double sum_sq = 0.0;
        long n = 0;
    };
    std::vector<Tally> tally(strata);

    long total_samples = 0;
    long per_stratum = cfg.initial_per_stratum;
    QuadResult res;

    for (int round = 0;; ++round) {
        parallel_for(static_cast<std::size_t>(strata), [&](std::size_t s) {
            SplitMix64 rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(s),
                                    static_cast<std::uint64_t>(round)));
            // decode the stratum's sub-box along the stratified dimensions
            double slo[8], shi[8];
            std::size_t rem = s;
            for (int d = 0; d < dims; ++d) {
                if (d < sdims) {
                    const std::size_t cell = rem % cfg.strata_per_dim;
                    rem /= cfg.strata_per_dim;
                    const double w = (hi[d] - lo[d]) / cfg.strata_per_dim;
                    slo[d] = lo[d] + w * static_cast<double>(cell);
                    shi[d] = slo[d] + w;
                } else {
                    slo[d] = lo[d];
                    shi[d] = hi[d];
                }
            }
            double acc = 0.0, acc_sq = 0.0;
            double x[8];
            for (long i = 0; i < per_stratum; ++i) {
                for (int d = 0; d < dims; ++d)
                    x[d] = slo[d] + (shi[d] - slo[d]) * rng.uniform();
                const double v = f(x);
                acc += v;
                acc_sq += v * v;
            }
            tally[s].sum += acc;
            tally[s].sum_sq += acc_sq;
            tally[s].n += per_stratum;
        });
        total_samples += strata * per_stratum;

        // fixed-order reduction over stratum index
        double mean_total = 0.0, var_total = 0.0;
        for (long s = 0; s < strata; ++s) {
            const Tally& t = tally[s];
            const double mean = t.sum / static_cast<double>(t.n);
            const double var =
                std::max(0.0, t.sum_sq / static_cast<double>(t.n) - mean * mean);
            mean_total += stratum_volume * mean;
            var_total += stratum_volume * stratum_volume * var /
                         static_cast<double>(t.n);
        }
        res.value = mean_total;
        res.error_estimate = std::sqrt(var_total);
        res.evaluations = total_samples;

        const double goal = cfg.target_rel_error * std::fabs(res.value);
        if (res.error_estimate <= goal && total_samples >= 2 * strata) return res;
        if (total_samples >= cfg.max_samples)
            throw QuadratureError("integrate_mc: sample budget exhausted", res);
        per_stratum = std::min(per_stratum * 2,
                               (cfg.max_samples - total_samples) / strata + 1);
    }
}

} // namespace sntrap
