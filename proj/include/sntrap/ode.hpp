#pragma once

// Adaptive explicit Runge-Kutta integration with dense output, using the
// Dormand-Prince 5(4) pair. The controller keeps a mixed absolute/relative
// error norm below one per step; accepted steps feed the standard quartic
// interpolant, so requested sample times never constrain the step size.

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace sntrap {

struct OdeOptions {
    double rel_tol = 1.0e-9;
    double abs_tol = 1.0e-12;
    double initial_step = 0.0;
    long max_steps = 20000000;
};

template <std::size_t N>
struct OdeSample {
    double t = 0.0;
    std::array<double, N> y{};
};

// Thrown on step-size collapse or an exhausted step budget; carries the
// samples that were produced before integration stopped.
template <std::size_t N>
class OdeError : public std::runtime_error {
public:
    std::vector<OdeSample<N>> partial;

    OdeError(const std::string& what, std::vector<OdeSample<N>> samples)
        : std::runtime_error(what), partial(std::move(samples)) {}
};

namespace ode_detail {

inline constexpr double dp_c[7] = {
    0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0,
};

inline constexpr double dp_a2[1] = {1.0 / 5.0};
inline constexpr double dp_a3[2] = {3.0 / 40.0, 9.0 / 40.0};
inline constexpr double dp_a4[3] = {44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0};
inline constexpr double dp_a5[4] = {19372.0 / 6561.0, -25360.0 / 2187.0,
                                    64448.0 / 6561.0, -212.0 / 729.0};
inline constexpr double dp_a6[5] = {9017.0 / 3168.0, -355.0 / 33.0,
                                    46732.0 / 5247.0, 49.0 / 176.0,
                                    -5103.0 / 18656.0};

// Fifth-order solution weights; the seventh stage reuses them (FSAL).
inline constexpr double dp_b[7] = {
    35.0 / 384.0,     0.0,        500.0 / 1113.0, 125.0 / 192.0,
    -2187.0 / 6784.0, 11.0 / 84.0, 0.0,
};

// Difference against the embedded fourth-order weights.
inline constexpr double dp_e[7] = {
    71.0 / 57600.0,       0.0,          -71.0 / 16695.0, 71.0 / 1920.0,
    -17253.0 / 339200.0,  22.0 / 525.0, -1.0 / 40.0,
};

// Stage weights of the quartic dense-output polynomial.
inline constexpr double dp_d[7] = {
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
};

}  // namespace ode_detail

// Integrates dy/dt = rhs(t, y) from t0 to t1 > t0 and returns the dense
// solution at the requested sample times, which must be nondecreasing and
// contained in [t0, t1]. The right-hand side is called as
// rhs(t, y, dydt).
template <std::size_t N, class Rhs>
std::vector<OdeSample<N>> integrate_dopri5(Rhs&& rhs,
                                           const std::array<double, N>& y0,
                                           double t0, double t1,
                                           const std::vector<double>& sample_times,
                                           const OdeOptions& opt = {}) {
    using State = std::array<double, N>;

    if (!(t1 > t0)) {
        throw std::invalid_argument("integrate_dopri5: t1 must exceed t0");
    }
    if (!(opt.rel_tol > 0.0) || !(opt.abs_tol >= 0.0)) {
        throw std::invalid_argument("integrate_dopri5: invalid tolerances");
    }
    for (std::size_t i = 0; i < sample_times.size(); ++i) {
        const double s = sample_times[i];
        if (!(s >= t0) || !(s <= t1)) {
            throw std::invalid_argument(
                "integrate_dopri5: sample time outside [t0, t1]");
        }
        if (i > 0 && s < sample_times[i - 1]) {
            throw std::invalid_argument(
                "integrate_dopri5: sample times must be nondecreasing");
        }
    }

    std::vector<OdeSample<N>> out;
    out.reserve(sample_times.size());
    std::size_t next_sample = 0;

    State y = y0;
    State k1;
    rhs(t0, y, k1);
    double t = t0;

    while (next_sample < sample_times.size() && sample_times[next_sample] <= t) {
        out.push_back({sample_times[next_sample], y});
        ++next_sample;
    }

    double h = opt.initial_step > 0.0 ? opt.initial_step : (t1 - t0) * 1.0e-3;
    h = std::min(h, t1 - t0);

    State k2, k3, k4, k5, k6, k7, stage, y_new;
    long steps = 0;

    while (t < t1) {
        if (++steps > opt.max_steps) {
            throw OdeError<N>("integrate_dopri5: step budget exhausted",
                              std::move(out));
        }
        const double h_floor = 16.0 * std::numeric_limits<double>::epsilon() *
                               std::max(std::fabs(t), std::fabs(t1));
        if (h < h_floor) {
            throw OdeError<N>("integrate_dopri5: step size collapsed",
                              std::move(out));
        }
        h = std::min(h, t1 - t);

        using namespace ode_detail;
        for (std::size_t i = 0; i < N; ++i) {
            stage[i] = y[i] + h * dp_a2[0] * k1[i];
        }
        rhs(t + dp_c[1] * h, stage, k2);
        for (std::size_t i = 0; i < N; ++i) {
            stage[i] = y[i] + h * (dp_a3[0] * k1[i] + dp_a3[1] * k2[i]);
        }
        rhs(t + dp_c[2] * h, stage, k3);
        for (std::size_t i = 0; i < N; ++i) {
            stage[i] = y[i] + h * (dp_a4[0] * k1[i] + dp_a4[1] * k2[i] +
                                   dp_a4[2] * k3[i]);
        }
        rhs(t + dp_c[3] * h, stage, k4);
        for (std::size_t i = 0; i < N; ++i) {
            stage[i] = y[i] + h * (dp_a5[0] * k1[i] + dp_a5[1] * k2[i] +
                                   dp_a5[2] * k3[i] + dp_a5[3] * k4[i]);
        }
        rhs(t + dp_c[4] * h, stage, k5);
        for (std::size_t i = 0; i < N; ++i) {
            stage[i] = y[i] + h * (dp_a6[0] * k1[i] + dp_a6[1] * k2[i] +
                                   dp_a6[2] * k3[i] + dp_a6[3] * k4[i] +
                                   dp_a6[4] * k5[i]);
        }
        rhs(t + dp_c[5] * h, stage, k6);
        for (std::size_t i = 0; i < N; ++i) {
            y_new[i] = y[i] + h * (dp_b[0] * k1[i] + dp_b[2] * k3[i] +
                                   dp_b[3] * k4[i] + dp_b[4] * k5[i] +
                                   dp_b[5] * k6[i]);
        }
        rhs(t + h, y_new, k7);

        double err_sq = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double e = h * (dp_e[0] * k1[i] + dp_e[2] * k3[i] +
                                  dp_e[3] * k4[i] + dp_e[4] * k5[i] +
                                  dp_e[5] * k6[i] + dp_e[6] * k7[i]);
            const double scale =
                opt.abs_tol +
                opt.rel_tol * std::max(std::fabs(y[i]), std::fabs(y_new[i]));
            err_sq += (e / scale) * (e / scale);
        }
        const double err = std::sqrt(err_sq / static_cast<double>(N));

        if (err <= 1.0) {
            while (next_sample < sample_times.size() &&
                   sample_times[next_sample] <= t + h) {
                const double theta = (sample_times[next_sample] - t) / h;
                const double theta1 = 1.0 - theta;
                OdeSample<N> s;
                s.t = sample_times[next_sample];
                for (std::size_t i = 0; i < N; ++i) {
                    const double ydiff = y_new[i] - y[i];
                    const double bspl = h * k1[i] - ydiff;
                    const double r5 =
                        h * (dp_d[0] * k1[i] + dp_d[2] * k3[i] +
                             dp_d[3] * k4[i] + dp_d[4] * k5[i] +
                             dp_d[5] * k6[i] + dp_d[6] * k7[i]);
                    const double r4 = ydiff - h * k7[i] - bspl;
                    s.y[i] = y[i] + theta * (ydiff +
                                             theta1 * (bspl +
                                                       theta * (r4 + theta1 * r5)));
                }
                out.push_back(s);
                ++next_sample;
            }
            t += h;
            y = y_new;
            k1 = k7;
            const double grow =
                err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
            h *= std::min(5.0, std::max(0.2, grow));
        } else {
            h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
        }
    }

    while (next_sample < sample_times.size()) {
        out.push_back({sample_times[next_sample], y});
        ++next_sample;
    }
    return out;
}

}  // namespace sntrap
