#pragma once

// Axially symmetric 3-D spectrum: the level weight f_n(alpha, mu) for a
// state trapped at omega0 along x and at mu*omega0 in the two transverse
// directions (transverse ground state, n-th longitudinal level), and the
// transition-weight sweep that pairs the Monte-Carlo values with their
// 1-D counterparts.
//
// After mapping the longitudinal Gaussian weights onto the unit cube with
// the probit transform and substituting u = exp(-mu s^2) for the
// transverse radial coordinates, the 5-D integral becomes an expectation
// over (t, t', u, u', v) uniform on [0,1]^5:
//
//   f_n = sqrt(2/pi) alpha^2
//       + alpha^2 E[ w_n(xi) w_n(xi') (K(zeta) - sqrt(2/pi)) ]
//
// with xi = erfinv(2t - 1), w_n = H_n^2 / (2^n n!), phi = pi v,
// K(zeta) = erf(sqrt(2) zeta)/(2 zeta), and
//
//   zeta = (1/alpha) sqrt( (xi - xi')^2
//          + (l + l' - 2 sqrt(l l') cos phi) / mu ),   l = -ln u.
//
// The n-independent constant sqrt(2/pi) alpha^2 integrates in closed form
// and only the bounded kernel deficit is sampled, so level differences
// carry no noise from the constant. The radicand is non-negative by
// construction (it is |r - r'|^2 / (2 sigma)^2); roundoff can push it
// marginally below zero, which is clamped, and clamps beyond -1e-14 are
// counted so callers can assert the geometry stayed exact.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/special_functions/erf.hpp>

#include "sntrap/constants.hpp"
#include "sntrap/kernels.hpp"
#include "sntrap/mc.hpp"
#include "sntrap/quadrature.hpp"
#include "sntrap/spectrum.hpp"

namespace sntrap {

struct AxialQuery {
    int n = 0;
    double alpha = 1.0;
    double mu = 1.0;
    McConfig mc;

    void validate() const {
        if (n < 0 || n > 6)
            throw std::domain_error("AxialQuery: n must be in [0, 6]");
        if (!(alpha > 0.0))
            throw std::domain_error("AxialQuery: alpha must be > 0");
        if (!(mu > 0.0))
            throw std::domain_error("AxialQuery: mu must be > 0");
    }
};

namespace axial_detail {

inline double hermite(int n, double x) {
    if (n == 0) return 1.0;
    double prev = 1.0;
    double cur = 2.0 * x;
    for (int k = 1; k < n; ++k) {
        const double next = 2.0 * x * cur - 2.0 * static_cast<double>(k) * prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

// 2^n n! for n in [0, 6]
inline double hermite_norm(int n) {
    static constexpr double table[7] = {1.0, 2.0, 8.0, 48.0, 384.0, 3840.0, 46080.0};
    return table[n];
}

// Unit-cube coordinate onto the node of the weight e^{-xi^2}: the map is
// monotone, so stratifying t stratifies xi.
inline double gauss_node(double t) {
    constexpr double lim = 1.0 - 0x1.0p-52;
    double x = 2.0 * t - 1.0;
    if (x < -lim) x = -lim;
    if (x > lim) x = lim;
    return boost::math::erf_inv(x);
}

inline double neg_log(double u) {
    constexpr double floor = 1e-300;
    return -std::log(u > floor ? u : floor);
}

struct ZetaTally {
    std::atomic<long> clamps{0};
};

inline double zeta_of(double xi, double xi2, double l, double l2, double phi,
                      double alpha, double mu, ZetaTally& tally) {
    const double dx = xi - xi2;
    double r = dx * dx + (l + l2 - 2.0 * std::sqrt(l * l2) * std::cos(phi)) / mu;
    if (r < 0.0) {
        if (r < -1e-14) tally.clamps.fetch_add(1, std::memory_order_relaxed);
        r = 0.0;
    }
    return std::sqrt(r) / alpha;
}

} // namespace axial_detail

// Monte-Carlo estimate of f_n(alpha, mu). The returned value includes the
// closed-form constant part; error_estimate is the stratified standard
// error of the sampled remainder. A non-converged run throws a
// QuadratureError whose best estimate is already scaled to f-units.
// radicand_clamps, when given, receives the count of radicand clamps
// larger than roundoff (it must be zero for a correct geometry).
inline QuadResult f_n_axial(const AxialQuery& q, long* radicand_clamps = nullptr) {
    q.validate();
    axial_detail::ZetaTally tally;
    const int n = q.n;
    const double alpha = q.alpha;
    const double mu = q.mu;
    auto integrand = [n, alpha, mu, &tally](const double* x) {
        const double xi = axial_detail::gauss_node(x[0]);
        const double xi2 = axial_detail::gauss_node(x[1]);
        const double l = axial_detail::neg_log(x[2]);
        const double l2 = axial_detail::neg_log(x[3]);
        const double phi = constants::pi * x[4];
        const double zeta =
            axial_detail::zeta_of(xi, xi2, l, l2, phi, alpha, mu, tally);
        const double h = axial_detail::hermite(n, xi) * axial_detail::hermite(n, xi2);
        return h * h * detail::erf_over_2zeta_deficit(zeta);
    };

    const double norm = axial_detail::hermite_norm(n);
    const double scale = alpha * alpha / (norm * norm);
    const double constant = constants::sqrt_2_over_pi * alpha * alpha;
    QuadResult res;
    try {
        res = integrate_mc(integrand, {0.0, 0.0, 0.0, 0.0, 0.0},
                           {1.0, 1.0, 1.0, 1.0, 1.0}, q.mc);
    } catch (QuadratureError& e) {
        e.best.value = scale * e.best.value + constant;
        e.best.error_estimate *= scale;
        if (radicand_clamps) *radicand_clamps = tally.clamps.load();
        throw;
    }
    res.value = scale * res.value + constant;
    res.error_estimate *= scale;
    if (radicand_clamps) *radicand_clamps = tally.clamps.load();
    return res;
}

// Monte-Carlo estimate of the transition weight f_n - f_{n+1} at shared
// sample points: both levels see the same kernel draw, so the difference
// estimator drops the constant exactly and most of the kernel variance
// with it. Throws like f_n_axial on non-convergence.
inline QuadResult f_gap_axial(int n, double alpha, double mu,
                              const McConfig& mc,
                              long* radicand_clamps = nullptr) {
    AxialQuery upper{n + 1, alpha, mu, mc};
    upper.validate();
    axial_detail::ZetaTally tally;
    const double norm_lo = axial_detail::hermite_norm(n);
    const double norm_hi = axial_detail::hermite_norm(n + 1);
    auto integrand = [n, alpha, mu, norm_lo, norm_hi, &tally](const double* x) {
        const double xi = axial_detail::gauss_node(x[0]);
        const double xi2 = axial_detail::gauss_node(x[1]);
        const double l = axial_detail::neg_log(x[2]);
        const double l2 = axial_detail::neg_log(x[3]);
        const double phi = constants::pi * x[4];
        const double zeta =
            axial_detail::zeta_of(xi, xi2, l, l2, phi, alpha, mu, tally);
        const double h_lo =
            axial_detail::hermite(n, xi) * axial_detail::hermite(n, xi2);
        const double h_hi =
            axial_detail::hermite(n + 1, xi) * axial_detail::hermite(n + 1, xi2);
        const double weight =
            h_lo * h_lo / (norm_lo * norm_lo) - h_hi * h_hi / (norm_hi * norm_hi);
        return weight * detail::erf_over_2zeta_deficit(zeta);
    };

    const double scale = alpha * alpha;
    QuadResult res;
    try {
        res = integrate_mc(integrand, {0.0, 0.0, 0.0, 0.0, 0.0},
                           {1.0, 1.0, 1.0, 1.0, 1.0}, mc);
    } catch (QuadratureError& e) {
        e.best.value *= scale;
        e.best.error_estimate *= scale;
        if (radicand_clamps) *radicand_clamps = tally.clamps.load();
        throw;
    }
    res.value *= scale;
    res.error_estimate *= scale;
    if (radicand_clamps) *radicand_clamps = tally.clamps.load();
    return res;
}

// One sweep row: the Monte-Carlo transition weight f_n - f_{n+1} at one
// grid point, its standard error, and the same-level 1-D intermediate
// transition weight for side-by-side plotting.
struct AxialRow {
    double alpha = 0.0;
    int n = 0;
    double value = 0.0;
    double std_error = 0.0;
    double one_dim = 0.0;
    std::string error;
};

struct AxialSweep {
    double mu = 0.0;
    std::vector<AxialRow> rows;
};

// Transition weights for n in [n_lo, n_hi] over the alpha grid, rows
// grouped by level with alpha ascending within each group. A row whose
// Monte-Carlo run does not converge keeps the partial estimate and
// records the failure in its error field.
inline AxialSweep sweep_axial(int n_lo, int n_hi,
                              const std::vector<double>& alphas, double mu,
                              const McConfig& mc) {
    if (alphas.empty())
        throw std::invalid_argument("sweep_axial: alpha grid is empty");
    if (n_lo < 0 || n_hi < n_lo)
        throw std::domain_error("sweep_axial: level range must satisfy 0 <= n_lo <= n_hi");
    AxialQuery top{n_hi + 1, 1.0, mu, mc};
    top.validate();
    for (double alpha : alphas) {
        if (!(alpha > 0.0))
            throw std::domain_error("sweep_axial: alpha grid must be positive");
    }

    AxialSweep sweep;
    sweep.mu = mu;
    sweep.rows.reserve(static_cast<std::size_t>(n_hi - n_lo + 1) * alphas.size());
    for (int n = n_lo; n <= n_hi; ++n) {
        for (double alpha : alphas) {
            AxialRow row;
            row.alpha = alpha;
            row.n = n;
            row.one_dim = f_n_intermediate(n, alpha, KernelFamily::gauss) -
                          f_n_intermediate(n + 1, alpha, KernelFamily::gauss);
            try {
                const QuadResult r = f_gap_axial(n, alpha, mu, mc);
                row.value = r.value;
                row.std_error = r.error_estimate;
            } catch (const QuadratureError& e) {
                row.value = e.best.value;
                row.std_error = e.best.error_estimate;
                row.error = e.what();
            }
            sweep.rows.push_back(std::move(row));
        }
    }
    return sweep;
}

} // namespace sntrap
