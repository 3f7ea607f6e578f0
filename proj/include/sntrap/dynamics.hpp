#pragma once

// Squeezed-Gaussian moment dynamics under gravitational self-interaction:
// the width-coupling function g and its derivative g' in every regime, the
// k-decomposition over the crystalline kernel branches, trajectory
// integration of the closed moment system, dephasing extraction, and the
// frequency-correction sweep.
//
// Under the Gaussian ansatz the second central moments close into
//
//   u1' = u3,   u2' = -omega0^2 u3,   u3' = -2 omega0^2 u1 + 2 u2 + g(u1)
//
// with u1 = var x, u3 = cov(x,p) * 2/m, and u2 absorbing the potential
// expectation: u2 = var(p)/m^2 + <V_g>/m. The width parameter of the
// Gaussian is alpha = 2 sigma / sqrt(u1), and
//
//   g(alpha)  = (G m_atom / (sqrt(pi) sigma)) int_0^inf dw e^{-w^2/4} c(w/alpha)
//   g'(u1)    = -(alpha^3 / (8 sigma^2)) dg/dalpha
//             = -(G m_atom / (16 sqrt(pi) sigma^3)) int_0^inf dw e^{-w^2/4}
//               (2 - w^2) alpha^2 c(w/alpha)
//
// where c(zeta) = zeta i'(zeta) + 2 i(zeta) is the kernel combination from
// the kernels module. All integrals run in the scaled variable w =
// alpha zeta so the Gaussian weight stays at O(1) scale for every alpha.
// First moments evolve as the bare oscillator and are emitted in closed
// form.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>

#include "sntrap/constants.hpp"
#include "sntrap/kernels.hpp"
#include "sntrap/ode.hpp"
#include "sntrap/params.hpp"
#include "sntrap/quadrature.hpp"
#include "sntrap/util.hpp"

namespace sntrap {

// The intermediate-regime kernel: the varrho-independent part of i(zeta)
// that survives when the beta-suppressed lattice terms and the constant
// are dropped. Valid while the wave-function is much narrower than the
// sphere (alpha varrho >> 1).
inline double intermediate_kernel(double zeta, KernelFamily family) {
    if (zeta < 0.0)
        throw std::domain_error("intermediate_kernel: zeta must be >= 0");
    if (family == KernelFamily::gauss) return detail::erf_over_2zeta(zeta);
    if (zeta <= 1.0) {
        const double z2 = zeta * zeta;
        return z2 * (-2.0 + zeta * (1.5 - 0.2 * z2));
    }
    return 0.5 / zeta;
}

// c(zeta) = zeta i'(zeta) + 2 i(zeta) for the intermediate-regime kernel.
inline double intermediate_combo(double zeta, KernelFamily family) {
    if (zeta < 0.0)
        throw std::domain_error("intermediate_combo: zeta must be >= 0");
    if (family == KernelFamily::gauss)
        return constants::sqrt_2_over_pi * std::exp(-2.0 * zeta * zeta) +
               detail::erf_over_2zeta(zeta);
    if (zeta <= 1.0) {
        const double z2 = zeta * zeta;
        return z2 * (-8.0 + zeta * (7.5 - 1.4 * z2));
    }
    return 0.5 / zeta;
}

namespace dynamics_detail {

// e^{-w^2/4} underflows to exactly 0 past w ~ 54.6.
inline constexpr double w_cutoff = 56.0;

inline QuadOptions default_quad() {
    QuadOptions opt;
    opt.rel_tol = 1e-9;
    opt.abs_tol = 0.0;
    opt.max_panels = 20000;
    return opt;
}

// Derivative weight e^{-w^2/4} (2 - w^2); changes sign at w = sqrt(2).
inline double dg_weight(double w) {
    const double damp = std::exp(-0.25 * w * w);
    if (damp == 0.0) return 0.0;
    return damp * (2.0 - w * w);
}

// Breakpoint list {lo, .., hi} from candidate interior points, plus a
// geometric ladder above any point sitting deep below 1 (1/w-type kernel
// pieces need the extra resolution there).
inline std::vector<double> w_points(double lo, double hi,
                                    std::initializer_list<double> interior) {
    std::vector<double> pts{lo, hi};
    for (double p : interior) {
        if (p <= lo || p >= hi) continue;
        pts.push_back(p);
        for (double q = p * 30.0; q < 0.5 && q < hi; q *= 30.0) pts.push_back(q);
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
}

// alpha^3 int_{lo/alpha}^inf dzeta e^{-alpha^2 zeta^2/4} (2-alpha^2 zeta^2)
// / (2 zeta), in w-form: alpha^3 int_lo^inf dw e^{-w^2/4} (2-w^2) / (2w).
inline double tail_k(double alpha, double lo, const QuadOptions& opt) {
    if (lo >= w_cutoff) return 0.0;
    auto f = [](double w) {
        const double v = dg_weight(w);
        if (v == 0.0) return 0.0;
        return v / (2.0 * w);
    };
    const auto pts = w_points(lo, w_cutoff, {std::sqrt(2.0)});
    return alpha * alpha * alpha * integrate_1d(f, pts, opt).value;
}

// alpha^2 int_0^hi dw e^{-w^2/4} (2-w^2) kernel(w), kernel O(1)-bounded.
inline double bulk_k(double alpha, double hi,
                     const std::function<double(double)>& kernel,
                     const QuadOptions& opt) {
    auto f = [&kernel](double w) {
        const double v = dg_weight(w);
        if (v == 0.0) return 0.0;
        return v * kernel(w);
    };
    const auto pts = w_points(0.0, std::min(hi, w_cutoff), {std::sqrt(2.0)});
    return alpha * alpha * integrate_1d(f, pts, opt).value;
}

} // namespace dynamics_detail

// The k-decomposition of g' over the kernel branches. k2 and k3 carry the
// lattice-tail pieces and enter g' multiplied by N sigma^3/R^3; k0 enters
// multiplied by (12/5) beta_0. All six are pure numbers.
struct KIntegrals {
    double k0 = 0.0;   // constant piece over [0, varrho], closed form
    double k1 = 0.0;   // sphere polynomial piece over [0, 1]
    double k1g = 0.0;  // Gaussian self piece over [0, inf)
    double k2 = 0.0;   // lattice polynomial piece over [0, varrho]
    double k3 = 0.0;   // lattice 1/(2 zeta) tail over [varrho, inf)
    double k4 = 0.0;   // sphere 1/(2 zeta) tail over [1, inf)
};

inline KIntegrals k_integrals(double alpha, double varrho,
                              const QuadOptions& opt = dynamics_detail::default_quad()) {
    if (!(alpha > 0.0)) throw std::domain_error("k_integrals: alpha must be > 0");
    if (!(varrho >= 1.0)) throw std::domain_error("k_integrals: varrho must be >= 1");
    using namespace dynamics_detail;

    KIntegrals k;
    const double av = alpha * varrho;
    const double e0 = std::exp(-0.25 * av * av);
    k.k0 = 2.0 * alpha * alpha * alpha * varrho * e0;

    k.k1 = bulk_k(alpha, alpha,
                  [alpha](double w) {
                      const double z = w / alpha;
                      return z * z * (-8.0 + z * (7.5 - 1.4 * z * z));
                  },
                  opt);
    k.k1g = bulk_k(alpha, w_cutoff,
                   [alpha](double w) {
                       return intermediate_combo(w / alpha, KernelFamily::gauss);
                   },
                   opt);
    k.k2 = bulk_k(alpha, av,
                  [alpha, varrho](double w) {
                      const double z = w / alpha;
                      const double zr = z / varrho;
                      return z * z * (-8.0 + zr * (7.5 - 1.4 * zr * zr));
                  },
                  opt);
    k.k3 = varrho * varrho * varrho * tail_k(alpha, av, opt);
    k.k4 = tail_k(alpha, alpha, opt);
    return k;
}

// g'(u1) expressed through alpha, intermediate-regime form: the k0, k2,
// and k3 pieces are dropped (exponentially small respectively
// beta-suppressed for alpha varrho >> 1). Units 1/s^2.
inline double g_prime_of_alpha(double alpha, const Material& mat, KernelFamily family,
                               const QuadOptions& opt = dynamics_detail::default_quad()) {
    if (!(alpha > 0.0))
        throw std::domain_error("g_prime_of_alpha: alpha must be > 0");
    mat.validate();
    using namespace dynamics_detail;
    const double s = mat.sigma;
    const double pref =
        constants::G * mat.m_atom / (16.0 * std::sqrt(constants::pi) * s * s * s);
    if (family == KernelFamily::gauss) {
        const double k1g = bulk_k(alpha, w_cutoff,
                                  [alpha](double w) {
                                      return intermediate_combo(w / alpha,
                                                                KernelFamily::gauss);
                                  },
                                  opt);
        return -pref * k1g;
    }
    const double k1 = bulk_k(alpha, alpha,
                             [alpha](double w) {
                                 const double z = w / alpha;
                                 return z * z * (-8.0 + z * (7.5 - 1.4 * z * z));
                             },
                             opt);
    return -pref * (k1 + tail_k(alpha, alpha, opt));
}

inline double alpha_of_width(double u1, double sigma) {
    if (!(u1 > 0.0)) throw std::domain_error("alpha_of_width: u1 must be > 0");
    return 2.0 * sigma / std::sqrt(u1);
}

// g'(u1) in the intermediate-regime form, from the physical width. 1/s^2.
inline double g_prime(double u1, const CrystalParams& params, KernelFamily family,
                      const QuadOptions& opt = dynamics_detail::default_quad()) {
    return g_prime_of_alpha(alpha_of_width(u1, params.material.sigma),
                            params.material, family, opt);
}

// g' assembled from the full k-decomposition, keeping every branch piece.
// Bridges the intermediate form (against which it converges as
// alpha varrho grows) to finite-sphere corrections. 1/s^2.
inline double g_prime_from_k(double alpha, const CrystalParams& params,
                             KernelFamily family,
                             const QuadOptions& opt = dynamics_detail::default_quad()) {
    params.material.validate();
    const KIntegrals k = k_integrals(alpha, params.varrho, opt);
    const double s = params.material.sigma;
    const double pref = constants::G * params.material.m_atom /
                        (16.0 * std::sqrt(constants::pi) * s * s * s);
    const double lattice = params.beta(2) * (k.k2 + k.k3);
    const double common = 2.4 * params.beta(0) * k.k0 + lattice;
    if (family == KernelFamily::gauss) return -pref * (common + k.k1g);
    return -pref * (common + k.k1 + k.k4);
}

// Wide-regime asymptote of g'(u1), valid for widths far beyond the sphere
// radius. Returns the asymptotic expression unconditionally and appends a
// warning when called outside its regime. 1/s^2.
inline double g_prime_wide(double u1, const CrystalParams& params,
                           std::vector<std::string>* warnings = nullptr) {
    if (!(u1 > 0.0)) throw std::domain_error("g_prime_wide: u1 must be > 0");
    params.material.validate();
    const double sigma = params.material.sigma;
    const double width = std::sqrt(u1);
    if (warnings != nullptr) {
        if (width < 2.0 * params.R)
            warnings->push_back(
                "wide asymptote outside its regime: sqrt(u1) below 2 R");
        else if (!(u1 > sigma * sigma))
            warnings->push_back("wide asymptote needs u1 > sigma^2");
    }
    const double pref = 3.0 * constants::G * params.material.m_atom * params.m /
                        (16.0 * std::pow(constants::pi, 1.5) *
                         params.material.bulk_density * sigma * sigma * sigma);
    return -pref * std::log(u1 / (sigma * sigma)) / (u1 * width);
}

// g(alpha) itself, intermediate-regime kernel: the coupling entering the
// u3 equation. Units m^2/s^2.
inline double g_of_alpha(double alpha, const Material& mat, KernelFamily family,
                         const QuadOptions& opt = dynamics_detail::default_quad()) {
    if (!(alpha > 0.0)) throw std::domain_error("g_of_alpha: alpha must be > 0");
    mat.validate();
    using namespace dynamics_detail;
    auto f = [alpha, family](double w) {
        const double damp = std::exp(-0.25 * w * w);
        if (damp == 0.0) return 0.0;
        return damp * intermediate_combo(w / alpha, family);
    };
    const auto pts = w_points(0.0, w_cutoff, {alpha});
    const double integral = integrate_1d(f, pts, opt).value;
    return constants::G * mat.m_atom /
           (std::sqrt(constants::pi) * mat.sigma) * integral;
}

// <V_g>: expectation of the self-gravitational potential in the Gaussian
// state of width alpha, intermediate-regime kernel. Units J.
inline double mean_grav_energy(double alpha, const CrystalParams& params,
                               KernelFamily family,
                               const QuadOptions& opt = dynamics_detail::default_quad()) {
    if (!(alpha > 0.0))
        throw std::domain_error("mean_grav_energy: alpha must be > 0");
    params.material.validate();
    using namespace dynamics_detail;
    auto f = [alpha, family](double w) {
        const double damp = std::exp(-0.25 * w * w);
        if (damp == 0.0) return 0.0;
        return damp * intermediate_kernel(w / alpha, family);
    };
    const auto pts = w_points(0.0, w_cutoff, {alpha});
    const double integral = integrate_1d(f, pts, opt).value;
    return -constants::G * params.m * params.material.m_atom /
           (std::sqrt(constants::pi) * params.material.sigma) * integral;
}

struct MomentState {
    double t = 0.0;       // s
    double x_mean = 0.0;  // m
    double p_mean = 0.0;  // kg m/s
    double u1 = 0.0;      // var x, m^2
    double u2 = 0.0;      // var(p)/m^2 + <V_g>/m, m^2/s^2
    double u3 = 0.0;      // (<xp+px> - 2<x><p>)/m, m^2/s
};

struct GaussianTrapRun {
    CrystalParams params;
    double omega0 = 0.0;  // rad/s
    KernelFamily family = KernelFamily::sphere;
    double kappa = 1.0;   // initial width is kappa x ground-state width
    double x0 = 0.0;      // m
    double p0 = 0.0;      // kg m/s
    double t_end = 0.0;   // s
    double tolerance = 1e-9;     // ODE relative tolerance
    int sample_count = 2048;
    double gravity_scale = 1.0;  // multiplies G; 0 switches gravity off
};

// Thrown when trajectory integration stops early; carries the samples
// reached before the failure.
class EvolveError : public std::runtime_error {
public:
    std::vector<MomentState> partial;

    EvolveError(const std::string& what, std::vector<MomentState> samples)
        : std::runtime_error(what), partial(std::move(samples)) {}
};

namespace dynamics_detail {

// g(alpha) tabulated against ln alpha and interpolated with a cardinal
// cubic spline: quadrature inside every ODE step would be wasteful. The
// table is verified against direct quadrature at 20 probe points to a
// 1e-4 relative budget and refined by grid doubling on failure.
struct GTable {
    boost::math::interpolators::cardinal_cubic_b_spline<double> spline;
    double lo, hi;

    double operator()(double log_alpha) const {
        return spline(std::clamp(log_alpha, lo, hi));
    }
};

inline GTable build_g_table(double log_alpha_lo, double log_alpha_hi,
                            const Material& mat, KernelFamily family,
                            double scale) {
    const QuadOptions quad = default_quad();
    int n = 257;
    for (int refinement = 0;; ++refinement) {
        const double step = (log_alpha_hi - log_alpha_lo) / (n - 1);
        std::vector<double> values(n);
        for (int i = 0; i < n; ++i)
            values[i] =
                scale * g_of_alpha(std::exp(log_alpha_lo + i * step), mat, family, quad);
        double vmax = 0.0;
        for (double v : values) vmax = std::max(vmax, std::fabs(v));

        GTable table{boost::math::interpolators::cardinal_cubic_b_spline<double>(
                         values.data(), values.size(), log_alpha_lo, step),
                     log_alpha_lo, log_alpha_hi};
        bool ok = true;
        for (int j = 0; j < 20 && ok; ++j) {
            const double L =
                log_alpha_lo + (j + 0.5) / 20.0 * (log_alpha_hi - log_alpha_lo);
            const double direct = scale * g_of_alpha(std::exp(L), mat, family, quad);
            ok = std::fabs(table(L) - direct) <=
                 1e-4 * (std::fabs(direct) + 1e-3 * vmax);
        }
        if (ok) return table;
        if (refinement == 4)
            throw std::runtime_error(
                "evolve_moments: g interpolation table failed its error budget");
        n = 2 * (n - 1) + 1;
    }
}

} // namespace dynamics_detail

// Integrates the moment system over [0, t_end] and returns sample_count
// states on a uniform time grid. Internally the system runs in scaled
// variables v1 = u1/s_u, v2 = u2/(s_u omega0^2), v3 = u3/(s_u omega0),
// tau = omega0 t, with s_u = hbar/(2 m omega0) the ground-state width
// squared; first moments are attached in closed form.
inline std::vector<MomentState> evolve_moments(const GaussianTrapRun& run) {
    run.params.material.validate();
    if (!(run.params.m > 0.0))
        throw std::domain_error("evolve_moments: total mass must be > 0");
    if (!(run.omega0 > 0.0))
        throw std::domain_error("evolve_moments: omega0 must be > 0");
    if (!(run.kappa > 0.0))
        throw std::domain_error("evolve_moments: kappa must be > 0");
    if (!(run.t_end > 0.0))
        throw std::domain_error("evolve_moments: t_end must be > 0");
    if (!(run.tolerance > 0.0))
        throw std::domain_error("evolve_moments: tolerance must be > 0");
    if (run.sample_count < 2)
        throw std::domain_error("evolve_moments: need at least two samples");
    if (run.gravity_scale < 0.0)
        throw std::domain_error("evolve_moments: gravity_scale must be >= 0");

    const Material& mat = run.params.material;
    const double m = run.params.m;
    const double omega0 = run.omega0;
    const double s_u = constants::hbar / (2.0 * m * omega0);
    const double alpha_ground = 2.0 * mat.sigma / std::sqrt(s_u);
    const double kappa2 = run.kappa * run.kappa;
    const double v_lo = std::min(kappa2, 1.0 / kappa2);
    const double v_hi = std::max(kappa2, 1.0 / kappa2);

    const bool with_gravity = run.gravity_scale > 0.0;
    std::optional<dynamics_detail::GTable> g_table;
    if (with_gravity) {
        // cover twice the gravity-free width swing on each side
        const double lo = std::log(alpha_ground) - 0.5 * std::log(4.0 * v_hi);
        const double hi = std::log(alpha_ground) - 0.5 * std::log(0.25 * v_lo);
        g_table = dynamics_detail::build_g_table(
            lo, hi, mat, run.family,
            run.gravity_scale / (s_u * omega0 * omega0));
    }

    const double log_alpha_ground = std::log(alpha_ground);
    const double v_floor = 1e-6 * v_lo;
    auto rhs = [&](double, const std::array<double, 3>& y,
                   std::array<double, 3>& dy) {
        double g_hat = 0.0;
        if (with_gravity) {
            const double v1 = std::max(y[0], v_floor);
            g_hat = (*g_table)(log_alpha_ground - 0.5 * std::log(v1));
        }
        dy[0] = y[2];
        dy[1] = -y[2];
        dy[2] = -2.0 * y[0] + 2.0 * y[1] + g_hat;
    };

    std::array<double, 3> y0{kappa2, 1.0 / kappa2, 0.0};
    if (with_gravity)
        y0[1] += run.gravity_scale *
                 mean_grav_energy(alpha_ground / run.kappa, run.params, run.family) /
                 (m * s_u * omega0 * omega0);

    const double tau_end = omega0 * run.t_end;
    std::vector<double> taus(run.sample_count);
    for (int i = 0; i < run.sample_count; ++i)
        taus[i] = tau_end * (static_cast<double>(i) / (run.sample_count - 1));

    auto to_state = [&](const OdeSample<3>& s) {
        MomentState out;
        out.t = s.t / omega0;
        out.x_mean = run.x0 * std::cos(s.t) + run.p0 / (m * omega0) * std::sin(s.t);
        out.p_mean = run.p0 * std::cos(s.t) - m * omega0 * run.x0 * std::sin(s.t);
        out.u1 = s_u * s.y[0];
        out.u2 = s_u * omega0 * omega0 * s.y[1];
        out.u3 = s_u * omega0 * s.y[2];
        return out;
    };

    OdeOptions opt;
    opt.rel_tol = run.tolerance;
    opt.abs_tol = 1e-4 * run.tolerance;
    std::vector<OdeSample<3>> samples;
    try {
        samples = integrate_dopri5(rhs, y0, 0.0, tau_end, taus, opt);
    } catch (const OdeError<3>& e) {
        std::vector<MomentState> partial;
        partial.reserve(e.partial.size());
        for (const auto& s : e.partial) partial.push_back(to_state(s));
        throw EvolveError(std::string("evolve_moments: ") + e.what(),
                          std::move(partial));
    }
    std::vector<MomentState> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back(to_state(s));
    return out;
}

struct DephasingResult {
    double omega_internal = 0.0;  // rad/s
    double phase_lag = 0.0;       // (omega_internal - omega0) * t_end, rad
    int crossing_count = 0;
};

namespace dynamics_detail {

// Crossing time of y(t) = 0 inside [t[i], t[i+1]] from the quadratic
// through three neighbouring samples; falls back to the linear estimate
// when the quadratic has no root in the bracket.
inline double crossing_time(const std::vector<double>& t,
                            const std::vector<double>& y, std::size_t i) {
    const double linear =
        t[i] - y[i] * (t[i + 1] - t[i]) / (y[i + 1] - y[i]);
    const std::size_t a = i > 0 ? i - 1 : i;
    const double d1 = (y[a + 1] - y[a]) / (t[a + 1] - t[a]);
    const double d2 =
        ((y[a + 2] - y[a + 1]) / (t[a + 2] - t[a + 1]) - d1) / (t[a + 2] - t[a]);
    // q(t) = y_a + d1 (t - t_a) + d2 (t - t_a)(t - t_{a+1})
    const double qa = d2;
    const double qb = d1 - d2 * (t[a] + t[a + 1]);
    const double qc = y[a] - d1 * t[a] + d2 * t[a] * t[a + 1];
    if (qa == 0.0) return linear;
    const double disc = qb * qb - 4.0 * qa * qc;
    if (disc < 0.0) return linear;
    const double root = std::sqrt(disc);
    for (double r : {(-qb - root) / (2.0 * qa), (-qb + root) / (2.0 * qa)})
        if (r >= t[i] && r <= t[i + 1]) return r;
    return linear;
}

} // namespace dynamics_detail

// Internal width-oscillation frequency and accumulated phase lag against
// the bare trap, from the upward mid-level crossings of u1(t). The width
// oscillates at twice the internal frequency, so successive crossings are
// spaced by pi/omega_internal.
inline DephasingResult extract_dephasing(const std::vector<MomentState>& trajectory,
                                         double omega0) {
    if (!(omega0 > 0.0))
        throw std::domain_error("extract_dephasing: omega0 must be > 0");
    if (trajectory.size() < 8)
        throw std::domain_error("extract_dephasing: trajectory too short");
    const double duration = trajectory.back().t - trajectory.front().t;
    if (!(duration >= 3.0 * constants::pi / omega0))
        throw std::domain_error(
            "extract_dephasing: trajectory spans fewer than three "
            "width-oscillation periods");

    const std::size_t n = trajectory.size();
    std::vector<double> t(n), y(n);
    double lo = trajectory[0].u1, hi = trajectory[0].u1;
    for (std::size_t i = 0; i < n; ++i) {
        t[i] = trajectory[i].t;
        y[i] = trajectory[i].u1;
        lo = std::min(lo, y[i]);
        hi = std::max(hi, y[i]);
    }
    if (!(hi - lo > 1e-6 * hi))
        throw std::domain_error(
            "extract_dephasing: width oscillation amplitude too small");
    const double mid = 0.5 * (lo + hi);
    for (double& v : y) v -= mid;

    std::vector<double> crossings;
    for (std::size_t i = 0; i + 2 < n; ++i)
        if (y[i] < 0.0 && y[i + 1] >= 0.0)
            crossings.push_back(dynamics_detail::crossing_time(t, y, i));
    if (crossings.size() < 4)
        throw std::domain_error(
            "extract_dephasing: fewer than four upward crossings");

    // least-squares slope of crossing time against crossing index
    const double kbar = 0.5 * (crossings.size() - 1);
    double num = 0.0, den = 0.0, cbar = 0.0;
    for (double c : crossings) cbar += c;
    cbar /= static_cast<double>(crossings.size());
    for (std::size_t k = 0; k < crossings.size(); ++k) {
        const double dk = static_cast<double>(k) - kbar;
        num += dk * (crossings[k] - cbar);
        den += dk * dk;
    }
    const double period = num / den;

    DephasingResult res;
    res.omega_internal = constants::pi / period;
    res.phase_lag = (res.omega_internal - omega0) * trajectory.back().t;
    res.crossing_count = static_cast<int>(crossings.size());
    return res;
}

struct OmegaSnRow {
    double alpha = 0.0;
    double omega_sn_sq = 0.0;  // -g'/4, s^-2
    std::string error;         // empty on success
};

struct OmegaSnSweep {
    std::vector<OmegaSnRow> rows;
};

// omega_SN^2(alpha) = -g'/4 over an alpha grid; the gravitational
// frequency correction plateaus at the narrow-limit values for large
// alpha. Grid points run in parallel and land in grid order.
inline OmegaSnSweep sweep_omega_sn(const std::vector<double>& alphas,
                                   const Material& mat, KernelFamily family,
                                   const QuadOptions& opt = dynamics_detail::default_quad()) {
    if (alphas.empty()) throw std::invalid_argument("sweep_omega_sn: empty grid");
    mat.validate();
    OmegaSnSweep out;
    out.rows.assign(alphas.size(), OmegaSnRow{});
    parallel_for(alphas.size(), [&](std::size_t i) {
        OmegaSnRow& row = out.rows[i];
        row.alpha = alphas[i];
        try {
            row.omega_sn_sq = -0.25 * g_prime_of_alpha(row.alpha, mat, family, opt);
        } catch (const std::exception& e) {
            row.error = e.what();
        }
    });
    return out;
}

} // namespace sntrap
