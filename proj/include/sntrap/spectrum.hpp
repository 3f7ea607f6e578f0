#pragma once

// First-order gravitational corrections to the trap spectrum: the level
// functions f_n(alpha, varrho) in every width regime, transition energies,
// and the sweep driver behind the figure tables.
//
// All level integrals are evaluated in the scaled variable w = alpha zeta:
//
//   f-piece = alpha^2 sqrt(2/pi) int_0^inf dw e^{-w^2/2} P_n(w) K(w/alpha)
//
// so the Gaussian weight and the P_n oscillations stay at O(1) scale for
// every alpha. Kernel branch points and the stationary points of P_n seed
// the quadrature breakpoints.

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sntrap/constants.hpp"
#include "sntrap/kernels.hpp"
#include "sntrap/params.hpp"
#include "sntrap/polynomials.hpp"
#include "sntrap/quadrature.hpp"
#include "sntrap/util.hpp"

namespace sntrap {

enum class Regime { full, narrow, intermediate, wide };

inline const char* regime_name(Regime r) {
    switch (r) {
        case Regime::full: return "full";
        case Regime::narrow: return "narrow";
        case Regime::intermediate: return "intermediate";
        case Regime::wide: return "wide";
    }
    return "?";
}

inline Regime parse_regime(const std::string& s) {
    if (s == "full") return Regime::full;
    if (s == "narrow") return Regime::narrow;
    if (s == "intermediate") return Regime::intermediate;
    if (s == "wide") return Regime::wide;
    throw std::invalid_argument("unknown regime '" + s +
                                "' (expected full|narrow|intermediate|wide)");
}

namespace spectrum_detail {

// Gaussian-weight support: e^{-w^2/2} underflows to exactly 0 past ~38.6,
// and every P_n (n <= 14) stays polynomially bounded there.
inline constexpr double w_cutoff = 42.0;

inline QuadOptions default_quad() {
    QuadOptions opt;
    opt.rel_tol = 1e-9;
    opt.abs_tol = 0.0;
    opt.max_panels = 20000;
    return opt;
}

// Breakpoint assembly in the w variable: P_n turning points, the kernel's
// branch points (w = alpha zeta_break), and a geometric ladder above any
// breakpoint that sits deep below 1 (1/w-type kernel tails need it).
inline std::vector<double> w_breakpoints(int n,
                                         const std::vector<double>& w_kernel_pts) {
    std::vector<double> pts{0.0, w_cutoff};
    for (double z : stationary_points(n))
        if (z > 0.0 && z < w_cutoff) pts.push_back(z);
    for (double w : w_kernel_pts) {
        if (w <= 0.0 || w >= w_cutoff) continue;
        pts.push_back(w);
        for (double g = w * 30.0; g < 0.5; g *= 30.0) pts.push_back(g);
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
}

} // namespace spectrum_detail

// Generic level integral over a dimensionless kernel given in zeta:
// alpha^2 sqrt(2/pi) int dw e^{-w^2/2} P_n(w) kernel(w/alpha).
// zeta_breakpoints mark the kernel's discontinuities or branch points.
inline QuadResult f_n_with_kernel(int n, double alpha,
                                  const std::function<double(double)>& kernel,
                                  const std::vector<double>& zeta_breakpoints = {},
                                  const QuadOptions& opt = spectrum_detail::default_quad()) {
    if (!(alpha > 0.0)) throw std::domain_error("f_n_with_kernel: alpha must be > 0");
    const EvenPolynomial& p = p_polynomial(n);
    std::vector<double> wpts;
    wpts.reserve(zeta_breakpoints.size());
    for (double z : zeta_breakpoints) wpts.push_back(alpha * z);
    const auto breakpoints = spectrum_detail::w_breakpoints(n, wpts);
    auto integrand = [&](double w) {
        const double damp = std::exp(-0.5 * w * w);
        if (damp == 0.0) return 0.0;
        return damp * p.eval(w) * kernel(w / alpha);
    };
    QuadResult r = integrate_1d(integrand, breakpoints, opt);
    const double scale = alpha * alpha * constants::sqrt_2_over_pi;
    r.value *= scale;
    r.error_estimate *= scale;
    return r;
}

// Full f_n with the constant part held separately:
//   f_n = constant + reduced,  constant = constant_coefficient * alpha^2.
// Differences between levels must be formed from the reduced parts, where
// the constant cancels identically.
struct FnParts {
    double reduced = 0.0;
    double reduced_error = 0.0;
    double constant = 0.0;

    double total() const { return reduced + constant; }
};

inline FnParts f_n_full(int n, double alpha, const KernelShape& shape,
                        KernelFamily family,
                        const QuadOptions& opt = spectrum_detail::default_quad()) {
    if (!(alpha > 0.0)) throw std::domain_error("f_n_full: alpha must be > 0");
    std::vector<double> zeta_pts{shape.varrho};
    if (family == KernelFamily::sphere) zeta_pts.push_back(1.0);
    auto kernel = [&shape, family](double zeta) {
        return i_reduced(zeta, shape, family);
    };
    const QuadResult r = f_n_with_kernel(n, alpha, kernel, zeta_pts, opt);
    FnParts parts;
    parts.reduced = r.value;
    parts.reduced_error = r.error_estimate;
    parts.constant = constant_coefficient(shape, family) * alpha * alpha;
    return parts;
}

// The varrho-independent pieces of the intermediate regime.
inline double f_n_piece_1(int n, double alpha,
                          const QuadOptions& opt = spectrum_detail::default_quad()) {
    auto kernel = [](double zeta) {
        if (zeta > 1.0) return 0.0;
        const double z2 = zeta * zeta;
        return z2 * (-2.0 + zeta * (1.5 - 0.2 * z2));
    };
    return f_n_with_kernel(n, alpha, kernel, {1.0}, opt).value;
}

inline double f_n_piece_4(int n, double alpha,
                          const QuadOptions& opt = spectrum_detail::default_quad()) {
    if (alpha >= spectrum_detail::w_cutoff) return 0.0;
    auto kernel = [](double zeta) { return zeta < 1.0 ? 0.0 : 0.5 / zeta; };
    return f_n_with_kernel(n, alpha, kernel, {1.0}, opt).value;
}

inline double f_n_piece_1g(int n, double alpha,
                           const QuadOptions& opt = spectrum_detail::default_quad()) {
    auto kernel = [](double zeta) { return detail::erf_over_2zeta_deficit(zeta); };
    return f_n_with_kernel(n, alpha, kernel, {}, opt).value;
}

// varrho-independent approximation: sphere f^(1) + f^(4), Gauss f^(1g);
// the constant f^(0) term is excluded by construction.
inline double f_n_intermediate(int n, double alpha, KernelFamily family,
                               const QuadOptions& opt = spectrum_detail::default_quad()) {
    if (!(alpha >= 0.3 && alpha <= 100.0))
        throw std::domain_error("f_n_intermediate: alpha must be in [0.3, 100]");
    if (family == KernelFamily::sphere)
        return f_n_piece_1(n, alpha, opt) + f_n_piece_4(n, alpha, opt);
    return f_n_piece_1g(n, alpha, opt);
}

inline double f_tilde_intermediate(int n1, int n2, double alpha, KernelFamily family,
                                   const QuadOptions& opt = spectrum_detail::default_quad()) {
    return f_n_intermediate(n2, alpha, family, opt) -
           f_n_intermediate(n1, alpha, family, opt);
}

// Narrow-limit asymptote of f_{n2} - f_{n1}.
inline double f_tilde_narrow(int n1, int n2, KernelFamily family) {
    const double dn = static_cast<double>(n1 - n2);
    if (family == KernelFamily::sphere) return 4.0 * dn;
    return (4.0 / 3.0) * constants::sqrt_2_over_pi * dn;
}

// Narrow-regime energy shift of level n in joules:
//   dE_n = m omega_SN^2 (-(6/5) gamma_0 sigma^2 + (n + 1/2) hbar/(m omega0))
// with the Gaussian-family constant gamma_0 -> 5/2 + (3/2) sqrt(2 pi) beta_0.
inline double energy_shift_narrow(int n, const CrystalParams& params, double omega0,
                                  KernelFamily family,
                                  bool legacy_normalization = false) {
    if (n < 0) throw std::domain_error("energy_shift_narrow: n must be >= 0");
    if (!(omega0 > 0.0))
        throw std::domain_error("energy_shift_narrow: omega0 must be > 0");
    const double wsn2 =
        sn_frequency_sq(params.material, family, legacy_normalization);
    const double sigma = params.material.sigma;
    const double gamma0 =
        family == KernelFamily::sphere
            ? params.gamma(0)
            : 2.5 + 1.5 * std::sqrt(2.0 * constants::pi) * params.beta(0);
    return params.m * wsn2 *
           (-1.2 * gamma0 * sigma * sigma +
            (n + 0.5) * constants::hbar / (params.m * omega0));
}

// Pre-factor G m_atom / (4 sigma^3 omega0^2) multiplying f-tilde in the
// transition energy (units of hbar omega0).
inline double transition_prefactor(const Material& mat, double omega0) {
    if (!(omega0 > 0.0))
        throw std::domain_error("transition_prefactor: omega0 must be > 0");
    return constants::G * mat.m_atom /
           (4.0 * mat.sigma * mat.sigma * mat.sigma * omega0 * omega0);
}

struct SpectrumQuery {
    double alpha = 1.0;
    CrystalParams params;
    double omega0 = 0.0;
    KernelFamily family = KernelFamily::sphere;
    Regime regime = Regime::intermediate;
    double gravity_scale = 1.0;  // test hook; 0 switches gravity off
};

struct TransitionEnergy {
    double value = 0.0;               // units of hbar omega0
    double gravitational_part = 0.0;  // the -prefactor * f-tilde term
    std::vector<std::string> warnings;
};

inline TransitionEnergy transition_energy(int n1, int n2, const SpectrumQuery& q) {
    if (n1 < 0 || n2 <= n1)
        throw std::domain_error("transition_energy: need 0 <= n1 < n2");
    if (!(q.omega0 > 0.0))
        throw std::domain_error("transition_energy: omega0 must be > 0");
    TransitionEnergy te;
    const double dn = static_cast<double>(n2 - n1);

    double grav = 0.0;
    switch (q.regime) {
        case Regime::narrow: {
            if (q.alpha < 10.0)
                te.warnings.push_back("narrow regime requested at alpha < 10");
            grav = -transition_prefactor(q.params.material, q.omega0) *
                   f_tilde_narrow(n1, n2, q.family);
            break;
        }
        case Regime::intermediate: {
            grav = -transition_prefactor(q.params.material, q.omega0) *
                   f_tilde_intermediate(n1, n2, q.alpha, q.family);
            break;
        }
        case Regime::full: {
            const KernelShape shape(q.params);
            const FnParts a = f_n_full(n1, q.alpha, shape, q.family);
            const FnParts b = f_n_full(n2, q.alpha, shape, q.family);
            grav = -transition_prefactor(q.params.material, q.omega0) *
                   (b.reduced - a.reduced);
            break;
        }
        case Regime::wide: {
            const double m = mass_for_alpha(q.params.material, q.alpha, q.omega0);
            const double validity =
                m * q.omega0 * q.params.R * q.params.R / constants::hbar;
            if (validity > 1.0)
                throw std::domain_error(
                    "semi-wide regime (sigma < width < R) is not modeled; "
                    "use full or intermediate instead");
            if (validity > 0.1)
                te.warnings.push_back(
                    "wide-regime validity marginal: m omega0 R^2 / hbar = " +
                    std::to_string(validity));
            if (q.alpha >= 1.0)
                te.warnings.push_back("wide regime requested at alpha >= 1");
            const double Fdiff = static_cast<double>(wide_coefficients(n2)) -
                                 static_cast<double>(wide_coefficients(n1));
            grav = constants::G *
                   std::sqrt(2.0 * std::pow(m, 5) /
                             (constants::pi * std::pow(constants::hbar, 3) *
                              q.omega0)) *
                   std::log(q.alpha) * Fdiff;
            break;
        }
    }
    te.gravitational_part = q.gravity_scale * grav;
    te.value = dn + te.gravitational_part;
    return te;
}

struct SweepRow {
    double alpha = 0.0;
    std::vector<double> gaps;  // f-tilde_{k,k+1} for k = 0..levels-1
    std::string error;         // empty on success
};

struct SweepResult {
    std::vector<SweepRow> rows;
    int levels = 0;
};

// f-tilde_{k,k+1}(alpha) curves over an alpha grid. Each grid point is an
// independent computation; points run in parallel and land in grid order.
inline SweepResult sweep_spectrum(const std::vector<double>& alphas, int levels,
                                  KernelFamily family, Regime regime,
                                  const KernelShape* shape = nullptr,
                                  const QuadOptions& opt = spectrum_detail::default_quad()) {
    if (alphas.empty()) throw std::invalid_argument("sweep_spectrum: empty grid");
    if (levels < 1 || levels > 13)
        throw std::invalid_argument("sweep_spectrum: levels must be in [1, 13]");
    if (regime == Regime::full && shape == nullptr)
        throw std::invalid_argument("sweep_spectrum: full regime needs a kernel shape");

    SweepResult out;
    out.levels = levels;
    out.rows.assign(alphas.size(), SweepRow{});
    parallel_for(alphas.size(), [&](std::size_t i) {
        SweepRow& row = out.rows[i];
        row.alpha = alphas[i];
        try {
            std::vector<double> f(levels + 1);
            for (int k = 0; k <= levels; ++k) {
                switch (regime) {
                    case Regime::narrow:
                        f[k] = k == 0 ? 0.0 : f_tilde_narrow(0, k, family);
                        break;
                    case Regime::intermediate:
                        f[k] = f_n_intermediate(k, row.alpha, family, opt);
                        break;
                    case Regime::full:
                        f[k] = f_n_full(k, row.alpha, *shape, family, opt).reduced;
                        break;
                    case Regime::wide:
                        f[k] = static_cast<double>(wide_coefficients(k));
                        break;
                }
            }
            row.gaps.resize(levels);
            for (int k = 0; k < levels; ++k) row.gaps[k] = f[k + 1] - f[k];
        } catch (const std::exception& e) {
            row.error = e.what();
        }
    });
    return out;
}

} // namespace sntrap
