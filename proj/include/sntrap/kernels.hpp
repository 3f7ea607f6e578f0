#pragma once

// Gravitational self-interaction kernels.
//
// I(d) is the potential energy (up to the factor -G) between the mass
// distribution of the microsphere and a copy of itself shifted by d.
// The crystalline substructure splits it into a self part (atoms against
// their own displaced images) and a mutual part (atoms against all other
// displaced atoms); the mutual part is the homogeneous-sphere overlap.
//
// Everything here is a pure function of its arguments and safe to call
// concurrently.

#include <cmath>
#include <stdexcept>

#include "sntrap/constants.hpp"
#include "sntrap/params.hpp"

namespace sntrap {

// Overlap integral of a homogeneous sphere of radius R and mass m with
// itself shifted by d >= 0. Units kg^2/m.
inline double sphere_overlap(double d, double R, double m) {
    if (d < 0.0 || !(R > 0.0) || !(m > 0.0))
        throw std::domain_error("sphere_overlap: negative or non-positive input");
    const double pref = m * m / R;
    if (d >= 2.0 * R) return m * m / d;
    const double q = d / (2.0 * R);
    const double q2 = q * q;
    const double q3 = q2 * q;
    return pref * (6.0 / 5.0 - 2.0 * q2 + 1.5 * q3 - 0.2 * q2 * q3);
}

// Dimensionless parameters of the crystalline kernel. Decoupled from
// CrystalParams so that pure-math sweeps can pick (varrho, N) freely.
struct KernelShape {
    double varrho = 0.0;  // R / sigma
    double N = 0.0;       // atom count (real)
    double beta0 = 0.0, beta2 = 0.0, beta3 = 0.0, beta5 = 0.0;

    KernelShape() = default;
    KernelShape(double varrho_, double N_) : varrho(varrho_), N(N_) {
        if (!(varrho >= 1.0))
            throw std::domain_error("KernelShape: varrho must be >= 1");
        if (!(N > 0.0)) throw std::domain_error("KernelShape: N must be positive");
        const double r = 1.0 / varrho;
        beta0 = N * r;
        beta2 = N * r * r * r;
        beta3 = beta2 * r;
        beta5 = beta3 * r * r;
    }
    explicit KernelShape(const CrystalParams& p) : KernelShape(p.varrho, p.N) {}

    double gamma0() const { return 1.0 + beta0; }
    double gamma2() const { return 1.0 + beta2; }
    double gamma3() const { return 1.0 + beta3; }
    double gamma5() const { return 1.0 + beta5; }
};

namespace detail {

// erf(sqrt(2) z) / (2 z) with the removable singularity filled in by its
// Taylor series for z < 1e-4 (value sqrt(2/pi) at z = 0).
inline double erf_over_2zeta(double zeta) {
    if (zeta < 1e-4) {
        const double z2 = zeta * zeta;
        // sqrt(2/pi) (1 - (2/3) z^2 + (2/5) z^4 - ...)
        return constants::sqrt_2_over_pi * (1.0 - (2.0 / 3.0) * z2 + 0.4 * z2 * z2);
    }
    return std::erf(std::sqrt(2.0) * zeta) / (2.0 * zeta);
}

// d/dz [erf(sqrt(2) z) / (2 z)], series-guarded near zero.
inline double erf_over_2zeta_prime(double zeta) {
    if (zeta < 1e-4) {
        const double z2 = zeta * zeta;
        return constants::sqrt_2_over_pi * (-(4.0 / 3.0) * zeta + 1.6 * z2 * zeta);
    }
    const double e = std::exp(-2.0 * zeta * zeta);
    // derivative of erf(sqrt(2) z)/(2 z):
    //   sqrt(2/pi) e^{-2 z^2} / z - erf(sqrt(2) z)/(2 z^2)
    return constants::sqrt_2_over_pi * e / zeta -
           std::erf(std::sqrt(2.0) * zeta) / (2.0 * zeta * zeta);
}

// erf(sqrt(2) z)/(2 z) - sqrt(2/pi): the zero-mean part of the Gaussian
// self kernel. Computed by series below z = 0.02 where the direct
// subtraction loses digits.
inline double erf_over_2zeta_deficit(double zeta) {
    if (zeta < 0.02) {
        const double z2 = zeta * zeta;
        return constants::sqrt_2_over_pi * z2 *
               (-(2.0 / 3.0) + z2 * (0.4 - z2 * (4.0 / 21.0)));
    }
    return erf_over_2zeta(zeta) - constants::sqrt_2_over_pi;
}

} // namespace detail

// i(zeta, varrho): the dimensionless kernel, zeta = d / (2 sigma).
//
// sphere branches: [0,1], [1,varrho], [varrho,inf)
// gauss branches:  [0,varrho], [varrho,inf)
inline double i_dimensionless(double zeta, const KernelShape& k, KernelFamily family) {
    if (zeta < 0.0) throw std::domain_error("i_dimensionless: zeta must be >= 0");
    const double z2 = zeta * zeta;
    const double z3 = z2 * zeta;
    const double z5 = z3 * z2;
    if (family == KernelFamily::sphere) {
        if (zeta <= 1.0)
            return 1.2 * k.gamma0() - 2.0 * k.gamma2() * z2 +
                   1.5 * k.gamma3() * z3 - 0.2 * k.gamma5() * z5;
        if (zeta <= k.varrho)
            return 0.5 / zeta + 1.2 * k.beta0 - 2.0 * k.beta2 * z2 +
                   1.5 * k.beta3 * z3 - 0.2 * k.beta5 * z5;
        return (k.N + 1.0) / (2.0 * zeta);
    }
    if (zeta <= k.varrho)
        return detail::erf_over_2zeta(zeta) + 1.2 * k.beta0 -
               2.0 * k.beta2 * z2 + 1.5 * k.beta3 * z3 - 0.2 * k.beta5 * z5;
    return (k.N + std::erf(std::sqrt(2.0) * zeta)) / (2.0 * zeta);
}

// d/dzeta of i(zeta, varrho). At a branch point the one-sided derivative
// of the inner branch is returned; the kernels are C^1-mismatched only on
// that measure-zero set and every integral is insensitive to the choice.
inline double i_prime(double zeta, const KernelShape& k, KernelFamily family) {
    if (zeta < 0.0) throw std::domain_error("i_prime: zeta must be >= 0");
    const double z2 = zeta * zeta;
    const double z4 = z2 * z2;
    if (family == KernelFamily::sphere) {
        if (zeta <= 1.0)
            return -4.0 * k.gamma2() * zeta + 4.5 * k.gamma3() * z2 -
                   k.gamma5() * z4;
        if (zeta <= k.varrho)
            return -0.5 / z2 - 4.0 * k.beta2 * zeta + 4.5 * k.beta3 * z2 -
                   k.beta5 * z4;
        return -(k.N + 1.0) / (2.0 * z2);
    }
    if (zeta <= k.varrho)
        return detail::erf_over_2zeta_prime(zeta) - 4.0 * k.beta2 * zeta +
               4.5 * k.beta3 * z2 - k.beta5 * z4;
    // (N + erf(sqrt(2) zeta)) / (2 zeta), zeta > varrho >= 1
    const double e = std::exp(-2.0 * z2);
    return constants::sqrt_2_over_pi * e / zeta -
           (k.N + std::erf(std::sqrt(2.0) * zeta)) / (2.0 * z2);
}

// c(zeta) = zeta i'(zeta, varrho) + 2 i(zeta, varrho), the combination
// driving the width dynamics. Written out per branch (not composed from
// i and i_prime) so that the large-N cancellations stay exact.
inline double dynamics_combo(double zeta, const KernelShape& k, KernelFamily family) {
    if (zeta < 0.0) throw std::domain_error("dynamics_combo: zeta must be >= 0");
    const double z2 = zeta * zeta;
    const double z3 = z2 * zeta;
    const double z5 = z3 * z2;
    if (family == KernelFamily::sphere) {
        if (zeta <= 1.0)
            return 2.4 * k.gamma0() - 8.0 * k.gamma2() * z2 +
                   7.5 * k.gamma3() * z3 - 1.4 * k.gamma5() * z5;
        if (zeta <= k.varrho)
            return 0.5 / zeta + 2.4 * k.beta0 - 8.0 * k.beta2 * z2 +
                   7.5 * k.beta3 * z3 - 1.4 * k.beta5 * z5;
        return (k.N + 1.0) / (2.0 * zeta);
    }
    // zeta d/dz[erf(sqrt(2)z)/(2z)] + 2 erf(sqrt(2)z)/(2z)
    //   = sqrt(2/pi) e^{-2 z^2} + erf(sqrt(2)z)/(2z)
    const double self = constants::sqrt_2_over_pi * std::exp(-2.0 * z2) +
                        detail::erf_over_2zeta(zeta);
    if (zeta <= k.varrho)
        return self + 2.4 * k.beta0 - 8.0 * k.beta2 * z2 +
               7.5 * k.beta3 * z3 - 1.4 * k.beta5 * z5;
    return self + k.N / (2.0 * zeta);
}

// The kernel's separable constant: the coefficient of the large
// n-independent spectral contribution. It multiplies exactly the constant
// term of the inner-branch expansion once gamma_0 is split as 1 + beta_0.
inline double constant_coefficient(const KernelShape& k, KernelFamily family) {
    const double c = 1.2 * k.beta0;
    return family == KernelFamily::gauss ? c + constants::sqrt_2_over_pi : c;
}

// i(zeta) - constant_coefficient, with the subtraction carried out
// symbolically per branch so the O(1) remainder never suffers the
// beta_0-sized cancellation.
inline double i_reduced(double zeta, const KernelShape& k, KernelFamily family) {
    if (zeta < 0.0) throw std::domain_error("i_reduced: zeta must be >= 0");
    const double z2 = zeta * zeta;
    const double z3 = z2 * zeta;
    const double z5 = z3 * z2;
    const double beta_poly = -2.0 * k.beta2 * z2 + 1.5 * k.beta3 * z3 -
                             0.2 * k.beta5 * z5;
    if (family == KernelFamily::sphere) {
        if (zeta <= 1.0)
            return 1.2 - 2.0 * z2 + 1.5 * z3 - 0.2 * z5 + beta_poly;
        if (zeta <= k.varrho) return 0.5 / zeta + beta_poly;
        return (k.N + 1.0) / (2.0 * zeta) - 1.2 * k.beta0;
    }
    if (zeta <= k.varrho) return detail::erf_over_2zeta_deficit(zeta) + beta_poly;
    return (k.N + std::erf(std::sqrt(2.0) * zeta)) / (2.0 * zeta) - 1.2 * k.beta0 -
           constants::sqrt_2_over_pi;
}

// Dimensional crystalline kernel I(d) [kg^2/m]; d >= 0, zeta = d/(2 sigma).
struct KernelModel {
    KernelFamily family = KernelFamily::sphere;
    CrystalParams params;
    KernelShape shape;

    KernelModel(KernelFamily f, const CrystalParams& p)
        : family(f), params(p), shape(p) {}

    double operator()(double d) const {
        if (d < 0.0) throw std::domain_error("kernel: d must be >= 0");
        const double zeta = d / (2.0 * params.material.sigma);
        const double pref =
            params.m * params.m / (params.N * params.material.sigma);
        return pref * i_dimensionless(zeta, shape, family);
    }
};

inline double crystal_kernel(double d, const KernelModel& model) {
    return model(d);
}

} // namespace sntrap
