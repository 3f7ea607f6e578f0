#pragma once

// Material data, derived crystal geometry, and the dimensionless
// parameters shared by every other module.

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

#include "sntrap/constants.hpp"

namespace sntrap {

// Atomic mass distribution family of the microsphere's constituents.
enum class KernelFamily { sphere, gauss };

inline const char* family_name(KernelFamily f) {
    return f == KernelFamily::sphere ? "sphere" : "gauss";
}

inline KernelFamily parse_family(const std::string& s) {
    if (s == "sphere") return KernelFamily::sphere;
    if (s == "gauss" || s == "gaussian") return KernelFamily::gauss;
    throw std::invalid_argument("unknown kernel family: " + s);
}

struct Material {
    std::string name;
    double m_atom;        // single-atom mass [kg]
    double sigma;         // atomic localisation length [m]
    double bulk_density;  // mass density [kg/m^3]

    void validate() const {
        if (!(m_atom > 0.0) || !(sigma > 0.0) || !(bulk_density > 0.0))
            throw std::domain_error("material '" + name +
                                    "': all fields must be strictly positive");
    }
};

// Built-in presets. Bulk densities are configuration data from standard
// material tables (they do not follow from anything else in the model);
// sigma values are few-kelvin localisation lengths.
inline const std::map<std::string, Material>& builtin_materials() {
    static const std::map<std::string, Material> table = {
        {"silicon", {"silicon", 28.0 * constants::atomic_mass_unit, 7.0e-12, 2329.0}},
        {"osmium", {"osmium", 190.0 * constants::atomic_mass_unit, 2.8e-12, 22590.0}},
    };
    return table;
}

// Crystal geometry derived from (material, total mass).
//
// N is kept as a real number: it only ever enters through the ratios
// beta_k, so no rounding to an integer count is performed.
struct CrystalParams {
    Material material;
    double m = 0.0;       // total mass [kg]
    double R = 0.0;       // sphere radius [m]
    double N = 0.0;       // atom count (real)
    double a = 0.0;       // lattice spacing [m]
    double varrho = 0.0;  // R / sigma

    // beta_k = N (sigma/R)^(k+1), evaluated in logs so that N up to 1e20
    // cannot overflow intermediate powers.
    double beta(int k) const {
        return std::exp(std::log(N) + static_cast<double>(k + 1) *
                                          (std::log(material.sigma) - std::log(R)));
    }
    double gamma(int k) const { return 1.0 + beta(k); }
};

struct TrapContext {
    double omega0 = 0.0;  // trap angular frequency [rad/s]
    double alpha = 0.0;   // 2 sigma sqrt(m omega0 / hbar)
    double mu = 1.0;      // transverse-to-longitudinal ratio (axial use)
};

inline double alpha_of(const Material& mat, double m, double omega0) {
    return 2.0 * mat.sigma * std::sqrt(m * omega0 / constants::hbar);
}

// Total mass that realises a given width parameter alpha at trap
// frequency omega0 (inverse of alpha_of).
inline double mass_for_alpha(const Material& mat, double alpha, double omega0) {
    return constants::hbar * alpha * alpha /
           (4.0 * mat.sigma * mat.sigma * omega0);
}

struct DerivedParams {
    CrystalParams crystal;
    TrapContext trap;
};

inline DerivedParams derive_params(const Material& mat, double m, double omega0) {
    mat.validate();
    if (!(m > 0.0) || !(omega0 > 0.0))
        throw std::domain_error("derive_params: mass and omega0 must be positive");
    if (m < mat.m_atom)
        throw std::domain_error("derive_params: total mass below one atom");

    CrystalParams c;
    c.material = mat;
    c.m = m;
    c.N = m / mat.m_atom;
    c.R = std::cbrt(3.0 * m / (4.0 * constants::pi * mat.bulk_density));
    c.varrho = c.R / mat.sigma;
    // N a^3 = R^3, the cube-splitting count behind beta_k
    c.a = c.R / std::cbrt(c.N);

    TrapContext t;
    t.omega0 = omega0;
    t.alpha = alpha_of(mat, m, omega0);
    return {c, t};
}

// Characteristic self-gravity frequency squared [s^-2].
//
// sphere: G m_atom / sigma^3
// gauss:  sqrt(2/pi) G m_atom / (3 sigma^3)
//
// legacy_normalization doubles the Gaussian value (the convention of
// earlier work that differs by sqrt(2) in the frequency); default off.
inline double sn_frequency_sq(const Material& mat, KernelFamily family,
                              bool legacy_normalization = false) {
    mat.validate();
    const double base = constants::G * mat.m_atom /
                        (mat.sigma * mat.sigma * mat.sigma);
    if (family == KernelFamily::sphere) return base;
    double w = constants::sqrt_2_over_pi * base / 3.0;
    if (legacy_normalization) w *= 2.0;
    return w;
}

} // namespace sntrap
