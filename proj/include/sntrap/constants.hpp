#pragma once

// Physical constants used throughout the library.
//
// All values are CODATA 2022. The digits below are the single source of
// truth for every computation and for the constants digest recorded in
// run manifests, so golden output files stay bit-stable.

#include <cstdint>
#include <string_view>

namespace sntrap {

namespace constants {

// Newtonian constant of gravitation [m^3 kg^-1 s^-2]
inline constexpr double G = 6.67430e-11;

// reduced Planck constant [J s]
inline constexpr double hbar = 1.054571817e-34;

// atomic mass unit [kg]
inline constexpr double atomic_mass_unit = 1.66053906892e-27;

inline constexpr double pi = 3.141592653589793238462643383279502884;

// sqrt(2/pi), the Gaussian-kernel normalisation that appears in nearly
// every dimensionless integral
inline constexpr double sqrt_2_over_pi = 0.7978845608028653558798921198687637;

inline constexpr double sqrt_pi = 1.7724538509055160272981674833411452;

// One line per constant, parsed by nothing, hashed into manifests.
inline constexpr std::string_view digest_source =
    "G=6.67430e-11;hbar=1.054571817e-34;u=1.66053906892e-27";

// FNV-1a 64-bit over digest_source; recorded in every *.meta file so a
// change in constants is visible as a manifest diff.
inline constexpr std::uint64_t digest() {
    std::uint64_t h = 1469598103934665603ull;
    for (char c : digest_source) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    return h;
}

} // namespace constants

inline constexpr std::string_view version = "1.0.0";

} // namespace sntrap
