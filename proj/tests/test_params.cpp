#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "sntrap/constants.hpp"
#include "sntrap/params.hpp"

using namespace sntrap;

TEST_CASE("built-in materials carry the tabulated data") {
    const auto& mats = builtin_materials();
    REQUIRE(mats.count("silicon") == 1);
    REQUIRE(mats.count("osmium") == 1);

    const Material& si = mats.at("silicon");
    CHECK(si.m_atom == 28.0 * constants::atomic_mass_unit);
    CHECK(si.sigma == 7.0e-12);
    CHECK(si.bulk_density == 2329.0);

    const Material& os = mats.at("osmium");
    CHECK(os.m_atom == 190.0 * constants::atomic_mass_unit);
    CHECK(os.sigma == 2.8e-12);
    CHECK(os.bulk_density == 22590.0);
}

TEST_CASE("derived geometry is self-consistent") {
    const Material si = builtin_materials().at("silicon");
    const double m = 1.0e-17;
    const double omega0 = 2.0 * constants::pi * 1.0e5;
    const DerivedParams d = derive_params(si, m, omega0);

    CHECK_THAT(d.crystal.N, Catch::Matchers::WithinRel(m / si.m_atom, 1e-14));
    // sphere of bulk density: (4 pi / 3) rho R^3 = m
    const double mass_back = 4.0 / 3.0 * constants::pi * si.bulk_density *
                             std::pow(d.crystal.R, 3);
    CHECK_THAT(mass_back, Catch::Matchers::WithinRel(m, 1e-12));
    CHECK_THAT(d.crystal.varrho,
               Catch::Matchers::WithinRel(d.crystal.R / si.sigma, 1e-14));
    // N a^3 = R^3
    CHECK_THAT(d.crystal.N * std::pow(d.crystal.a, 3),
               Catch::Matchers::WithinRel(std::pow(d.crystal.R, 3), 1e-12));
    CHECK_THAT(d.trap.alpha,
               Catch::Matchers::WithinRel(alpha_of(si, m, omega0), 1e-14));
}

TEST_CASE("beta ratios agree with direct powers at moderate size") {
    const Material si = builtin_materials().at("silicon");
    const DerivedParams d = derive_params(si, 1.0e-19, 1.0e4);
    const double ratio = si.sigma / d.crystal.R;
    for (int k : {0, 2, 3, 5}) {
        const double direct = d.crystal.N * std::pow(ratio, k + 1);
        CHECK_THAT(d.crystal.beta(k), Catch::Matchers::WithinRel(direct, 1e-12));
        CHECK_THAT(d.crystal.gamma(k),
                   Catch::Matchers::WithinRel(1.0 + direct, 1e-12));
    }
}

TEST_CASE("alpha and mass conversions invert each other") {
    const Material si = builtin_materials().at("silicon");
    const double omega0 = 2.0 * constants::pi * 300.0;
    for (double alpha : {1e-3, 0.7, 50.0, 4000.0}) {
        const double m = mass_for_alpha(si, alpha, omega0);
        CHECK_THAT(alpha_of(si, m, omega0), Catch::Matchers::WithinRel(alpha, 1e-12));
    }
}

TEST_CASE("parameter validation") {
    const Material si = builtin_materials().at("silicon");
    CHECK_THROWS_AS(derive_params(si, 0.5 * si.m_atom, 1.0e4), std::domain_error);
    CHECK_THROWS_AS(derive_params(si, -1.0, 1.0e4), std::domain_error);
    CHECK_THROWS_AS(derive_params(si, 1.0e-18, 0.0), std::domain_error);
    Material bad = si;
    bad.sigma = 0.0;
    CHECK_THROWS_AS(derive_params(bad, 1.0e-18, 1.0e4), std::domain_error);

    CHECK(parse_family("sphere") == KernelFamily::sphere);
    CHECK(parse_family("gauss") == KernelFamily::gauss);
    CHECK(parse_family("gaussian") == KernelFamily::gauss);
    CHECK_THROWS_AS(parse_family("cube"), std::invalid_argument);
}

TEST_CASE("self-gravity frequency scales") {
    const Material si = builtin_materials().at("silicon");
    const Material os = builtin_materials().at("osmium");

    const double si_sphere = sn_frequency_sq(si, KernelFamily::sphere);
    const double si_gauss = sn_frequency_sq(si, KernelFamily::gauss);
    CHECK_THAT(si_sphere, Catch::Matchers::WithinRel(9.047e-3, 1e-3));
    CHECK_THAT(si_gauss, Catch::Matchers::WithinRel(2.406e-3, 1e-3));
    CHECK_THAT(si_gauss / si_sphere,
               Catch::Matchers::WithinRel(constants::sqrt_2_over_pi / 3.0, 1e-14));

    // the legacy convention doubles the Gaussian-family value
    CHECK_THAT(sn_frequency_sq(si, KernelFamily::gauss, true),
               Catch::Matchers::WithinRel(2.0 * si_gauss, 1e-14));
    CHECK(sn_frequency_sq(si, KernelFamily::sphere, true) == si_sphere);

    // osmium is roughly two orders of magnitude stronger than silicon
    const double ratio = sn_frequency_sq(os, KernelFamily::sphere) / si_sphere;
    CHECK(ratio > 90.0);
    CHECK(ratio < 120.0);
}
