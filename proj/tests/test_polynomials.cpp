#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <random>
#include <thread>
#include <vector>

#include "sntrap/constants.hpp"
#include "sntrap/polynomials.hpp"
#include "sntrap/quadrature.hpp"

using namespace sntrap;

namespace {

// Independent oracle: the defining Gaussian-weighted integral of P_n,
//   P_n(z) = e^{-z^2/2} / (sqrt(2 pi) (2^n n!)^2) *
//            int dxi e^{-2 xi^2} H_n(xi)^2 [ e^{ 2 z xi} H_n(xi - z)^2
//                                          + e^{-2 z xi} H_n(xi + z)^2 ],
// evaluated by adaptive quadrature with no algebraic shortcuts.
double p_defining_integral(int n, double z) {
    const HermitePolynomial h = hermite(n);
    auto integrand = [&](double xi) {
        const double base = std::exp(-2.0 * xi * xi);
        if (base == 0.0) return 0.0;
        const double hn = h.eval(xi);
        const double hm = h.eval(xi - z);
        const double hp = h.eval(xi + z);
        return base * hn * hn *
               (std::exp(2.0 * z * xi) * hm * hm +
                std::exp(-2.0 * z * xi) * hp * hp);
    };
    const double L = std::abs(z) + 9.0;
    QuadOptions opt;
    opt.rel_tol = 1e-12;
    const QuadResult r =
        integrate_1d(integrand, std::vector<double>{-L, -z, 0.0, z, L}, opt);

    double fact = 1.0;
    for (int k = 1; k <= n; ++k) fact *= k;
    const double norm = std::ldexp(fact, n);  // 2^n n!
    return std::exp(-0.5 * z * z) / (std::sqrt(2.0 * constants::pi) * norm * norm) *
           r.value;
}

} // namespace

TEST_CASE("hermite polynomials match the standard values and recurrence") {
    CHECK(hermite(0).coeffs == std::vector<BigInt>{1});
    CHECK(hermite(1).coeffs == std::vector<BigInt>{0, 2});
    CHECK(hermite(2).coeffs == std::vector<BigInt>{-2, 0, 4});
    CHECK(hermite(3).coeffs == std::vector<BigInt>{0, -12, 0, 8});
    CHECK(hermite(4).coeffs == std::vector<BigInt>{12, 0, -48, 0, 16});

    std::mt19937 rng(7101);
    std::uniform_real_distribution<double> xdist(-3.0, 3.0);
    for (int n = 0; n <= 8; ++n) {
        const HermitePolynomial h = hermite(n);
        for (int trial = 0; trial < 10; ++trial) {
            const double x = xdist(rng);
            const double ref = std::hermite(static_cast<unsigned>(n), x);
            CHECK_THAT(h.eval(x), Catch::Matchers::WithinRel(ref, 1e-12) ||
                                      Catch::Matchers::WithinAbs(0.0, 1e-9));
        }
    }

    // leading coefficient 2^n
    CHECK(hermite(30).coeffs[30] == BigInt(1) << 30);
    CHECK_THROWS_AS(hermite(31), std::domain_error);
    CHECK_THROWS_AS(hermite(-1), std::domain_error);
}

TEST_CASE("both P_n expansion routes agree coefficient-exactly") {
    for (int n = 0; n <= 5; ++n) {
        const EvenPolynomial a = p_polynomial_route_shift(n);
        const EvenPolynomial b = p_polynomial_route_raw(n);
        REQUIRE(a.coeffs.size() == b.coeffs.size());
        for (std::size_t j = 0; j < a.coeffs.size(); ++j)
            CHECK(a.coeffs[j] == b.coeffs[j]);
    }
}

TEST_CASE("closed-form P_n matches its defining integral at random z") {
    std::mt19937 rng(20260301);
    std::uniform_real_distribution<double> zdist(0.05, 4.0);
    for (int n = 0; n <= 6; ++n) {
        for (int trial = 0; trial < 5; ++trial) {
            const double z = zdist(rng);
            const double oracle = p_defining_integral(n, z);
            const double closed = p_polynomial(n).eval(z);
            CHECK_THAT(closed, Catch::Matchers::WithinRel(oracle, 1e-10));
        }
    }
}

TEST_CASE("hand-expanded low-order P_n coefficients") {
    // P_1(z) = (3 - 2 z^2 + z^4) / 4
    const EvenPolynomial& p1 = p_polynomial(1);
    REQUIRE(p1.coeffs.size() == 3);
    CHECK(p1.coeffs[0] == BigRat(3, 4));
    CHECK(p1.coeffs[1] == BigRat(-1, 2));
    CHECK(p1.coeffs[2] == BigRat(1, 4));

    // P_2(z) = (41 - 52 z^2 + 50 z^4 - 12 z^6 + z^8) / 64
    const EvenPolynomial& p2 = p_polynomial(2);
    REQUIRE(p2.coeffs.size() == 5);
    CHECK(p2.coeffs[0] == BigRat(41, 64));
    CHECK(p2.coeffs[1] == BigRat(-13, 16));
    CHECK(p2.coeffs[2] == BigRat(25, 32));
    CHECK(p2.coeffs[3] == BigRat(-3, 16));
    CHECK(p2.coeffs[4] == BigRat(1, 64));
}

TEST_CASE("P_n moment identities hold exactly") {
    for (int n = 0; n <= 10; ++n) {
        const EvenPolynomial& p = p_polynomial(n);
        CHECK(gaussian_moment(p, 0) == BigRat(1));
        CHECK(gaussian_moment(p, 2) == BigRat(2 * n + 1));
    }
    CHECK_THROWS_AS(gaussian_moment(p_polynomial(1), 1), std::domain_error);
    CHECK_THROWS_AS(gaussian_moment(p_polynomial(1), -2), std::domain_error);
}

TEST_CASE("wide coefficients F_n = P_n(0)") {
    CHECK(wide_coefficients(0) == BigRat(1));
    CHECK(wide_coefficients(1) == BigRat(3, 4));
    CHECK(wide_coefficients(2) == BigRat(41, 64));
    CHECK(wide_coefficients(3) == BigRat(147, 256));
    CHECK(wide_coefficients(4) == BigRat(8649, 16384));
    CHECK(wide_coefficients(5) == BigRat(32307, 65536));
}

TEST_CASE("P_n is strictly positive and eval matches exact rationals") {
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> zdist(0.0, 12.0);
    for (int n = 0; n <= 10; ++n) {
        const EvenPolynomial& p = p_polynomial(n);
        for (int trial = 0; trial < 20; ++trial) {
            const double z = zdist(rng);
            const double fast = p.eval(z);
            CHECK(fast > 0.0);
            // exact rational Horner at the same (rounded) argument
            BigRat zr(z);
            BigRat acc = 0;
            const BigRat z2 = zr * zr;
            for (std::size_t j = p.coeffs.size(); j-- > 0;)
                acc = acc * z2 + p.coeffs[j];
            // double Horner cancels alternating terms, so the achievable
            // accuracy is set by the magnitude sum, not the result
            double cond = 0.0;
            for (std::size_t j = p.dcoeffs.size(); j-- > 0;)
                cond = cond * z * z + std::fabs(p.dcoeffs[j]);
            const double bound =
                200.0 * std::numeric_limits<double>::epsilon() * cond;
            CHECK_THAT(fast, Catch::Matchers::WithinAbs(
                                 static_cast<double>(acc), bound));
        }
    }
}

TEST_CASE("stationary points are sign changes of the derivative") {
    CHECK(stationary_points(0).empty());

    const auto s1 = stationary_points(1);
    REQUIRE(s1.size() == 1);
    CHECK_THAT(s1[0], Catch::Matchers::WithinAbs(1.0, 1e-10));

    for (int n : {2, 3, 5, 8}) {
        const auto pts = stationary_points(n);
        const EvenPolynomial& p = p_polynomial(n);
        CHECK_FALSE(pts.empty());
        for (double z : pts) {
            CHECK(z > 0.0);
            CHECK_THAT(p.eval_prime(z),
                       Catch::Matchers::WithinAbs(0.0, 1e-6 * (1.0 + p.eval(z))));
        }
        // strictly increasing
        for (std::size_t i = 1; i < pts.size(); ++i) CHECK(pts[i] > pts[i - 1]);
    }
}

TEST_CASE("p_polynomial cache is shared and thread-safe") {
    std::vector<const EvenPolynomial*> got(8, nullptr);
    std::vector<std::thread> pool;
    for (int i = 0; i < 8; ++i)
        pool.emplace_back([&got, i] { got[i] = &p_polynomial(9); });
    for (auto& t : pool) t.join();
    for (int i = 1; i < 8; ++i) CHECK(got[i] == got[0]);
    CHECK_THROWS_AS(p_polynomial(15), std::domain_error);
}
