#pragma once

// Exact-coefficient algebra for the Hermite polynomials H_n and the even
// polynomials P_n(z) that carry the level dependence of every spectral
// integral.
//
// P_n(z) is defined through a Gaussian-weighted integral of
// H_n(xi)^2 H_n(xi -+ z)^2 e^{+-2 z xi}; after completing the square the
// exponential prefactors cancel symbolically and the result is an even
// polynomial of degree 4n with rational coefficients. Two independent
// expansion routes are provided:
//
//   route A (primary): substitute t = xi - z/2 first, expand the shifted
//     factors with the Hermite addition identity
//     H_n(t + z/2) = sum_k C(n,k) H_k(t) z^{n-k},
//     square, and contract with the central moments of e^{-2 t^2};
//
//   route B (verification): expand the raw integrand in powers of xi with
//     plain binomial shifts and integrate xi^m e^{-2 xi^2 + 2 z xi} in
//     closed form, cancelling e^{z^2/2} against the definition's
//     e^{-z^2/2} prefactor.
//
// Both run in exact rational arithmetic end to end; floating point enters
// only when a polynomial is evaluated inside a kernel integral.

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace sntrap {

using BigInt = boost::multiprecision::cpp_int;
using BigRat = boost::multiprecision::cpp_rational;

struct HermitePolynomial {
    int n = 0;
    std::vector<BigInt> coeffs;  // coeffs[j] multiplies x^j

    double eval(double x) const {
        double acc = 0.0;
        for (std::size_t j = coeffs.size(); j-- > 0;)
            acc = acc * x + static_cast<double>(coeffs[j]);
        return acc;
    }
};

// H_n by the three-term recurrence H_{n+1} = 2x H_n - 2n H_{n-1}.
inline HermitePolynomial hermite(int n) {
    if (n < 0 || n > 30)
        throw std::domain_error("hermite: n must be in [0, 30]");
    std::vector<BigInt> prev{1}, cur{0, 2};  // H_0, H_1
    if (n == 0) return {0, prev};
    for (int k = 1; k < n; ++k) {
        std::vector<BigInt> next(k + 2, BigInt(0));
        for (std::size_t j = 0; j < cur.size(); ++j) next[j + 1] += 2 * cur[j];
        for (std::size_t j = 0; j < prev.size(); ++j) next[j] -= 2 * k * prev[j];
        prev = std::move(cur);
        cur = std::move(next);
    }
    return {n, cur};
}

struct EvenPolynomial {
    int n = 0;                    // level index; degree is 4n
    std::vector<BigRat> coeffs;   // coeffs[j] multiplies z^{2j}
    std::vector<double> dcoeffs;  // same, premultiplied to double for eval

    void bake() {
        dcoeffs.resize(coeffs.size());
        for (std::size_t j = 0; j < coeffs.size(); ++j)
            dcoeffs[j] = static_cast<double>(coeffs[j]);
    }

    // Horner in z^2.
    double eval(double z) const {
        const double z2 = z * z;
        double acc = 0.0;
        for (std::size_t j = dcoeffs.size(); j-- > 0;) acc = acc * z2 + dcoeffs[j];
        return acc;
    }

    // d/dz, also as a double Horner (odd polynomial: z * even part).
    double eval_prime(double z) const {
        const double z2 = z * z;
        double acc = 0.0;
        for (std::size_t j = dcoeffs.size(); j-- > 1;)
            acc = acc * z2 + 2.0 * static_cast<double>(j) * dcoeffs[j];
        return acc * z;
    }

    const BigRat& at_zero() const { return coeffs.at(0); }
};

namespace poly_detail {

// Central moments of e^{-2 t^2}: integral of t^{2k} equals
// (2k-1)!! / 4^k * sqrt(pi/2). The table holds the rational factor.
inline std::vector<BigRat> central_moment_factors(int max2k) {
    std::vector<BigRat> f(max2k / 2 + 1);
    f[0] = 1;
    for (int k = 1; k < static_cast<int>(f.size()); ++k)
        f[k] = f[k - 1] * BigRat(2 * k - 1, 4);
    return f;
}

inline std::vector<std::vector<BigInt>> binomial_table(int nmax) {
    std::vector<std::vector<BigInt>> C(nmax + 1);
    for (int i = 0; i <= nmax; ++i) {
        C[i].assign(i + 1, BigInt(1));
        for (int j = 1; j < i; ++j) C[i][j] = C[i - 1][j - 1] + C[i - 1][j];
    }
    return C;
}

// Dense bivariate polynomial, coefficient of t^a z^b at m[a][b].
using Bivar = std::vector<std::vector<BigRat>>;

inline Bivar bivar(int ta, int zb) {
    return Bivar(ta + 1, std::vector<BigRat>(zb + 1, BigRat(0)));
}

inline Bivar multiply(const Bivar& x, const Bivar& y) {
    Bivar r = bivar(static_cast<int>(x.size() + y.size()) - 2,
                    static_cast<int>(x[0].size() + y[0].size()) - 2);
    for (std::size_t a = 0; a < x.size(); ++a)
        for (std::size_t b = 0; b < x[a].size(); ++b) {
            if (x[a][b] == 0) continue;
            for (std::size_t c = 0; c < y.size(); ++c)
                for (std::size_t d = 0; d < y[c].size(); ++d) {
                    if (y[c][d] == 0) continue;
                    r[a + c][b + d] += x[a][b] * y[c][d];
                }
        }
    return r;
}

// Route A shift: H_n(t + s z) with s = +-1/2, via the addition identity
// H_n(t + y) = sum_k C(n,k) H_k(t) (2y)^{n-k}; here 2y = 2 s z = +-z.
inline Bivar hermite_shift_addition(int n, int sign) {
    const auto C = binomial_table(n);
    Bivar r = bivar(n, n);
    for (int k = 0; k <= n; ++k) {
        const auto Hk = hermite(k);
        const int zb = n - k;
        BigRat w = BigRat(C[n][k]);
        if (sign < 0 && (zb % 2) == 1) w = -w;
        for (int a = 0; a <= k; ++a) {
            if (Hk.coeffs[a] == 0) continue;
            r[a][zb] += w * BigRat(Hk.coeffs[a]);
        }
    }
    return r;
}

// Route B shift: H_n(xi - z)^2 expanded with plain binomial shifts of the
// squared polynomial's monomials.
inline Bivar square_then_shift(int n) {
    const auto H = hermite(n);
    // H_n(x)^2 as univariate
    std::vector<BigInt> sq(2 * n + 1, BigInt(0));
    for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j) sq[i + j] += H.coeffs[i] * H.coeffs[j];
    const auto C = binomial_table(2 * n);
    Bivar r = bivar(2 * n, 2 * n);
    // (xi - z)^m = sum_a C(m,a) xi^a (-z)^{m-a}
    for (int m = 0; m <= 2 * n; ++m) {
        if (sq[m] == 0) continue;
        for (int a = 0; a <= m; ++a) {
            BigRat w = BigRat(sq[m] * C[m][a]);
            if (((m - a) % 2) == 1) w = -w;
            r[a][m - a] += w;
        }
    }
    return r;
}

} // namespace poly_detail

// Route A: P_n as (1/(2^n n!)^2) sum_k c_{2k}(z) (2k-1)!!/4^k where
// H_n(t+z/2)^2 H_n(t-z/2)^2 = sum c_{2k}(z) t^{2k}.
inline EvenPolynomial p_polynomial_route_shift(int n) {
    using namespace poly_detail;
    const Bivar hp = hermite_shift_addition(n, +1);
    const Bivar hm = hermite_shift_addition(n, -1);
    const Bivar a = multiply(hp, hm);
    const Bivar q = multiply(a, a);
    const auto f = central_moment_factors(4 * n);

    BigRat norm = 1;  // (2^n n!)^2
    for (int k = 1; k <= n; ++k) norm *= BigRat(2 * k) * BigRat(2 * k);

    EvenPolynomial p;
    p.n = n;
    p.coeffs.assign(2 * n + 1, BigRat(0));
    for (std::size_t ta = 0; ta < q.size(); ta += 2)
        for (std::size_t zb = 0; zb < q[ta].size(); zb += 2) {
            if (q[ta][zb] == 0) continue;
            if (zb / 2 >= p.coeffs.size())
                throw std::logic_error("p_polynomial: z-degree above 4n survived");
            p.coeffs[zb / 2] += q[ta][zb] * f[ta / 2];
        }
    for (auto& c : p.coeffs) c /= norm;
    p.bake();
    return p;
}

// Route B: raw-integrand expansion. The xi-integral of
// xi^m e^{-2 xi^2 + 2 z xi} equals sqrt(pi/2) e^{z^2/2} J_m(z) with
// J_m(z) = sum_a C(m,a) (z/2)^{m-a} [a even] (a-1)!!/4^{a/2}; the
// e^{z^2/2} cancels the definition's prefactor exactly.
inline EvenPolynomial p_polynomial_route_raw(int n) {
    using namespace poly_detail;
    const auto H = hermite(n);
    std::vector<BigInt> sq(2 * n + 1, BigInt(0));  // H_n(xi)^2
    for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j) sq[i + j] += H.coeffs[i] * H.coeffs[j];

    // W(xi, z) = H_n(xi)^2 * H_n(xi - z)^2
    Bivar w = bivar(2 * n, 0);
    for (int m = 0; m <= 2 * n; ++m) w[m][0] = BigRat(sq[m]);
    const Bivar W = multiply(w, square_then_shift(n));

    const auto f = central_moment_factors(4 * n);
    const auto C = binomial_table(4 * n);

    // coefficient of z^c in J_m(z): a = m - c must be even and >= 0
    auto jcoef = [&](int m, int c) -> BigRat {
        const int a = m - c;
        if (a < 0 || (a % 2) != 0) return BigRat(0);
        BigRat half_pow = 1;
        for (int i = 0; i < c; ++i) half_pow /= 2;
        return BigRat(C[m][a]) * half_pow * f[a / 2];
    };

    BigRat norm = 1;
    for (int k = 1; k <= n; ++k) norm *= BigRat(2 * k) * BigRat(2 * k);

    EvenPolynomial p;
    p.n = n;
    p.coeffs.assign(2 * n + 1, BigRat(0));
    for (std::size_t m = 0; m < W.size(); ++m)
        for (std::size_t b = 0; b < W[m].size(); ++b) {
            if (W[m][b] == 0) continue;
            for (int c = 0; c <= static_cast<int>(m); ++c) {
                const BigRat jc = jcoef(static_cast<int>(m), c);
                if (jc == 0) continue;
                const std::size_t zpow = b + static_cast<std::size_t>(c);
                if ((zpow % 2) != 0)
                    throw std::logic_error("p_polynomial: odd z-power survived");
                if (zpow / 2 >= p.coeffs.size())
                    throw std::logic_error("p_polynomial: z-degree above 4n survived");
                p.coeffs[zpow / 2] += W[m][b] * jc;
            }
        }
    for (auto& c : p.coeffs) c /= norm;
    p.bake();
    return p;
}

// Memoized P_n (route A). Supported up to n = 14; cost grows steeply in n.
inline const EvenPolynomial& p_polynomial(int n) {
    if (n < 0 || n > 14)
        throw std::domain_error("p_polynomial: n must be in [0, 14]");
    static std::mutex mu;
    static std::map<int, EvenPolynomial> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it == cache.end())
        it = cache.emplace(n, p_polynomial_route_shift(n)).first;
    return it->second;
}

// Exact integral of u^k e^{-u^2/2} poly(u) over [0, inf), in units of
// sqrt(pi/2); k must be even. Uses the half-line moments
// int_0^inf u^{2j} e^{-u^2/2} du = (2j-1)!! sqrt(pi/2).
inline BigRat gaussian_moment(const EvenPolynomial& poly, int k) {
    if (k < 0 || (k % 2) != 0)
        throw std::domain_error("gaussian_moment: weight power must be even and >= 0");
    std::vector<BigRat> dfact(poly.coeffs.size() + k / 2 + 1);
    dfact[0] = 1;
    for (std::size_t j = 1; j < dfact.size(); ++j)
        dfact[j] = dfact[j - 1] * BigRat(2 * j - 1);
    BigRat acc = 0;
    for (std::size_t j = 0; j < poly.coeffs.size(); ++j)
        acc += poly.coeffs[j] * dfact[j + k / 2];
    return acc;
}

// Exact wide-regime level coefficient F_n = P_n(0).
inline BigRat wide_coefficients(int n) { return p_polynomial(n).at_zero(); }

// Positive stationary points of P_n (real roots of P_n'), used as
// quadrature breakpoints at the polynomial's oscillation turning points.
// P_n itself has no real roots: it is a Gaussian average of squares.
inline std::vector<double> stationary_points(int n) {
    const auto& p = p_polynomial(n);
    if (n == 0) return {};
    const double zmax = 3.0 * std::sqrt(2.0 * n + 1.0) + 2.0;
    const int scan = 64 * n;
    std::vector<double> roots;
    double prev_z = zmax / scan * 1e-3;
    double prev_v = p.eval_prime(prev_z);
    for (int i = 1; i <= scan; ++i) {
        const double z = zmax * i / scan;
        const double v = p.eval_prime(z);
        if (prev_v == 0.0) roots.push_back(prev_z);
        else if ((prev_v < 0.0) != (v < 0.0)) {
            double lo = prev_z, hi = z;
            for (int it = 0; it < 80; ++it) {
                const double mid = 0.5 * (lo + hi);
                if ((p.eval_prime(lo) < 0.0) != (p.eval_prime(mid) < 0.0)) hi = mid;
                else lo = mid;
            }
            roots.push_back(0.5 * (lo + hi));
        }
        prev_z = z;
        prev_v = v;
    }
    return roots;
}

} // namespace sntrap
