#pragma once

// Hurwitz tests: Routh table for real polynomials, Bilharz determinants
// for complex-coefficient polynomials, and a closed-form root-location
// check used as an independent oracle for both.

#include <cmath>
#include <optional>
#include <vector>

#include "marginlab/poly.hpp"

namespace marginlab {

enum class StabilityMethod { routh, bilherz, roots };

struct StabilityVerdict {
    bool stable = false;
    StabilityMethod method = StabilityMethod::roots;
    bool marginal = false;                      // boundary case, reported as not stable
    std::optional<int> witness_index;           // failed Routh row / determinant index
    std::optional<Complex> witness_root;        // offending root (roots method)
};

// Routh-Hurwitz for real polynomials of degree 1..4. Entries within
// epsilon of zero (relative to the coefficient scale) mean a marginal
// polynomial; margins are suprema over strict stability so the verdict
// is "not stable" with the marginal flag set.
inline StabilityVerdict routh_hurwitz_stable(const RealPoly& poly, double eps = 1e-12) {
    const int n = poly.degree();
    if (n < 1 || n > 4) throw InvalidInput("routh_hurwitz_stable wants degree 1..4");

    std::vector<double> c = poly.coeffs;
    if (c[0] < 0.0)
        for (double& x : c) x = -x;
    double scale = 0.0;
    for (double x : c) scale = std::max(scale, std::abs(x));
    const double tol = eps * std::max(scale, 1.0);

    // Two interleaved Routh rows, refreshed in place.
    std::vector<double> row0, row1;
    for (std::size_t i = 0; i < c.size(); i += 2) row0.push_back(c[i]);
    for (std::size_t i = 1; i < c.size(); i += 2) row1.push_back(c[i]);
    row1.resize(row0.size(), 0.0);

    StabilityVerdict v;
    v.method = StabilityMethod::routh;
    for (int row = 1; row <= n; ++row) {
        const double head = row1[0];
        if (std::abs(head) < tol) {
            v.stable = false;
            v.marginal = true;
            v.witness_index = row;
            return v;
        }
        if (head < 0.0) {
            v.stable = false;
            v.witness_index = row;
            return v;
        }
        std::vector<double> next(row0.size(), 0.0);
        for (std::size_t i = 0; i + 1 < row0.size(); ++i)
            next[i] = (row1[0] * row0[i + 1] - row0[0] * ((i + 1 < row1.size()) ? row1[i + 1] : 0.0)) / row1[0];
        next[row0.size() - 1] = 0.0;
        row0 = row1;
        row1 = next;
        // Drop trailing zeros once the table narrows.
        while (row0.size() > 1 && row0.back() == 0.0 && row1.back() == 0.0) {
            row0.pop_back();
            row1.pop_back();
        }
        if (row == n) break;
    }
    v.stable = true;
    return v;
}

namespace detail {

// Determinant by cofactor expansion along the first column; the Bilharz
// matrices are at most 5x5 so this stays exact in structure. The second
// member accumulates absolute values of all expansion terms, giving a
// magnitude scale for a relative zero test.
struct DetWithScale {
    double det = 0.0;
    double mag = 0.0;
};

inline DetWithScale det_cofactor(const std::vector<std::vector<double>>& m) {
    const std::size_t n = m.size();
    if (n == 1) return {m[0][0], std::abs(m[0][0])};
    if (n == 2)
        return {m[0][0] * m[1][1] - m[0][1] * m[1][0],
                std::abs(m[0][0] * m[1][1]) + std::abs(m[0][1] * m[1][0])};
    DetWithScale acc;
    for (std::size_t r = 0; r < n; ++r) {
        if (m[r][0] == 0.0) continue;
        std::vector<std::vector<double>> sub(n - 1, std::vector<double>(n - 1));
        std::size_t rr = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (i == r) continue;
            for (std::size_t j = 1; j < n; ++j) sub[rr][j - 1] = m[i][j];
            ++rr;
        }
        const double sgn = (r % 2 == 0) ? 1.0 : -1.0;
        const DetWithScale s = det_cofactor(sub);
        acc.det += sgn * m[r][0] * s.det;
        acc.mag += std::abs(m[r][0]) * s.mag;
    }
    return acc;
}

}  // namespace detail

// Bilharz criterion for complex polynomials of degree 1..3: normalize the
// leading coefficient to 1 (so b0 = 0), build the (2i-1)x(2i-1)
// submatrices from the real parts a_k and imaginary parts b_k, and demand
// every determinant be positive. For degree 2 this reduces to
// D1 = a1 and D2 = a1^2 a2 + a1 b1 b2 - b2^2.
inline StabilityVerdict bilherz_stable(const ComplexPoly& poly, double eps = 1e-12) {
    const int n = poly.degree();
    if (n < 1 || n > 3) throw InvalidInput("bilherz_stable wants degree 1..3");
    const double scale = poly.coeff_scale();
    if (std::abs(poly.coeffs[0]) < eps * scale)
        throw DegenerateInput("bilherz leading coefficient ~ 0");

    std::vector<double> a(static_cast<std::size_t>(n) + 1), b(static_cast<std::size_t>(n) + 1);
    for (int k = 0; k <= n; ++k) {
        const Complex ck = poly.coeffs[static_cast<std::size_t>(k)] / poly.coeffs[0];
        a[static_cast<std::size_t>(k)] = ck.real();
        b[static_cast<std::size_t>(k)] = ck.imag();
    }
    auto A = [&](int k) { return (k >= 0 && k <= n) ? a[static_cast<std::size_t>(k)] : 0.0; };
    auto B = [&](int k) { return (k >= 0 && k <= n) ? b[static_cast<std::size_t>(k)] : 0.0; };

    StabilityVerdict v;
    v.method = StabilityMethod::bilherz;
    for (int i = 1; i <= n; ++i) {
        const int dim = 2 * i - 1;
        std::vector<std::vector<double>> m(static_cast<std::size_t>(dim),
                                           std::vector<double>(static_cast<std::size_t>(dim), 0.0));
        // Top block: i rows; bottom block: i-1 rows.
        for (int r = 0; r < i; ++r) {
            for (int col = 0; col < i; ++col) m[r][col] = A(2 * col + 1 - r);
            for (int col = 0; col < i - 1; ++col) m[r][i + col] = -B(2 * col + 2 - r);
        }
        for (int r = 0; r < i - 1; ++r) {
            for (int col = 0; col < i; ++col) m[i + r][col] = B(2 * col - r);
            for (int col = 0; col < i - 1; ++col) m[i + r][i + col] = A(2 * col + 1 - r);
        }
        const auto [det, mag] = detail::det_cofactor(m);
        const double tol = eps * std::max(mag, 1e-300);
        if (std::abs(det) <= tol) {
            v.stable = false;
            v.marginal = true;
            v.witness_index = i;
            return v;
        }
        if (det < 0.0) {
            v.stable = false;
            v.witness_index = i;
            return v;
        }
    }
    v.stable = true;
    return v;
}

// Root-location oracle: closed-form roots, stable iff every real part is
// strictly negative.
inline StabilityVerdict stable_by_roots(const ComplexPoly& poly) {
    StabilityVerdict v;
    v.method = StabilityMethod::roots;
    const std::vector<Complex> roots = complex_roots(poly);
    v.stable = true;
    double worst = -1e308;
    Complex worst_root;
    for (const Complex& r : roots) {
        if (r.real() > worst) {
            worst = r.real();
            worst_root = r;
        }
    }
    if (worst >= 0.0) {
        v.stable = false;
        v.witness_root = worst_root;
    }
    return v;
}

inline StabilityVerdict stable_by_roots(const RealPoly& poly) {
    std::vector<Complex> c(poly.coeffs.begin(), poly.coeffs.end());
    return stable_by_roots(ComplexPoly(std::move(c)));
}

}  // namespace marginlab
