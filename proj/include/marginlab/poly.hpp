#pragma once

// Real/complex polynomial arithmetic and closed-form low-degree root
// solvers. Everything here is value-level and allocation-light; degrees
// stay at or below six.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "marginlab/errors.hpp"

namespace marginlab {

using Complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

// Coefficients in descending degree order, leading coefficient nonzero.
struct RealPoly {
    std::vector<double> coeffs;

    RealPoly() = default;
    RealPoly(std::initializer_list<double> c) : coeffs(c) { normalize(); }
    explicit RealPoly(std::vector<double> c) : coeffs(std::move(c)) { normalize(); }

    void normalize() {
        std::size_t lead = 0;
        while (lead + 1 < coeffs.size() && coeffs[lead] == 0.0) ++lead;
        coeffs.erase(coeffs.begin(), coeffs.begin() + static_cast<std::ptrdiff_t>(lead));
        if (coeffs.empty()) coeffs.push_back(0.0);
    }

    int degree() const { return static_cast<int>(coeffs.size()) - 1; }

    double eval(double x) const {
        double acc = 0.0;
        for (double c : coeffs) acc = acc * x + c;
        return acc;
    }

    Complex eval(Complex x) const {
        Complex acc = 0.0;
        for (double c : coeffs) acc = acc * x + c;
        return acc;
    }

    RealPoly derivative() const {
        if (degree() <= 0) return RealPoly{0.0};
        std::vector<double> d(coeffs.size() - 1);
        const int n = degree();
        for (int i = 0; i < n; ++i) d[static_cast<std::size_t>(i)] = coeffs[static_cast<std::size_t>(i)] * (n - i);
        return RealPoly(std::move(d));
    }

    double coeff_scale() const {
        double m = 0.0;
        for (double c : coeffs) m = std::max(m, std::abs(c));
        return std::max(m, 1.0);
    }
};

struct ComplexPoly {
    std::vector<Complex> coeffs;

    ComplexPoly() = default;
    ComplexPoly(std::initializer_list<Complex> c) : coeffs(c) {}
    explicit ComplexPoly(std::vector<Complex> c) : coeffs(std::move(c)) {}

    int degree() const { return static_cast<int>(coeffs.size()) - 1; }

    Complex eval(Complex x) const {
        Complex acc = 0.0;
        for (const Complex& c : coeffs) acc = acc * x + c;
        return acc;
    }

    double coeff_scale() const {
        double m = 0.0;
        for (const Complex& c : coeffs) m = std::max(m, std::abs(c));
        return std::max(m, 1.0);
    }
};

// Converts a nominally-real complex polynomial back to real coefficients.
inline RealPoly to_real_poly(const ComplexPoly& p, double imag_tol = 1e-9) {
    std::vector<double> c;
    c.reserve(p.coeffs.size());
    const double scale = p.coeff_scale();
    for (const Complex& a : p.coeffs) {
        if (std::abs(a.imag()) > imag_tol * scale)
            throw InvalidInput("polynomial has non-negligible imaginary coefficients");
        c.push_back(a.real());
    }
    return RealPoly(std::move(c));
}

// Both roots of a*x^2 + b*x + c, larger-magnitude root computed first so
// the second comes from c/(a*r) without cancellation.
inline std::pair<Complex, Complex> solve_quadratic(double a, double b, double c,
                                                   double eps = 1e-300) {
    if (std::abs(a) < eps)
        throw DegenerateLeadingCoefficient("quadratic leading coefficient is zero");
    const double disc = b * b - 4.0 * a * c;
    if (disc >= 0.0) {
        const double sq = std::sqrt(disc);
        const double q = -0.5 * (b + std::copysign(sq, b));
        const double r1 = (q != 0.0) ? q / a : 0.0;
        const double r2 = (q != 0.0) ? c / q : -b / a - r1;
        return {Complex(r1, 0.0), Complex(r2, 0.0)};
    }
    const double re = -b / (2.0 * a);
    const double im = std::sqrt(-disc) / (2.0 * a);
    return {Complex(re, im), Complex(re, -im)};
}

namespace detail {

// Residual of p at r relative to the largest term magnitude; small values
// mean r is a backward-stable root.
inline double relative_residual(const RealPoly& p, double r) {
    double acc = 0.0, scale = 0.0, power = 1.0;
    for (auto it = p.coeffs.rbegin(); it != p.coeffs.rend(); ++it) {
        acc += *it * power;
        scale += std::abs(*it * power);
        power *= r;
    }
    return std::abs(acc) / std::max(scale, 1e-300);
}

inline double newton_polish(const RealPoly& p, const RealPoly& dp, double x, int iters = 2) {
    for (int it = 0; it < iters; ++it) {
        if (relative_residual(p, x) < 1e-16) break;
        const double d = dp.eval(x);
        if (d == 0.0) break;
        const double step = p.eval(x) / d;
        x -= step;
        if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(x))) break;
    }
    return x;
}

// Cardano on the monic cubic x^3 + a x^2 + b x + c.
inline std::vector<double> cardano_monic(double a, double b, double c) {
    const double p = b - a * a / 3.0;
    const double q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    const double halfq2 = 0.25 * q * q;
    const double p3over27 = p * p * p / 27.0;
    const double disc = halfq2 + p3over27;
    const double band = 1e-12 * (1.0 + halfq2 + std::abs(p3over27));
    const double shift = a / 3.0;

    std::vector<double> roots;
    if (disc > band) {
        const double sq = std::sqrt(disc);
        const double u3 = (q >= 0.0) ? (-q / 2.0 - sq) : (-q / 2.0 + sq);
        const double u = std::cbrt(u3);
        const double v = (u != 0.0) ? -p / (3.0 * u) : 0.0;
        roots.push_back(u + v - shift);
    } else if (disc < -band) {
        // Three distinct real roots, trigonometric branch.
        const double m = 2.0 * std::sqrt(-p / 3.0);
        double arg = 3.0 * q / (p * m);
        arg = std::clamp(arg, -1.0, 1.0);
        const double theta = std::acos(arg);
        for (int k = 0; k < 3; ++k)
            roots.push_back(m * std::cos((theta - 2.0 * kPi * k) / 3.0) - shift);
    } else {
        // Repeated roots.
        if (std::abs(p) < 1e-12 * (1.0 + std::abs(q))) {
            roots.push_back(std::cbrt(-q) - shift);
        } else {
            roots.push_back(3.0 * q / p - shift);
            roots.push_back(-3.0 * q / (2.0 * p) - shift);
        }
    }
    return roots;
}

}  // namespace detail

// All real roots of a degree-3 polynomial, ascending, multiple roots
// collapsed. Cardano on the lead-normalized cubic provides the seeds; the
// two-term balance points are added as extra seeds because the margin
// boundary cubics carry roots spread across many orders of magnitude
// (vanishing leading or trailing coefficients), where Cardano alone loses
// the middle root. Every candidate is Newton polished and kept only if
// its relative residual is at machine-backward-error level.
inline std::vector<double> solve_cubic_real_roots(const RealPoly& poly) {
    if (poly.degree() != 3) throw InvalidInput("solve_cubic_real_roots wants degree 3");
    const double c0 = poly.coeffs[0], c1 = poly.coeffs[1], c2 = poly.coeffs[2],
                 c3 = poly.coeffs[3];

    std::vector<double> seeds = detail::cardano_monic(c1 / c0, c2 / c0, c3 / c0);
    if (std::abs(c1) > 1e-290) {
        seeds.push_back(-c1 / c0);  // dominant-root balance
        auto [m1, m2] = solve_quadratic(c1, c2, c3);
        if (m1.imag() == 0.0) {
            seeds.push_back(m1.real());
            seeds.push_back(m2.real());
        }
    }
    if (c2 != 0.0) seeds.push_back(-c3 / c2);  // smallest-root balance

    const RealPoly dp = poly.derivative();
    // Double roots are also derivative roots; snapping to those recovers
    // the accuracy Newton loses at a multiple root.
    std::vector<double> snap_points;
    {
        const double disc = dp.coeffs[1] * dp.coeffs[1] - 4.0 * dp.coeffs[0] * dp.coeffs[2];
        if (disc >= 0.0) {
            auto [d1, d2] = solve_quadratic(dp.coeffs[0], dp.coeffs[1], dp.coeffs[2]);
            for (double d : {d1.real(), d2.real()})
                if (detail::relative_residual(poly, d) < 1e-12) snap_points.push_back(d);
        }
    }
    std::vector<double> roots;
    for (double s : seeds) {
        if (!std::isfinite(s)) continue;
        double r = detail::newton_polish(poly, dp, s, 30);
        if (!std::isfinite(r)) continue;
        for (double d : snap_points)
            if (std::abs(r - d) < 1e-5 * std::max(1.0, std::abs(d))) r = d;
        if (detail::relative_residual(poly, r) > 1e-10) continue;
        roots.push_back(r);
    }
    std::sort(roots.begin(), roots.end());
    std::vector<double> out;
    for (double r : roots)
        if (out.empty() ||
            std::abs(r - out.back()) > 1e-9 * std::max(1.0, std::abs(r)))
            out.push_back(r);
    if (out.empty())
        throw Error("cubic solver found no backward-stable real root");
    return out;
}

// Number of sign changes among consecutive nonzero coefficients; bounds
// the positive-root count from above with matching parity.
inline int descartes_positive_root_bound(const RealPoly& p) {
    int changes = 0;
    int prev = 0;
    for (double c : p.coeffs) {
        if (c == 0.0) continue;
        const int s = (c > 0.0) ? 1 : -1;
        if (prev != 0 && s != prev) ++changes;
        prev = s;
    }
    return changes;
}

namespace detail {

inline double relative_residual(const ComplexPoly& p, Complex r) {
    Complex acc = 0.0;
    double scale = 0.0, power = 1.0;
    const double ar = std::abs(r);
    Complex cpower = 1.0;
    for (auto it = p.coeffs.rbegin(); it != p.coeffs.rend(); ++it) {
        acc += *it * cpower;
        scale += std::abs(*it) * power;
        cpower *= r;
        power *= ar;
    }
    return std::abs(acc) / std::max(scale, 1e-300);
}

inline Complex newton_polish(const ComplexPoly& p, const ComplexPoly& dp, Complex x,
                             int iters = 3) {
    for (int it = 0; it < iters; ++it) {
        if (relative_residual(p, x) < 1e-16) break;
        const Complex d = dp.eval(x);
        if (std::abs(d) == 0.0) break;
        const Complex step = p.eval(x) / d;
        x -= step;
        if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(x))) break;
    }
    return x;
}

inline ComplexPoly complex_derivative(const ComplexPoly& p) {
    const int n = p.degree();
    if (n <= 0) return ComplexPoly{Complex(0.0)};
    std::vector<Complex> d(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) d[static_cast<std::size_t>(i)] = p.coeffs[static_cast<std::size_t>(i)] * double(n - i);
    return ComplexPoly(std::move(d));
}

inline std::pair<Complex, Complex> complex_quadratic_roots(Complex a, Complex b, Complex c) {
    const Complex sq = std::sqrt(b * b - 4.0 * a * c);
    const Complex q = (std::abs(b + sq) >= std::abs(b - sq)) ? -0.5 * (b + sq) : -0.5 * (b - sq);
    if (std::abs(q) == 0.0) return {Complex(0.0), Complex(0.0)};
    return {q / a, c / q};
}

}  // namespace detail

// All roots of a complex polynomial of degree 1..3 in closed form
// (depressed-cubic Cardano for degree 3). The cubic path polishes the
// best-conditioned root first and deflates to an exactly-solved quadratic,
// which keeps roots spread over many orders of magnitude accurate.
inline std::vector<Complex> complex_roots(const ComplexPoly& poly, double lead_eps = 1e-12) {
    const int n = poly.degree();
    const double scale = poly.coeff_scale();
    if (n < 1 || n > 3) throw InvalidInput("complex_roots handles degree 1..3");
    if (std::abs(poly.coeffs[0]) < lead_eps * scale)
        throw DegenerateLeadingCoefficient("complex polynomial leading coefficient ~ 0");

    if (n == 1) return {-poly.coeffs[1] / poly.coeffs[0]};
    if (n == 2) {
        auto [r1, r2] = detail::complex_quadratic_roots(poly.coeffs[0], poly.coeffs[1],
                                                        poly.coeffs[2]);
        return {r1, r2};
    }

    const Complex a0 = poly.coeffs[0], a1 = poly.coeffs[1], a2 = poly.coeffs[2],
                  a3 = poly.coeffs[3];
    const ComplexPoly dp = detail::complex_derivative(poly);

    std::vector<Complex> seeds;
    {
        const Complex a = a1 / a0, b = a2 / a0, c = a3 / a0;
        const Complex p = b - a * a / 3.0;
        const Complex q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
        const Complex shift = a / 3.0;
        const Complex sq = std::sqrt(0.25 * q * q + p * p * p / 27.0);
        Complex u3 = -0.5 * q + sq;
        if (std::abs(-0.5 * q - sq) > std::abs(u3)) u3 = -0.5 * q - sq;
        if (std::abs(u3) == 0.0) {
            seeds.push_back(-shift);
        } else {
            const Complex u = std::pow(u3, 1.0 / 3.0);
            const Complex v = -p / (3.0 * u);
            const Complex w(-0.5, 0.5 * std::sqrt(3.0));
            const Complex wbar = std::conj(w);
            seeds.push_back(u + v - shift);
            seeds.push_back(w * u + wbar * v - shift);
            seeds.push_back(wbar * u + w * v - shift);
        }
    }
    if (std::abs(a1) > 0.0) seeds.push_back(-a1 / a0);  // dominant-root balance
    if (std::abs(a2) > 0.0) seeds.push_back(-a3 / a2);  // smallest-root balance

    // Anchor on the polished candidate of largest modulus with a
    // backward-stable residual.
    Complex anchor = seeds.front();
    double anchor_res = std::numeric_limits<double>::infinity();
    double anchor_mag = -1.0;
    for (Complex s : seeds) {
        const Complex r = detail::newton_polish(poly, dp, s, 40);
        const double res = detail::relative_residual(poly, r);
        const bool good = res < 1e-12;
        const bool anchor_good = anchor_res < 1e-12;
        if ((good && (!anchor_good || std::abs(r) > anchor_mag)) ||
            (!anchor_good && res < anchor_res)) {
            anchor = r;
            anchor_res = res;
            anchor_mag = std::abs(r);
        }
    }

    // Deflate from the side that avoids cancellation: synthetic division
    // from the leading end is stable when the anchor is below the
    // geometric mean of the remaining pair, from the constant end when it
    // is above.
    Complex q1, q2;
    const double rest_prod =
        (std::abs(anchor) > 0.0) ? std::abs(a3) / (std::abs(a0) * std::abs(anchor)) : 0.0;
    if (std::abs(anchor) * std::abs(anchor) >= rest_prod && std::abs(anchor) > 0.0) {
        const Complex c2_back = -a3 / anchor;
        const Complex c1_back = (c2_back - a2) / anchor;
        std::tie(q1, q2) = detail::complex_quadratic_roots(a0, c1_back, c2_back);
    } else {
        const Complex b1 = a1 + a0 * anchor;
        const Complex b2 = a2 + b1 * anchor;
        std::tie(q1, q2) = detail::complex_quadratic_roots(a0, b1, b2);
    }
    for (Complex* r : {&q1, &q2}) {
        const Complex polished = detail::newton_polish(poly, dp, *r, 20);
        if (detail::relative_residual(poly, polished) <= detail::relative_residual(poly, *r))
            *r = polished;
    }
    return {anchor, q1, q2};
}

}  // namespace marginlab
