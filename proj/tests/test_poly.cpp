#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "marginlab/poly.hpp"

using namespace marginlab;

namespace {

// Sign-change bisection, used as the independent root oracle.
double bisect_root(const RealPoly& p, double lo, double hi) {
    double flo = p.eval(lo);
    REQUIRE(flo * p.eval(hi) < 0.0);
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = p.eval(mid);
        if (flo * fm <= 0.0)
            hi = mid;
        else {
            lo = mid;
            flo = fm;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("quadratic: factored cases") {
    auto [r1, r2] = solve_quadratic(1.0, 0.0, -4.0);
    const double lo = std::min(r1.real(), r2.real());
    const double hi = std::max(r1.real(), r2.real());
    CHECK(lo == Catch::Approx(-2.0));
    CHECK(hi == Catch::Approx(2.0));
    CHECK(r1.imag() == 0.0);

    auto [d1, d2] = solve_quadratic(1.0, -2.0, 1.0);
    CHECK(d1.real() == Catch::Approx(1.0));
    CHECK(d2.real() == Catch::Approx(1.0));
}

TEST_CASE("quadratic: biquadratic crossover root") {
    // 7 w^4 + 64 w^2 - 48 = 0 in x = w^2; the positive root checked by
    // bisection on the quartic itself.
    auto [x1, x2] = solve_quadratic(7.0, 64.0, -48.0);
    const double x = std::max(x1.real(), x2.real());
    const RealPoly quartic{7.0, 0.0, 64.0, 0.0, -48.0};
    const double w_ref = bisect_root(quartic, 0.5, 1.0);
    CHECK(x == Catch::Approx(w_ref * w_ref).epsilon(1e-10));
    CHECK(x == Catch::Approx(0.6969).epsilon(1e-3));
}

TEST_CASE("quadratic: degenerate leading coefficient") {
    CHECK_THROWS_AS(solve_quadratic(0.0, 1.0, 1.0), DegenerateLeadingCoefficient);
}

TEST_CASE("cubic: simple roots") {
    auto roots = solve_cubic_real_roots(RealPoly{1.0, 0.0, 0.0, -1.0});
    REQUIRE(roots.size() == 1);
    CHECK(roots[0] == Catch::Approx(1.0));

    roots = solve_cubic_real_roots(RealPoly{1.0, -6.0, 11.0, -6.0});
    REQUIRE(roots.size() == 3);
    CHECK(roots[0] == Catch::Approx(1.0));
    CHECK(roots[1] == Catch::Approx(2.0));
    CHECK(roots[2] == Catch::Approx(3.0));
}

TEST_CASE("cubic: margin cubic root near 8.74") {
    const RealPoly p{1.0, 7.0, -84.0, -468.0};
    const double ref = bisect_root(p, 8.7, 8.8);
    const auto roots = solve_cubic_real_roots(p);
    bool found = false;
    for (double r : roots)
        if (std::abs(r - ref) < 1e-9) found = true;
    CHECK(found);
    CHECK(ref == Catch::Approx(8.7397).epsilon(1e-4));
}

TEST_CASE("cubic: residual bound and multiple-root collapse") {
    const RealPoly dbl{1.0, -4.0, 5.0, -2.0};  // (x-1)^2 (x-2)
    const auto roots = solve_cubic_real_roots(dbl);
    REQUIRE(roots.size() == 2);
    CHECK(roots[0] == Catch::Approx(1.0).margin(1e-6));
    CHECK(roots[1] == Catch::Approx(2.0).margin(1e-8));
    for (double r : roots) CHECK(std::abs(dbl.eval(r)) < 1e-10 * dbl.coeff_scale());
}

TEST_CASE("descartes bound") {
    CHECK(descartes_positive_root_bound(RealPoly{1.0, 7.0, -84.0, -468.0}) == 1);
    CHECK(descartes_positive_root_bound(RealPoly{1.0, 0.0, 1.0}) == 0);
    // Stationarity quintic at z=1, p1=2, p2=6: z kp^5 - z^2 kp^4 + ... with
    // at most three positive roots.
    const double z = 1.0, p1 = 2.0, p2 = 6.0;
    const double sum = p1 + p2, prod = p1 * p2;
    const RealPoly quintic{
        z,
        -z * z,
        z * (sum * (z - sum - prod / z) + 2.0 * prod),
        2.0 * prod * prod,
        prod * sum * (p1 * p1 + p2 * p2 - prod) + z * prod * (prod - z * sum),
        prod * prod * (z * z - p1 * p1 - p2 * p2)};
    CHECK(descartes_positive_root_bound(quintic) <= 3);
}

TEST_CASE("eval: horner") {
    CHECK(RealPoly{1.0, 0.0, 0.0, -1.0}.eval(1.0) == Catch::Approx(0.0).margin(1e-15));
    CHECK(std::abs(RealPoly{1.0, 0.0, 1.0}.eval(Complex(0.0, 1.0))) < 1e-15);
    CHECK(RealPoly{1.0, 7.0, -84.0, -468.0}.eval(9.0) == Catch::Approx(72.0));
}

TEST_CASE("cubic: random real-rooted round trip") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> dist(-5.0, 5.0);
    for (int trial = 0; trial < 500; ++trial) {
        double r[3] = {dist(rng), dist(rng), dist(rng)};
        std::sort(r, r + 3);
        // Keep roots separated so recovery is well-conditioned.
        if (r[1] - r[0] < 1e-2 || r[2] - r[1] < 1e-2) continue;
        const RealPoly p{1.0, -(r[0] + r[1] + r[2]),
                         r[0] * r[1] + r[0] * r[2] + r[1] * r[2], -r[0] * r[1] * r[2]};
        const auto roots = solve_cubic_real_roots(p);
        REQUIRE(roots.size() == 3);
        for (int i = 0; i < 3; ++i)
            CHECK(roots[static_cast<std::size_t>(i)] ==
                  Catch::Approx(r[i]).epsilon(1e-8).margin(1e-8));
        // Positive-root count obeys the sign-change bound with equal parity.
        int positive = 0;
        for (double x : roots)
            if (x > 0.0) ++positive;
        const int bound = descartes_positive_root_bound(p);
        CHECK(positive <= bound);
        CHECK((bound - positive) % 2 == 0);
    }
}

TEST_CASE("complex roots: degree 1..3 residuals") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> dist(-3.0, 3.0);
    for (int trial = 0; trial < 500; ++trial) {
        const int deg = 1 + trial % 3;
        std::vector<Complex> c(static_cast<std::size_t>(deg) + 1);
        for (auto& x : c) x = Complex(dist(rng), dist(rng));
        if (std::abs(c[0]) < 0.1) c[0] += Complex(1.0, 0.0);
        const ComplexPoly p(c);
        const auto roots = complex_roots(p);
        REQUIRE(static_cast<int>(roots.size()) == deg);
        for (const Complex& r : roots)
            CHECK(std::abs(p.eval(r)) < 1e-9 * p.coeff_scale() * std::pow(1.0 + std::abs(r), deg));
    }
}
