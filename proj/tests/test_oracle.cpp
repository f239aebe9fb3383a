#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "marginlab/oracle.hpp"

using namespace marginlab;

namespace {
const SecondOrderZeroPlant kRefPlant(1.0, PolePair::real_poles(2.0, 6.0));
const Plant kRef{kRefPlant};

// Definition-level optima for the second-order plant with a zero: the
// search tops out at sqrt of the LTI gain margin and at half the LTI
// phase margin, i.e. at gamma-based values ((gamma+1)/(gamma-1) and
// asin(1/gamma)). The larger single-branch closed forms are suprema of
// one-sided relaxations and are not reachable from the nominal loop.
double gain_anchor(const SecondOrderZeroPlant& p) {
    return std::sqrt(lti_optimal_margins(Plant(p)).first.value);
}
double phase_anchor(const SecondOrderZeroPlant& p) {
    return lti_optimal_margins(Plant(p)).second.value / 2.0;
}
}  // namespace

TEST_CASE("is_stabilizing: reference examples") {
    const PidGains g = PidGains::pid(9.0, -1e-6, -0.5);
    CHECK(is_stabilizing(kRef, g, GainPerturbation{1.0}));
    CHECK(is_stabilizing(kRef, g, PhasePerturbation{0.0}));
    CHECK_FALSE(is_stabilizing(kRef, g, GainPerturbation{10.0}));
    CHECK_FALSE(is_stabilizing(kRef, PidGains::pid(1.0, 1.0, 1.0), GainPerturbation{1.0}));
}

TEST_CASE("gain margin: fixed gains") {
    OracleConfig cfg;
    // Strictly proper minimum-phase first-order plant: unbounded.
    const Plant fo{FirstOrderPlant(0.0, 1.0, 1.0)};
    CHECK(std::isinf(gain_margin_of(fo, PidGains::p(2.0), cfg)));

    // Non-stabilizing gains trip the precondition.
    CHECK_THROWS_AS(gain_margin_of(kRef, PidGains::pid(1.0, 1.0, 1.0), cfg), std::exception);

    // The balanced triple reaches the interval-ratio bound (gamma+1)/(gamma-1).
    const PidGains balanced = PidGains::pid(96.0 / 13.0 * (1.0 + 1e-4), -1e-8, -8.0 / 13.0);
    const double g = gain_margin_of(kRef, balanced, cfg);
    CHECK(g == Catch::Approx(13.0 / 8.0).epsilon(2e-3));

    // Soundness: stable just inside the reported margin, unstable just outside.
    for (const PidGains gains : {PidGains::pid(9.0, -1e-4, -0.5), PidGains::pid(10.0, -0.2, -0.3)}) {
        const double m = gain_margin_of(kRef, gains, cfg);
        CHECK(is_stabilizing(kRef, gains, GainPerturbation{m * (1.0 - 2.0 * cfg.bisection_tol)}));
        CHECK_FALSE(
            is_stabilizing(kRef, gains, GainPerturbation{m * (1.0 + 2.0 * cfg.bisection_tol)}));
    }
}

TEST_CASE("phase margin: fixed gains") {
    OracleConfig cfg;
    const Plant fo{FirstOrderPlant(1.0, -4.0, 1.0)};
    CHECK(phase_margin_of(fo, PidGains::pi(-0.5, -1e-9), cfg) ==
          Catch::Approx(std::acos(0.8)).margin(1e-3));
    // A detuned proportional gain earns strictly less than the optimum.
    CHECK(phase_margin_of(fo, PidGains::pi(-0.35, -1e-9), cfg) < std::acos(0.8) - 1e-3);

    // Large proportional gain on a minimum-phase plant never loses stability.
    const Plant mp{FirstOrderPlant(1.0, 2.0, 1.0)};
    CHECK(phase_margin_of(mp, PidGains::p(50.0), cfg) == Catch::Approx(kPi));

    // The kd -> -1 boundary family: its design crossover promises 0.2716,
    // but a second unit-gain crossover at high frequency destabilizes the
    // two-sided family almost immediately.
    const PidGains boundary = PidGains::pid(8.7397, -1e-6, -1.0 + 1e-6);
    const double m = phase_margin_of(kRef, boundary, cfg);
    CHECK(m < 1e-3);
    const auto ws = crossover_frequencies(kRef, boundary);
    REQUIRE(ws.size() >= 2);
    CHECK(std::abs(phase_at_crossover(kRef, boundary, ws.front())) ==
          Catch::Approx(0.2716).margin(1e-3));
}

TEST_CASE("phase margin: bisection agrees with the crossover picture") {
    OracleConfig cfg;
    cfg.theta_grid = 512;
    std::mt19937_64 rng(123);
    std::uniform_real_distribution<double> kp(7.05, 11.9);
    std::uniform_real_distribution<double> kd(-0.99, -0.05);
    std::uniform_real_distribution<double> ki(-0.5, -1e-4);
    int tested = 0;
    for (int trial = 0; tested < 1000; ++trial) {
        const PidGains g = PidGains::pid(kp(rng), ki(rng), kd(rng));
        if (!is_stabilizing(kRef, g, GainPerturbation{1.0})) continue;
        ++tested;
        // phase_margin_of already throws AgreementFailure on divergence.
        const double m = phase_margin_of(kRef, g, cfg);
        double best = kPi;
        for (double w : crossover_frequencies(kRef, g))
            best = std::min(best, std::abs(phase_at_crossover(kRef, g, w)));
        CHECK(m == Catch::Approx(best).margin(10.0 * cfg.bisection_tol));
    }
}

TEST_CASE("search: second-order reference plant") {
    OracleConfig cfg;
    const auto sg = best_margin_search(kRef, ControllerKind::PID, MarginKind::gain, cfg);
    REQUIRE(sg);
    CHECK(sg->value == Catch::Approx(gain_anchor(kRefPlant)).epsilon(0.01));
    CHECK(sg->value <= pid_gain_margin(kRefPlant).value * (1.0 + 10.0 * cfg.bisection_tol));

    const auto sp = best_margin_search(kRef, ControllerKind::PID, MarginKind::phase, cfg);
    REQUIRE(sp);
    CHECK(sp->value == Catch::Approx(phase_anchor(kRefPlant)).epsilon(0.01));
    CHECK(sp->value <=
          pid_phase_margin(kRefPlant).report.value * (1.0 + 10.0 * cfg.bisection_tol));

    // PD does exactly as well as PID.
    const auto spd = best_margin_search(kRef, ControllerKind::PD, MarginKind::phase, cfg);
    REQUIRE(spd);
    CHECK(spd->value == Catch::Approx(sp->value).epsilon(0.01));

    const auto sgi = best_margin_search(kRef, ControllerKind::PI, MarginKind::gain, cfg);
    REQUIRE(sgi);
    CHECK(sgi->value == Catch::Approx(pi_margins(kRefPlant).gain.value).epsilon(0.01));

    const auto spi = best_margin_search(kRef, ControllerKind::PI, MarginKind::phase, cfg);
    REQUIRE(spi);
    CHECK(spi->value == Catch::Approx(pi_margins(kRefPlant).phase.value).epsilon(0.005));
}

TEST_CASE("search: first-order plants reach the closed forms") {
    OracleConfig cfg;
    const Plant fo{FirstOrderPlant(1.0, -4.0, 1.0)};
    const auto g = best_margin_search(fo, ControllerKind::PI, MarginKind::gain, cfg);
    REQUIRE(g);
    CHECK(g->value == Catch::Approx(4.0).epsilon(0.01));
    const auto t = best_margin_search(fo, ControllerKind::PI, MarginKind::phase, cfg);
    REQUIRE(t);
    CHECK(t->value == Catch::Approx(std::acos(0.8)).epsilon(0.01));

    // z < p mirror: the other feasible family carries the optimum.
    const Plant mirror{FirstOrderPlant(1.0, -1.0, 4.0)};
    const auto g2 = best_margin_search(mirror, ControllerKind::PI, MarginKind::gain, cfg);
    REQUIRE(g2);
    CHECK(g2->value == Catch::Approx(4.0).epsilon(0.01));

    // Strictly proper plant under derivative action: full pi phase margin.
    const Plant sp{FirstOrderPlant(0.0, 1.0, 3.0)};
    const auto t3 = best_margin_search(sp, ControllerKind::PID, MarginKind::phase, cfg);
    REQUIRE(t3);
    CHECK(t3->value >= 0.98 * kPi);
}

TEST_CASE("search: respects the stabilizability condition") {
    OracleConfig cfg;
    // PI cannot stabilize when p1+p2 >= p1p2/z.
    const Plant hard{SecondOrderZeroPlant(1.6, PolePair::real_poles(2.0, 6.0))};
    CHECK_FALSE(best_margin_search(hard, ControllerKind::PI, MarginKind::gain, cfg).has_value());
    // PID still can.
    CHECK(best_margin_search(hard, ControllerKind::PID, MarginKind::gain, cfg).has_value());
}

TEST_CASE("ki degradation probe") {
    OracleConfig cfg;
    for (MarginKind kind : {MarginKind::gain, MarginKind::phase}) {
        const KiDegradationProbe probe = ki_degradation_probe(kRef, kind, cfg);
        REQUIRE(probe.applicable);
        REQUIRE(probe.rows.size() == 4);
        CHECK(probe.non_increasing);
        CHECK(probe.strictly_decreasing);
        // The near-zero-ki entry sits near the searched optimum; the gain
        // anchor is backed off its feasibility edge so the heavier ki rows
        // remain stabilizing, which costs it a few percent.
        const auto best = best_margin_search(kRef, ControllerKind::PID, kind, cfg);
        REQUIRE(best);
        CHECK(probe.rows.front().second >= 0.9 * best->value);
        CHECK(probe.rows.front().second <= best->value * (1.0 + 1e-9));
        // The heaviest integral action costs a visible slice of margin.
        CHECK(probe.rows.back().second < probe.rows.front().second - 1e-3);
    }
    const Plant mp{SecondOrderMinPhasePlant(0.0, 1.0, PolePair::real_poles(1.0, 2.0))};
    CHECK_FALSE(ki_degradation_probe(mp, MarginKind::gain, cfg).applicable);
}

TEST_CASE("oracle config validation") {
    OracleConfig bad;
    bad.bisection_tol = 1.0;  // larger than boundary_eps
    CHECK_THROWS_AS(bad.validate(), InvalidInput);
    OracleConfig bad2;
    bad2.theta_grid = 2;
    CHECK_THROWS_AS(bad2.validate(), InvalidInput);
}
