#pragma once

// Brute-force verification: margins computed straight from the stability
// definitions for fixed gains, and grid-plus-refinement search over
// controller gains to probe the closed-form maxima.

#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "marginlab/margins.hpp"
#include "marginlab/plant.hpp"

namespace marginlab {

struct OracleConfig {
    double alpha_max_probe = 1e4;
    double bisection_tol = 1e-6;  // relative
    int theta_grid = 2048;        // probe points over (0, pi)
    int gain_grid = 64;           // coarse points per controller dimension
    double boundary_eps = 1e-4;   // inward offset when approaching set closures

    void validate() const {
        if (alpha_max_probe <= 1.0 || bisection_tol <= 0.0 || theta_grid < 8 || gain_grid < 4 ||
            boundary_eps <= 0.0 || bisection_tol >= boundary_eps)
            throw InvalidInput("bad oracle configuration");
    }
};

// Stability of the perturbed closed loop: Routh for gain perturbations
// (real coefficients), Bilharz for phase perturbations. Degenerate or
// marginal polynomials count as unstable; margins are strict suprema.
inline bool is_stabilizing(const Plant& plant, const PidGains& gains, const Perturbation& pert) {
    const ComplexPoly cp = closed_loop_charpoly(plant, gains, pert);
    if (cp.degree() < 1) return false;

    StabilityVerdict v;
    try {
        if (std::holds_alternative<GainPerturbation>(pert))
            v = routh_hurwitz_stable(to_real_poly(cp));
        else
            v = bilherz_stable(cp);
    } catch (const DegenerateInput&) {
        return false;
    } catch (const DegenerateLeadingCoefficient&) {
        return false;
    }
#ifndef NDEBUG
    // Cross-check against root locations away from the marginal band.
    if (!v.marginal) {
        double worst = -1e308;
        for (const Complex& root : complex_roots(cp)) worst = std::max(worst, root.real());
        if (std::abs(worst) > 1e-6 && (worst < 0.0) != v.stable)
            throw AgreementFailure("criterion vs roots disagreement");
    }
#endif
    return v.stable;
}

// sup{mu : the loop is stable for every alpha in [1, mu)}, located by a
// geometric sweep for the first instability and refined by bisection.
// Coefficients are continuous in alpha, so the first crossing bounds the
// supremum; any later re-stabilization is irrelevant to the definition.
inline double gain_margin_of(const Plant& plant, const PidGains& gains,
                             const OracleConfig& cfg = {}) {
    if (!is_stabilizing(plant, gains, GainPerturbation{1.0}))
        throw InvalidInput("gain_margin_of: gains do not stabilize the nominal plant");
    double prev = 1.0;
    double first_bad = -1.0;
    for (double a = 1.01; a <= cfg.alpha_max_probe; a *= 1.01) {
        if (!is_stabilizing(plant, gains, GainPerturbation{a})) {
            first_bad = a;
            break;
        }
        prev = a;
    }
    if (first_bad < 0.0) return std::numeric_limits<double>::infinity();
    double lo = prev, hi = first_bad;
    while ((hi - lo) > cfg.bisection_tol * lo) {
        const double mid = 0.5 * (lo + hi);
        if (is_stabilizing(plant, gains, GainPerturbation{mid}))
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

namespace detail {

// Stability-boundary events on the positive phase axis. Boundary contact
// happens when the perturbation matches the loop phase offset at a
// unit-gain crossover, at either frequency sign, so events sit at |phi|.
inline std::vector<double> phase_event_candidates(const Plant& plant, const PidGains& gains) {
    std::vector<double> events;
    if (!std::holds_alternative<SecondOrderZeroPlant>(plant)) return events;
    for (double w : crossover_frequencies(plant, gains))
        events.push_back(std::abs(phase_at_crossover(plant, gains, w)));
    return events;
}

// First loss of stability along one phase direction (sign = +1 or -1),
// probed on a uniform grid augmented with the known boundary events (so a
// short unstable sliver between grid points cannot be stepped over), then
// bisected. Returns pi when the whole half-range stays stable.
inline double one_sided_phase_margin(const Plant& plant, const PidGains& gains, int sign,
                                     const OracleConfig& cfg,
                                     const std::vector<double>& events = {}) {
    const int n = cfg.theta_grid;
    std::vector<double> probes;
    probes.reserve(static_cast<std::size_t>(n) + 2 * events.size());
    for (int k = 1; k <= n; ++k) probes.push_back(kPi * double(k) / (n + 1));
    for (double e : events) {
        if (e > 0.0 && e < kPi) {
            probes.push_back(e * (1.0 + 1e-9) + 1e-12);
            probes.push_back(e * (1.0 + 1e-6));
        }
    }
    std::sort(probes.begin(), probes.end());

    double prev = 0.0;
    bool found = false;
    double first_bad = 0.0;
    for (double th : probes) {
        if (!is_stabilizing(plant, gains, PhasePerturbation{sign * th})) {
            found = true;
            first_bad = th;
            break;
        }
        prev = th;
    }
    if (!found) return kPi;
    double lo = prev, hi = first_bad;
    for (int it = 0; it < 80 && (hi - lo) > cfg.bisection_tol; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (is_stabilizing(plant, gains, PhasePerturbation{sign * mid}))
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

inline std::optional<double> crossover_phase_margin(const Plant& plant, const PidGains& gains) {
    if (!std::holds_alternative<SecondOrderZeroPlant>(plant)) return std::nullopt;
    double best = kPi;
    for (double e : phase_event_candidates(plant, gains)) best = std::min(best, e);
    return best;
}

// Coarse-probe variant for grid scoring.
inline double gain_margin_quick(const Plant& plant, const PidGains& gains,
                                const OracleConfig& cfg) {
    double prev = 1.0;
    double first_bad = -1.0;
    for (double a = 1.02; a <= cfg.alpha_max_probe; a *= 1.02) {
        if (!is_stabilizing(plant, gains, GainPerturbation{a})) {
            first_bad = a;
            break;
        }
        prev = a;
    }
    if (first_bad < 0.0) return std::numeric_limits<double>::infinity();
    double lo = prev, hi = first_bad;
    for (int it = 0; it < 12; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (is_stabilizing(plant, gains, GainPerturbation{mid}))
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

}  // namespace detail

// Two-sided phase margin by bisection on both signs of the perturbation,
// cross-checked against the crossover computation where that applies.
inline double phase_margin_of(const Plant& plant, const PidGains& gains,
                              const OracleConfig& cfg = {}) {
    if (!is_stabilizing(plant, gains, PhasePerturbation{0.0}))
        throw InvalidInput("phase_margin_of: gains do not stabilize the nominal plant");
    const std::vector<double> events = detail::phase_event_candidates(plant, gains);
    const double up = detail::one_sided_phase_margin(plant, gains, +1, cfg, events);
    const double down = detail::one_sided_phase_margin(plant, gains, -1, cfg, events);
    const double margin = std::min(up, down);
    if (auto cx = detail::crossover_phase_margin(plant, gains)) {
        if (std::abs(*cx - margin) > 10.0 * cfg.bisection_tol) {
            char msg[160];
            std::snprintf(msg, sizeof msg,
                          "phase margin: bisection %.9g vs crossover %.9g at kp=%.9g ki=%.3g "
                          "kd=%.9g",
                          margin, *cx, gains.kp, gains.ki, gains.kd);
            throw AgreementFailure(msg);
        }
    }
    return margin;
}

struct SearchResult {
    PidGains gains;
    double value = 0.0;
};

namespace detail {

struct Box {
    double kp_lo, kp_hi;
    // kd range depends on kp; evaluated per point.
    std::function<std::pair<double, double>(double)> kd_range;
    std::vector<double> ki_values;
};

inline std::vector<Box> search_boxes(const Plant& plant, ControllerKind controller,
                                     const OracleConfig& cfg) {
    std::vector<Box> boxes;
    const double eps = cfg.boundary_eps;
    if (const auto* so = std::get_if<SecondOrderZeroPlant>(&plant)) {
        const double z = so->z, sum = so->poles.sum(), prod = so->poles.product();
        const bool pid_like = controller == ControllerKind::PID || controller == ControllerKind::PD;
        if (pid_like) {
            const bool mixed = !so->poles.complex_pair && so->z > so->poles.min_pole() &&
                               so->z < so->poles.max_pole();
            Box b;
            if (!mixed) {
                b.kp_lo = std::max(sum - z, 1e-6) * (1.0 + eps);
                b.kp_hi = prod / z * (1.0 - eps);
                b.kd_range = [z, sum, eps](double kp) {
                    return std::make_pair(-1.0 * (1.0 - eps), (kp - sum) / z * (1.0 + (kp > sum ? -eps : eps)));
                };
                b.ki_values = (controller == ControllerKind::PID)
                                  ? std::vector<double>{-1e-6 * prod, -1e-4 * prod, -1e-2 * prod}
                                  : std::vector<double>{0.0};
            } else {
                b.kp_lo = prod / z * (1.0 + eps);
                b.kp_hi = (sum - z) * (1.0 - eps);
                b.kd_range = [z, sum, eps](double kp) {
                    return std::make_pair((kp - sum) / z * (1.0 - eps), -1.0 * (1.0 + eps));
                };
                b.ki_values = (controller == ControllerKind::PID)
                                  ? std::vector<double>{1e-6 * prod, 1e-4 * prod, 1e-2 * prod}
                                  : std::vector<double>{0.0};
            }
            if (b.kp_lo < b.kp_hi) boxes.push_back(std::move(b));
        } else {
            if (sum < prod / z) {
                Box b;
                b.kp_lo = sum * (1.0 + eps);
                b.kp_hi = prod / z * (1.0 - eps);
                b.kd_range = [](double) { return std::make_pair(0.0, 0.0); };
                b.ki_values = (controller == ControllerKind::PI)
                                  ? std::vector<double>{-1e-6 * prod, -1e-4 * prod, -1e-2 * prod}
                                  : std::vector<double>{0.0};
                boxes.push_back(std::move(b));
            }
        }
    } else if (const auto* fo = std::get_if<FirstOrderPlant>(&plant)) {
        const double p = fo->p, b0 = fo->beta0, b1 = fo->beta1;
        const bool wants_derivative =
            controller == ControllerKind::PD || controller == ControllerKind::PID;
        if (wants_derivative && b0 != 0.0) return boxes;  // improper loop
        const bool has_ki = controller == ControllerKind::PI || controller == ControllerKind::PID;
        auto simple_box = [&](double lo, double hi, double ki_sign) {
            Box b;
            b.kp_lo = std::min(lo, hi);
            b.kp_hi = std::max(lo, hi);
            b.kd_range = [](double) { return std::make_pair(0.0, 0.0); };
            b.ki_values = has_ki ? std::vector<double>{ki_sign * 1e-6 * p, ki_sign * 1e-4 * p}
                                 : std::vector<double>{0.0};
            return b;
        };
        if (b0 > 0.0 && b1 < 0.0) {
            // Both signs of 1 + beta0*kp give feasible families; the
            // integral-gain sign flips between them (beta1*ki > 0 in one,
            // < 0 in the other).
            if (std::abs(b1) / b0 > p)
                boxes.push_back(
                    simple_box(-1.0 / b0 * (1.0 - eps), -p / std::abs(b1) * (1.0 + eps), -1.0));
            const double lo = 2.0 * std::min(-1.0 / b0, -std::sqrt(p / (b0 * std::abs(b1))));
            boxes.push_back(simple_box(lo, -1.0 / b0 * (1.0 + eps), 1.0));
        } else if (b0 > 0.0) {
            // Minimum phase, biproper: kp just needs beta1*kp > p.
            boxes.push_back(simple_box(p / b1 * (1.0 + eps), p / b1 * 200.0, 1.0));
        } else {
            // Strictly proper: beta1*kp > p family, and with derivative
            // action also the sign-flipped family beta1*kd < -1.
            boxes.push_back(simple_box(p / b1 * (1.0 + eps), p / b1 * 200.0,
                                       b1 > 0.0 ? 1.0 : -1.0));
            if (wants_derivative) {
                Box b;
                b.kp_lo = std::min(-p / b1, p / b1) * (1.0 - eps);
                b.kp_hi = std::max(-p / b1, p / b1) * (1.0 - eps);
                b.kd_range = [b1, eps](double) {
                    const double edge = -1.0 / b1;
                    return std::make_pair(std::min(edge * (1.0 + eps), edge * 40.0),
                                          std::max(edge * (1.0 + eps), edge * 40.0));
                };
                b.ki_values = has_ki
                                  ? std::vector<double>{(b1 > 0.0 ? -1.0 : 1.0) * 1e-6 * p}
                                  : std::vector<double>{0.0};
                boxes.push_back(std::move(b));
            }
        }
    }
    return boxes;
}

}  // namespace detail

// Coarse grid over the feasible box followed by pattern refinement.
// Scoring uses the definition-level evaluators; the returned value is
// re-computed with the full evaluator on the winning gains, so the result
// is a guaranteed-achievable lower bound on the supremum.
inline std::optional<SearchResult> best_margin_search(const Plant& plant,
                                                      ControllerKind controller, MarginKind kind,
                                                      const OracleConfig& cfg = {}) {
    cfg.validate();
    const std::vector<detail::Box> boxes = detail::search_boxes(plant, controller, cfg);
    if (boxes.empty()) return std::nullopt;

    const bool second_order = std::holds_alternative<SecondOrderZeroPlant>(plant);
    OracleConfig quick = cfg;
    quick.theta_grid = 256;

    auto rate = [&](const PidGains& g) -> double {
        if (!is_stabilizing(plant, g, GainPerturbation{1.0})) return -1.0;
        if (kind == MarginKind::gain) return detail::gain_margin_quick(plant, g, cfg);
        if (second_order) {
            if (auto cx = detail::crossover_phase_margin(plant, g)) return *cx;
            return -1.0;
        }
        const double up = detail::one_sided_phase_margin(plant, g, +1, quick);
        const double down = detail::one_sided_phase_margin(plant, g, -1, quick);
        return std::min(up, down);
    };

    std::optional<SearchResult> best;
    auto consider = [&](const PidGains& g) {
        const double v = rate(g);
        if (v >= 0.0 && (!best || v > best->value)) best = SearchResult{g, v};
    };
    auto make_gains = [&](double kp, double ki, double kd) {
        switch (controller) {
            case ControllerKind::P: return PidGains::p(kp);
            case ControllerKind::PI: return PidGains::pi(kp, ki);
            case ControllerKind::PD: return PidGains::pd(kp, kd);
            default: return PidGains::pid(kp, ki, kd);
        }
    };
    const bool has_kd = controller == ControllerKind::PD || controller == ControllerKind::PID;

    const int n = cfg.gain_grid;
    for (const auto& box : boxes) {
        for (int i = 0; i < n; ++i) {
            const double kp = box.kp_lo + (box.kp_hi - box.kp_lo) * (i + 0.5) / n;
            auto [kd_lo, kd_hi] = box.kd_range(kp);
            const int m = has_kd ? n : 1;
            for (int j = 0; j < m; ++j) {
                const double kd = has_kd ? kd_lo + (kd_hi - kd_lo) * (j + 0.5) / m : 0.0;
                for (double ki : box.ki_values) consider(make_gains(kp, ki, kd));
            }
        }
    }
    if (!best) return std::nullopt;

    // Pattern refinement: three rounds, steps shrinking by four.
    double step_kp = 0.0, step_kd = 0.0;
    for (const auto& box : boxes) step_kp = std::max(step_kp, (box.kp_hi - box.kp_lo) / n);
    {
        auto [kd_lo, kd_hi] = boxes.front().kd_range(best->gains.kp);
        step_kd = std::abs(kd_hi - kd_lo) / n;
    }
    double step_ki = std::abs(best->gains.ki) > 0.0 ? std::abs(best->gains.ki) * 0.5 : 0.0;
    for (int round = 0; round < 3; ++round) {
        for (int iter = 0; iter < 24; ++iter) {
            const SearchResult cur = *best;
            const double deltas[4] = {-2.0, -1.0, 1.0, 2.0};
            for (double d : deltas) {
                consider(make_gains(cur.gains.kp + d * step_kp, cur.gains.ki, cur.gains.kd));
                if (has_kd && step_kd > 0.0)
                    consider(make_gains(cur.gains.kp, cur.gains.ki, cur.gains.kd + d * step_kd));
                if (step_ki > 0.0)
                    consider(make_gains(cur.gains.kp, cur.gains.ki + d * step_ki, cur.gains.kd));
            }
            if (!(best->value > cur.value * (1.0 + 1e-12))) break;
        }
        step_kp /= 4.0;
        step_kd /= 4.0;
        step_ki /= 4.0;
    }

    // Final value through the full evaluator.
    best->value = (kind == MarginKind::gain) ? gain_margin_of(plant, best->gains, cfg)
                                             : phase_margin_of(plant, best->gains, cfg);
    return best;
}

struct KiDegradationProbe {
    bool applicable = false;
    PidGains anchor;                               // optimal (kp, kd), ki swept
    std::vector<std::pair<double, double>> rows;   // (ki, margin)
    bool non_increasing = false;
    bool strictly_decreasing = false;
};

// Sweeps the integral gain away from zero while holding the optimizing
// (kp, kd) fixed; integral action can only shrink the margins. The
// searched optimum can sit on a feasibility edge where heavy integral
// action destroys nominal stability outright, so the anchor is backed off
// toward the feasible-box interior until the whole sweep stabilizes.
inline KiDegradationProbe ki_degradation_probe(const Plant& plant, MarginKind kind,
                                               const OracleConfig& cfg = {}) {
    KiDegradationProbe probe;
    const auto* so = std::get_if<SecondOrderZeroPlant>(&plant);
    if (!so) return probe;

    std::optional<SearchResult> best = best_margin_search(plant, ControllerKind::PID, kind, cfg);
    if (!best) return probe;
    probe.applicable = true;

    const double prod = so->poles.product();
    const double sign = (best->gains.ki > 0.0) ? 1.0 : -1.0;
    const std::vector<double> levels = {1e-6, 0.01, 0.05, 0.1};

    const std::vector<detail::Box> boxes = detail::search_boxes(plant, ControllerKind::PID, cfg);
    PidGains mid = best->gains;
    if (!boxes.empty()) {
        mid.kp = 0.5 * (boxes.front().kp_lo + boxes.front().kp_hi);
        auto [kd_lo, kd_hi] = boxes.front().kd_range(mid.kp);
        mid.kd = 0.5 * (kd_lo + kd_hi);
    }
    PidGains anchor = best->gains;
    for (int step = 0; step <= 10; ++step) {
        const double t = 0.1 * step;
        anchor.kp = (1.0 - t) * best->gains.kp + t * mid.kp;
        anchor.kd = (1.0 - t) * best->gains.kd + t * mid.kd;
        bool all_ok = true;
        for (double lvl : levels) {
            PidGains g = anchor;
            g.ki = sign * lvl * prod;
            all_ok = all_ok && is_stabilizing(plant, g, GainPerturbation{1.0});
        }
        if (all_ok) break;
    }
    probe.anchor = anchor;

    for (double lvl : levels) {
        PidGains g = anchor;
        g.ki = sign * lvl * prod;
        double value = -1.0;
        if (is_stabilizing(plant, g, GainPerturbation{1.0}))
            value = (kind == MarginKind::gain) ? gain_margin_of(plant, g, cfg)
                                               : phase_margin_of(plant, g, cfg);
        probe.rows.emplace_back(g.ki, value);
    }
    probe.non_increasing = true;
    probe.strictly_decreasing = true;
    for (std::size_t i = 1; i < probe.rows.size(); ++i) {
        const double a = probe.rows[i - 1].second, b = probe.rows[i].second;
        if (b > a + 1e-12) probe.non_increasing = false;
        if (!(b < a - 1e-12)) probe.strictly_decreasing = false;
    }
    return probe;
}

}  // namespace marginlab
