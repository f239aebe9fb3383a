#pragma once

// Closed-form maximal gain and phase margins for first- and second-order
// unstable plants under P/PI/PD/PID control, the optimal-LTI baselines,
// the optimizing gain triples, and the inequality diagnostics relating
// the two.

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "marginlab/plant.hpp"

namespace marginlab {

enum class MarginKind { gain, phase };
enum class MarginController { P, PI, PD, PID, LTI };
enum class Attainment { attained, asymptotic_boundary, infinite, none };

inline std::string to_string(MarginController c) {
    switch (c) {
        case MarginController::P: return "P";
        case MarginController::PI: return "PI";
        case MarginController::PD: return "PD";
        case MarginController::PID: return "PID";
        default: return "LTI";
    }
}

inline std::string to_string(Attainment a) {
    switch (a) {
        case Attainment::attained: return "attained";
        case Attainment::asymptotic_boundary: return "asymptotic_boundary";
        case Attainment::infinite: return "infinite";
        default: return "none";
    }
}

inline double ratio_to_db(double r) { return 20.0 * std::log10(r); }
inline double rad_to_deg(double r) { return r * 180.0 / kPi; }

struct MarginReport {
    MarginKind kind = MarginKind::gain;
    MarginController controller = MarginController::PID;
    double value = std::numeric_limits<double>::quiet_NaN();  // ratio or radians
    std::string branch;
    std::optional<PidGains> optimizing_gains;
    Attainment attainment = Attainment::none;

    bool is_finite() const { return attainment == Attainment::attained || attainment == Attainment::asymptotic_boundary; }
    // dB for gain margins, degrees for phase margins; +inf / NaN pass through.
    double display() const {
        if (attainment == Attainment::infinite)
            return kind == MarginKind::gain ? std::numeric_limits<double>::infinity()
                                            : rad_to_deg(value);
        if (attainment == Attainment::none) return std::numeric_limits<double>::quiet_NaN();
        return kind == MarginKind::gain ? ratio_to_db(value) : rad_to_deg(value);
    }

    static MarginReport finite(MarginKind k, MarginController c, double v, std::string branch,
                               std::optional<PidGains> gains, Attainment att) {
        MarginReport r;
        r.kind = k;
        r.controller = c;
        r.value = v;
        r.branch = std::move(branch);
        r.optimizing_gains = std::move(gains);
        r.attainment = att;
        return r;
    }
    static MarginReport infinite_margin(MarginKind k, MarginController c, std::string branch) {
        MarginReport r;
        r.kind = k;
        r.controller = c;
        r.value = (k == MarginKind::phase) ? kPi : std::numeric_limits<double>::infinity();
        r.branch = std::move(branch);
        r.attainment = (k == MarginKind::phase) ? Attainment::asymptotic_boundary : Attainment::infinite;
        return r;
    }
    static MarginReport not_stabilizable(MarginKind k, MarginController c, std::string branch) {
        MarginReport r;
        r.kind = k;
        r.controller = c;
        r.branch = std::move(branch);
        r.attainment = Attainment::none;
        return r;
    }
};

// Root of a margin cubic with its guaranteed bracket and residual.
struct CubicRootCertificate {
    double root = 0.0;
    std::pair<double, double> bracket{0.0, 0.0};
    double residual = 0.0;
    RealPoly polynomial;
};

namespace detail {

// Unique root of a cubic inside an open interval; if an endpoint sits
// within 1e-10 of a root the bracket is widened by 1e-8 relative first.
inline std::optional<CubicRootCertificate> try_root_in_interval(const RealPoly& cubic, double lo,
                                                                double hi) {
    double a = std::min(lo, hi), b = std::max(lo, hi);
    const std::vector<double> roots = solve_cubic_real_roots(cubic);
    for (double r : roots) {
        const double span = std::max({std::abs(a), std::abs(b), 1.0});
        if (std::abs(r - a) < 1e-10 * span || std::abs(r - b) < 1e-10 * span) {
            a -= 1e-8 * span;
            b += 1e-8 * span;
            break;
        }
    }
    std::optional<double> found;
    for (double r : roots) {
        if (r > a && r < b) {
            if (found) throw RootNotBracketed("margin cubic has two roots inside its interval");
            found = r;
        }
    }
    if (!found) return std::nullopt;
    CubicRootCertificate cert;
    cert.root = *found;
    cert.bracket = {a, b};
    cert.residual = cubic.eval(*found);
    cert.polynomial = cubic;
    return cert;
}

// The single-sided branches guarantee existence strictly inside.
inline CubicRootCertificate root_in_interval(const RealPoly& cubic, double lo, double hi) {
    auto cert = try_root_in_interval(cubic, lo, hi);
    if (!cert) throw RootNotBracketed("margin cubic has no root inside its interval");
    return *cert;
}

inline bool nearly_equal(double x, double y, double rel = 1e-12) {
    return std::abs(x - y) <= rel * std::max({std::abs(x), std::abs(y), 1.0});
}

}  // namespace detail

// ---------------------------------------------------------------------------
// First-order plants
// ---------------------------------------------------------------------------

inline std::pair<MarginReport, MarginReport> first_order_margins(const FirstOrderPlant& plant,
                                                                 ControllerKind controller) {
    const bool wants_derivative =
        controller == ControllerKind::PD || controller == ControllerKind::PID;
    if (wants_derivative && plant.beta0 != 0.0)
        throw ImproperLoop("derivative control requires beta0 = 0 on a first-order plant");

    const MarginController mc = controller == ControllerKind::P    ? MarginController::P
                                : controller == ControllerKind::PI ? MarginController::PI
                                : controller == ControllerKind::PD ? MarginController::PD
                                                                   : MarginController::PID;

    if (plant.beta0 == 0.0) {
        MarginReport gain = MarginReport::infinite_margin(MarginKind::gain, mc, "beta0=0");
        MarginReport phase = MarginReport::finite(
            MarginKind::phase, mc, wants_derivative ? kPi : kPi / 2.0, "beta0=0", std::nullopt,
            Attainment::asymptotic_boundary);
        return {gain, phase};
    }
    if (plant.beta1 > 0.0) {
        MarginReport gain = MarginReport::infinite_margin(MarginKind::gain, mc, "beta1>0");
        MarginReport phase = MarginReport::finite(MarginKind::phase, mc, kPi, "beta1>0",
                                                  std::nullopt, Attainment::asymptotic_boundary);
        return {gain, phase};
    }

    // beta0 > 0, beta1 < 0: nonminimum-phase with zero at |beta1|/beta0.
    const double z = plant.zero();
    const double p = plant.p;
    if (detail::nearly_equal(z, p))
        throw NotStabilizable("first-order zero coincides with the unstable pole");
    auto make_gains = [&](double kp) {
        return controller == ControllerKind::P ? PidGains::p(kp) : PidGains::pi(kp, 0.0);
    };
    const double zr = z / p;
    const double gain_value = std::max(zr, 1.0 / zr);
    const double gain_kp = (zr >= 1.0) ? -p / std::abs(plant.beta1) : -1.0 / plant.beta0;
    MarginReport gain = MarginReport::finite(
        MarginKind::gain, mc, gain_value, zr >= 1.0 ? "z>=p" : "z<p", make_gains(gain_kp),
        Attainment::asymptotic_boundary);

    const double cosv = 2.0 * std::sqrt(plant.beta0 * std::abs(plant.beta1) / p) /
                        (plant.beta0 + std::abs(plant.beta1) / p);
    const double kp_star = -std::sqrt(p / (plant.beta0 * std::abs(plant.beta1)));
    // A pure P controller sits strictly inside the feasible set at kp*, so
    // its optimum is attained; the PI optimum needs ki -> 0.
    MarginReport phase = MarginReport::finite(
        MarginKind::phase, mc, std::acos(cosv), "beta1<0", make_gains(kp_star),
        controller == ControllerKind::P ? Attainment::attained : Attainment::asymptotic_boundary);
    return {gain, phase};
}

struct FirstOrderRelations {
    double log10_gain_lti = 0.0;
    double log10_gain_pi_doubled = 0.0;
    double phase_lti = 0.0;
    double phase_pi_doubled = 0.0;
    double cos_relation_residual = 0.0;  // theta_pi vs acos(2*sqrt(k)/(1+k))
};

// ---------------------------------------------------------------------------
// LTI baselines
// ---------------------------------------------------------------------------

inline std::pair<MarginReport, MarginReport> lti_optimal_margins(const Plant& plant) {
    auto infinite = [] {
        MarginReport gain = MarginReport::infinite_margin(MarginKind::gain, MarginController::LTI,
                                                          "minimum-phase");
        MarginReport phase =
            MarginReport::finite(MarginKind::phase, MarginController::LTI, kPi, "minimum-phase",
                                 std::nullopt, Attainment::asymptotic_boundary);
        return std::make_pair(gain, phase);
    };

    double gamma = 0.0;
    if (const auto* fo = std::get_if<FirstOrderPlant>(&plant)) {
        if (fo->minimum_phase()) return infinite();
        const double z = fo->zero();
        if (detail::nearly_equal(z, fo->p))
            throw NotStabilizable("zero coincides with an unstable pole");
        gamma = (z + fo->p) / std::abs(z - fo->p);
    } else if (const auto* so = std::get_if<SecondOrderZeroPlant>(&plant)) {
        const double z = so->z;
        if (so->poles.complex_pair) {
            const double sg = so->poles.a, nu = so->poles.b;
            gamma = ((sg + z) * (sg + z) + nu * nu) / ((sg - z) * (sg - z) + nu * nu);
        } else {
            const double p1 = so->poles.a, p2 = so->poles.b;
            if (detail::nearly_equal(z, p1) || detail::nearly_equal(z, p2))
                throw NotStabilizable("zero coincides with an unstable pole");
            gamma = std::abs((p1 + z) * (p2 + z) / ((p1 - z) * (p2 - z)));
        }
    } else {
        return infinite();
    }

    const double km = ((gamma + 1.0) / (gamma - 1.0)) * ((gamma + 1.0) / (gamma - 1.0));
    const double tm = 2.0 * std::asin(1.0 / gamma);
    MarginReport gain = MarginReport::finite(MarginKind::gain, MarginController::LTI, km,
                                             "nonminimum-phase", std::nullopt,
                                             Attainment::asymptotic_boundary);
    MarginReport phase = MarginReport::finite(MarginKind::phase, MarginController::LTI, tm,
                                              "nonminimum-phase", std::nullopt,
                                              Attainment::asymptotic_boundary);
    return {gain, phase};
}

inline FirstOrderRelations first_order_relations(const FirstOrderPlant& plant) {
    if (!(plant.beta0 > 0.0 && plant.beta1 < 0.0))
        throw InvalidInput("first_order_relations wants beta0 > 0, beta1 < 0");
    auto [gain, phase] = first_order_margins(plant, ControllerKind::PI);
    auto [lti_gain, lti_phase] = lti_optimal_margins(Plant(plant));
    FirstOrderRelations rel;
    rel.log10_gain_lti = std::log10(lti_gain.value);
    rel.log10_gain_pi_doubled = 2.0 * std::log10(gain.value);
    rel.phase_lti = lti_phase.value;
    rel.phase_pi_doubled = 2.0 * phase.value;
    const double k = gain.value;
    rel.cos_relation_residual = phase.value - std::acos(2.0 * std::sqrt(k) / (1.0 + k));
    return rel;
}

// ---------------------------------------------------------------------------
// Second-order minimum-phase plants
// ---------------------------------------------------------------------------

inline std::pair<MarginReport, MarginReport> second_order_minphase_margins(
    const SecondOrderMinPhasePlant& plant, ControllerKind controller) {
    if (controller == ControllerKind::PI)
        throw InvalidInput("PI margins are not characterized for this plant family");
    const bool strictly_proper = plant.beta0 == 0.0;
    const MarginController mc = controller == ControllerKind::P    ? MarginController::P
                                : controller == ControllerKind::PD ? MarginController::PD
                                                                   : MarginController::PID;
    if (controller == ControllerKind::P) {
        if (strictly_proper)
            return {MarginReport::not_stabilizable(MarginKind::gain, mc, "beta0=0"),
                    MarginReport::not_stabilizable(MarginKind::phase, mc, "beta0=0")};
        return {MarginReport::infinite_margin(MarginKind::gain, mc, "beta0!=0"),
                MarginReport::finite(MarginKind::phase, mc, kPi / 2.0, "beta0!=0", std::nullopt,
                                     Attainment::asymptotic_boundary)};
    }
    MarginReport gain = MarginReport::infinite_margin(MarginKind::gain, mc,
                                                      strictly_proper ? "beta0=0" : "beta0!=0");
    MarginReport phase = MarginReport::finite(
        MarginKind::phase, mc, strictly_proper ? kPi / 2.0 : kPi,
        strictly_proper ? "beta0=0" : "beta0!=0", std::nullopt, Attainment::asymptotic_boundary);
    return {gain, phase};
}

// ---------------------------------------------------------------------------
// Second-order plants with a nonminimum-phase zero
// ---------------------------------------------------------------------------

namespace detail {

inline void require_zero_off_poles(const SecondOrderZeroPlant& plant) {
    if (plant.poles.complex_pair) return;  // (p1-z)(p2-z) = |p-z|^2 > 0 always
    if (nearly_equal(plant.z, plant.poles.a) || nearly_equal(plant.z, plant.poles.b))
        throw NotStabilizable("zero coincides with a pole; margins vanish");
}

}  // namespace detail

inline MarginReport pid_gain_margin(const SecondOrderZeroPlant& plant) {
    detail::require_zero_off_poles(plant);
    const double z = plant.z;
    const double sum = plant.poles.sum();
    const double prod = plant.poles.product();

    auto kp_interval_value = [&] {  // binding: kp window collapses
        return prod / (z * sum - z * z);
    };
    auto kd_interval_value = [&] {  // binding: kd window collapses
        return z * z / (z * sum - prod);
    };

    if (plant.poles.complex_pair) {
        const double dist = std::abs(Complex(plant.poles.a, plant.poles.b) - Complex(z, 0.0));
        const double mod = plant.poles.modulus();
        if (dist < z) {
            if (z <= mod) {
                PidGains g = PidGains::pid(sum - z, 0.0, -z * (sum - z) / prod);
                return MarginReport::finite(MarginKind::gain, MarginController::PID,
                                            kp_interval_value(), "|p-z|<z,z<=|p|", g,
                                            Attainment::asymptotic_boundary);
            }
            PidGains g = PidGains::pid((z * sum - prod) / z, 0.0, (prod - z * sum) / (z * z));
            return MarginReport::finite(MarginKind::gain, MarginController::PID,
                                        kd_interval_value(), "|p-z|<z,z>|p|", g,
                                        Attainment::asymptotic_boundary);
        }
        if (z < sum) {
            PidGains g = PidGains::pid(sum - z, 0.0, -z * (sum - z) / prod);
            return MarginReport::finite(MarginKind::gain, MarginController::PID,
                                        kp_interval_value(), "|p-z|>=z,z<p1+p2", g,
                                        Attainment::asymptotic_boundary);
        }
        const double kp = prod * sum / (prod + z * z);
        PidGains g = PidGains::pid(kp, 0.0, (kp - sum) / z);
        return MarginReport::finite(MarginKind::gain, MarginController::PID,
                                    (prod + z * z) / (z * sum), "|p-z|>=z,z>=p1+p2", g,
                                    Attainment::asymptotic_boundary);
    }

    const double pmin = plant.poles.min_pole();
    const double pmax = plant.poles.max_pole();
    if (z < pmin) {
        PidGains g = PidGains::pid(sum - z, 0.0, -z * (sum - z) / prod);
        return MarginReport::finite(MarginKind::gain, MarginController::PID, kp_interval_value(),
                                    "z<min(p1,p2)", g, Attainment::asymptotic_boundary);
    }
    if (z > pmax) {
        PidGains g = PidGains::pid((z * sum - prod) / z, 0.0, (prod - z * sum) / (z * z));
        return MarginReport::finite(MarginKind::gain, MarginController::PID, kd_interval_value(),
                                    "z>max(p1,p2)", g, Attainment::asymptotic_boundary);
    }
    // min < z < max: the all-negative-coefficients regime, kd < -1, ki > 0.
    if (z <= std::sqrt(prod)) {
        PidGains g = PidGains::pid(prod / z, 0.0, -1.0);
        return MarginReport::finite(MarginKind::gain, MarginController::PID,
                                    (z * sum - z * z) / prod, "min<z<=sqrt(p1p2)", g,
                                    Attainment::asymptotic_boundary);
    }
    PidGains g = PidGains::pid(prod / z, 0.0, -1.0);
    return MarginReport::finite(MarginKind::gain, MarginController::PID,
                                (z * sum - prod) / (z * z), "sqrt(p1p2)<z<max", g,
                                Attainment::asymptotic_boundary);
}

namespace detail {

inline RealPoly kp_margin_cubic(const SecondOrderZeroPlant& plant) {
    const double z = plant.z, sum = plant.poles.sum(), prod = plant.poles.product();
    const double sumsq = plant.poles.sum_of_squares();
    return RealPoly{1.0, sum - z, (z - sum) * prod / z, (z * z - sumsq) * prod / z};
}

inline RealPoly kd_margin_cubic(const SecondOrderZeroPlant& plant) {
    const double z = plant.z, sum = plant.poles.sum(), prod = plant.poles.product();
    const double sumsq = plant.poles.sum_of_squares();
    const double d21 = (prod - sum * z) / (z * z);
    const double d0 = (sumsq - (prod / z) * (prod / z)) / (z * z);
    return RealPoly{1.0, d21, d21, d0};
}

inline double omega_hat(const SecondOrderZeroPlant& plant, double kp) {
    const double z = plant.z, prod = plant.poles.product();
    const double sumsq = plant.poles.sum_of_squares();
    const double x = (prod * prod - z * z * kp * kp) / (kp * kp + z * z - sumsq);
    return std::sqrt(std::max(x, 0.0));
}

inline double omega_tilde(const SecondOrderZeroPlant& plant, double kd) {
    const double z = plant.z, prod = plant.poles.product();
    const double sumsq = plant.poles.sum_of_squares();
    const double x = (z * z * kd * kd + (prod / z) * (prod / z) - sumsq) / (1.0 - kd * kd);
    return std::sqrt(std::max(x, 0.0));
}

// Phase at the kp-parameterized boundary point (kp, 0, -1). A vanishing
// or imaginary crossover means the family produces no boundary event
// there; the phase offset limit is zero.
inline double theta_hat(const SecondOrderZeroPlant& plant, double kp) {
    const double w = omega_hat(plant, kp);
    if (!(w > 0.0)) return 0.0;
    return phase_at_crossover(Plant(plant), PidGains::pid(kp, 0.0, -1.0), w, 1e-5);
}

// Phase at the kd-parameterized boundary point (p1p2/z, 0, kd).
inline double theta_tilde(const SecondOrderZeroPlant& plant, double kd) {
    const double kp = plant.poles.product() / plant.z;
    const double w = omega_tilde(plant, kd);
    if (!(w > 0.0)) return 0.0;
    return phase_at_crossover(Plant(plant), PidGains::pid(kp, 0.0, kd), w, 1e-5);
}

}  // namespace detail

struct PidPhaseMargin {
    MarginReport report;
    std::vector<CubicRootCertificate> certificates;
};

inline PidPhaseMargin pid_phase_margin(const SecondOrderZeroPlant& plant) {
    detail::require_zero_off_poles(plant);
    const double z = plant.z;
    const double sum = plant.poles.sum();
    const double prod = plant.poles.product();
    const RealPoly mkp = detail::kp_margin_cubic(plant);
    const RealPoly nkd = detail::kd_margin_cubic(plant);

    PidPhaseMargin out;
    // Both one-parameter boundary families, used directly by the
    // designated branch and as fallbacks for each other: near branch ties
    // (and for strongly oscillatory pole pairs) the designated cubic's
    // stationary point can leave its interval, in which case the family
    // is monotone there and the supremum moves to an endpoint or to the
    // other family's stationary point.
    struct Candidate {
        double value = -1.0;
        PidGains gains;
        std::string tag;
    };
    auto kp_stationary = [&]() -> Candidate {
        Candidate c;
        if (auto cert = detail::try_root_in_interval(mkp, sum - z, prod / z)) {
            c.value = std::abs(detail::theta_hat(plant, cert->root));
            c.gains = PidGains::pid(cert->root, 0.0, -1.0);
            out.certificates.push_back(*cert);
        }
        return c;
    };
    auto kd_stationary = [&]() -> Candidate {
        Candidate c;
        if (auto cert = detail::try_root_in_interval(nkd, -1.0, prod / (z * z) - sum / z)) {
            const double theta = detail::theta_tilde(plant, cert->root);
            if (theta != 0.0) {
                c.value = std::abs(theta);
                c.gains = PidGains::pid(prod / z, 0.0, cert->root);
                out.certificates.push_back(*cert);
            }
        }
        return c;
    };
    auto kp_endpoints = [&]() -> Candidate {
        const double lo = sum - z, hi = prod / z;
        const double delta = 1e-7 * std::max(1.0, std::abs(hi - lo));
        const double k1 = std::min(lo, hi) + delta, k2 = std::max(lo, hi) - delta;
        const double t1 = detail::theta_hat(plant, k1), t2 = detail::theta_hat(plant, k2);
        Candidate c;
        c.value = std::max(std::abs(t1), std::abs(t2));
        c.gains = PidGains::pid(std::abs(t1) >= std::abs(t2) ? k1 : k2, 0.0, -1.0);
        c.tag = ",endpoint-supremum";
        return c;
    };
    auto finish = [&](Candidate primary, Candidate fallback, Candidate last,
                      const std::string& branch) {
        Candidate pick = primary;
        std::string tag;
        if (pick.value < 0.0) {
            pick = fallback;
            tag = fallback.tag.empty() ? ",other-family" : fallback.tag;
        }
        if (pick.value <= 0.0) {
            pick = last;
            tag = last.tag;
        }
        out.report =
            MarginReport::finite(MarginKind::phase, MarginController::PID, pick.value,
                                 branch + tag, pick.gains, Attainment::asymptotic_boundary);
    };
    auto kp_case = [&](const std::string& branch) {
        finish(kp_stationary(), kd_stationary(), kp_endpoints(), branch);
    };
    auto kd_case = [&](const std::string& branch) {
        finish(kd_stationary(), kp_stationary(), kp_endpoints(), branch);
    };

    if (plant.poles.complex_pair) {
        const double dist = std::abs(Complex(plant.poles.a, plant.poles.b) - Complex(z, 0.0));
        const double mod = plant.poles.modulus();
        if (dist < z) {
            if (z <= mod)
                kp_case("|p-z|<z,z<=|p|");
            else
                kd_case("|p-z|<z,z>|p|");
        } else {
            kp_case("|p-z|>=z");
        }
        return out;
    }

    const double pmin = plant.poles.min_pole();
    const double pmax = plant.poles.max_pole();
    if (z < pmin) {
        kp_case("z<min(p1,p2)");
        return out;
    }
    if (z > pmax) {
        kd_case("z>max(p1,p2)");
        return out;
    }

    // min < z < max: the two boundary families compete over swapped
    // intervals. Either cubic may land outside its stated interval for
    // part of this regime; such a candidate has no interior stationary
    // point and is skipped.
    const auto ckp = detail::try_root_in_interval(mkp, prod / z, sum - z);
    const auto ckd = detail::try_root_in_interval(nkd, prod / (z * z) - sum / z, -1.0);
    if (!ckp && !ckd) throw RootNotBracketed("no boundary-family stationary point found");
    std::string branch = "min<z<max";
    double th_kp = 0.0, th_kd = 0.0;
    if (ckp) {
        th_kp = detail::theta_hat(plant, ckp->root);
        out.certificates.push_back(*ckp);
        if (th_kp < 0.0) branch += ",theta_hat<0";
    } else {
        branch += ",kp-root-outside";
    }
    if (ckd) {
        th_kd = detail::theta_tilde(plant, ckd->root);
        out.certificates.push_back(*ckd);
    } else {
        branch += ",kd-root-outside";
    }
    if (ckp && (!ckd || std::abs(th_kp) >= std::abs(th_kd))) {
        out.report = MarginReport::finite(MarginKind::phase, MarginController::PID,
                                          std::abs(th_kp), branch,
                                          PidGains::pid(ckp->root, 0.0, -1.0),
                                          Attainment::asymptotic_boundary);
    } else {
        out.report = MarginReport::finite(MarginKind::phase, MarginController::PID,
                                          std::abs(th_kd), branch,
                                          PidGains::pid(prod / z, 0.0, ckd->root),
                                          Attainment::asymptotic_boundary);
    }
    return out;
}

struct PiMargins {
    MarginReport gain;
    MarginReport phase;
    bool applicable = false;
    double omega0 = 0.0;              // stationary crossover, from the quartic
    double omega0_closed_form = 0.0;  // same frequency from the explicit radical
    double kp_star = 0.0;
    RealPoly q;                       // the quartic in omega whose root is omega0
};

// PI (and plain P) margins. Stabilizability needs p1+p2 < p1p2/z; below
// that threshold both reports carry attainment none.
inline PiMargins pi_margins(const SecondOrderZeroPlant& plant) {
    PiMargins out;
    const double z = plant.z;
    const double sum = plant.poles.sum();
    const double prod = plant.poles.product();
    if (!(sum < prod / z)) {
        out.gain = MarginReport::not_stabilizable(MarginKind::gain, MarginController::PI,
                                                  "p1+p2>=p1p2/z");
        out.phase = MarginReport::not_stabilizable(MarginKind::phase, MarginController::PI,
                                                   "p1+p2>=p1p2/z");
        return out;
    }
    out.applicable = true;
    out.gain = MarginReport::finite(MarginKind::gain, MarginController::PI, prod / (z * sum),
                                    "p1+p2<p1p2/z", PidGains::pi(sum, 0.0),
                                    Attainment::asymptotic_boundary);

    const double sumsq = plant.poles.sum_of_squares();
    const double qa = sum - z;
    const double qb = sum * (z * z + prod) - z * sumsq;
    const double qc = prod * z * (z * sum - prod);
    out.q = RealPoly{qa, 0.0, qb, 0.0, qc};
    // Quadratic in x = omega^2. For real poles the root is unique; for
    // oscillatory pole pairs with z >= p1+p2 the leading coefficient can
    // vanish or a second positive root can appear, and the stationary
    // crossover is the one below the smaller crossover bound prod - z*sum.
    const double x_cap = prod - z * sum;
    double x;
    const bool degenerate_lead = std::abs(qa) < 1e-12 * std::max(1.0, std::abs(qb));
    if (degenerate_lead) {
        x = -qc / qb;
    } else {
        auto [x1, x2] = solve_quadratic(qa, qb, qc);
        x = std::max(x1.real(), x2.real());
        for (double cand : {x1.real(), x2.real()})
            if (cand > 0.0 && cand < x_cap * (1.0 + 1e-12) &&
                (!(x > 0.0 && x < x_cap * (1.0 + 1e-12)) || cand < x))
                x = cand;
    }
    out.omega0 = std::sqrt(std::max(x, 0.0));

    if (degenerate_lead) {
        out.omega0_closed_form = out.omega0;  // removable singularity of the radical
    } else {
        const double diffsq = sumsq - 2.0 * prod;  // (p1 - p2)^2, negative for complex pairs
        const double inner = (z - prod / z) * (z - prod / z) +
                             diffsq * (1.0 - 2.0 * (z + prod / z) / sum);
        out.omega0_closed_form =
            std::sqrt(std::max(0.0, z * sum / (2.0 * qa) *
                                        (sumsq / sum - z - prod / z +
                                         std::sqrt(std::max(inner, 0.0)))));
    }

    const double w = out.omega0;
    const double theta = std::atan(w / z) - std::atan(sum * w / (prod - w * w));
    out.kp_star = std::sqrt(sum / z * (w * w + prod));
    std::string branch = "p1+p2<p1p2/z";
    if (std::abs(out.omega0 - out.omega0_closed_form) >
        1e-10 * std::max(1.0, out.omega0))
        branch += ",omega0-form-mismatch";
    out.phase = MarginReport::finite(MarginKind::phase, MarginController::PI, theta, branch,
                                     PidGains::pi(out.kp_star, 0.0),
                                     Attainment::asymptotic_boundary);
    return out;
}

// theta_bar(omega): the phase margin of the optimal PI loop as a function
// of the stationary crossover.
inline double pi_phase_profile(const SecondOrderZeroPlant& plant, double omega) {
    const double sum = plant.poles.sum(), prod = plant.poles.product();
    return std::atan(omega / plant.z) - std::atan(sum * omega / (prod - omega * omega));
}

struct InequalityCheck {
    std::string name;
    bool holds = false;
    bool conjecture = false;  // reported, not required
    double slack = 0.0;       // smallest margin by which the inequality holds
};

struct MarginInequalityReport {
    std::vector<InequalityCheck> checks;
    double remark_gain_condition = 0.0;   // <= 0 means the sufficient condition holds
    double remark_phase_condition = 0.0;  // p1+p2+z - p1p2/z, <= 0 means it holds
    bool all_required_hold() const {
        for (const auto& c : checks)
            if (!c.conjecture && !c.holds) return false;
        return true;
    }
};

inline MarginInequalityReport margin_inequality_report(const SecondOrderZeroPlant& plant) {
    MarginInequalityReport rep;
    const MarginReport kpid = pid_gain_margin(plant);
    const PidPhaseMargin tpid = pid_phase_margin(plant);
    const auto [klti, tlti] = lti_optimal_margins(Plant(plant));
    const PiMargins pi = pi_margins(plant);

    const double lk_pid = std::log10(kpid.value);
    const double lk_lti = std::log10(klti.value);
    rep.checks.push_back({"log10(k_pid) <= log10(k_lti)", lk_pid <= lk_lti + 1e-12, false,
                          lk_lti - lk_pid});
    rep.checks.push_back({"log10(k_lti) <= 2*log10(k_pid)", lk_lti <= 2.0 * lk_pid + 1e-12, false,
                          2.0 * lk_pid - lk_lti});
    rep.checks.push_back({"theta_pid <= pi/2", tpid.report.value <= kPi / 2.0 + 1e-12, false,
                          kPi / 2.0 - tpid.report.value});
    rep.checks.push_back({"theta_pid <= theta_lti", tpid.report.value <= tlti.value + 1e-12, true,
                          tlti.value - tpid.report.value});
    rep.checks.push_back({"theta_lti <= 2*theta_pid",
                          tlti.value <= 2.0 * tpid.report.value + 1e-12, true,
                          2.0 * tpid.report.value - tlti.value});
    if (pi.applicable) {
        rep.checks.push_back({"k_pi < k_pid", pi.gain.value < kpid.value, false,
                              kpid.value - pi.gain.value});
        rep.checks.push_back({"k_pid < 2*k_pi", kpid.value < 2.0 * pi.gain.value, false,
                              2.0 * pi.gain.value - kpid.value});
        rep.checks.push_back({"theta_pi < theta_pid", pi.phase.value < tpid.report.value, true,
                              tpid.report.value - pi.phase.value});
        rep.checks.push_back({"theta_pid < 2*theta_pi",
                              tpid.report.value < 2.0 * pi.phase.value, true,
                              2.0 * pi.phase.value - tpid.report.value});
    }

    const double z = plant.z, sum = plant.poles.sum(), prod = plant.poles.product();
    rep.remark_gain_condition =
        sum / z - 4.0 * (prod + z * z) / (prod + z * (sum - z));
    rep.remark_phase_condition = sum + z - prod / z;
    return rep;
}

}  // namespace marginlab
