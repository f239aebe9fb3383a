#pragma once

// Plant and controller models, perturbed closed-loop characteristic
// polynomials, loop frequency response, unit-gain crossover frequencies
// and the loop phase evaluated there.

#include <cmath>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "marginlab/poly.hpp"
#include "marginlab/stability.hpp"

namespace marginlab {

// Either two positive real poles or a complex conjugate pair with
// positive real part; storing (sigma, nu) keeps conjugacy structural.
struct PolePair {
    bool complex_pair = false;
    double a = 0.0;  // p1, or sigma
    double b = 0.0;  // p2, or nu

    static PolePair real_poles(double p1, double p2) {
        if (p1 <= 0.0 || p2 <= 0.0) throw InvalidInput("poles must have positive real part");
        PolePair pp;
        pp.complex_pair = false;
        pp.a = std::min(p1, p2);
        pp.b = std::max(p1, p2);
        return pp;
    }
    static PolePair conjugate_poles(double sigma, double nu) {
        if (sigma <= 0.0) throw InvalidInput("poles must have positive real part");
        PolePair pp;
        pp.complex_pair = true;
        pp.a = sigma;
        pp.b = std::abs(nu);
        return pp;
    }

    double sum() const { return complex_pair ? 2.0 * a : a + b; }
    double product() const { return complex_pair ? a * a + b * b : a * b; }
    double sum_of_squares() const { return sum() * sum() - 2.0 * product(); }
    double modulus() const { return std::sqrt(product()); }
    double min_pole() const { return a; }   // real pair only
    double max_pole() const { return b; }   // real pair only
    Complex p1() const { return complex_pair ? Complex(a, b) : Complex(a, 0.0); }
    Complex p2() const { return complex_pair ? Complex(a, -b) : Complex(b, 0.0); }
};

// (beta0*s + beta1) / (s - p), p > 0.
struct FirstOrderPlant {
    double beta0 = 0.0;
    double beta1 = 1.0;
    double p = 1.0;

    FirstOrderPlant(double b0, double b1, double pole) : beta0(b0), beta1(b1), p(pole) {
        if (beta0 < 0.0) throw InvalidInput("beta0 must be >= 0");
        if (beta1 == 0.0) throw InvalidInput("beta1 must be nonzero");
        if (p <= 0.0) throw InvalidInput("pole must be positive");
    }
    bool minimum_phase() const { return beta1 > 0.0 || beta0 == 0.0; }
    double zero() const { return std::abs(beta1) / beta0; }  // RHP zero when beta1 < 0
};

// (s - z) / ((s - p1)(s - p2)), z > 0.
struct SecondOrderZeroPlant {
    double z = 1.0;
    PolePair poles;

    SecondOrderZeroPlant(double zero, PolePair pp) : z(zero), poles(pp) {
        if (z <= 0.0) throw InvalidInput("zero must be positive");
    }
};

// (beta0*s + beta1) / ((s - p1)(s - p2)), beta1 > 0.
struct SecondOrderMinPhasePlant {
    double beta0 = 0.0;
    double beta1 = 1.0;
    PolePair poles;

    SecondOrderMinPhasePlant(double b0, double b1, PolePair pp) : beta0(b0), beta1(b1), poles(pp) {
        if (beta0 < 0.0) throw InvalidInput("beta0 must be >= 0");
        if (beta1 <= 0.0) throw InvalidInput("beta1 must be positive");
    }
};

using Plant = std::variant<FirstOrderPlant, SecondOrderZeroPlant, SecondOrderMinPhasePlant>;

enum class ControllerKind { P, PI, PD, PID };

inline std::string to_string(ControllerKind k) {
    switch (k) {
        case ControllerKind::P: return "P";
        case ControllerKind::PI: return "PI";
        case ControllerKind::PD: return "PD";
        default: return "PID";
    }
}

struct PidGains {
    double kp = 0.0;
    double ki = 0.0;
    double kd = 0.0;
    ControllerKind kind = ControllerKind::PID;

    static PidGains p(double kp) { return {kp, 0.0, 0.0, ControllerKind::P}; }
    static PidGains pi(double kp, double ki) { return {kp, ki, 0.0, ControllerKind::PI}; }
    static PidGains pd(double kp, double kd) { return {kp, 0.0, kd, ControllerKind::PD}; }
    static PidGains pid(double kp, double ki, double kd) { return {kp, ki, kd, ControllerKind::PID}; }

    bool has_integrator() const { return kind == ControllerKind::PI || kind == ControllerKind::PID; }
    bool has_derivative() const { return kind == ControllerKind::PD || kind == ControllerKind::PID; }
};

struct GainPerturbation {
    double alpha = 1.0;
};
struct PhasePerturbation {
    double theta = 0.0;  // radians, in (-pi, pi]
};
using Perturbation = std::variant<GainPerturbation, PhasePerturbation>;

namespace detail {

inline std::vector<Complex> conv(const std::vector<Complex>& u, const std::vector<Complex>& v) {
    std::vector<Complex> out(u.size() + v.size() - 1, Complex(0.0));
    for (std::size_t i = 0; i < u.size(); ++i)
        for (std::size_t j = 0; j < v.size(); ++j) out[i + j] += u[i] * v[j];
    return out;
}

inline std::vector<Complex> controller_numerator(const PidGains& g) {
    switch (g.kind) {
        case ControllerKind::P: return {Complex(g.kp)};
        case ControllerKind::PD: return {Complex(g.kd), Complex(g.kp)};
        case ControllerKind::PI: return {Complex(g.kp), Complex(g.ki)};
        default: return {Complex(g.kd), Complex(g.kp), Complex(g.ki)};
    }
}

struct PlantPolys {
    std::vector<Complex> num;
    std::vector<Complex> den;
};

inline PlantPolys plant_polys(const Plant& plant) {
    PlantPolys pp;
    if (const auto* fo = std::get_if<FirstOrderPlant>(&plant)) {
        pp.num = {Complex(fo->beta0), Complex(fo->beta1)};
        pp.den = {Complex(1.0), Complex(-fo->p)};
    } else if (const auto* so = std::get_if<SecondOrderZeroPlant>(&plant)) {
        pp.num = {Complex(1.0), Complex(-so->z)};
        pp.den = {Complex(1.0), Complex(-so->poles.sum()), Complex(so->poles.product())};
    } else {
        const auto& mp = std::get<SecondOrderMinPhasePlant>(plant);
        pp.num = {Complex(mp.beta0), Complex(mp.beta1)};
        pp.den = {Complex(1.0), Complex(-mp.poles.sum()), Complex(mp.poles.product())};
    }
    return pp;
}

}  // namespace detail

// Characteristic polynomial of 1 + w*P(s)*K(s) with denominators cleared,
// where w = alpha (gain) or e^{-j*theta} (phase). Controllers with an
// integrator channel clear the extra s even when ki is zero, so ki = 0
// leaves a structural root at the origin; margins are suprema over strict
// stability, which makes that boundary exact.
inline ComplexPoly closed_loop_charpoly(const Plant& plant, const PidGains& gains,
                                        const Perturbation& pert) {
    if (const auto* fo = std::get_if<FirstOrderPlant>(&plant)) {
        if (fo->beta0 != 0.0 && gains.kd != 0.0)
            throw ImproperLoop("derivative control on a biproper first-order plant");
    }
    Complex w;
    if (const auto* gp = std::get_if<GainPerturbation>(&pert))
        w = Complex(gp->alpha, 0.0);
    else
        w = std::polar(1.0, -std::get<PhasePerturbation>(pert).theta);

    detail::PlantPolys pp = detail::plant_polys(plant);
    std::vector<Complex> den = pp.den;
    if (gains.has_integrator()) den = detail::conv(den, {Complex(1.0), Complex(0.0)});

    std::vector<Complex> knum = detail::controller_numerator(gains);
    std::vector<Complex> open = detail::conv(pp.num, knum);
    for (Complex& c : open) c *= w;

    // den + w * num * knum, aligned at the constant term.
    std::vector<Complex> out(std::max(den.size(), open.size()), Complex(0.0));
    const std::size_t off_d = out.size() - den.size();
    const std::size_t off_o = out.size() - open.size();
    for (std::size_t i = 0; i < den.size(); ++i) out[off_d + i] += den[i];
    for (std::size_t i = 0; i < open.size(); ++i) out[off_o + i] += open[i];
    // Strip structural zeros (beta0 = 0 or kd = 0 leave exact-zero leading
    // entries); trailing zeros stay so a root at the origin is kept.
    std::size_t lead = 0;
    while (lead + 1 < out.size() && out[lead] == Complex(0.0)) ++lead;
    out.erase(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(lead));
    return ComplexPoly(std::move(out));
}

// Open-loop frequency response L(j*omega) = P(j*omega) * K(j*omega).
inline Complex loop_response(const Plant& plant, const PidGains& gains, double omega) {
    if (omega <= 0.0) throw InvalidInput("loop_response wants omega > 0");
    const Complex s(0.0, omega);
    detail::PlantPolys pp = detail::plant_polys(plant);
    Complex num = 0.0, den = 0.0;
    for (const Complex& c : pp.num) num = num * s + c;
    for (const Complex& c : pp.den) den = den * s + c;
    const double kd = gains.has_derivative() ? gains.kd : 0.0;
    const double ki = gains.has_integrator() ? gains.ki : 0.0;
    const Complex K(gains.kp, kd * omega - ki / omega);
    return num / den * K;
}

namespace detail {

// Unit-gain condition |L|^2 = 1 for the second-order-zero plant as a
// polynomial in x = omega^2 (descending coefficients, cubic).
inline std::vector<double> crossover_poly_x(const SecondOrderZeroPlant& so, const PidGains& g) {
    const double z = so.z;
    const double prod = so.poles.product();
    const double sumsq = so.poles.sum_of_squares();
    const double kd = g.has_derivative() ? g.kd : 0.0;
    const double ki = g.has_integrator() ? g.ki : 0.0;
    const double kp2 = g.kp * g.kp;
    return {kd * kd - 1.0,
            kp2 - 2.0 * ki * kd + z * z * kd * kd - sumsq,
            z * z * (kp2 - 2.0 * ki * kd) + ki * ki - prod * prod,
            z * z * ki * ki};
}

}  // namespace detail

// All positive crossover frequencies (|L(j*omega)| = 1), ascending. The
// formal omega = 0 solution that appears when ki = 0 is excluded; the
// loop phase limit there contributes no margin.
inline std::vector<double> crossover_frequencies(const Plant& plant, const PidGains& gains) {
    const auto* so = std::get_if<SecondOrderZeroPlant>(&plant);
    if (!so) throw InvalidInput("crossover_frequencies wants a second-order plant with a zero");

    std::vector<double> cs = detail::crossover_poly_x(*so, gains);
    double scale = 0.0;
    for (double c : cs) scale = std::max(scale, std::abs(c));
    if (scale == 0.0) return {};
    while (cs.size() > 1 && std::abs(cs.front()) < 1e-14 * scale) cs.erase(cs.begin());

    std::vector<double> xs;
    if (cs.size() == 4) {
        xs = solve_cubic_real_roots(RealPoly(cs));
    } else if (cs.size() == 3) {
        auto [r1, r2] = solve_quadratic(cs[0], cs[1], cs[2]);
        if (r1.imag() == 0.0) xs = {r1.real(), r2.real()};
    } else if (cs.size() == 2) {
        xs = {-cs[1] / cs[0]};
    }

    // Polish on the even polynomial in omega, then keep genuine crossings.
    std::vector<double> full(2 * cs.size() - 1, 0.0);
    for (std::size_t i = 0; i < cs.size(); ++i) full[2 * i] = cs[i];
    const RealPoly sextic(std::move(full));
    const RealPoly dsextic = sextic.derivative();

    std::vector<double> out;
    for (double x : xs) {
        if (!(x > 1e-12)) continue;
        double w = std::sqrt(x);
        for (int it = 0; it < 3; ++it) {
            const double f = sextic.eval(w);
            const double d = dsextic.eval(w);
            if (d == 0.0) break;
            const double step = f / d;
            w -= step;
            if (std::abs(step) < 1e-15 * std::max(1.0, w)) break;
        }
        if (!(w > 0.0) || !std::isfinite(w)) continue;
        if (std::abs(std::abs(loop_response(plant, gains, w)) - 1.0) > 1e-9) continue;
        out.push_back(w);
    }
    std::sort(out.begin(), out.end());
    std::vector<double> dedup;
    for (double w : out)
        if (dedup.empty() || std::abs(w - dedup.back()) > 1e-9 * std::max(1.0, w)) dedup.push_back(w);
    return dedup;
}

inline double wrap_angle(double a) {
    a = std::fmod(a, 2.0 * kPi);
    if (a <= -kPi) a += 2.0 * kPi;
    if (a > kPi) a -= 2.0 * kPi;
    return a;
}

// Loop phase offset phi at a crossover: angle(L(j*omega)) = pi + phi, so
// the feedback loop reaches the stability boundary when the phase
// perturbation equals phi. Built from two-argument arctangents per
// factor, so no quadrant corrections are needed anywhere.
inline double phase_at_crossover(const Plant& plant, const PidGains& gains, double omega,
                                 double tol = 1e-6) {
    const auto* so = std::get_if<SecondOrderZeroPlant>(&plant);
    if (!so) throw InvalidInput("phase_at_crossover wants a second-order plant with a zero");
    if (std::abs(std::abs(loop_response(plant, gains, omega)) - 1.0) > tol)
        throw NotACrossover("phase_at_crossover: |L(j*omega)| is not 1");

    double pole_terms;
    if (so->poles.complex_pair) {
        const double sg = so->poles.a, nu = so->poles.b;
        pole_terms = std::atan2(omega + nu, sg) + std::atan2(omega - nu, sg);
    } else {
        pole_terms = std::atan2(omega, so->poles.a) + std::atan2(omega, so->poles.b);
    }
    const double kd = gains.has_derivative() ? gains.kd : 0.0;
    const double ki = gains.has_integrator() ? gains.ki : 0.0;
    const double phi = pole_terms - std::atan2(omega, so->z) +
                       std::atan2(kd * omega - ki / omega, gains.kp);
    return wrap_angle(phi);
}

// Feasible parameter sets: the Routh conditions of the perturbed loops,
// written out as strict inequalities.
enum class FeasibleSetKind { OmegaPlus, OmegaMinus, XiPlus, XiMinus, Psi };

struct FeasibleSet {
    FeasibleSetKind kind;
    Plant plant;
    double alpha = 1.0;
};

inline bool feasible_contains(const FeasibleSet& set, const PidGains& g) {
    if (set.alpha < 1.0) throw InvalidInput("feasible set wants alpha >= 1");
    const double a = set.alpha;
    switch (set.kind) {
        case FeasibleSetKind::OmegaPlus:
        case FeasibleSetKind::OmegaMinus: {
            const auto& fo = std::get<FirstOrderPlant>(set.plant);
            const double b0 = fo.beta0, b1 = fo.beta1, p = fo.p;
            if (set.kind == FeasibleSetKind::OmegaPlus)
                return a * b0 * g.kp > -1.0 && a * (b1 * g.kp + b0 * g.ki) > p && b1 * g.ki > 0.0;
            return a * b0 * g.kp < -1.0 && a * (b1 * g.kp + b0 * g.ki) < p && b1 * g.ki < 0.0;
        }
        case FeasibleSetKind::XiPlus:
        case FeasibleSetKind::XiMinus: {
            const auto& so = std::get<SecondOrderZeroPlant>(set.plant);
            const double z = so.z, sum = so.poles.sum(), prod = so.poles.product();
            const double kp = a * g.kp, ki = a * g.ki, kd = a * g.kd;
            const double product_lhs = (kp - z * kd - sum) * (-z * kp + ki + prod);
            const double product_rhs = -z * (1.0 + kd) * ki;
            if (set.kind == FeasibleSetKind::XiPlus)
                return kp < (ki + prod) / z && ki < 0.0 && -1.0 < kd && kd < (kp - sum) / z &&
                       product_lhs > product_rhs;
            return kp > (ki + prod) / z && ki > 0.0 && (kp - sum) / z < kd && kd < -1.0 &&
                   product_lhs > product_rhs;
        }
        case FeasibleSetKind::Psi: {
            const auto& so = std::get<SecondOrderZeroPlant>(set.plant);
            const double z = so.z, sum = so.poles.sum(), prod = so.poles.product();
            const double kp = a * g.kp, ki = a * g.ki;
            return sum < kp && kp < (ki + prod) / z && ki < 0.0 &&
                   (kp - sum) * (-z * kp + ki + prod) > -z * ki;
        }
    }
    return false;
}

}  // namespace marginlab
