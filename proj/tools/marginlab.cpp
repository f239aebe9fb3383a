// marginlab: gain/phase margin reports, zero-location sweeps, brute-force
// verification of the closed forms, and margin-optimal controller design
// for first- and second-order unstable plants.

#include <cctype>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "marginlab/margins.hpp"
#include "marginlab/oracle.hpp"
#include "marginlab/sweep.hpp"

namespace ml = marginlab;
using nlohmann::json;

namespace {

enum ExitCode { kOk = 0, kBadInput = 2, kNotStabilizable = 3, kVerifyFailed = 4 };

std::string iso_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

double env_double(const char* name, double fallback) {
    const char* v = std::getenv(name);
    if (!v || !*v) return fallback;
    try {
        return std::stod(v);
    } catch (...) {
        return fallback;
    }
}

int env_int(const char* name, int fallback) {
    const char* v = std::getenv(name);
    if (!v || !*v) return fallback;
    try {
        return std::stoi(v);
    } catch (...) {
        return fallback;
    }
}

struct PlantOptions {
    bool first_order = false;
    bool second_order = false;
    double beta0 = 0.0, beta1 = 0.0, p = 0.0;
    double z = 0.0, p1 = 0.0, p2 = 0.0, sigma = 0.0, nu = 0.0;
    bool has_p1 = false, has_sigma = false;

    void add_to(CLI::App* cmd) {
        cmd->add_flag("--first-order", first_order, "first-order plant (beta0*s+beta1)/(s-p)");
        cmd->add_flag("--second-order", second_order,
                      "second-order plant (s-z)/((s-p1)(s-p2))");
        cmd->add_option("--beta0", beta0, "first-order numerator slope");
        cmd->add_option("--beta1", beta1, "first-order numerator constant");
        cmd->add_option("--p", p, "first-order unstable pole");
        cmd->add_option("--z", z, "nonminimum-phase zero");
        cmd->add_option("--p1", p1, "first real pole")->each([this](const std::string&) {
            has_p1 = true;
        });
        cmd->add_option("--p2", p2, "second real pole");
        cmd->add_option("--sigma", sigma, "real part of the complex pole pair")
            ->each([this](const std::string&) { has_sigma = true; });
        cmd->add_option("--nu", nu, "imaginary part of the complex pole pair");
    }

    ml::Plant build() const {
        if (first_order == second_order)
            throw ml::InvalidInput("specify exactly one of --first-order / --second-order");
        if (first_order) return ml::FirstOrderPlant(beta0, beta1, p);
        if (has_sigma) return ml::SecondOrderZeroPlant(z, ml::PolePair::conjugate_poles(sigma, nu));
        if (!has_p1) throw ml::InvalidInput("second-order plant wants --p1/--p2 or --sigma/--nu");
        return ml::SecondOrderZeroPlant(z, ml::PolePair::real_poles(p1, p2));
    }

    std::string describe() const {
        char buf[128];
        if (first_order)
            std::snprintf(buf, sizeof buf, "(%g*s%+g)/(s-%g)", beta0, beta1, p);
        else if (has_sigma)
            std::snprintf(buf, sizeof buf, "(s-%g)/((s-(%g+j%g))(s-(%g-j%g)))", z, sigma, nu,
                          sigma, nu);
        else
            std::snprintf(buf, sizeof buf, "(s-%g)/((s-%g)(s-%g))", z, p1, p2);
        return buf;
    }
};

json gains_json(const ml::PidGains& g) {
    return json{{"kp", g.kp}, {"ki", g.ki}, {"kd", g.kd}, {"kind", ml::to_string(g.kind)}};
}

json report_json(const ml::MarginReport& r) {
    json j;
    j["controller"] = ml::to_string(r.controller);
    j["kind"] = r.kind == ml::MarginKind::gain ? "gain" : "phase";
    j["attainment"] = ml::to_string(r.attainment);
    j["branch"] = r.branch;
    if (r.attainment == ml::Attainment::none) {
        j["value"] = nullptr;
    } else if (r.attainment == ml::Attainment::infinite) {
        j["value"] = "inf";
    } else {
        j["value"] = r.value;
        j["display"] = r.display();
        j["display_unit"] = r.kind == ml::MarginKind::gain ? "dB" : "deg";
    }
    if (r.optimizing_gains) j["optimizing_gains"] = gains_json(*r.optimizing_gains);
    return j;
}

json manifest_json(const PlantOptions& plant, const std::string& config, const json& results) {
    ml::RunManifest m;
    m.plant = plant.describe();
    m.config = config;
    m.timestamp = iso_timestamp();
    m.content_hash = ml::fnv1a64(results.dump());
    return json{{"tool", m.tool},           {"version", m.version},
                {"plant", m.plant},         {"config", m.config},
                {"timestamp", m.timestamp}, {"content_hash", ml::RunManifest::hash_hex(m.content_hash)}};
}

void print_report_line(const ml::MarginReport& r) {
    const char* unit = r.kind == ml::MarginKind::gain ? "dB " : "deg";
    std::printf("  %-4s %-5s ", ml::to_string(r.controller).c_str(),
                r.kind == ml::MarginKind::gain ? "gain" : "phase");
    if (r.attainment == ml::Attainment::none) {
        std::printf("%-36s [%s]\n", "none (not stabilizable)", r.branch.c_str());
        return;
    }
    if (r.attainment == ml::Attainment::infinite) {
        std::printf("%-36s [%s]\n", "inf", r.branch.c_str());
        return;
    }
    char val[96];
    if (r.kind == ml::MarginKind::gain)
        std::snprintf(val, sizeof val, "%.10g (%.4g %s)", r.value, r.display(), unit);
    else
        std::snprintf(val, sizeof val, "%.10g rad (%.4g %s)", r.value, r.display(), unit);
    std::printf("%-36s [%s, %s]", val, r.branch.c_str(), ml::to_string(r.attainment).c_str());
    if (r.optimizing_gains) {
        const auto& g = *r.optimizing_gains;
        std::printf("  gains kp=%.6g ki=%.6g kd=%.6g", g.kp, g.ki, g.kd);
    }
    std::printf("\n");
}

// ---------------------------------------------------------------------------
// margins
// ---------------------------------------------------------------------------

int run_margins(const PlantOptions& popt, const std::string& format,
                const std::vector<std::string>& controllers) {
    const ml::Plant plant = popt.build();
    std::vector<ml::MarginReport> reports;
    json checks = json::array();
    json extra;

    if (const auto* so = std::get_if<ml::SecondOrderZeroPlant>(&plant)) {
        const ml::MarginReport kg = ml::pid_gain_margin(*so);
        const ml::PidPhaseMargin kt = ml::pid_phase_margin(*so);
        const ml::PiMargins pi = ml::pi_margins(*so);
        const auto [lg, lt] = ml::lti_optimal_margins(plant);
        reports = {kg, kt.report, pi.gain, pi.phase, lg, lt};
        const ml::MarginInequalityReport ineq = ml::margin_inequality_report(*so);
        for (const auto& c : ineq.checks)
            checks.push_back(json{{"name", c.name},
                                  {"holds", c.holds},
                                  {"conjecture", c.conjecture},
                                  {"slack", c.slack}});
        extra["remark_gain_condition"] = ineq.remark_gain_condition;
        extra["remark_phase_condition"] = ineq.remark_phase_condition;
    } else if (const auto* fo = std::get_if<ml::FirstOrderPlant>(&plant)) {
        std::vector<ml::ControllerKind> kinds = {ml::ControllerKind::P, ml::ControllerKind::PI};
        if (fo->beta0 == 0.0) {
            kinds.push_back(ml::ControllerKind::PD);
            kinds.push_back(ml::ControllerKind::PID);
        }
        for (auto k : kinds) {
            auto [g, t] = ml::first_order_margins(*fo, k);
            reports.push_back(g);
            reports.push_back(t);
        }
        const auto [lg, lt] = ml::lti_optimal_margins(plant);
        reports.push_back(lg);
        reports.push_back(lt);
        if (fo->beta0 > 0.0 && fo->beta1 < 0.0) {
            const ml::FirstOrderRelations rel = ml::first_order_relations(*fo);
            extra["relations"] = {{"log10_gain_lti", rel.log10_gain_lti},
                                  {"log10_gain_pi_doubled", rel.log10_gain_pi_doubled},
                                  {"phase_lti", rel.phase_lti},
                                  {"phase_pi_doubled", rel.phase_pi_doubled},
                                  {"cos_relation_residual", rel.cos_relation_residual}};
        }
    }

    if (!controllers.empty()) {
        std::vector<ml::MarginReport> kept;
        for (const auto& r : reports) {
            std::string name = ml::to_string(r.controller);
            for (char& c : name) c = static_cast<char>(std::tolower(c));
            for (const std::string& want : controllers)
                if (want == name) {
                    kept.push_back(r);
                    break;
                }
        }
        reports = std::move(kept);
        if (reports.empty()) throw ml::InvalidInput("no applicable controller class selected");
    }

    if (format == "json") {
        json results;
        results["plant"] = popt.describe();
        results["margins"] = json::array();
        for (const auto& r : reports) results["margins"].push_back(report_json(r));
        if (!checks.empty()) results["checks"] = checks;
        if (!extra.is_null()) results["diagnostics"] = extra;
        json doc;
        doc["manifest"] = manifest_json(popt, "margins", results);
        doc["results"] = results;
        std::printf("%s\n", doc.dump(2).c_str());
        return kOk;
    }

    std::printf("plant: %s\n", popt.describe().c_str());
    for (const auto& r : reports) print_report_line(r);
    if (!checks.empty()) {
        std::printf("checks:\n");
        for (const auto& c : checks)
            std::printf("  [%s] %-28s slack=%.6g%s\n", c["holds"].get<bool>() ? "ok" : "VIOLATED",
                        c["name"].get<std::string>().c_str(), c["slack"].get<double>(),
                        c["conjecture"].get<bool>() ? " (reported)" : "");
    }
    return kOk;
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

int run_sweep(const PlantOptions& popt, const std::string& curve, double z_min, double z_max,
              int points, const std::string& out_path, int threads) {
    ml::PolePair poles = popt.has_sigma ? ml::PolePair::conjugate_poles(popt.sigma, popt.nu)
                                        : ml::PolePair::real_poles(popt.p1, popt.p2);
    std::string csv;
    if (curve == "margins") {
        ml::SweepSpec spec;
        spec.poles = poles;
        spec.z_min = z_min;
        spec.z_max = z_max;
        spec.points = points;
        csv = ml::sweep_to_csv(ml::compute_sweep(spec, threads));
    } else {
        if (!(popt.z > 0.0)) throw ml::InvalidInput("curve dumps want --z");
        if (points < 2) throw ml::InvalidInput("sweep grid wants points >= 2");
        ml::SecondOrderZeroPlant plant(popt.z, poles);
        if (curve == "theta-kp")
            csv = ml::curve_to_csv(ml::theta_kp_curve(plant, points, threads), "kp");
        else if (curve == "theta-kd")
            csv = ml::curve_to_csv(ml::theta_kd_curve(plant, points, threads), "kd");
        else
            throw ml::InvalidInput("unknown curve: " + curve);
    }
    if (out_path.empty() || out_path == "-") {
        std::fputs(csv.c_str(), stdout);
    } else {
        std::ofstream f(out_path, std::ios::binary);
        if (!f) throw ml::InvalidInput("cannot open output file: " + out_path);
        f << csv;
    }
    return kOk;
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

struct VerifyRow {
    std::string quantity;
    std::string status;  // pass | fail | skipped
    double closed_form = 0.0;
    double oracle = 0.0;
    double rel_gap = 0.0;
    std::string note;
};

VerifyRow verify_one(const ml::Plant& plant, ml::ControllerKind controller, ml::MarginKind kind,
                     const ml::MarginReport& closed, double tolerance,
                     const ml::OracleConfig& cfg) {
    VerifyRow row;
    row.quantity = ml::to_string(controller == ml::ControllerKind::PI ? ml::MarginController::PI
                                                                      : ml::MarginController::PID) +
                   (kind == ml::MarginKind::gain ? std::string("_gain") : std::string("_phase"));
    if (closed.attainment == ml::Attainment::none) {
        row.status = "skipped";
        row.note = "not stabilizable";
        return row;
    }
    if (closed.attainment == ml::Attainment::infinite) {
        row.status = "skipped";
        row.note = "infinite margin";
        return row;
    }
    row.closed_form = closed.value;
    const auto found = ml::best_margin_search(plant, controller, kind, cfg);
    if (!found) {
        row.status = "skipped";
        row.note = "no feasible gains";
        return row;
    }
    row.oracle = found->value;
    row.rel_gap = std::abs(row.closed_form - row.oracle) / std::abs(row.closed_form);
    row.status = row.rel_gap <= tolerance ? "pass" : "fail";
    return row;
}

int run_verify(const PlantOptions& popt, double tolerance, const std::string& format) {
    const ml::Plant plant = popt.build();
    ml::OracleConfig cfg;
    std::vector<VerifyRow> rows;

    if (const auto* so = std::get_if<ml::SecondOrderZeroPlant>(&plant)) {
        ml::MarginReport kg, kt;
        try {
            kg = ml::pid_gain_margin(*so);
            kt = ml::pid_phase_margin(*so).report;
        } catch (const ml::NotStabilizable& e) {
            std::printf("not stabilizable: %s\n", e.what());
            return kNotStabilizable;
        }
        rows.push_back(verify_one(plant, ml::ControllerKind::PID, ml::MarginKind::gain, kg,
                                  tolerance, cfg));
        rows.push_back(verify_one(plant, ml::ControllerKind::PID, ml::MarginKind::phase, kt,
                                  tolerance, cfg));
        const ml::PiMargins pi = ml::pi_margins(*so);
        rows.push_back(verify_one(plant, ml::ControllerKind::PI, ml::MarginKind::gain, pi.gain,
                                  tolerance, cfg));
        rows.push_back(verify_one(plant, ml::ControllerKind::PI, ml::MarginKind::phase, pi.phase,
                                  tolerance, cfg));
    } else if (const auto* fo = std::get_if<ml::FirstOrderPlant>(&plant)) {
        std::vector<ml::ControllerKind> kinds = {ml::ControllerKind::PI};
        if (fo->beta0 == 0.0) kinds.push_back(ml::ControllerKind::PID);
        for (auto k : kinds) {
            ml::MarginReport g, t;
            try {
                std::tie(g, t) = ml::first_order_margins(*fo, k);
            } catch (const ml::NotStabilizable& e) {
                std::printf("not stabilizable: %s\n", e.what());
                return kNotStabilizable;
            }
            rows.push_back(verify_one(plant, k, ml::MarginKind::gain, g, tolerance, cfg));
            rows.push_back(verify_one(plant, k, ml::MarginKind::phase, t, tolerance, cfg));
        }
    }

    bool all_ok = true;
    for (const auto& r : rows)
        if (r.status == "fail") all_ok = false;

    if (format == "json") {
        json results;
        results["plant"] = popt.describe();
        results["tolerance"] = tolerance;
        results["rows"] = json::array();
        for (const auto& r : rows)
            results["rows"].push_back(json{{"quantity", r.quantity},
                                           {"status", r.status},
                                           {"closed_form", r.closed_form},
                                           {"oracle", r.oracle},
                                           {"rel_gap", r.rel_gap},
                                           {"note", r.note}});
        json doc;
        doc["manifest"] = manifest_json(popt, "verify", results);
        doc["results"] = results;
        std::printf("%s\n", doc.dump(2).c_str());
    } else {
        std::printf("plant: %s   tolerance: %g\n", popt.describe().c_str(), tolerance);
        std::printf("%-12s %-8s %14s %14s %10s  %s\n", "quantity", "status", "closed_form",
                    "oracle", "rel_gap", "note");
        for (const auto& r : rows) {
            if (r.status == "skipped")
                std::printf("%-12s %-8s %14s %14s %10s  %s\n", r.quantity.c_str(),
                            r.status.c_str(), "-", "-", "-", r.note.c_str());
            else
                std::printf("%-12s %-8s %14.8g %14.8g %9.3g%%  %s\n", r.quantity.c_str(),
                            r.status.c_str(), r.closed_form, r.oracle, 100.0 * r.rel_gap,
                            r.note.c_str());
        }
    }
    if (!all_ok) {
        std::printf("verification FAILED: gaps above %.3g%% listed above\n", 100.0 * tolerance);
        return kVerifyFailed;
    }
    return kOk;
}

// ---------------------------------------------------------------------------
// design
// ---------------------------------------------------------------------------

int run_design(const PlantOptions& popt, const std::string& objective,
               const std::string& controller, double eps, const std::string& format) {
    const ml::Plant plant = popt.build();
    const auto* so = std::get_if<ml::SecondOrderZeroPlant>(&plant);
    const ml::MarginKind kind = objective == "gain" ? ml::MarginKind::gain : ml::MarginKind::phase;
    const ml::ControllerKind ck =
        controller == "pi" ? ml::ControllerKind::PI : ml::ControllerKind::PID;

    ml::MarginReport closed;
    if (so) {
        if (ck == ml::ControllerKind::PI) {
            const ml::PiMargins pi = ml::pi_margins(*so);
            closed = kind == ml::MarginKind::gain ? pi.gain : pi.phase;
        } else {
            closed = kind == ml::MarginKind::gain ? ml::pid_gain_margin(*so)
                                                  : ml::pid_phase_margin(*so).report;
        }
    } else if (const auto* fo = std::get_if<ml::FirstOrderPlant>(&plant)) {
        auto [g, t] = ml::first_order_margins(*fo, ck == ml::ControllerKind::PI
                                                       ? ml::ControllerKind::PI
                                                       : ml::ControllerKind::PID);
        closed = kind == ml::MarginKind::gain ? g : t;
    }
    if (closed.attainment == ml::Attainment::none)
        throw ml::NotStabilizable("requested controller class cannot stabilize this plant");

    // Interior triple: nudge the boundary triple inward along each active
    // constraint. The nudged point may fail to stabilize the nominal loop
    // or may carry a much smaller two-sided margin than the closed form,
    // so a searched interior optimum is reported alongside it.
    ml::OracleConfig cfg;
    std::optional<ml::PidGains> interior;
    std::string interior_note;
    if (closed.optimizing_gains) {
        ml::PidGains g = *closed.optimizing_gains;
        const double scale = so ? so->poles.product() : 1.0;
        if (g.has_integrator() && g.ki == 0.0)
            g.ki = (closed.branch.find("min<z") != std::string::npos ? 1.0 : -1.0) * eps * eps * scale;
        if (g.kd <= -1.0) g.kd = -1.0 + eps * (g.kd < -1.0 ? -1.0 : 1.0);
        g.kp *= 1.0 - eps;
        if (ml::is_stabilizing(plant, g, ml::GainPerturbation{1.0})) {
            interior = g;
            interior_note = "boundary triple nudged inward";
        } else {
            interior_note = "inward projection does not stabilize the nominal plant";
        }
    }
    const auto searched = ml::best_margin_search(plant, ck, kind, cfg);

    auto achieved = [&](const ml::PidGains& g) {
        std::pair<double, double> m{std::numeric_limits<double>::quiet_NaN(),
                                    std::numeric_limits<double>::quiet_NaN()};
        try {
            m.first = ml::gain_margin_of(plant, g, cfg);
        } catch (...) {
        }
        try {
            m.second = ml::phase_margin_of(plant, g, cfg);
        } catch (...) {
        }
        return m;
    };
    std::pair<double, double> interior_margins{0.0, 0.0}, searched_margins{0.0, 0.0};
    if (interior) interior_margins = achieved(*interior);
    if (searched) searched_margins = achieved(searched->gains);
    const double achieved_gain = interior ? interior_margins.first : 0.0;
    const double achieved_phase = interior ? interior_margins.second : 0.0;

    if (format == "json") {
        json results;
        results["plant"] = popt.describe();
        results["objective"] = objective;
        results["controller"] = controller;
        results["closed_form"] = report_json(closed);
        results["eps"] = eps;
        results["interior_note"] = interior_note;
        if (interior) {
            results["interior_gains"] = gains_json(*interior);
            results["interior_gain_margin"] =
                std::isnan(achieved_gain) ? json(nullptr) : json(achieved_gain);
            results["interior_phase_margin_rad"] =
                std::isnan(achieved_phase) ? json(nullptr) : json(achieved_phase);
        }
        if (searched) {
            results["search_gains"] = gains_json(searched->gains);
            results["search_gain_margin"] = searched_margins.first;
            results["search_phase_margin_rad"] = searched_margins.second;
        }
        json doc;
        doc["manifest"] = manifest_json(popt, "design", results);
        doc["results"] = results;
        std::printf("%s\n", doc.dump(2).c_str());
        return kOk;
    }

    std::printf("plant: %s  objective: %s  controller: %s\n", popt.describe().c_str(),
                objective.c_str(), controller.c_str());
    std::printf("closed-form optimum:\n");
    print_report_line(closed);
    if (interior) {
        std::printf("eps-interior triple (%s): kp=%.10g ki=%.10g kd=%.10g\n",
                    interior_note.c_str(), interior->kp, interior->ki, interior->kd);
        std::printf("  achieved gain margin:  %.10g\n", achieved_gain);
        std::printf("  achieved phase margin: %.10g rad (%.4g deg)\n", achieved_phase,
                    ml::rad_to_deg(achieved_phase));
    } else {
        std::printf("eps-interior triple: none (%s)\n", interior_note.c_str());
    }
    if (searched) {
        std::printf("searched interior optimum: kp=%.10g ki=%.10g kd=%.10g\n",
                    searched->gains.kp, searched->gains.ki, searched->gains.kd);
        std::printf("  achieved gain margin:  %.10g\n", searched_margins.first);
        std::printf("  achieved phase margin: %.10g rad (%.4g deg)\n", searched_margins.second,
                    ml::rad_to_deg(searched_margins.second));
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gain/phase margin toolkit for low-order unstable plants"};
    app.require_subcommand(1);

    PlantOptions margins_plant, verify_plant, design_plant, sweep_plant;
    std::string margins_format = "text", verify_format = "text", design_format = "text";

    CLI::App* margins = app.add_subcommand("margins", "closed-form margin report");
    margins_plant.add_to(margins);
    std::vector<std::string> margin_controllers;
    margins->add_option("--controller", margin_controllers,
                        "restrict to classes (p, pi, pd, pid, lti; repeatable)")
        ->check(CLI::IsMember({"p", "pi", "pd", "pid", "lti"}));
    margins->add_option("--format", margins_format, "text|json")
        ->check(CLI::IsMember({"text", "json"}));

    CLI::App* sweep = app.add_subcommand("sweep", "CSV sweep over the zero location");
    sweep_plant.add_to(sweep);
    double z_min = 0.5, z_max = 8.0;
    int points = 151;
    std::string out_path, curve = "margins";
    int threads = env_int("MARGINLAB_THREADS", 0);
    sweep->add_option("--z-min", z_min, "sweep start");
    sweep->add_option("--z-max", z_max, "sweep end");
    sweep->add_option("--points", points, "grid points");
    sweep->add_option("--out", out_path, "output CSV path (default stdout)");
    sweep->add_option("--curve", curve, "margins|theta-kp|theta-kd")
        ->check(CLI::IsMember({"margins", "theta-kp", "theta-kd"}));
    sweep->add_option("--threads", threads, "worker threads (default MARGINLAB_THREADS or auto)");

    CLI::App* verify = app.add_subcommand("verify", "closed forms vs brute-force oracle");
    verify_plant.add_to(verify);
    double tolerance = env_double("MARGINLAB_TOLERANCE", 0.02);
    verify->add_option("--tolerance", tolerance, "max relative gap (default 0.02)");
    verify->add_option("--format", verify_format, "text|json")
        ->check(CLI::IsMember({"text", "json"}));

    CLI::App* design = app.add_subcommand("design", "emit margin-optimal controller gains");
    design_plant.add_to(design);
    std::string objective = "gain", controller = "pid";
    double eps = 1e-4;
    design->add_option("--objective", objective, "gain|phase")
        ->check(CLI::IsMember({"gain", "phase"}));
    design->add_option("--controller", controller, "pid|pi")
        ->check(CLI::IsMember({"pid", "pi"}));
    design->add_option("--eps", eps, "relative inward offset for the interior triple");
    design->add_option("--format", design_format, "text|json")
        ->check(CLI::IsMember({"text", "json"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kBadInput;
    }

    try {
        if (margins->parsed()) return run_margins(margins_plant, margins_format, margin_controllers);
        if (sweep->parsed())
            return run_sweep(sweep_plant, curve, z_min, z_max, points, out_path, threads);
        if (verify->parsed()) return run_verify(verify_plant, tolerance, verify_format);
        if (design->parsed())
            return run_design(design_plant, objective, controller, eps, design_format);
    } catch (const ml::NotStabilizable& e) {
        std::fprintf(stderr, "not stabilizable: %s\n", e.what());
        return kNotStabilizable;
    } catch (const ml::InvalidInput& e) {
        std::fprintf(stderr, "invalid input: %s\n", e.what());
        return kBadInput;
    } catch (const ml::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kBadInput;
    }
    return kOk;
}
