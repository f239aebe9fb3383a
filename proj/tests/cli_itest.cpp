// Integration checks of the command-line surface: exit codes, output
// shape, and CSV determinism across worker-thread counts.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace {

int g_failures = 0;
std::string g_bin;

struct RunResult {
    int exit_code = -1;
    std::string out;
};

RunResult run(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + (env.empty() ? "" : " ") + g_bin + " " + args + " 2>&1";
    RunResult r;
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) return r;
    char buf[4096];
    while (std::size_t n = fread(buf, 1, sizeof buf, p)) r.out.append(buf, n);
    const int status = pclose(p);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

void expect(bool ok, const std::string& what) {
    if (!ok) {
        ++g_failures;
        std::fprintf(stderr, "FAIL: %s\n", what.c_str());
    }
}

bool contains(const std::string& hay, const std::string& needle) {
    return hay.find(needle) != std::string::npos;
}

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: cli_itest <marginlab-binary>\n");
        return 2;
    }
    g_bin = argv[1];

    // margins: reference plant report.
    {
        const RunResult r = run("margins --second-order --z 1 --p1 2 --p2 6");
        expect(r.exit_code == 0, "margins ref exit 0, got " + std::to_string(r.exit_code));
        expect(contains(r.out, "1.714285714"), "margins prints the PID gain ratio");
        expect(contains(r.out, "0.2716207539"), "margins prints the PID phase value");
        expect(contains(r.out, "1.5 (3.522 dB"), "margins prints the PI gain row");
        expect(contains(r.out, "2.640625"), "margins prints the LTI gain value");
    }
    {
        const RunResult r = run("margins --first-order --beta0 1 --beta1 -4 --p 1");
        expect(r.exit_code == 0, "margins first-order exit 0");
        expect(contains(r.out, "12.04"), "first-order gain in dB");
        expect(contains(r.out, "0.6435011"), "first-order phase value");
    }

    // Exit-code contract.
    expect(run("margins --second-order --z 2 --p1 2 --p2 2").exit_code == 3,
           "zero on a pole exits 3");
    expect(run("margins --second-order --z -1 --p1 2 --p2 6").exit_code == 2,
           "negative zero exits 2");
    expect(run("margins --second-order --z 1 --p1 -2 --p2 6").exit_code == 2,
           "nonpositive pole exits 2");
    expect(run("margins").exit_code == 2, "missing plant spec exits 2");
    expect(run("sweep --p1 2 --p2 6 --z-min 5 --z-max 1").exit_code == 2, "bad grid exits 2");

    // JSON output parses and carries a manifest.
    {
        const RunResult r = run("margins --second-order --z 1 --p1 2 --p2 6 --format json");
        expect(r.exit_code == 0, "margins json exit 0");
        const auto doc = nlohmann::json::parse(r.out, nullptr, false);
        expect(!doc.is_discarded(), "margins json parses");
        if (!doc.is_discarded()) {
            expect(doc.contains("manifest") && doc["manifest"].contains("content_hash"),
                   "manifest with content hash");
            expect(doc["results"]["margins"].size() >= 6, "six margin reports");
        }
    }

    // Sweep determinism across thread counts, exact header, pole rows.
    {
        const RunResult a = run("sweep --p1 2 --p2 6 --z-min 0.5 --z-max 8 --points 151 "
                                "--out /tmp/ml_sweep_a.csv",
                                "MARGINLAB_THREADS=1");
        const RunResult b = run("sweep --p1 2 --p2 6 --z-min 0.5 --z-max 8 --points 151 "
                                "--out /tmp/ml_sweep_b.csv",
                                "MARGINLAB_THREADS=8");
        expect(a.exit_code == 0 && b.exit_code == 0, "sweep exits 0");
        const std::string csv_a = slurp("/tmp/ml_sweep_a.csv");
        const std::string csv_b = slurp("/tmp/ml_sweep_b.csv");
        expect(!csv_a.empty() && csv_a == csv_b, "sweep CSV byte-identical across thread counts");
        expect(csv_a.rfind("z,kM_pid,kM_pid_db,kM_lti_db,theta_pid_deg,theta_lti_deg,branch,"
                           "stabilizable\n",
                           0) == 0,
               "sweep CSV header");
        expect(contains(csv_a, "\n2,,,,,,z=pole,false\n"), "row at z=2 not stabilizable");
        expect(contains(csv_a, "\n6,,,,,,z=pole,false\n"), "row at z=6 not stabilizable");
    }

    // Complex-pole sweep never hits a vanishing point.
    {
        const RunResult r = run("sweep --sigma 4 --nu 1 --z-min 0.5 --z-max 8 --points 76 "
                                "--out /tmp/ml_sweep_c.csv");
        expect(r.exit_code == 0, "complex sweep exits 0");
        expect(!contains(slurp("/tmp/ml_sweep_c.csv"), "false"), "complex sweep all stabilizable");
    }

    // Curve dumps.
    {
        const RunResult r = run("sweep --curve theta-kd --z 10 --p1 2 --p2 6 --points 31");
        expect(r.exit_code == 0, "theta-kd curve exits 0");
        expect(r.out.rfind("kd,omega,theta_rad\n", 0) == 0, "theta-kd header");
        const RunResult r2 = run("sweep --curve theta-kp --z 1 --p1 2 --p2 6 --points 31");
        expect(r2.exit_code == 0, "theta-kp curve exits 0");
        expect(r2.out.rfind("kp,omega,theta_rad\n", 0) == 0, "theta-kp header");
    }

    // verify: first-order plants agree with the brute-force optimum;
    // infinite margins are skipped.
    {
        const RunResult r = run("verify --first-order --beta0 0 --beta1 1 --p 3");
        expect(r.exit_code == 0, "verify strictly-proper first-order exits 0");
        expect(contains(r.out, "skipped"), "infinite rows skipped");
        const RunResult r2 = run("verify --first-order --beta0 1 --beta1 -4 --p 1");
        expect(r2.exit_code == 0, "verify nonminimum-phase first-order exits 0");
    }

    // verify: the second-order PID closed forms exceed what any fixed
    // controller attains from the nominal loop, so the gap check reports
    // failure (exit 4) while the PI rows pass.
    {
        const RunResult r = run("verify --second-order --z 1 --p1 2 --p2 6");
        expect(r.exit_code == 4, "verify ref plant exits 4");
        expect(contains(r.out, "PI_gain      pass"), "PI gain row passes");
        expect(contains(r.out, "PI_phase     pass"), "PI phase row passes");
        expect(contains(r.out, "PID_gain     fail"), "PID gain row fails");
    }
    expect(run("verify --second-order --z 1 --p1 2 --p2 6 --tolerance 1e-9").exit_code == 4,
           "unreachable tolerance exits 4");

    // design: emits the boundary triple and oracle-checked alternatives.
    {
        const RunResult r = run("design --objective gain --second-order --z 1 --p1 2 --p2 6");
        expect(r.exit_code == 0, "design gain exits 0");
        expect(contains(r.out, "kp=7 ki=0 kd=-0.583333"), "boundary triple printed");
        expect(contains(r.out, "searched interior optimum"), "search triple printed");
        const RunResult r2 = run("design --objective phase --controller pi --second-order "
                                 "--z 1 --p1 2 --p2 6");
        expect(r2.exit_code == 0, "design pi phase exits 0");
        expect(contains(r2.out, "10.078"), "pi design kp near 10.078");
        expect(run("design --objective gain --controller pi --second-order --z 2 --p1 2 --p2 2")
                       .exit_code == 3,
               "design on unstabilizable plant exits 3");
    }

    if (g_failures == 0) std::printf("cli_itest: all checks passed\n");
    return g_failures == 0 ? 0 : 1;
}
