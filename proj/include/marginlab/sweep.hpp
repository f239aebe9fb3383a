#pragma once

// Zero-location sweeps and boundary-curve dumps in a fixed CSV layout,
// computed by a worker pool but assembled in grid order so output bytes
// do not depend on the thread count.

#include <atomic>
#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <string>
#include <thread>
#include <vector>

#include "marginlab/margins.hpp"

namespace marginlab {

inline constexpr const char* kToolVersion = "0.1.0";

struct SweepRow {
    double z = 0.0;
    double km_pid = 0.0;        // ratio
    double km_pid_db = 0.0;
    double km_lti_db = 0.0;
    double theta_pid_deg = 0.0;
    double theta_lti_deg = 0.0;
    std::string branch;
    bool stabilizable = false;
};

inline constexpr const char* kSweepCsvHeader =
    "z,kM_pid,kM_pid_db,kM_lti_db,theta_pid_deg,theta_lti_deg,branch,stabilizable";

namespace detail {

inline std::string fmt12(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline unsigned resolve_threads(int requested) {
    if (requested > 0) return static_cast<unsigned>(requested);
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

template <typename Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
    if (threads <= 1 || count < 2) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    const unsigned n = std::min<unsigned>(threads, static_cast<unsigned>(count));
    pool.reserve(n);
    for (unsigned t = 0; t < n; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                fn(i);
            }
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace detail

struct SweepSpec {
    PolePair poles;
    double z_min = 0.5;
    double z_max = 8.0;
    int points = 151;

    void validate() const {
        if (!(z_min > 0.0) || !(z_min < z_max) || points < 2)
            throw InvalidInput("sweep grid wants 0 < z_min < z_max and points >= 2");
    }
};

inline SweepRow sweep_row_at(const PolePair& poles, double z) {
    SweepRow row;
    row.z = z;
    // Exact pole hits get a not-stabilizable row; grid values a hair away
    // are nudged off the singularity so the cusp shows without NaNs.
    if (!poles.complex_pair) {
        for (double p : {poles.min_pole(), poles.max_pole()}) {
            const double d = std::abs(z - p);
            if (d <= 1e-12 * p) {
                row.stabilizable = false;
                row.branch = "z=pole";
                return row;
            }
            if (d < 1e-9 * p) z = p + (z >= p ? 1.0 : -1.0) * 1e-9 * p;
        }
    }
    SecondOrderZeroPlant plant(z, poles);
    try {
        const MarginReport g = pid_gain_margin(plant);
        const PidPhaseMargin ph = pid_phase_margin(plant);
        const auto [lg, lp] = lti_optimal_margins(Plant(plant));
        row.km_pid = g.value;
        row.km_pid_db = ratio_to_db(g.value);
        row.km_lti_db = ratio_to_db(lg.value);
        row.theta_pid_deg = rad_to_deg(ph.report.value);
        row.theta_lti_deg = rad_to_deg(lp.value);
        row.branch = g.branch;
        row.stabilizable = true;
    } catch (const NotStabilizable&) {
        row.stabilizable = false;
        row.branch = "z=pole";
    }
    return row;
}

inline std::vector<SweepRow> compute_sweep(const SweepSpec& spec, int threads = 0) {
    spec.validate();
    std::vector<SweepRow> rows(static_cast<std::size_t>(spec.points));
    const double step = (spec.z_max - spec.z_min) / (spec.points - 1);
    detail::parallel_for(rows.size(), detail::resolve_threads(threads), [&](std::size_t i) {
        rows[i] = sweep_row_at(spec.poles, spec.z_min + step * static_cast<double>(i));
    });
    return rows;
}

inline std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
    std::string out = kSweepCsvHeader;
    out += '\n';
    for (const SweepRow& r : rows) {
        out += detail::fmt12(r.z);
        out += ',';
        if (r.stabilizable) {
            out += detail::fmt12(r.km_pid);
            out += ',';
            out += detail::fmt12(r.km_pid_db);
            out += ',';
            out += detail::fmt12(r.km_lti_db);
            out += ',';
            out += detail::fmt12(r.theta_pid_deg);
            out += ',';
            out += detail::fmt12(r.theta_lti_deg);
            out += ',';
        } else {
            out += ",,,,,";
        }
        out += r.branch;
        out += ',';
        out += r.stabilizable ? "true" : "false";
        out += '\n';
    }
    return out;
}

// Boundary-curve dumps: the phase that the optimal one-parameter boundary
// family attains, as a function of the free gain.
struct CurvePoint {
    double gain = 0.0;   // kp or kd
    double omega = 0.0;  // crossover frequency at that gain
    double theta = 0.0;  // loop phase offset there, radians
};

inline std::vector<CurvePoint> theta_kp_curve(const SecondOrderZeroPlant& plant, int points,
                                              int threads = 0) {
    if (points < 2) throw InvalidInput("curve wants points >= 2");
    const double lo = plant.poles.sum() - plant.z;
    const double hi = plant.poles.product() / plant.z;
    const double a = std::min(lo, hi), b = std::max(lo, hi);
    const double inset = 1e-4 * (b - a);
    std::vector<CurvePoint> pts(static_cast<std::size_t>(points));
    const double step = (b - a - 2.0 * inset) / (points - 1);
    detail::parallel_for(pts.size(), detail::resolve_threads(threads), [&](std::size_t i) {
        const double kp = a + inset + step * static_cast<double>(i);
        pts[i] = {kp, detail::omega_hat(plant, kp), detail::theta_hat(plant, kp)};
    });
    return pts;
}

inline std::vector<CurvePoint> theta_kd_curve(const SecondOrderZeroPlant& plant, int points,
                                              int threads = 0) {
    if (points < 2) throw InvalidInput("curve wants points >= 2");
    const double lo = -1.0;
    const double hi = plant.poles.product() / (plant.z * plant.z) - plant.poles.sum() / plant.z;
    const double a = std::min(lo, hi), b = std::max(lo, hi);
    const double inset = 1e-4 * (b - a);
    std::vector<CurvePoint> pts(static_cast<std::size_t>(points));
    const double step = (b - a - 2.0 * inset) / (points - 1);
    detail::parallel_for(pts.size(), detail::resolve_threads(threads), [&](std::size_t i) {
        const double kd = a + inset + step * static_cast<double>(i);
        pts[i] = {kd, detail::omega_tilde(plant, kd), detail::theta_tilde(plant, kd)};
    });
    return pts;
}

inline std::string curve_to_csv(const std::vector<CurvePoint>& pts, const char* gain_name) {
    std::string out = gain_name;
    out += ",omega,theta_rad\n";
    for (const CurvePoint& p : pts) {
        out += detail::fmt12(p.gain);
        out += ',';
        out += detail::fmt12(p.omega);
        out += ',';
        out += detail::fmt12(p.theta);
        out += '\n';
    }
    return out;
}

// 64-bit FNV-1a, used to stamp outputs in the run manifest.
inline std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

struct RunManifest {
    std::string tool = "marginlab";
    std::string version = kToolVersion;
    std::string plant;
    std::string config;
    std::string timestamp;
    std::uint64_t content_hash = 0;

    static std::string hash_hex(std::uint64_t h) {
        char buf[24];
        std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
        return buf;
    }
};

}  // namespace marginlab
