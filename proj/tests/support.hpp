#pragma once

// Measurement helpers shared by the unit tests and the acceptance runner.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <vector>

#include "flocksim/metrics.hpp"
#include "flocksim/scenario.hpp"
#include "flocksim/vehicle.hpp"

namespace flocksim::testing {

/// Lag in seconds at which target and achieved velocity correlate best when
/// one vehicle tracks v(t) = amp * sin(2 pi t / period) along x. The PID
/// sees the GPS velocity, as in the full simulation.
inline double sinusoid_lag(const PidParams& pid, const PlantParams& plant, const GpsModel& gps, double period,
                           double amp, double duration, std::uint64_t seed, double tick = 0.025) {
    Rng gps_rng(seed, 0, Rng::Stream::Gps);
    Rng plant_rng(seed, 0, Rng::Stream::Plant);
    AgentState truth;
    PlantState ps;
    PidState pid_state;
    GpsState gs;
    GpsFix fix = gps_sample(truth, 0.0, gs, gps, gps_rng);
    const auto gps_every = static_cast<std::size_t>(std::llround(1.0 / (gps.rate * tick)));
    const auto n = static_cast<std::size_t>(std::llround(duration / tick));
    std::vector<double> target(n), achieved(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) * tick;
        if (k > 0 && k % gps_every == 0) fix = gps_sample(truth, t, gs, gps, gps_rng);
        const Vec2 want{amp * std::sin(2.0 * std::numbers::pi * t / period), 0.0};
        const Vec2 cmd = pid_step(want, fix.velocity, pid_state, tick, pid);
        truth = plant_step(truth, ps, cmd, tick, plant, 100.0, plant_rng);
        target[k] = want.x;
        achieved[k] = truth.velocity.x;  // state after the step, i.e. at t + tick
    }
    // Skip two periods of transient, then scan lags up to half a period.
    const auto start = static_cast<std::size_t>(std::llround(2.0 * period / tick));
    const auto max_shift = static_cast<std::size_t>(std::llround(0.5 * period / tick));
    double best = -std::numeric_limits<double>::infinity();
    std::size_t best_shift = 0;
    for (std::size_t s = 0; s <= max_shift; ++s) {
        double acc = 0.0;
        for (std::size_t k = start; k + s < n; ++k) acc += target[k] * achieved[k + s];
        acc /= static_cast<double>(n - start - s);
        if (acc > best) {
            best = acc;
            best_shift = s;
        }
    }
    return static_cast<double>(best_shift + 1) * tick;
}

/// Times at which the path changes direction.
inline std::vector<double> turn_times(const TargetPath& path) {
    std::vector<double> out;
    const auto& w = path.waypoints;
    for (std::size_t i = 1; i + 1 < w.size(); ++i) {
        const Vec2 a = w[i].position - w[i - 1].position;
        const Vec2 b = w[i + 1].position - w[i].position;
        if (a.norm() < 1e-9 || b.norm() < 1e-9) continue;
        if (std::abs(cross(unit_or_zero(a), unit_or_zero(b))) > 1e-6) out.push_back(w[i].t);
    }
    return out;
}

struct SpeedStats {
    double max_mean = 0.0;  // largest per-agent mean speed
    double max_std = 0.0;   // largest per-agent speed std
    double pooled_std = 0.0;  // speed std over all agents and samples
};

/// Speed statistics over records with t in [t0, t1]. Agents with an index
/// below `skip_below` are left out (a leader, say).
inline SpeedStats speed_stats(const Tracklog& log, double t0, double t1, std::size_t skip_below = 0) {
    std::vector<std::vector<double>> per;
    for (const auto& rec : log.records) {
        if (rec.t < t0 || rec.t > t1) continue;
        if (per.size() < rec.agents.size()) per.resize(rec.agents.size());
        for (std::size_t i = skip_below; i < rec.agents.size(); ++i) per[i].push_back(rec.agents[i].velocity.norm());
    }
    SpeedStats s;
    double sum = 0.0, sum_sq = 0.0;
    std::size_t count = 0;
    for (std::size_t i = skip_below; i < per.size(); ++i) {
        const auto& v = per[i];
        if (v.empty()) continue;
        double m = 0.0;
        for (double x : v) m += x;
        m /= static_cast<double>(v.size());
        double var = 0.0;
        for (double x : v) var += (x - m) * (x - m);
        var /= static_cast<double>(v.size());
        s.max_mean = std::max(s.max_mean, m);
        s.max_std = std::max(s.max_std, std::sqrt(var));
        for (double x : v) {
            sum += x;
            sum_sq += x * x;
        }
        count += v.size();
    }
    if (count > 0) {
        const double m = sum / static_cast<double>(count);
        s.pooled_std = std::sqrt(std::max(0.0, sum_sq / static_cast<double>(count) - m * m));
    }
    return s;
}

}  // namespace flocksim::testing
