#include "flocksim/metrics.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <stdexcept>

namespace flocksim {

namespace {

void append_number(std::string& out, double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, res.ptr);
}

void positions_and_velocities(std::span<const AgentState> states, std::vector<Vec2>& pos, std::vector<Vec2>& vel) {
    pos.clear();
    vel.clear();
    for (const auto& s : states) {
        pos.push_back(s.position);
        vel.push_back(s.velocity);
    }
}

std::optional<NeighborStats> stats_from_nearest(const std::vector<double>& nearest) {
    if (nearest.size() < 2) return std::nullopt;
    double sum = 0.0;
    for (double d : nearest) sum += d;
    const double mean = sum / static_cast<double>(nearest.size());
    double sq = 0.0;
    for (double d : nearest) sq += (d - mean) * (d - mean);
    return NeighborStats{mean, std::sqrt(sq / static_cast<double>(nearest.size()))};
}

}  // namespace

std::string Tracklog::to_csv() const {
    std::string out = "t,id,x,y,z,vx,vy,status,sx,sy,dvx,dvy,tx,ty\n";
    for (const auto& rec : records) {
        for (std::size_t i = 0; i < rec.agents.size(); ++i) {
            const auto& a = rec.agents[i];
            append_number(out, rec.t);
            out += ',';
            out += std::to_string(i);
            for (double v : {a.position.x, a.position.y, a.altitude, a.velocity.x, a.velocity.y}) {
                out += ',';
                append_number(out, v);
            }
            out += ',';
            out += to_string(a.status);
            for (double v : {a.sensed.x, a.sensed.y, a.desired.x, a.desired.y}) {
                out += ',';
                append_number(out, v);
            }
            out += ',';
            if (rec.target) append_number(out, rec.target->x);
            out += ',';
            if (rec.target) append_number(out, rec.target->y);
            out += '\n';
        }
    }
    return out;
}

void Tracklog::write_csv(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write tracklog to '" + path + "'");
    f << to_csv();
}

std::optional<double> velocity_correlation(std::span<const AgentState> states) {
    std::vector<Vec2> pos, vel;
    positions_and_velocities(states, pos, vel);
    const auto scan = pair_scan_serial(pos, vel, 0.0, 0.0);
    if (scan.align_pairs == 0) return std::nullopt;
    return scan.align_sum / static_cast<double>(scan.align_pairs);
}

std::optional<NeighborStats> neighbor_stats(std::span<const AgentState> states) {
    std::vector<Vec2> pos, vel;
    positions_and_velocities(states, pos, vel);
    return stats_from_nearest(pair_scan_serial(pos, vel, 0.0, 0.0).nearest);
}

std::optional<double> local_correlation(const Tracklog& log, double r, double t0, double t1, ExecPolicy policy) {
    if (!(r > 0.0)) throw std::invalid_argument("local_correlation: r must be > 0");
    double sum = 0.0;
    std::size_t instants = 0;
    std::vector<Vec2> pos, vel;
    for (const auto& rec : log.records) {
        if (rec.t < t0 || rec.t > t1) continue;
        pos.clear();
        vel.clear();
        for (const auto& a : rec.agents) {
            if (a.status == Status::Landed) continue;
            pos.push_back(a.position);
            vel.push_back(a.velocity);
        }
        const auto scan = pair_scan(pos, vel, r, 0.0, policy);
        if (scan.local_pairs == 0) continue;
        sum += scan.local_sum / static_cast<double>(scan.local_pairs);
        ++instants;
    }
    if (instants == 0) return std::nullopt;
    return sum / static_cast<double>(instants);
}

void MetricsCollector::observe_safety(std::span<const AgentState> airborne) {
    // agents sharing an altitude go through the planar scan together
    std::map<double, std::vector<std::size_t>> layers;
    for (std::size_t i = 0; i < airborne.size(); ++i) layers[airborne[i].altitude].push_back(i);

    auto close = [&](std::size_t i, std::size_t j) {
        const AgentId a = airborne[i].id;
        const AgentId b = airborne[j].id;
        collided_.emplace(std::min(a, b), std::max(a, b));
    };
    std::vector<Vec2> pos, vel;
    for (const auto& [alt, members] : layers) {
        pos.clear();
        vel.clear();
        for (std::size_t i : members) {
            pos.push_back(airborne[i].position);
            vel.push_back(airborne[i].velocity);
        }
        // velocities are irrelevant here; a zero radius skips the local pass
        const auto scan = pair_scan(pos, vel, 0.0, collision_radius_, policy_);
        min_distance_ = std::min(min_distance_, scan.min_distance);
        for (const auto& [i, j] : scan.close_pairs) close(members[i], members[j]);
    }
    for (auto a = layers.begin(); a != layers.end(); ++a) {
        for (auto b = std::next(a); b != layers.end(); ++b) {
            const double dz = b->first - a->first;
            for (std::size_t i : a->second) {
                for (std::size_t j : b->second) {
                    const double d = std::sqrt((airborne[i].position - airborne[j].position).norm_sq() + dz * dz);
                    min_distance_ = std::min(min_distance_, d);
                    if (d < collision_radius_) close(i, j);
                }
            }
        }
    }
}

void MetricsCollector::observe_sample(double t, std::span<const AgentState> airborne) {
    std::vector<Vec2> pos, vel;
    positions_and_velocities(airborne, pos, vel);
    const auto scan = pair_scan(pos, vel, 0.0, 0.0, policy_);
    std::optional<double> phi;
    if (scan.align_pairs > 0) phi = scan.align_sum / static_cast<double>(scan.align_pairs);
    phi_series_.emplace_back(t, phi);
    nn_series_.emplace_back(t, stats_from_nearest(scan.nearest));
}

std::optional<double> MetricsCollector::latest_phi() const {
    return phi_series_.empty() ? std::nullopt : phi_series_.back().second;
}

std::optional<NeighborStats> MetricsCollector::latest_nn() const {
    return nn_series_.empty() ? std::nullopt : nn_series_.back().second;
}

MetricsReport MetricsCollector::report(const Tracklog& log, double window_start, double window_end,
                                       std::span<const double> local_radii) const {
    MetricsReport r;
    r.phi_series = phi_series_;
    r.nn_series = nn_series_;
    r.window_start = window_start;
    r.window_end = window_end;
    r.collision_radius = collision_radius_;
    r.collision_count = collided_.size();
    r.min_pairwise_distance = std::isfinite(min_distance_) ? min_distance_ : 0.0;

    double sum = 0.0, sq = 0.0;
    std::size_t n = 0;
    for (const auto& [t, phi] : phi_series_) {
        if (t < window_start || t > window_end || !phi) continue;
        sum += *phi;
        sq += *phi * *phi;
        ++n;
    }
    if (n > 0) {
        const double mean = sum / static_cast<double>(n);
        r.phi_mean = mean;
        r.phi_std = std::sqrt(std::max(0.0, sq / static_cast<double>(n) - mean * mean));
    }
    for (double radius : local_radii) r.phi_local[radius] = local_correlation(log, radius, window_start, window_end, policy_);
    return r;
}

nlohmann::json MetricsReport::to_json() const {
    using nlohmann::json;
    auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    json j;
    j["noise_model"] = noise_model;
    j["window"] = {window_start, window_end};
    j["phi_mean"] = opt(phi_mean);
    j["phi_std"] = opt(phi_std);
    json local = json::array();
    for (const auto& [radius, value] : phi_local) local.push_back({{"r", radius}, {"phi", opt(value)}});
    j["phi_local"] = local;
    j["min_pairwise_distance"] = min_pairwise_distance;
    j["collision_radius"] = collision_radius;
    j["collision_count"] = collision_count;
    json phi = json::array();
    for (const auto& [t, v] : phi_series) phi.push_back({t, opt(v)});
    j["phi_series"] = phi;
    json nn = json::array();
    for (const auto& [t, v] : nn_series) {
        nn.push_back({t, v ? json(v->mean) : json(nullptr), v ? json(v->stddev) : json(nullptr)});
    }
    j["nn_series"] = nn;
    return j;
}

std::string MetricsReport::phi_csv() const {
    std::string out = "t,phi\n";
    for (const auto& [t, v] : phi_series) {
        append_number(out, t);
        out += ',';
        if (v) append_number(out, *v);
        out += '\n';
    }
    return out;
}

std::string MetricsReport::nn_csv() const {
    std::string out = "t,nn_mean,nn_std\n";
    for (const auto& [t, v] : nn_series) {
        append_number(out, t);
        out += ',';
        if (v) append_number(out, v->mean);
        out += ',';
        if (v) append_number(out, v->stddev);
        out += '\n';
    }
    return out;
}

}  // namespace flocksim
