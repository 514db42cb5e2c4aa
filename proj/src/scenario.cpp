#include "flocksim/scenario.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <sstream>

#include "flocksim/json_util.hpp"

namespace flocksim {

using nlohmann::json;
using json_util::ObjectReader;
using json_util::vec_json;

Vec2 TargetPath::position(double t) const {
    if (waypoints.empty()) return {};
    if (t <= waypoints.front().t) return waypoints.front().position;
    for (std::size_t i = 1; i < waypoints.size(); ++i) {
        const auto& a = waypoints[i - 1];
        const auto& b = waypoints[i];
        if (t <= b.t) {
            const double span = b.t - a.t;
            if (span <= 0.0) return b.position;
            return a.position + (b.position - a.position) * ((t - a.t) / span);
        }
    }
    return waypoints.back().position;
}

Vec2 TargetPath::velocity(double t) const {
    for (std::size_t i = 1; i < waypoints.size(); ++i) {
        const auto& a = waypoints[i - 1];
        const auto& b = waypoints[i];
        if (t >= a.t && t < b.t && b.t > a.t) return (b.position - a.position) / (b.t - a.t);
    }
    return {};
}

const char* to_string(ControlMode m) { return m == ControlMode::Flocking ? "flocking" : "tracking"; }

namespace {

ControlMode mode_from_string(const std::string& s) {
    if (s == "flocking") return ControlMode::Flocking;
    if (s == "tracking") return ControlMode::Tracking;
    throw ConfigError("mode", "expected \"flocking\" or \"tracking\"");
}

bool is_whole(double x) { return std::abs(x - std::round(x)) < 1e-6 && std::round(x) >= 1.0; }

// --- readers -----------------------------------------------------------------

ControlParams read_control(const json& j) {
    ObjectReader in(j, "control");
    ControlParams p;
    in.opt("r0", p.r0);
    in.opt("r1", p.r1);
    in.opt("r2", p.r2);
    in.opt("D", p.D);
    in.opt("C_frict", p.C_frict);
    in.opt("C_shill", p.C_shill);
    in.opt("v_flock", p.v_flock);
    in.opt("v0", p.v0);
    in.opt("alpha", p.alpha);
    in.opt("beta", p.beta);
    in.opt("R", p.R);
    in.opt("d", p.d);
    in.opt("dt_lookahead", p.dt_lookahead);
    in.opt("tau", p.tau);
    in.opt("v_max", p.v_max);
    in.finish();
    return p;
}

NetworkParams read_network(const json& j) {
    ObjectReader in(j, "network");
    NetworkParams p;
    in.opt("comm_range", p.comm_range);
    in.opt("delay_mean", p.delay_mean);
    in.opt("delay_std", p.delay_std);
    in.opt("delay_min", p.delay_min);
    in.opt("packet_loss", p.packet_loss);
    in.opt("outage_rate", p.outage_rate);
    in.opt("outage_duration_mean", p.outage_duration_mean);
    in.opt("broadcast_hz", p.broadcast_hz);
    in.finish();
    return p;
}

PidParams read_pid(const json& j) {
    ObjectReader in(j, "pid");
    PidParams p;
    in.opt("kp", p.kp);
    in.opt("ki", p.ki);
    in.opt("kd", p.kd);
    in.opt("i_limit", p.i_limit);
    in.opt("feedforward_gain", p.feedforward_gain);
    in.finish();
    return p;
}

PlantParams read_plant(const json& j) {
    ObjectReader in(j, "plant");
    PlantParams p;
    in.opt("command_delay", p.command_delay);
    in.opt("response_time", p.response_time);
    in.opt("a_max", p.a_max);
    in.opt("drag", p.drag);
    in.opt_vec("wind", p.wind);
    in.opt("gust_std", p.gust_std);
    in.finish();
    return p;
}

GpsModel read_gps(const json& j) {
    ObjectReader in(j, "gps");
    GpsModel g;
    in.opt("rate", g.rate);
    in.opt("pos_error_std", g.pos_error_std);
    in.opt("pos_error_corr_time", g.pos_error_corr_time);
    in.opt("vel_error_std", g.vel_error_std);
    in.finish();
    return g;
}

Arena read_arena(const json& j) {
    ObjectReader in(j, "arena");
    const auto kind = in.req<std::string>("kind");
    Vec2 center;
    in.opt_vec("center", center);
    Arena a;
    if (kind == "disc") {
        a.shape = Disc{center, in.req<double>("radius")};
    } else if (kind == "annulus") {
        a.shape = Annulus{center, in.req<double>("r_in"), in.req<double>("r_out")};
    } else if (kind == "rect") {
        a.shape = Rect{center, in.req<double>("half_width"), in.req<double>("half_height")};
    } else {
        throw ConfigError("arena.kind", "expected disc, annulus or rect");
    }
    in.finish();
    return a;
}

FormationSpec read_formation(const json& j) {
    ObjectReader in(j, "formation");
    FormationSpec f;
    f.shape = shape_from_string(in.req<std::string>("shape"));
    in.opt("n_agents", f.n_agents);
    in.opt("r0", f.r0);
    in.opt("v_rotation", f.v_rotation);
    if (in.has("rotation")) {
        const auto r = in.req<std::string>("rotation");
        if (r == "fixed") {
            f.rotation = RotationMode::Fixed;
        } else if (r == "self_organized") {
            f.rotation = RotationMode::SelfOrganized;
        } else {
            throw ConfigError("formation.rotation", "expected fixed or self_organized");
        }
    }
    in.finish();
    return f;
}

InitialLayout read_layout(const json& j) {
    ObjectReader in(j, "initial_layout");
    InitialLayout l;
    const auto kind = in.req<std::string>("kind");
    if (kind == "random") {
        l.kind = InitialLayout::Kind::Random;
    } else if (kind == "grid") {
        l.kind = InitialLayout::Kind::Grid;
    } else if (kind == "explicit") {
        l.kind = InitialLayout::Kind::Explicit;
    } else {
        throw ConfigError("initial_layout.kind", "expected random, grid or explicit");
    }
    in.opt_vec("center", l.center);
    in.opt("radius", l.radius);
    in.opt("spacing", l.spacing);
    in.opt("min_spacing", l.min_spacing);
    if (in.has("positions")) {
        const auto& arr = in.raw("positions");
        if (!arr.is_array()) throw ConfigError("initial_layout.positions", "expected an array");
        for (std::size_t i = 0; i < arr.size(); ++i)
            l.positions.push_back(ObjectReader::read_vec(arr[i], "initial_layout.positions[" + std::to_string(i) + "]"));
    }
    in.finish();
    return l;
}

MetricsConfig read_metrics(const json& j) {
    ObjectReader in(j, "metrics");
    MetricsConfig m;
    if (in.has("window")) {
        const auto w = in.req<std::vector<double>>("window");
        if (w.size() != 2) throw ConfigError("metrics.window", "expected [t0, t1]");
        m.window_start = w[0];
        m.window_end = w[1];
    }
    in.opt("phi_local_r", m.phi_local_r);
    in.opt("collision_radius", m.collision_radius);
    in.finish();
    return m;
}

// --- writers -----------------------------------------------------------------

json control_json(const ControlParams& p) {
    return {{"r0", p.r0},         {"r1", p.r1},         {"r2", p.r2},       {"D", p.D},
            {"C_frict", p.C_frict}, {"C_shill", p.C_shill}, {"v_flock", p.v_flock}, {"v0", p.v0},
            {"alpha", p.alpha},   {"beta", p.beta},     {"R", p.R},         {"d", p.d},
            {"dt_lookahead", p.dt_lookahead}, {"tau", p.tau}, {"v_max", p.v_max}};
}

json arena_json(const Arena& a) {
    if (const auto* d = std::get_if<Disc>(&a.shape))
        return {{"kind", "disc"}, {"center", vec_json(d->center)}, {"radius", d->radius}};
    if (const auto* r = std::get_if<Annulus>(&a.shape))
        return {{"kind", "annulus"}, {"center", vec_json(r->center)}, {"r_in", r->r_in}, {"r_out", r->r_out}};
    const auto& b = std::get<Rect>(a.shape);
    return {{"kind", "rect"}, {"center", vec_json(b.center)}, {"half_width", b.half_width},
            {"half_height", b.half_height}};
}

}  // namespace

void ScenarioConfig::validate() const {
    control.validate();
    network.validate();
    pid.validate();
    plant.validate();
    gps.validate();
    if (arena) arena->validate();
    if (formation) formation->validate();
    if (n_agents < 1) throw ConfigError("n_agents", "must be >= 1");
    if (leader && n_agents < 2) throw ConfigError("leader", "needs at least one follower");
    if (!(tick > 0.0)) throw ConfigError("tick", "must be > 0");
    if (!(duration >= 0.0) || !std::isfinite(duration)) throw ConfigError("duration", "must be >= 0");
    if (!(neighbor_expiry > 0.0)) throw ConfigError("neighbor_expiry", "must be > 0");
    if (log_every < 1) throw ConfigError("log_every", "must be >= 1");
    if (telemetry_every < 1) throw ConfigError("telemetry_every", "must be >= 1");
    if (!is_whole(1.0 / (network.broadcast_hz * tick)))
        throw ConfigError("network.broadcast_hz", "broadcast period must be a whole number of ticks");
    if (!is_whole(1.0 / (gps.rate * tick))) throw ConfigError("gps.rate", "fix period must be a whole number of ticks");
    if (mode == ControlMode::Tracking && target_path.empty() && !leader && !formation)
        throw ConfigError("target_path", "tracking mode needs a target path, a leader or a formation");
    if (leader && target_path.empty()) throw ConfigError("target_path", "the leader needs a path");
    for (std::size_t i = 1; i < target_path.waypoints.size(); ++i) {
        if (target_path.waypoints[i].t < target_path.waypoints[i - 1].t)
            throw ConfigError("target_path", "waypoint times must be non-decreasing");
    }
    if (initial_layout.kind == InitialLayout::Kind::Explicit && initial_layout.positions.size() != n_agents)
        throw ConfigError("initial_layout.positions", "needs exactly n_agents entries");
    if (initial_layout.kind == InitialLayout::Kind::Random && !arena && !(initial_layout.radius > 0.0))
        throw ConfigError("initial_layout.radius", "must be > 0");
    if (initial_layout.kind == InitialLayout::Kind::Grid && !(initial_layout.spacing > 0.0))
        throw ConfigError("initial_layout.spacing", "must be > 0");
    if (!(metrics.collision_radius >= 0.0)) throw ConfigError("metrics.collision_radius", "must be >= 0");
    for (double r : metrics.phi_local_r) {
        if (!(r > 0.0)) throw ConfigError("metrics.phi_local_r", "radii must be > 0");
    }
    for (std::size_t i = 0; i < commands.size(); ++i) {
        if (!(commands[i].t >= 0.0)) throw ConfigError("commands[" + std::to_string(i) + "].t", "must be >= 0");
    }
}

std::size_t ScenarioConfig::ticks_total() const {
    return static_cast<std::size_t>(std::llround(duration / tick));
}

std::size_t ScenarioConfig::broadcast_period_ticks() const {
    return static_cast<std::size_t>(std::llround(1.0 / (network.broadcast_hz * tick)));
}

std::size_t ScenarioConfig::gps_period_ticks() const {
    return static_cast<std::size_t>(std::llround(1.0 / (gps.rate * tick)));
}

ScenarioConfig scenario_from_json(const json& j) {
    ObjectReader in(j, "");
    ScenarioConfig c;
    in.opt("name", c.name);
    in.opt("seed", c.seed);
    in.opt("n_agents", c.n_agents);
    in.opt("duration", c.duration);
    in.opt("tick", c.tick);
    if (in.has("control")) c.control = read_control(in.raw("control"));
    if (in.has("network")) c.network = read_network(in.raw("network"));
    if (in.has("pid")) c.pid = read_pid(in.raw("pid"));
    if (in.has("plant")) c.plant = read_plant(in.raw("plant"));
    if (in.has("gps")) c.gps = read_gps(in.raw("gps"));
    if (in.has("arena") && !in.raw("arena").is_null()) c.arena = read_arena(in.raw("arena"));
    if (in.has("mode")) c.mode = mode_from_string(in.req<std::string>("mode"));
    if (in.has("formation") && !in.raw("formation").is_null()) c.formation = read_formation(in.raw("formation"));
    if (in.has("target_path")) {
        const auto& arr = in.raw("target_path");
        if (!arr.is_array()) throw ConfigError("target_path", "expected an array");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            ObjectReader w(arr[i], "target_path[" + std::to_string(i) + "]");
            Waypoint wp;
            wp.t = w.req<double>("t");
            wp.position = ObjectReader::read_vec(w.raw("position"), w.field("position"));
            w.finish();
            c.target_path.waypoints.push_back(wp);
        }
    }
    in.opt("leader", c.leader);
    if (in.has("initial_layout")) c.initial_layout = read_layout(in.raw("initial_layout"));
    in.opt("neighbor_expiry", c.neighbor_expiry);
    in.opt("log_every", c.log_every);
    in.opt("telemetry_every", c.telemetry_every);
    if (in.has("metrics")) c.metrics = read_metrics(in.raw("metrics"));
    if (in.has("commands")) {
        const auto& arr = in.raw("commands");
        if (!arr.is_array()) throw ConfigError("commands", "expected an array");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            ObjectReader w(arr[i], "commands[" + std::to_string(i) + "]");
            ScheduledCommand sc;
            sc.t = w.req<double>("t");
            sc.command = command_from_json(w.raw("command"));
            w.finish();
            c.commands.push_back(sc);
        }
    }
    in.finish();
    c.validate();
    return c;
}

json scenario_to_json(const ScenarioConfig& c) {
    json j;
    j["name"] = c.name;
    j["seed"] = c.seed;
    j["n_agents"] = c.n_agents;
    j["duration"] = c.duration;
    j["tick"] = c.tick;
    j["control"] = control_json(c.control);
    const auto& n = c.network;
    j["network"] = {{"comm_range", n.comm_range},   {"delay_mean", n.delay_mean},
                    {"delay_std", n.delay_std},     {"delay_min", n.delay_min},
                    {"packet_loss", n.packet_loss}, {"outage_rate", n.outage_rate},
                    {"outage_duration_mean", n.outage_duration_mean}, {"broadcast_hz", n.broadcast_hz}};
    j["pid"] = {{"kp", c.pid.kp}, {"ki", c.pid.ki}, {"kd", c.pid.kd}, {"i_limit", c.pid.i_limit},
                {"feedforward_gain", c.pid.feedforward_gain}};
    j["plant"] = {{"command_delay", c.plant.command_delay}, {"response_time", c.plant.response_time},
                  {"a_max", c.plant.a_max}, {"drag", c.plant.drag}, {"wind", vec_json(c.plant.wind)},
                  {"gust_std", c.plant.gust_std}};
    j["gps"] = {{"rate", c.gps.rate}, {"pos_error_std", c.gps.pos_error_std},
                {"pos_error_corr_time", c.gps.pos_error_corr_time}, {"vel_error_std", c.gps.vel_error_std}};
    j["arena"] = c.arena ? arena_json(*c.arena) : json(nullptr);
    j["mode"] = to_string(c.mode);
    if (c.formation) {
        j["formation"] = {{"shape", to_string(c.formation->shape)},
                          {"n_agents", c.formation->n_agents},
                          {"r0", c.formation->r0},
                          {"v_rotation", c.formation->v_rotation},
                          {"rotation", c.formation->rotation == RotationMode::Fixed ? "fixed" : "self_organized"}};
    } else {
        j["formation"] = nullptr;
    }
    j["target_path"] = json::array();
    for (const auto& w : c.target_path.waypoints) j["target_path"].push_back({{"t", w.t}, {"position", vec_json(w.position)}});
    j["leader"] = c.leader;
    const auto& l = c.initial_layout;
    json layout;
    layout["kind"] = l.kind == InitialLayout::Kind::Random ? "random" : l.kind == InitialLayout::Kind::Grid ? "grid" : "explicit";
    layout["center"] = vec_json(l.center);
    layout["radius"] = l.radius;
    layout["spacing"] = l.spacing;
    layout["min_spacing"] = l.min_spacing;
    layout["positions"] = json::array();
    for (const auto& p : l.positions) layout["positions"].push_back(vec_json(p));
    j["initial_layout"] = layout;
    j["neighbor_expiry"] = c.neighbor_expiry;
    j["log_every"] = c.log_every;
    j["telemetry_every"] = c.telemetry_every;
    j["metrics"] = {{"window", {c.metrics.window_start, c.metrics.window_end}},
                    {"phi_local_r", c.metrics.phi_local_r},
                    {"collision_radius", c.metrics.collision_radius}};
    j["commands"] = json::array();
    for (const auto& sc : c.commands) j["commands"].push_back({{"t", sc.t}, {"command", command_to_json(sc.command)}});
    return j;
}

ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("<file>", "cannot open scenario file '" + path + "'");
    json j;
    try {
        f >> j;
    } catch (const json::exception& e) {
        throw ConfigError("<file>", std::string("invalid JSON: ") + e.what());
    }
    return scenario_from_json(j);
}

std::vector<Waypoint> rectangle_path(Vec2 center, double width, double height, double speed, int laps,
                                     double t_start, bool from_center) {
    const double hw = width / 2.0;
    const double hh = height / 2.0;
    // counter-clockwise from the middle of the east side
    const std::array<Vec2, 5> ring{center + Vec2{hw, 0.0}, center + Vec2{hw, hh}, center + Vec2{-hw, hh},
                                   center + Vec2{-hw, -hh}, center + Vec2{hw, -hh}};
    std::vector<Waypoint> path;
    double t = t_start;
    Vec2 at = from_center ? center : ring[0];
    path.push_back({t, at});
    auto go = [&](Vec2 next) {
        t += (next - at).norm() / speed;
        at = next;
        path.push_back({t, at});
    };
    if (from_center) go(ring[0]);
    for (int lap = 0; lap < laps; ++lap) {
        for (std::size_t k = 1; k <= ring.size(); ++k) go(ring[k % ring.size()]);
    }
    return path;
}

// --- built-in experiments ------------------------------------------------------

namespace {

// Leader at `leader`, followers on a square grid around `followers`.
InitialLayout leader_layout(Vec2 leader, std::size_t n_followers, double spacing, Vec2 followers) {
    InitialLayout l;
    l.kind = InitialLayout::Kind::Explicit;
    l.positions.push_back(leader);
    const auto cols = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n_followers))));
    const std::size_t rows = (n_followers + cols - 1) / cols;
    const Vec2 origin = followers - Vec2{static_cast<double>(cols - 1), static_cast<double>(rows - 1)} * (spacing / 2.0);
    for (std::size_t i = 0; i < n_followers; ++i)
        l.positions.push_back(origin + Vec2{static_cast<double>(i % cols), static_cast<double>(i / cols)} * spacing);
    return l;
}

ScenarioConfig leader_grid_9() {
    ScenarioConfig c;
    c.name = "leader_grid_9";
    c.n_agents = 10;
    c.leader = true;
    c.mode = ControlMode::Tracking;
    c.control.r0 = 10.0;
    c.control.r2 = 5.0;
    c.control.v0 = 2.0;
    c.formation = FormationSpec{Shape::Grid, 9, 10.0, 0.0, RotationMode::Fixed};
    c.target_path.waypoints = rectangle_path({0.0, 0.0}, 60.0, 40.0, 1.8, 2, 5.0, true);
    c.duration = 255.0;
    c.initial_layout = leader_layout({0.0, 0.0}, 9, 10.0, {0.0, -25.0});
    c.metrics.window_start = 25.0;
    c.metrics.window_end = 250.0;
    c.metrics.phi_local_r = {50.0};
    return c;
}

ScenarioConfig ring_resize() {
    ScenarioConfig c;
    c.name = "ring_resize";
    c.n_agents = 10;
    c.mode = ControlMode::Tracking;
    c.control.r0 = 7.0;
    c.control.r2 = 3.5;
    c.control.v0 = 3.0;
    c.control.C_frict = 20.0;  // the widened ring needs the stronger end of the range
    c.formation = FormationSpec{Shape::Ring, 10, 7.0, 2.0, RotationMode::Fixed};
    c.target_path.waypoints = {{0.0, {0.0, 0.0}}};
    c.duration = 270.0;
    c.initial_layout.kind = InitialLayout::Kind::Grid;
    c.initial_layout.spacing = 7.0;
    c.metrics.window_start = 60.0;
    c.metrics.window_end = 90.0;
    Command up{SetParam{"r0", 17.0}, 90.0};
    Command down{SetParam{"r0", 7.0}, 180.0};
    c.commands = {{90.0, up}, {180.0, down}};
    return c;
}

ScenarioConfig line_follow() {
    ScenarioConfig c;
    c.name = "line_follow";
    c.n_agents = 8;
    c.leader = true;
    c.mode = ControlMode::Tracking;
    c.control.r0 = 10.0;
    c.control.v0 = 2.0;
    c.formation = FormationSpec{Shape::Line, 7, 10.0, 0.0, RotationMode::Fixed};
    c.target_path.waypoints = {{10.0, {0.0, 0.0}}, {77.0, {100.0, 0.0}}, {100.0, {100.0, 0.0}}, {167.0, {0.0, 0.0}}};
    c.duration = 180.0;
    c.initial_layout = leader_layout({0.0, 0.0}, 7, 10.0, {-20.0, -20.0});
    return c;
}

ScenarioConfig spp_annulus() {
    ScenarioConfig c;
    c.name = "spp_annulus";
    c.n_agents = 9;
    c.mode = ControlMode::Flocking;
    c.control.r0 = 10.0;
    c.control.v_flock = 2.0;
    c.arena = Arena{Annulus{{0.0, 0.0}, 15.0, 45.0}};
    c.duration = 300.0;
    c.initial_layout.kind = InitialLayout::Kind::Random;
    c.metrics.window_start = 30.0;
    c.metrics.phi_local_r = {50.0};
    return c;
}

ScenarioConfig grid_hold() {
    ScenarioConfig c;
    c.name = "grid_hold";
    c.n_agents = 10;
    c.mode = ControlMode::Tracking;
    c.control.r0 = 10.0;
    c.formation = FormationSpec{Shape::Grid, 10, 10.0, 0.0, RotationMode::Fixed};
    c.target_path.waypoints = {{0.0, {0.0, 0.0}}};
    c.duration = 180.0;
    c.initial_layout.kind = InitialLayout::Kind::Grid;
    c.initial_layout.spacing = 8.0;
    c.initial_layout.center = {20.0, 10.0};
    c.metrics.window_start = 120.0;
    return c;
}

}  // namespace

ScenarioConfig range_sweep_scenario(double comm_range, std::uint64_t seed) {
    ScenarioConfig c;
    c.name = "fig8_sweep";
    c.seed = seed;
    c.n_agents = 100;
    c.mode = ControlMode::Flocking;
    c.duration = 600.0;
    c.control.r0 = 8.0;
    c.control.r2 = 4.0;
    c.control.D = 1.0;
    c.control.C_frict = 30.0;
    c.control.v_flock = 2.0;
    c.control.dt_lookahead = 1.0;
    c.control.tau = 1.0;
    c.control.r1 = 10.0;  // above r0: full repulsion, and friction softened against 1 s old velocities
    c.network.comm_range = comm_range;
    c.network.delay_mean = 1.0;
    c.network.delay_std = 0.0;
    c.network.packet_loss = 0.0;
    c.network.outage_rate = 0.0;
    c.plant.gust_std = std::sqrt(0.1);
    c.gps.pos_error_std = 0.0;
    c.gps.vel_error_std = 0.0;
    c.arena = Arena{Rect{{0.0, 0.0}, 150.0, 150.0}};
    c.initial_layout.kind = InitialLayout::Kind::Random;
    c.log_every = 40;
    c.telemetry_every = 40;
    c.metrics.window_start = 0.0;
    c.metrics.phi_local_r = {5.0 * c.control.r0};
    return c;
}

std::map<std::string, ScenarioConfig> builtin_scenarios() {
    std::map<std::string, ScenarioConfig> out;
    for (auto c : {leader_grid_9(), ring_resize(), line_follow(), spp_annulus(), grid_hold(),
                   range_sweep_scenario(24.0, 1)}) {
        c.validate();
        out.emplace(c.name, c);
    }
    return out;
}

ScenarioConfig builtin_scenario(const std::string& name) {
    auto all = builtin_scenarios();
    auto it = all.find(name);
    if (it == all.end()) throw ConfigError("scenario", "no built-in scenario named '" + name + "'");
    return it->second;
}

}  // namespace flocksim
