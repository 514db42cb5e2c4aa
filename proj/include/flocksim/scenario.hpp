#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "flocksim/command.hpp"
#include "flocksim/control.hpp"
#include "flocksim/formation.hpp"
#include "flocksim/netsim.hpp"
#include "flocksim/vehicle.hpp"
#include "json.hpp"

namespace flocksim {

struct Waypoint {
    double t = 0.0;
    Vec2 position;
};

/// Piecewise-linear target trajectory; held at the ends.
struct TargetPath {
    std::vector<Waypoint> waypoints;

    bool empty() const { return waypoints.empty(); }
    Vec2 position(double t) const;
    Vec2 velocity(double t) const;
};

struct InitialLayout {
    enum class Kind { Random, Grid, Explicit };
    Kind kind = Kind::Random;
    Vec2 center;                   // Random without arena, and Grid
    double radius = 50.0;          // Random without arena: disc radius
    double spacing = 10.0;         // Grid
    double min_spacing = 0.0;      // Random; 0 means r0 / 2
    std::vector<Vec2> positions;   // Explicit
};

struct MetricsConfig {
    double window_start = 0.0;
    double window_end = -1.0;  // negative: end of run
    std::vector<double> phi_local_r;
    double collision_radius = 1.5;
};

struct ScheduledCommand {
    double t = 0.0;
    Command command;
};

struct ScenarioConfig {
    std::string name = "custom";
    std::uint64_t seed = 1;
    std::size_t n_agents = 10;
    double duration = 60.0;
    double tick = 0.025;
    ControlParams control;
    NetworkParams network;
    PidParams pid;
    PlantParams plant;
    GpsModel gps;
    std::optional<Arena> arena;
    ControlMode mode = ControlMode::Flocking;
    std::optional<FormationSpec> formation;
    TargetPath target_path;
    bool leader = false;  // agent 0 flies target_path; others track its broadcasts
    InitialLayout initial_layout;
    double neighbor_expiry = 5.0;
    std::size_t log_every = 1;        // ticks between tracklog records
    std::size_t telemetry_every = 4;  // ticks between telemetry frames
    MetricsConfig metrics;
    std::vector<ScheduledCommand> commands;

    /// Throws ConfigError naming the offending field.
    void validate() const;

    std::size_t ticks_total() const;
    std::size_t broadcast_period_ticks() const;
    std::size_t gps_period_ticks() const;
};

ScenarioConfig scenario_from_json(const nlohmann::json& j);
nlohmann::json scenario_to_json(const ScenarioConfig& cfg);
ScenarioConfig load_scenario(const std::string& path);

const char* to_string(ControlMode m);

/// Timed waypoints around a width x height rectangle, `laps` times, at
/// constant speed, counter-clockwise from the middle of the east side so
/// every turn is a 90 degree corner. With `from_center` the path first
/// leaves `center` for that starting point.
std::vector<Waypoint> rectangle_path(Vec2 center, double width, double height, double speed, int laps,
                                     double t_start, bool from_center);

/// Built-in experiment set, keyed by name.
std::map<std::string, ScenarioConfig> builtin_scenarios();
ScenarioConfig builtin_scenario(const std::string& name);

/// One point of the large-flock communication-range sweep ("fig8_sweep").
ScenarioConfig range_sweep_scenario(double comm_range, std::uint64_t seed);

}  // namespace flocksim
