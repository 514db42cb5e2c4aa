#pragma once

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "flocksim/core.hpp"
#include "flocksim/kernels.hpp"
#include "json.hpp"

namespace flocksim {

struct AgentSample {
    Vec2 position;  // truth
    double altitude = 0.0;
    Vec2 velocity;  // truth
    Vec2 sensed;    // onboard position estimate
    Vec2 desired;   // output of the control law
    Status status = Status::Airborne;
};

struct TrackRecord {
    double t = 0.0;
    std::optional<Vec2> target;
    std::vector<AgentSample> agents;
};

/// Time-ordered truth samples of a run.
struct Tracklog {
    std::vector<TrackRecord> records;

    /// One CSV row per agent per record. Numbers use shortest round-trip form,
    /// so equal logs produce equal bytes.
    std::string to_csv() const;
    void write_csv(const std::string& path) const;
};

/// Velocity correlation: mean pairwise cosine between velocity directions of
/// agents moving faster than kAlignmentSpeedFloor. nullopt with fewer than
/// two such agents.
std::optional<double> velocity_correlation(std::span<const AgentState> states);

struct NeighborStats {
    double mean = 0.0;
    double stddev = 0.0;  // population
};

/// Mean and std of each agent's distance to its closest other agent.
std::optional<NeighborStats> neighbor_stats(std::span<const AgentState> states);

/// Time average over records in [t0, t1] of the mean pairwise cosine over
/// pairs closer than r. Records without any such pair are skipped; nullopt
/// if no record qualifies. Landed agents are ignored.
std::optional<double> local_correlation(const Tracklog& log, double r, double t0, double t1,
                                        ExecPolicy policy = ExecPolicy::Parallel);

struct MetricsReport {
    std::vector<std::pair<double, std::optional<double>>> phi_series;
    std::optional<double> phi_mean;
    std::optional<double> phi_std;
    double window_start = 0.0;
    double window_end = 0.0;
    std::map<double, std::optional<double>> phi_local;
    std::vector<std::pair<double, std::optional<NeighborStats>>> nn_series;
    double min_pairwise_distance = 0.0;
    std::size_t collision_count = 0;
    double collision_radius = 1.5;
    std::string noise_model;

    nlohmann::json to_json() const;
    /// Columns t,phi; undefined values are left empty.
    std::string phi_csv() const;
    /// Columns t,nn_mean,nn_std.
    std::string nn_csv() const;
};

/// Accumulates metrics while a run progresses.
class MetricsCollector {
public:
    explicit MetricsCollector(double collision_radius = 1.5, ExecPolicy policy = ExecPolicy::Parallel)
        : collision_radius_(collision_radius), policy_(policy) {}

    /// Safety statistics; call every tick with the agents still in the air.
    /// Distances are three-dimensional, so agents cruising at different
    /// altitudes keep their vertical separation.
    void observe_safety(std::span<const AgentState> airborne);
    /// Order parameter and neighbor statistics at a logged instant.
    void observe_sample(double t, std::span<const AgentState> airborne);

    std::optional<double> latest_phi() const;
    std::optional<NeighborStats> latest_nn() const;

    /// Finalizes window statistics and local correlations from the log.
    MetricsReport report(const Tracklog& log, double window_start, double window_end,
                         std::span<const double> local_radii) const;

private:
    double collision_radius_;
    ExecPolicy policy_;
    double min_distance_ = std::numeric_limits<double>::infinity();
    std::set<std::pair<AgentId, AgentId>> collided_;
    std::vector<std::pair<double, std::optional<double>>> phi_series_;
    std::vector<std::pair<double, std::optional<NeighborStats>>> nn_series_;
};

}  // namespace flocksim
