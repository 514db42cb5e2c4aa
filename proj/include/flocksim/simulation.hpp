#pragma once

#include <cstdint>
#include <mutex>
#include <optional>
#include <utility>
#include <vector>

#include "flocksim/command.hpp"
#include "flocksim/kernels.hpp"
#include "flocksim/metrics.hpp"
#include "flocksim/netsim.hpp"
#include "flocksim/scenario.hpp"
#include "flocksim/vehicle.hpp"

namespace flocksim {

/// A command as it took effect: the tick boundary it was applied at.
struct AppliedCommand {
    std::size_t tick = 0;
    Command command;
    bool live = false;  // submitted while running, as opposed to scripted in the scenario
};

/// Per-agent onboard state. Only `truth` and `plant` are physical; the
/// controller reads the GPS fix and the neighbor cache.
struct Agent {
    AgentState truth;
    PlantState plant;
    PidState pid;
    GpsState gps;
    GpsFix fix;
    NeighborCache cache;
    Rng gps_rng;
    Rng plant_rng;
    Vec2 desired;
    std::optional<double> ring_angle;
    std::vector<PerceivedNeighbor> scratch;
};

/// Fixed-step orchestration of agents, medium, target and commands.
///
/// Within a tick the agents only interact through the medium, so the
/// per-agent phases run as OpenMP loops; ExecPolicy::Serial runs the same
/// loops on one thread and yields bit-identical logs.
class Simulation {
public:
    explicit Simulation(ScenarioConfig cfg, ExecPolicy policy = ExecPolicy::Parallel);

    void step();
    /// Steps until the configured duration has elapsed.
    void run();
    bool finished() const { return tick_ >= total_ticks_; }

    double time() const { return static_cast<double>(tick_) * cfg_.tick; }
    std::size_t tick_index() const { return tick_; }

    /// Throws ConfigError if the command would be rejected. Does not mutate.
    void check(const Command& cmd) const;
    /// Queues a command for the next tick boundary. Thread-safe. Throws on
    /// invalid commands; runner commands (pause, pacing) are not accepted.
    void submit(const Command& cmd);

    const ScenarioConfig& config() const { return cfg_; }
    const Tracklog& tracklog() const { return log_; }
    const std::vector<Agent>& agents() const { return agents_; }
    const std::vector<AppliedCommand>& applied_commands() const { return applied_; }
    const MetricsCollector& metrics() const { return metrics_; }
    std::optional<Vec2> target_position() const;
    MetricsReport report() const;

private:
    void place_agents();
    void apply_pending();
    void apply(const Command& cmd, bool live);
    void update_formation_size();
    Vec2 control_agent(std::size_t i, double t);
    void record();
    std::vector<AgentState> flying_truth() const;

    ScenarioConfig cfg_;
    ExecPolicy policy_;
    std::size_t tick_ = 0;
    std::size_t total_ticks_ = 0;
    std::size_t gps_period_ = 1;
    std::size_t broadcast_period_ = 1;
    std::vector<Agent> agents_;
    Medium medium_;
    Tracklog log_;
    MetricsCollector metrics_;
    std::vector<AppliedCommand> applied_;
    std::size_t next_scripted_ = 0;

    mutable std::mutex inbox_mutex_;
    std::vector<Command> inbox_;
};

/// Runs a scenario from t = 0 to its duration.
std::pair<Tracklog, MetricsReport> run_scenario(const ScenarioConfig& cfg, ExecPolicy policy = ExecPolicy::Parallel);

}  // namespace flocksim
