#pragma once

#include <atomic>
#include <cstdint>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "flocksim/command.hpp"
#include "flocksim/simulation.hpp"
#include "json.hpp"

namespace flocksim {

struct AgentTelemetry {
    AgentId id = 0;
    Vec2 position;  // truth
    Vec2 velocity;  // truth
    Vec2 sensed;
    Status status = Status::Airborne;
    std::size_t cache_size = 0;
};

/// Observer snapshot of a running simulation.
struct TelemetryFrame {
    double t = 0.0;
    std::size_t tick = 0;
    std::vector<AgentTelemetry> agents;
    std::optional<Vec2> target;
    std::optional<double> phi;
    std::optional<Shape> formation;
    nlohmann::json params;  // live-tunable values
    std::string params_digest;

    nlohmann::json to_json() const;
};

/// Values that SetParam may change, as currently in force.
nlohmann::json live_params(const ScenarioConfig& cfg);

TelemetryFrame make_frame(const Simulation& sim);

/// Ticks between frames: 10 Hz of simulated time when paced, every
/// `telemetry_every` ticks otherwise.
std::size_t frame_period_ticks(const ScenarioConfig& cfg, bool paced);

/// JSON-lines transcript of a session: a header with the scenario, then
/// every accepted live command (with the tick it took effect) and frame.
class SessionRecorder {
public:
    /// Throws std::runtime_error if the file cannot be opened.
    SessionRecorder(const std::string& path, const ScenarioConfig& cfg);

    void record_command(const AppliedCommand& applied, double t);
    void record_frame(const TelemetryFrame& frame);
    /// Closing line: how far the session got and what it produced.
    void record_end(std::size_t tick, const std::string& tracklog_digest);
    void flush() { out_.flush(); }
    std::size_t frames() const { return frames_; }
    std::size_t commands() const { return commands_; }

private:
    std::ofstream out_;
    std::size_t frames_ = 0;
    std::size_t commands_ = 0;
};

struct Transcript {
    std::optional<ScenarioConfig> scenario;  // from the header
    std::vector<std::pair<std::size_t, Command>> commands;  // (tick, command)
    std::size_t frames = 0;
    std::optional<std::size_t> end_tick;  // absent if the session did not close cleanly
    std::optional<std::string> tracklog_digest;
};

/// Hex FNV-1a of the tracklog CSV.
std::string tracklog_digest(const Tracklog& log);

Transcript load_transcript(const std::string& path);

/// `base` with the transcript's live commands turned into scripted ones at
/// the ticks they took effect, and the seed taken from the header.
ScenarioConfig replay_config(const Transcript& transcript, ScenarioConfig base);

/// Hooks the network gateway calls from its own threads.
struct GatewayHandlers {
    /// Returns a rejection reason, or nullopt if the command was accepted.
    std::function<std::optional<std::string>(const std::string& text)> on_command;
    std::function<std::string()> scenario_json;
    std::function<std::string()> metrics_json;
};

/// WebSocket + HTTP endpoint. /ws streams frames and accepts commands;
/// GET /scenario and GET /metrics return JSON documents.
class Gateway {
public:
    /// Binds immediately; port 0 picks a free port. Throws on bind failure.
    Gateway(const std::string& host, std::uint16_t port, GatewayHandlers handlers);
    ~Gateway();
    Gateway(const Gateway&) = delete;
    Gateway& operator=(const Gateway&) = delete;

    std::uint16_t port() const;
    /// Sends one text message to every connected WebSocket client.
    void publish(const std::string& text);
    std::size_t clients() const;
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Splits "host:port" (host may be empty for all interfaces).
std::pair<std::string, std::uint16_t> parse_address(const std::string& addr);

/// Drives a simulation, applying operator commands at tick boundaries and
/// emitting frames. The thread inside run() is the only one that mutates the
/// world; HTTP readers and command checks take the same lock as a step.
class Runner {
public:
    Runner(ScenarioConfig cfg, ExecPolicy policy = ExecPolicy::Parallel);

    void attach(Gateway* gateway) { gateway_ = gateway; }
    void attach(SessionRecorder* recorder) { recorder_ = recorder; }
    void set_pacing(Pacing pacing);
    bool realtime() const { return realtime_; }
    /// Simulated seconds per wall second when paced; 1 is real time.
    void set_time_scale(double scale);

    /// Entry point for wire commands from any thread.
    std::optional<std::string> handle(const std::string& text);
    /// Same, for parsed commands.
    std::optional<std::string> handle(const Command& cmd);

    /// Runs to the end of the scenario, or until stop().
    void run();
    void stop() { stop_ = true; }
    bool paused() const { return paused_; }

    std::string scenario_json() const;
    std::string metrics_json() const;
    /// Frames emitted so far.
    std::size_t frames() const { return frames_; }
    /// Called with every emitted frame, on the simulation thread.
    std::function<void(const TelemetryFrame&)> on_frame;

    const Simulation& simulation() const { return sim_; }
    GatewayHandlers handlers();

private:
    void emit();

    Simulation sim_;
    mutable std::mutex mutex_;  // guards sim_ against readers while stepping
    Gateway* gateway_ = nullptr;
    SessionRecorder* recorder_ = nullptr;
    std::atomic<bool> realtime_{false};
    std::atomic<double> time_scale_{1.0};
    std::atomic<bool> paused_{false};
    std::atomic<bool> stop_{false};
    std::size_t recorded_ = 0;
    std::atomic<std::size_t> frames_{0};
};

}  // namespace flocksim
