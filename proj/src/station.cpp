#include "flocksim/station.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "flocksim/hash.hpp"
#include "flocksim/json_util.hpp"

namespace flocksim {

using nlohmann::json;
using json_util::vec_json;

namespace {

std::string hex64(std::uint64_t v) {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i, v >>= 4) out[static_cast<std::size_t>(i)] = kDigits[v & 0xf];
    return out;
}

}  // namespace

json live_params(const ScenarioConfig& cfg) {
    json j{{"r0", cfg.control.r0},           {"v_flock", cfg.control.v_flock}, {"v0", cfg.control.v0},
           {"C_frict", cfg.control.C_frict}, {"D", cfg.control.D},             {"r2", cfg.control.r2}};
    if (cfg.formation) {
        j["v_rotation"] = cfg.formation->v_rotation;
        j["shape"] = to_string(cfg.formation->shape);
    }
    return j;
}

json TelemetryFrame::to_json() const {
    json agents_json = json::array();
    for (const auto& a : agents) {
        agents_json.push_back({{"id", a.id},
                               {"position", vec_json(a.position)},
                               {"velocity", vec_json(a.velocity)},
                               {"sensed", vec_json(a.sensed)},
                               {"status", to_string(a.status)},
                               {"cache_size", a.cache_size}});
    }
    return {{"type", "frame"},
            {"t", t},
            {"tick", tick},
            {"agents", std::move(agents_json)},
            {"target", target ? vec_json(*target) : json(nullptr)},
            {"phi", phi ? json(*phi) : json(nullptr)},
            {"formation", formation ? json(to_string(*formation)) : json(nullptr)},
            {"params", params},
            {"params_digest", params_digest}};
}

TelemetryFrame make_frame(const Simulation& sim) {
    TelemetryFrame f;
    f.t = sim.time();
    f.tick = sim.tick_index();
    f.agents.reserve(sim.agents().size());
    for (const auto& a : sim.agents()) {
        f.agents.push_back({a.truth.id, a.truth.position, a.truth.velocity, a.fix.position, a.truth.status,
                            a.cache.size()});
    }
    f.target = sim.target_position();
    f.phi = sim.metrics().latest_phi();
    const auto& cfg = sim.config();
    if (cfg.formation && cfg.mode == ControlMode::Tracking) f.formation = cfg.formation->shape;
    f.params = live_params(cfg);
    const std::string dump = f.params.dump();
    f.params_digest = hex64(fnv1a64(dump.data(), dump.size()));
    return f;
}

std::size_t frame_period_ticks(const ScenarioConfig& cfg, bool paced) {
    if (!paced) return std::max<std::size_t>(cfg.telemetry_every, 1);
    return std::max<std::size_t>(static_cast<std::size_t>(std::llround(0.1 / cfg.tick)), 1);
}

// ---------------------------------------------------------------------------

SessionRecorder::SessionRecorder(const std::string& path, const ScenarioConfig& cfg) : out_(path) {
    if (!out_) throw std::runtime_error("cannot open transcript '" + path + "' for writing");
    out_ << json{{"type", "header"}, {"seed", cfg.seed}, {"scenario", scenario_to_json(cfg)}}.dump() << '\n';
    out_.flush();
    if (!out_) throw std::runtime_error("cannot write transcript '" + path + "'");
}

void SessionRecorder::record_command(const AppliedCommand& applied, double t) {
    out_ << json{{"type", "command"}, {"tick", applied.tick}, {"t", t}, {"command", command_to_json(applied.command)}}
                .dump()
         << '\n';
    ++commands_;
}

void SessionRecorder::record_frame(const TelemetryFrame& frame) {
    out_ << frame.to_json().dump() << '\n';
    ++frames_;
}

void SessionRecorder::record_end(std::size_t tick, const std::string& tracklog_digest) {
    out_ << json{{"type", "end"}, {"tick", tick}, {"tracklog_digest", tracklog_digest}}.dump() << '\n';
    out_.flush();
}

std::string tracklog_digest(const Tracklog& log) {
    const std::string csv = log.to_csv();
    return hex64(fnv1a64(csv.data(), csv.size()));
}

Transcript load_transcript(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open transcript '" + path + "'");
    Transcript tr;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        const std::string type = j.value("type", "");
        if (type == "header") {
            tr.scenario = scenario_from_json(j.at("scenario"));
            tr.scenario->seed = j.at("seed").get<std::uint64_t>();
        } else if (type == "command") {
            tr.commands.emplace_back(j.at("tick").get<std::size_t>(), command_from_json(j.at("command")));
        } else if (type == "frame") {
            ++tr.frames;
        } else if (type == "end") {
            tr.end_tick = j.at("tick").get<std::size_t>();
            tr.tracklog_digest = j.at("tracklog_digest").get<std::string>();
        } else {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": unknown record type '" + type + "'");
        }
    }
    if (!tr.scenario) throw std::runtime_error(path + ": missing header");
    return tr;
}

ScenarioConfig replay_config(const Transcript& transcript, ScenarioConfig base) {
    if (transcript.scenario) base.seed = transcript.scenario->seed;
    // Scripted commands already in the scenario keep their place ahead of
    // live ones at the same tick, as in the recorded run.
    std::stable_sort(base.commands.begin(), base.commands.end(),
                     [](const ScheduledCommand& a, const ScheduledCommand& b) { return a.t < b.t; });
    for (const auto& [tick, cmd] : transcript.commands) {
        if (is_runner_command(cmd)) continue;
        base.commands.push_back({static_cast<double>(tick) * base.tick, cmd});
    }
    std::stable_sort(base.commands.begin(), base.commands.end(),
                     [](const ScheduledCommand& a, const ScheduledCommand& b) { return a.t < b.t; });
    return base;
}

std::pair<std::string, std::uint16_t> parse_address(const std::string& addr) {
    const auto colon = addr.rfind(':');
    if (colon == std::string::npos) throw ConfigError("serve", "expected HOST:PORT, got '" + addr + "'");
    const std::string port_text = addr.substr(colon + 1);
    int port = -1;
    try {
        std::size_t used = 0;
        port = std::stoi(port_text, &used);
        if (used != port_text.size()) port = -1;
    } catch (const std::exception&) {
        port = -1;
    }
    if (port < 0 || port > 65535) throw ConfigError("serve", "bad port '" + port_text + "'");
    std::string host = addr.substr(0, colon);
    if (host.empty()) host = "0.0.0.0";
    return {host, static_cast<std::uint16_t>(port)};
}

// ---------------------------------------------------------------------------

Runner::Runner(ScenarioConfig cfg, ExecPolicy policy) : sim_(std::move(cfg), policy) {}

void Runner::set_pacing(Pacing pacing) { realtime_ = pacing == Pacing::Realtime; }

void Runner::set_time_scale(double scale) {
    if (!(scale > 0.0) || !std::isfinite(scale)) throw ConfigError("time_scale", "must be finite and > 0");
    time_scale_ = scale;
}

std::optional<std::string> Runner::handle(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        return std::string("malformed JSON: ") + e.what();
    }
    try {
        return handle(command_from_json(j));
    } catch (const ConfigError& e) {
        return std::string(e.what());
    }
}

std::optional<std::string> Runner::handle(const Command& cmd) {
    if (const auto* p = std::get_if<SetPacing>(&cmd.kind)) {
        set_pacing(p->pacing);
        return std::nullopt;
    }
    if (std::holds_alternative<Pause>(cmd.kind)) {
        paused_ = true;
        return std::nullopt;
    }
    if (std::holds_alternative<Resume>(cmd.kind)) {
        paused_ = false;
        return std::nullopt;
    }
    std::lock_guard lock(mutex_);
    try {
        sim_.submit(cmd);
    } catch (const ConfigError& e) {
        return std::string(e.what());
    }
    return std::nullopt;
}

void Runner::emit() {
    const TelemetryFrame frame = make_frame(sim_);
    ++frames_;
    if (recorder_) recorder_->record_frame(frame);
    if (gateway_) gateway_->publish(frame.to_json().dump() + "\n");
    if (on_frame) on_frame(frame);
}

void Runner::run() {
    using clock = std::chrono::steady_clock;
    // Wall-clock anchor for paced runs; reset whenever pacing resumes.
    std::optional<std::pair<clock::time_point, double>> anchor;
    while (!stop_) {
        if (paused_) {
            anchor.reset();
            std::this_thread::sleep_for(std::chrono::milliseconds(10));
            continue;
        }
        const bool paced = realtime_;
        {
            std::lock_guard lock(mutex_);
            if (sim_.finished()) break;
            sim_.step();
            const auto& applied = sim_.applied_commands();
            for (; recorded_ < applied.size(); ++recorded_) {
                if (recorder_ && applied[recorded_].live)
                    recorder_->record_command(applied[recorded_],
                                              static_cast<double>(applied[recorded_].tick) * sim_.config().tick);
            }
            if (sim_.tick_index() % frame_period_ticks(sim_.config(), paced) == 0) emit();
        }
        if (paced) {
            if (!anchor) anchor.emplace(clock::now(), sim_.time());
            const auto due = anchor->first + std::chrono::duration_cast<clock::duration>(
                                                 std::chrono::duration<double>((sim_.time() - anchor->second) /
                                                                               time_scale_));
            std::this_thread::sleep_until(due);
        } else {
            anchor.reset();
        }
    }
    if (recorder_) {
        std::lock_guard lock(mutex_);
        recorder_->record_end(sim_.tick_index(), tracklog_digest(sim_.tracklog()));
    }
}

std::string Runner::scenario_json() const {
    std::lock_guard lock(mutex_);
    return scenario_to_json(sim_.config()).dump(2);
}

std::string Runner::metrics_json() const {
    std::lock_guard lock(mutex_);
    return sim_.report().to_json().dump(2);
}

GatewayHandlers Runner::handlers() {
    return {[this](const std::string& text) { return handle(text); }, [this] { return scenario_json(); },
            [this] { return metrics_json(); }};
}

}  // namespace flocksim
