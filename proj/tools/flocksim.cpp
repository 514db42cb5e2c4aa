// flocksim: headless runs, the communication-range sweep, transcript replay,
// and the ground-station gateway.

#include <cmath>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "flocksim/scenario.hpp"
#include "flocksim/simulation.hpp"
#include "flocksim/station.hpp"

namespace fs = std::filesystem;
using namespace flocksim;
using nlohmann::json;

namespace {

Runner* g_runner = nullptr;

extern "C" void on_signal(int) {
    if (g_runner) g_runner->stop();
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
    f << text;
}

/// A path to a scenario file, or the name of a built-in one.
ScenarioConfig resolve_scenario(const std::string& arg) {
    if (fs::exists(arg)) return load_scenario(arg);
    const auto builtins = builtin_scenarios();
    if (auto it = builtins.find(arg); it != builtins.end()) return it->second;
    throw std::runtime_error("'" + arg + "' is neither a scenario file nor a built-in scenario");
}

void write_outputs(const fs::path& dir, const Tracklog& log, const MetricsReport& report) {
    log.write_csv((dir / "tracklog.csv").string());
    write_text(dir / "metrics.json", report.to_json().dump(2) + "\n");
    write_text(dir / "phi.csv", report.phi_csv());
    write_text(dir / "nn.csv", report.nn_csv());
}

std::string fmt_opt(const std::optional<double>& v, int precision = 3) {
    if (!v) return "n/a";
    std::ostringstream os;
    os << std::fixed << std::setprecision(precision) << *v;
    return os.str();
}

void print_summary(const std::string& name, const MetricsReport& r, const std::string& digest) {
    std::cout << name << ": phi_mean=" << fmt_opt(r.phi_mean) << " phi_std=" << fmt_opt(r.phi_std)
              << " min_distance=" << fmt_opt(r.min_pairwise_distance, 2) << " collisions=" << r.collision_count
              << " tracklog=" << digest << "\n";
}

int cmd_run(const std::string& scenario_arg, std::optional<std::uint64_t> seed, const std::string& serve,
            bool realtime, const std::string& out, bool serial) {
    ScenarioConfig cfg = resolve_scenario(scenario_arg);
    if (seed) cfg.seed = *seed;
    cfg.validate();

    std::optional<fs::path> dir;
    if (!out.empty()) {
        dir = fs::path(out);
        fs::create_directories(*dir);
    }

    Runner runner(cfg, serial ? ExecPolicy::Serial : ExecPolicy::Parallel);
    runner.set_pacing(realtime ? Pacing::Realtime : Pacing::MaxSpeed);

    std::optional<SessionRecorder> recorder;
    if (dir) {
        recorder.emplace((*dir / "transcript.jsonl").string(), cfg);
        runner.attach(&*recorder);
    }

    std::unique_ptr<Gateway> gateway;
    if (!serve.empty()) {
        const auto [host, port] = parse_address(serve);
        gateway = std::make_unique<Gateway>(host, port, runner.handlers());
        runner.attach(gateway.get());
        std::cerr << "serving ws://" << host << ":" << gateway->port() << "/ws\n";
    }

    g_runner = &runner;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    runner.run();
    g_runner = nullptr;
    if (gateway) gateway->stop();

    const auto& sim = runner.simulation();
    const MetricsReport report = sim.report();
    const std::string digest = tracklog_digest(sim.tracklog());
    if (dir) write_outputs(*dir, sim.tracklog(), report);
    print_summary(cfg.name, report, digest);
    return 0;
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        const double v = std::stod(item, &used);
        if (used != item.size()) throw std::runtime_error("bad number '" + item + "'");
        out.push_back(v);
    }
    if (out.empty()) throw std::runtime_error("empty list");
    return out;
}

int cmd_sweep(const std::string& which, const std::string& rc_text, const std::string& seeds_text,
              const std::string& out, std::optional<double> duration) {
    if (which != "fig8") throw std::runtime_error("unknown sweep '" + which + "' (known: fig8)");
    const auto rcs = parse_list(rc_text);
    const auto seeds = parse_list(seeds_text);
    fs::create_directories(out);

    std::ostringstream csv;
    csv << "rc,seed,phi_local,phi_mean,min_distance,collisions\n";
    csv.precision(17);
    json summary = json::array();
    for (double rc : rcs) {
        double sum = 0.0;
        std::size_t count = 0;
        json runs = json::array();
        for (double seed_value : seeds) {
            if (seed_value < 0 || seed_value != std::floor(seed_value))
                throw std::runtime_error("seeds must be non-negative integers");
            const auto s = static_cast<std::uint64_t>(seed_value);
            ScenarioConfig cfg = range_sweep_scenario(rc, s);
            if (duration) {
                cfg.duration = *duration;
                cfg.metrics.window_end = -1.0;
            }
            const auto [log, report] = run_scenario(cfg);
            const double r_local = cfg.metrics.phi_local_r.front();
            const auto phi = report.phi_local.at(r_local);
            csv << rc << "," << s << "," << (phi ? std::to_string(*phi) : "") << ","
                << (report.phi_mean ? std::to_string(*report.phi_mean) : "") << "," << report.min_pairwise_distance
                << "," << report.collision_count << "\n";
            if (phi) {
                sum += *phi;
                ++count;
            }
            runs.push_back({{"seed", s},
                            {"phi_local", phi ? json(*phi) : json(nullptr)},
                            {"collisions", report.collision_count},
                            {"min_distance", report.min_pairwise_distance}});
            std::cout << "rc=" << rc << " seed=" << s << " phi(" << r_local << " m)=" << fmt_opt(phi)
                      << " collisions=" << report.collision_count << std::endl;
        }
        const std::optional<double> mean = count ? std::optional(sum / static_cast<double>(count)) : std::nullopt;
        summary.push_back({{"rc", rc}, {"phi_local_mean", mean ? json(*mean) : json(nullptr)}, {"runs", runs}});
        std::cout << "rc=" << rc << " mean=" << fmt_opt(mean) << std::endl;
    }
    write_text(fs::path(out) / "sweep.csv", csv.str());
    write_text(fs::path(out) / "summary.json", summary.dump(2) + "\n");
    return 0;
}

int cmd_replay(const std::string& transcript_path, const std::string& scenario_arg, const std::string& out) {
    const Transcript tr = load_transcript(transcript_path);
    ScenarioConfig cfg = replay_config(tr, resolve_scenario(scenario_arg));
    cfg.validate();
    Simulation sim(cfg);
    const std::size_t end = tr.end_tick ? *tr.end_tick : cfg.ticks_total();
    while (sim.tick_index() < end && !sim.finished()) sim.step();

    const MetricsReport report = sim.report();
    const std::string digest = tracklog_digest(sim.tracklog());
    if (!out.empty()) {
        fs::create_directories(out);
        write_outputs(out, sim.tracklog(), report);
    }
    print_summary(cfg.name, report, digest);
    std::cout << "replayed " << tr.commands.size() << " live command(s) over " << sim.tick_index() << " ticks\n";
    if (tr.tracklog_digest) {
        const bool same = *tr.tracklog_digest == digest;
        std::cout << "recorded tracklog " << *tr.tracklog_digest << (same ? " matches" : " DIFFERS") << "\n";
        return same ? 0 : 1;
    }
    return 0;
}

int cmd_scenarios(const std::string& out) {
    for (const auto& [name, cfg] : builtin_scenarios()) {
        if (out.empty()) {
            std::cout << name << "\n";
            continue;
        }
        fs::create_directories(out);
        write_text(fs::path(out) / (name + ".json"), scenario_to_json(cfg).dump(2) + "\n");
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Decentralized flocking simulator with a ground-control gateway"};
    app.require_subcommand(1);

    std::string scenario_arg, serve, out, transcript_path, which, rc_text = "8,16,24,32,48", seeds_text = "1,2,3";
    std::optional<std::uint64_t> seed;
    std::optional<double> duration;
    bool realtime = false, serial = false;

    auto* run = app.add_subcommand("run", "Run a scenario (file path or built-in name)");
    run->add_option("scenario", scenario_arg, "Scenario JSON or built-in name")->required();
    run->add_option("--seed", seed, "Override the scenario seed");
    run->add_option("--serve", serve, "Serve /ws, /scenario and /metrics at HOST:PORT");
    run->add_flag("--realtime", realtime, "Pace the simulation to wall-clock time");
    run->add_option("--out", out, "Write tracklog, metrics and transcript here");
    run->add_flag("--serial", serial, "Single-threaded reference kernels");

    auto* sweep = app.add_subcommand("sweep", "Communication-range sweep");
    sweep->add_option("which", which, "Sweep name (fig8)")->required();
    sweep->add_option("--rc", rc_text, "Comma-separated communication ranges in m");
    sweep->add_option("--seeds", seeds_text, "Comma-separated seeds");
    sweep->add_option("--out", out, "Output directory")->required();
    sweep->add_option("--duration", duration, "Shorter runs for a quick look, in s");

    auto* replay = app.add_subcommand("replay", "Re-run a recorded session");
    replay->add_option("transcript", transcript_path, "Transcript written by run --out")->required();
    replay->add_option("scenario", scenario_arg, "Scenario JSON or built-in name")->required();
    replay->add_option("--out", out, "Write tracklog and metrics here");

    auto* scenarios = app.add_subcommand("scenarios", "List built-in scenarios, or write them as JSON");
    scenarios->add_option("--out", out, "Directory for <name>.json files");

    CLI11_PARSE(app, argc, argv);
    try {
        if (*run) return cmd_run(scenario_arg, seed, serve, realtime, out, serial);
        if (*sweep) return cmd_sweep(which, rc_text, seeds_text, out, duration);
        if (*replay) return cmd_replay(transcript_path, scenario_arg, out);
        if (*scenarios) return cmd_scenarios(out);
    } catch (const std::exception& e) {
        std::cerr << "flocksim: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
