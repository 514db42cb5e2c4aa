#include "flocksim/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "flocksim/hash.hpp"

namespace flocksim {

namespace {

constexpr AgentId kLeaderId = 0;
constexpr double kLeaderPathGain = 0.3;  // [1/s] position correction toward the path point
constexpr double kDescentRate = 1.0;     // [m/s] altitude change while landing
constexpr double kLeaderClimb = 5.0;     // [m] the leader cruises this far above the followers
constexpr double kTimeEpsilon = 1e-9;

}  // namespace

Simulation::Simulation(ScenarioConfig cfg, ExecPolicy policy)
    : cfg_(std::move(cfg)), policy_(policy), medium_(cfg_.n_agents, cfg_.network, cfg_.seed),
      metrics_(cfg_.metrics.collision_radius, policy) {
    cfg_.validate();
    total_ticks_ = cfg_.ticks_total();
    gps_period_ = cfg_.gps_period_ticks();
    broadcast_period_ = cfg_.broadcast_period_ticks();
    std::stable_sort(cfg_.commands.begin(), cfg_.commands.end(),
                     [](const ScheduledCommand& a, const ScheduledCommand& b) { return a.t < b.t; });

    agents_.resize(cfg_.n_agents);
    for (std::size_t i = 0; i < agents_.size(); ++i) {
        auto& a = agents_[i];
        a.truth.id = static_cast<AgentId>(i);
        a.gps_rng = Rng(cfg_.seed, static_cast<std::uint32_t>(i), Rng::Stream::Gps);
        a.plant_rng = Rng(cfg_.seed, static_cast<std::uint32_t>(i), Rng::Stream::Plant);
    }
    place_agents();
    for (auto& a : agents_) a.fix = gps_sample(a.truth, 0.0, a.gps, cfg_.gps, a.gps_rng);
    update_formation_size();
    metrics_.observe_safety(flying_truth());
    record();
}

void Simulation::place_agents() {
    const auto& layout = cfg_.initial_layout;
    const std::size_t n = agents_.size();
    std::vector<Vec2> placed;
    placed.reserve(n);

    switch (layout.kind) {
        case InitialLayout::Kind::Explicit:
            placed = layout.positions;
            break;
        case InitialLayout::Kind::Grid: {
            const auto cols = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
            const std::size_t rows = (n + cols - 1) / cols;
            const Vec2 origin = layout.center - Vec2{static_cast<double>(cols - 1), static_cast<double>(rows - 1)} *
                                                    (layout.spacing / 2.0);
            for (std::size_t i = 0; i < n; ++i) {
                placed.push_back(origin + Vec2{static_cast<double>(i % cols), static_cast<double>(i / cols)} *
                                              layout.spacing);
            }
            break;
        }
        case InitialLayout::Kind::Random: {
            Rng rng(cfg_.seed, 0xffffffffu, Rng::Stream::Layout);
            const double min_spacing = layout.min_spacing > 0.0 ? layout.min_spacing : cfg_.control.r0 / 2.0;
            Vec2 lo, hi;
            if (cfg_.arena) {
                // bounding box of the arena
                const Vec2 c = cfg_.arena->center();
                double ext = 0.0;
                if (const auto* d = std::get_if<Disc>(&cfg_.arena->shape)) ext = d->radius;
                if (const auto* r = std::get_if<Annulus>(&cfg_.arena->shape)) ext = r->r_out;
                if (const auto* b = std::get_if<Rect>(&cfg_.arena->shape)) ext = std::max(b->half_width, b->half_height);
                lo = c - Vec2{ext, ext};
                hi = c + Vec2{ext, ext};
            } else {
                lo = layout.center - Vec2{layout.radius, layout.radius};
                hi = layout.center + Vec2{layout.radius, layout.radius};
            }
            const std::size_t max_attempts = 100000 * n;
            std::size_t attempts = 0;
            while (placed.size() < n) {
                if (++attempts > max_attempts)
                    throw ConfigError("initial_layout", "cannot place agents with the requested spacing");
                const Vec2 p{rng.uniform(lo.x, hi.x), rng.uniform(lo.y, hi.y)};
                const bool inside = cfg_.arena ? cfg_.arena->contains(p) : (p - layout.center).norm() <= layout.radius;
                if (!inside) continue;
                const bool clear = std::none_of(placed.begin(), placed.end(),
                                                [&](Vec2 q) { return (q - p).norm() < min_spacing; });
                if (clear) placed.push_back(p);
            }
            break;
        }
    }
    for (std::size_t i = 0; i < n; ++i) agents_[i].truth.position = placed[i];
    if (cfg_.leader) agents_[kLeaderId].truth.altitude += kLeaderClimb;
}

void Simulation::update_formation_size() {
    if (!cfg_.formation) return;
    std::size_t members = 0;
    for (const auto& a : agents_) {
        if (cfg_.leader && a.truth.id == kLeaderId) continue;
        if (a.truth.status == Status::Airborne) ++members;
    }
    cfg_.formation->n_agents = std::max<std::size_t>(members, 1);
}

void Simulation::check(const Command& cmd) const {
    std::visit(
        [&](const auto& k) {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, SetParam>) {
                if (!is_live_param(k.name)) throw ConfigError(k.name, "not a live-tunable parameter");
                if (!std::isfinite(k.value)) throw ConfigError(k.name, "must be finite");
                if (k.name == "v_rotation") return;
                ControlParams p = cfg_.control;
                if (k.name == "r0") {
                    if (!(k.value > 0.0)) throw ConfigError("r0", "must be > 0");
                    p.r2 = p.r2 * k.value / p.r0;
                    p.r0 = k.value;
                } else if (k.name == "v_flock") {
                    p.v_flock = k.value;
                } else if (k.name == "v0") {
                    p.v0 = k.value;
                } else if (k.name == "C_frict") {
                    p.C_frict = k.value;
                } else if (k.name == "D") {
                    p.D = k.value;
                }
                p.validate();
            } else if constexpr (std::is_same_v<T, ForceLand>) {
                if (k.agent && *k.agent >= cfg_.n_agents) throw ConfigError("agent", "no such agent");
            } else if constexpr (std::is_same_v<T, Pause> || std::is_same_v<T, Resume> || std::is_same_v<T, SetPacing>) {
                throw ConfigError("kind", "run-loop command; not applied to the world state");
            }
        },
        cmd.kind);
}

void Simulation::submit(const Command& cmd) {
    check(cmd);
    std::lock_guard lock(inbox_mutex_);
    inbox_.push_back(cmd);
}

void Simulation::apply(const Command& cmd, bool live) {
    check(cmd);
    const double t = time();
    std::visit(
        [&](const auto& k) {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, SetParam>) {
                auto& p = cfg_.control;
                if (k.name == "r0") {
                    p.r2 = p.r2 * k.value / p.r0;
                    p.r0 = k.value;
                    if (cfg_.formation) cfg_.formation->r0 = k.value;
                } else if (k.name == "v_flock") {
                    p.v_flock = k.value;
                } else if (k.name == "v0") {
                    p.v0 = k.value;
                } else if (k.name == "C_frict") {
                    p.C_frict = k.value;
                } else if (k.name == "D") {
                    p.D = k.value;
                } else if (k.name == "v_rotation") {
                    if (cfg_.formation) cfg_.formation->v_rotation = k.value;
                }
            } else if constexpr (std::is_same_v<T, SetFormation>) {
                if (!cfg_.formation) cfg_.formation = FormationSpec{};
                cfg_.formation->shape = k.shape;
                cfg_.formation->r0 = cfg_.control.r0;
                cfg_.mode = ControlMode::Tracking;
                update_formation_size();
            } else if constexpr (std::is_same_v<T, SetTarget>) {
                if (cfg_.leader) {
                    const Vec2 from = cfg_.target_path.position(t);
                    const double speed = std::max(cfg_.control.v0, 0.1);
                    cfg_.target_path.waypoints = {{t, from}, {t + (k.position - from).norm() / speed, k.position}};
                } else {
                    cfg_.target_path.waypoints = {{t, k.position}};
                }
            } else if constexpr (std::is_same_v<T, ForceLand>) {
                for (auto& a : agents_) {
                    if ((!k.agent || a.truth.id == *k.agent) && a.truth.status == Status::Airborne)
                        a.truth.status = Status::Landing;
                }
                update_formation_size();
            }
        },
        cmd.kind);
    applied_.push_back({tick_, cmd, live});
}

void Simulation::apply_pending() {
    const double t = time();
    while (next_scripted_ < cfg_.commands.size() && cfg_.commands[next_scripted_].t <= t + kTimeEpsilon) {
        Command cmd = cfg_.commands[next_scripted_++].command;
        cmd.issued_at = t;
        apply(cmd, false);
    }
    std::vector<Command> inbox;
    {
        std::lock_guard lock(inbox_mutex_);
        inbox.swap(inbox_);
    }
    for (auto& cmd : inbox) {
        cmd.issued_at = t;
        try {
            apply(cmd, true);
        } catch (const ConfigError&) {
            // state changed since the command was checked; drop it
        }
    }
}

std::optional<Vec2> Simulation::target_position() const {
    if (cfg_.leader) return agents_[kLeaderId].truth.position;
    if (!cfg_.target_path.empty()) return cfg_.target_path.position(time());
    return std::nullopt;
}

Vec2 Simulation::control_agent(std::size_t i, double t) {
    Agent& a = agents_[i];
    const auto& p = cfg_.control;

    AgentState self;
    self.id = a.truth.id;
    self.position = a.fix.position;
    self.velocity = a.fix.velocity;
    a.cache.perceived(t, a.scratch);

    LocalView view;
    view.self = self;
    view.neighbors = a.scratch;
    view.arena = cfg_.arena ? &*cfg_.arena : nullptr;
    view.mode = cfg_.mode;
    view.spp_seed = hash_combine(cfg_.seed, self.id);

    if (cfg_.leader && self.id == kLeaderId) {
        // the leader flies the path and only keeps clear of the others
        const Vec2 path = cfg_.target_path.velocity(t) + (cfg_.target_path.position(t) - self.position) * kLeaderPathGain;
        return clamp_speed(path, p.v0);
    }

    std::vector<PerceivedNeighbor> flockmates;
    std::span<const PerceivedNeighbor> members = a.scratch;
    if (cfg_.leader) {
        if (const auto* msg = a.cache.find(kLeaderId); msg && msg->status != Status::Landed)
            view.target = TargetState{msg->position};
        for (const auto& nb : a.scratch) {
            if (nb.id != kLeaderId) flockmates.push_back(nb);
        }
        members = flockmates;
        view.neighbors = members;
    } else if (!cfg_.target_path.empty()) {
        view.target = TargetState{cfg_.target_path.position(t)};
    }

    if (cfg_.mode == ControlMode::Tracking && cfg_.formation) {
        const Vec2 com = local_com(self.position, members);
        view.com = com;
        view.formation = assign_formation(self, members, com, *cfg_.formation, a.ring_angle);
        const Vec2 rel = self.position - com;
        if (rel.norm_sq() > 0.0) a.ring_angle = std::atan2(rel.y, rel.x);
    } else if (cfg_.leader) {
        view.com = local_com(self.position, members);
    }
    return desired_velocity(view, p);
}

std::vector<AgentState> Simulation::flying_truth() const {
    std::vector<AgentState> out;
    out.reserve(agents_.size());
    for (const auto& a : agents_) {
        if (a.truth.status != Status::Landed) out.push_back(a.truth);
    }
    return out;
}

void Simulation::record() {
    TrackRecord rec;
    rec.t = time();
    rec.target = target_position();
    rec.agents.reserve(agents_.size());
    for (const auto& a : agents_) rec.agents.push_back({a.truth.position, a.truth.altitude, a.truth.velocity, a.fix.position, a.desired, a.truth.status});
    log_.records.push_back(std::move(rec));
    metrics_.observe_sample(time(), flying_truth());
}

void Simulation::step() {
    if (finished()) return;
    apply_pending();

    const double t = time();
    const double dt = cfg_.tick;
    const bool parallel = policy_ == ExecPolicy::Parallel;
    const bool gps_tick = tick_ > 0 && tick_ % gps_period_ == 0;
    const bool broadcast_tick = tick_ % broadcast_period_ == 0;
    const auto n = static_cast<std::ptrdiff_t>(agents_.size());

    // receive and sense
#pragma omp parallel for schedule(static) if (parallel)
    for (std::ptrdiff_t si = 0; si < n; ++si) {
        auto& a = agents_[static_cast<std::size_t>(si)];
        for (const auto& msg : medium_.deliver(a.truth.id, t)) a.cache.ingest(msg);
        a.cache.expire(t, cfg_.neighbor_expiry);
        if (gps_tick && a.truth.status != Status::Landed) a.fix = gps_sample(a.truth, t, a.gps, cfg_.gps, a.gps_rng);
    }

    // transmit
    if (broadcast_tick) {
        std::vector<Vec2> positions(agents_.size());
        const std::unique_ptr<bool[]> listening(new bool[agents_.size()]);
        for (std::size_t i = 0; i < agents_.size(); ++i) {
            positions[i] = agents_[i].truth.position;
            listening[i] = agents_[i].truth.status != Status::Landed;
        }
        const std::span<const bool> listen_span(listening.get(), agents_.size());

        std::vector<std::vector<InFlightPacket>> outgoing(agents_.size());
#pragma omp parallel for schedule(static) if (parallel)
        for (std::ptrdiff_t si = 0; si < n; ++si) {
            const auto i = static_cast<std::size_t>(si);
            const auto& a = agents_[i];
            if (a.truth.status == Status::Landed) continue;
            const BroadcastMessage msg{a.truth.id, a.fix.sample_time, a.fix.position, a.fix.velocity, a.truth.status};
            outgoing[i] = medium_.broadcast(msg, t, positions, listen_span);
        }
        for (auto& packets : outgoing) medium_.enqueue(std::move(packets));
    }

    // control and flight
#pragma omp parallel for schedule(static) if (parallel)
    for (std::ptrdiff_t si = 0; si < n; ++si) {
        const auto i = static_cast<std::size_t>(si);
        auto& a = agents_[i];
        switch (a.truth.status) {
            case Status::Airborne:
                a.desired = control_agent(i, t);
                break;
            case Status::Landing:
                a.desired = {};
                a.truth.altitude = std::max(0.0, a.truth.altitude - kDescentRate * dt);
                break;
            case Status::Landed:
                continue;
        }
        const Vec2 command = pid_step(a.desired, a.fix.velocity, a.pid, dt, cfg_.pid);
        a.truth = plant_step(a.truth, a.plant, command, dt, cfg_.plant, cfg_.control.v_max, a.plant_rng);
        if (a.truth.status == Status::Landing && a.truth.altitude <= 0.0) {
            a.truth.status = Status::Landed;
            a.truth.velocity = {};
            a.plant = PlantState{};
        }
    }

    ++tick_;
    metrics_.observe_safety(flying_truth());
    if (tick_ % cfg_.log_every == 0) record();
}

void Simulation::run() {
    while (!finished()) step();
}

MetricsReport Simulation::report() const {
    const double end = cfg_.metrics.window_end < 0.0 ? cfg_.duration : cfg_.metrics.window_end;
    auto r = metrics_.report(log_, cfg_.metrics.window_start, end, cfg_.metrics.phi_local_r);
    r.noise_model = cfg_.plant.gust_std > 0.0
                        ? "environmental noise: zero-mean Gaussian acceleration in the plant; per-axis velocity "
                          "variance grows by gust_std^2 = " + std::to_string(cfg_.plant.gust_std * cfg_.plant.gust_std) +
                              " m^2/s^2 per second"
                        : "environmental noise: none";
    return r;
}

std::pair<Tracklog, MetricsReport> run_scenario(const ScenarioConfig& cfg, ExecPolicy policy) {
    Simulation sim(cfg, policy);
    sim.run();
    return {sim.tracklog(), sim.report()};
}

}  // namespace flocksim
