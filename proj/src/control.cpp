#include "flocksim/control.hpp"

#include <algorithm>
#include <numbers>

#include "flocksim/hash.hpp"

namespace flocksim {

double transfer(double x, double R, double d) {
    if (x <= R) return 0.0;
    if (x >= R + d) return 1.0;
    return (std::sin(std::numbers::pi / d * (x - R) - std::numbers::pi / 2.0) + 1.0) / 2.0;
}

Vec2 coincident_direction(AgentId self, AgentId other) {
    const AgentId lo = std::min(self, other);
    const AgentId hi = std::max(self, other);
    const double angle = unit_interval(splitmix64((std::uint64_t{lo} << 32) | hi)) * 2.0 * std::numbers::pi;
    const Vec2 u{std::cos(angle), std::sin(angle)};
    return self <= other ? u : -u;
}

namespace {

// Unit vector from self toward the neighbor, with the coincident fallback.
Vec2 pair_direction(const AgentState& self, const PerceivedNeighbor& nb, Vec2 rel, double dist) {
    if (dist < kCoincidentDistance) return coincident_direction(self.id, nb.id);
    return rel / dist;
}

}  // namespace

Vec2 repulsion_accel(const AgentState& self, std::span<const PerceivedNeighbor> neighbors,
                     const ControlParams& p) {
    Vec2 acc;
    for (const auto& nb : neighbors) {
        const Vec2 rel = nb.position - self.position;
        const double dist = rel.norm();
        if (dist >= p.r0) continue;
        acc -= pair_direction(self, nb, rel, dist) * (p.D * std::min(p.r1, p.r0 - dist));
    }
    return acc;
}

Vec2 friction_accel(const AgentState& self, std::span<const PerceivedNeighbor> neighbors,
                    const ControlParams& p) {
    Vec2 acc;
    for (const auto& nb : neighbors) {
        const double dist = (nb.position - self.position).norm();
        const double denom = std::max(dist - (p.r0 - p.r2), p.r1);
        acc += (nb.velocity - self.velocity) * (p.C_frict / (denom * denom));
    }
    return acc;
}

Vec2 spp_velocity(Vec2 v, double v_flock, std::uint64_t seed) {
    const double speed = v.norm();
    if (speed < kSppSpeedFloor) {
        const double angle = unit_interval(splitmix64(seed)) * 2.0 * std::numbers::pi;
        return Vec2{std::cos(angle), std::sin(angle)} * v_flock;
    }
    return v * (v_flock / speed);
}

Vec2 wall_accel(const AgentState& self, const Arena& arena, const ControlParams& p) {
    const double outside = arena.signed_distance(self.position);
    if (outside <= 0.0) return {};
    const double gain = p.C_shill * transfer(outside, 0.0, p.d);
    return (arena.inward_normal(self.position) * p.v_flock - self.velocity) * gain;
}

Vec2 shape_velocity(Vec2 x_shp, Vec2 x, double R_fmt, const ControlParams& p) {
    const Vec2 rel = x_shp - x;
    return unit_or_zero(rel) * (p.beta * p.v0 * transfer(rel.norm(), R_fmt, p.d));
}

Vec2 com_velocity(Vec2 x_trg, Vec2 x_com, double R_fmt, const ControlParams& p) {
    const Vec2 rel = x_trg - x_com;
    return unit_or_zero(rel) * (p.alpha * p.v0 * transfer(rel.norm(), R_fmt, p.d));
}

Vec2 track_velocity(Vec2 v_shp, Vec2 v_trg, double v0) { return clamp_speed(v_shp + v_trg, v0); }

Vec2 local_com(Vec2 self_pos, std::span<const PerceivedNeighbor> neighbors) {
    Vec2 sum = self_pos;
    for (const auto& nb : neighbors) sum += nb.position;
    return sum / static_cast<double>(neighbors.size() + 1);
}

ControlTerms control_terms(const LocalView& view, const ControlParams& p) {
    ControlTerms t;
    const AgentState& self = view.self;

    if (view.mode == ControlMode::Flocking) {
        t.spp = spp_velocity(self.velocity, p.v_flock, view.spp_seed);
    } else {
        Vec2 v_shp;
        Vec2 boost;
        double R_fmt = p.R;
        if (view.formation) {
            R_fmt = view.formation->R_fmt;
            v_shp = shape_velocity(view.formation->x_shp, self.position, R_fmt, p);
            boost = view.formation->tangential_boost;
        }
        Vec2 v_trg;
        if (view.target) {
            const Vec2 com = view.com ? *view.com : local_com(self.position, view.neighbors);
            v_trg = com_velocity(view.target->position, com, R_fmt, p);
        }
        t.track = track_velocity(v_shp + boost, v_trg, p.v0);
    }

    t.pot = repulsion_accel(self, view.neighbors, p);
    t.slip = friction_accel(self, view.neighbors, p);
    if (view.arena) t.wall = wall_accel(self, *view.arena, p);
    return t;
}

Vec2 desired_velocity(const LocalView& view, const ControlParams& p) {
    const ControlTerms t = control_terms(view, p);
    const Vec2 v = view.self.velocity;
    const double dt = p.dt_lookahead;
    const Vec2 next = v + (t.spp + t.track - v) * (dt / p.tau) + (t.pot + t.slip + t.wall) * dt;
    if (!next.finite()) return {};
    return clamp_speed(next, p.v_max);
}

}  // namespace flocksim
