#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "flocksim/core.hpp"
#include "flocksim/formation.hpp"

namespace flocksim {

/// Another agent's state as known locally: a delayed, noisy broadcast snapshot.
struct PerceivedNeighbor {
    AgentId id = 0;
    Vec2 position;
    Vec2 velocity;
    double age = 0.0;  // seconds since the sender sampled it
};

enum class ControlMode { Flocking, Tracking };

/// Everything one agent's controller may read. Controllers never see ground truth.
struct LocalView {
    AgentState self;  // onboard estimate
    std::span<const PerceivedNeighbor> neighbors;
    std::optional<TargetState> target;
    const Arena* arena = nullptr;
    std::optional<FormationAssignment> formation;
    std::optional<Vec2> com;  // overrides the local center of mass of `neighbors`
    ControlMode mode = ControlMode::Flocking;
    std::uint64_t spp_seed = 0;  // picks the cruise direction of an agent at rest
};

/// Below this distance two agents count as coincident for direction purposes.
inline constexpr double kCoincidentDistance = 0.01;
/// Below this speed the cruise direction comes from the seeded fallback.
inline constexpr double kSppSpeedFloor = 0.05;

/// Smooth 0 -> 1 ramp: 0 on [0, R], raised sine on [R, R + d], 1 beyond.
double transfer(double x, double R, double d);

/// Deterministic unit vector for a coincident pair; flips sign when the ids swap.
Vec2 coincident_direction(AgentId self, AgentId other);

Vec2 repulsion_accel(const AgentState& self, std::span<const PerceivedNeighbor> neighbors,
                     const ControlParams& p);

Vec2 friction_accel(const AgentState& self, std::span<const PerceivedNeighbor> neighbors,
                    const ControlParams& p);

/// Rescales v to the cruise speed. Below kSppSpeedFloor the direction is
/// derived from `seed` instead.
Vec2 spp_velocity(Vec2 v, double v_flock, std::uint64_t seed = 0);

/// Soft-wall alignment toward the inside of the arena, zero inside it.
Vec2 wall_accel(const AgentState& self, const Arena& arena, const ControlParams& p);

Vec2 shape_velocity(Vec2 x_shp, Vec2 x, double R_fmt, const ControlParams& p);
Vec2 com_velocity(Vec2 x_trg, Vec2 x_com, double R_fmt, const ControlParams& p);
Vec2 track_velocity(Vec2 v_shp, Vec2 v_trg, double v0);

/// Mean of the agent's own position and every perceived neighbor position.
Vec2 local_com(Vec2 self_pos, std::span<const PerceivedNeighbor> neighbors);

/// The individual terms of the velocity update, kept separate for telemetry and tests.
struct ControlTerms {
    Vec2 spp;
    Vec2 track;
    Vec2 pot;
    Vec2 slip;
    Vec2 wall;
};

ControlTerms control_terms(const LocalView& view, const ControlParams& p);

/// Desired velocity one lookahead step ahead, capped at v_max.
Vec2 desired_velocity(const LocalView& view, const ControlParams& p);

}  // namespace flocksim
