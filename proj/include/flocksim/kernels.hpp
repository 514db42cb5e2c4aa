#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "flocksim/core.hpp"

namespace flocksim {

enum class ExecPolicy { Serial, Parallel };

/// Number of OpenMP threads available (1 when built without OpenMP).
int max_threads();

/// Below this speed a velocity has no usable direction for alignment measures.
inline constexpr double kAlignmentSpeedFloor = 0.05;

/// Everything the order parameters and safety statistics need from one
/// all-pairs pass over a snapshot.
struct PairScan {
    std::vector<double> nearest;  // per agent; +inf when alone
    double min_distance = 0.0;    // +inf with fewer than two agents
    double align_sum = 0.0;       // sum of unit-velocity dot products over eligible pairs
    std::size_t align_pairs = 0;
    double local_sum = 0.0;       // same, restricted to pairs closer than local_radius
    std::size_t local_pairs = 0;
    std::vector<std::pair<std::size_t, std::size_t>> close_pairs;  // closer than collision_radius
};

/// Straight i < j double loop, kept as the reference for the parallel scan.
PairScan pair_scan_serial(std::span<const Vec2> positions, std::span<const Vec2> velocities,
                          double local_radius, double collision_radius);

/// Row-parallel scan. Row partials are combined in index order, so the
/// result is the same for every thread count.
PairScan pair_scan_parallel(std::span<const Vec2> positions, std::span<const Vec2> velocities,
                            double local_radius, double collision_radius);

inline PairScan pair_scan(std::span<const Vec2> positions, std::span<const Vec2> velocities, double local_radius,
                          double collision_radius, ExecPolicy policy) {
    return policy == ExecPolicy::Serial ? pair_scan_serial(positions, velocities, local_radius, collision_radius)
                                        : pair_scan_parallel(positions, velocities, local_radius, collision_radius);
}

}  // namespace flocksim
