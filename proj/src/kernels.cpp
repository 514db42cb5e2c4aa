#include "flocksim/kernels.hpp"

#include <algorithm>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace flocksim {

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<Vec2> unit_velocities(std::span<const Vec2> velocities, std::vector<char>& eligible) {
    std::vector<Vec2> units(velocities.size());
    eligible.assign(velocities.size(), 0);
    for (std::size_t i = 0; i < velocities.size(); ++i) {
        const double speed = velocities[i].norm();
        if (speed >= kAlignmentSpeedFloor) {
            units[i] = velocities[i] / speed;
            eligible[i] = 1;
        }
    }
    return units;
}

}  // namespace

PairScan pair_scan_serial(std::span<const Vec2> positions, std::span<const Vec2> velocities,
                          double local_radius, double collision_radius) {
    const std::size_t n = positions.size();
    std::vector<char> eligible;
    const auto units = unit_velocities(velocities, eligible);

    PairScan out;
    out.nearest.assign(n, kInf);
    out.min_distance = kInf;
    for (std::size_t i = 0; i < n; ++i) {
        // per-row partial sums, so the parallel scan can reproduce the rounding
        double align_row = 0.0, local_row = 0.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            const double dist = (positions[j] - positions[i]).norm();
            out.nearest[i] = std::min(out.nearest[i], dist);
            out.nearest[j] = std::min(out.nearest[j], dist);
            out.min_distance = std::min(out.min_distance, dist);
            if (dist < collision_radius) out.close_pairs.emplace_back(i, j);
            if (eligible[i] && eligible[j]) {
                const double c = dot(units[i], units[j]);
                align_row += c;
                ++out.align_pairs;
                if (dist < local_radius) {
                    local_row += c;
                    ++out.local_pairs;
                }
            }
        }
        out.align_sum += align_row;
        out.local_sum += local_row;
    }
    return out;
}

PairScan pair_scan_parallel(std::span<const Vec2> positions, std::span<const Vec2> velocities,
                            double local_radius, double collision_radius) {
    const std::size_t n = positions.size();
    std::vector<char> eligible;
    const auto units = unit_velocities(velocities, eligible);

    struct Row {
        double align_sum = 0.0;
        std::size_t align_pairs = 0;
        double local_sum = 0.0;
        std::size_t local_pairs = 0;
        std::vector<std::size_t> close;
    };
    std::vector<Row> rows(n);
    PairScan out;
    out.nearest.assign(n, kInf);

    const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel
    {
        // upper triangle only; each thread keeps its own nearest-distance
        // array and min is exact, so merging order does not matter
        std::vector<double> nearest(n, kInf);
#pragma omp for schedule(dynamic, 8) nowait
        for (std::ptrdiff_t si = 0; si < count; ++si) {
            const auto i = static_cast<std::size_t>(si);
            Row& row = rows[i];
            for (std::size_t j = i + 1; j < n; ++j) {
                const double dist = (positions[j] - positions[i]).norm();
                nearest[i] = std::min(nearest[i], dist);
                nearest[j] = std::min(nearest[j], dist);
                if (dist < collision_radius) row.close.push_back(j);
                if (eligible[i] && eligible[j]) {
                    const double c = dot(units[i], units[j]);
                    row.align_sum += c;
                    ++row.align_pairs;
                    if (dist < local_radius) {
                        row.local_sum += c;
                        ++row.local_pairs;
                    }
                }
            }
        }
#pragma omp critical
        for (std::size_t k = 0; k < n; ++k) out.nearest[k] = std::min(out.nearest[k], nearest[k]);
    }

    out.min_distance = kInf;
    for (std::size_t i = 0; i < n; ++i) {
        out.min_distance = std::min(out.min_distance, out.nearest[i]);
        out.align_sum += rows[i].align_sum;
        out.align_pairs += rows[i].align_pairs;
        out.local_sum += rows[i].local_sum;
        out.local_pairs += rows[i].local_pairs;
        for (std::size_t j : rows[i].close) out.close_pairs.emplace_back(i, j);
    }
    return out;
}

}  // namespace flocksim
