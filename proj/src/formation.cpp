#include "flocksim/formation.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "flocksim/control.hpp"

namespace flocksim {

const char* to_string(Shape s) {
    switch (s) {
        case Shape::Grid: return "grid";
        case Shape::Ring: return "ring";
        case Shape::Line: return "line";
    }
    return "grid";
}

Shape shape_from_string(const std::string& s) {
    if (s == "grid") return Shape::Grid;
    if (s == "ring") return Shape::Ring;
    if (s == "line") return Shape::Line;
    throw ConfigError("formation.shape", "unknown shape '" + s + "'");
}

void FormationSpec::validate() const {
    if (n_agents < 1) throw ConfigError("formation.n_agents", "must be >= 1");
    if (!(r0 > 0.0) || !std::isfinite(r0)) throw ConfigError("formation.r0", "must be > 0");
    if (!std::isfinite(v_rotation)) throw ConfigError("formation.v_rotation", "must be finite");
}

namespace {

// Best known packings of n equal unit circles in a circle (enclosing radius).
constexpr std::array<double, 21> kPackingTable{
    0.0,
    1.0,
    2.0,
    2.154700538379252,  // 1 + 2/sqrt(3)
    2.414213562373095,  // 1 + sqrt(2)
    2.701301616704079,
    3.0,
    3.0,
    3.304764871832860,
    3.613125929752753,
    3.813026261009004,
    3.923804400163087,
    4.029830343291876,
    4.236067977499790,  // 2 + sqrt(5)
    4.328548677857040,
    4.521356981113680,
    4.615425206959981,
    4.792033086189610,
    4.863703305156273,  // 1 + sqrt(2) + sqrt(6)
    4.863703305156273,
    5.122320888322788,
};

constexpr double kHexDensity = 0.9069;

double wrap_two_pi(double a) {
    a = std::fmod(a, 2.0 * std::numbers::pi);
    return a < 0.0 ? a + 2.0 * std::numbers::pi : a;
}

Vec2 tangent_ccw(double angle) { return {-std::sin(angle), std::cos(angle)}; }

}  // namespace

double packing_radius(std::size_t n) {
    if (n == 0) throw std::invalid_argument("InvalidCount: packing_radius needs n >= 1");
    if (n < kPackingTable.size()) return kPackingTable[n];
    return 1.0 + std::sqrt(static_cast<double>(n) / kHexDensity);
}

FormationAssignment grid_assignment(std::size_t n, double r0, Vec2 x_com) {
    FormationAssignment a;
    a.x_shp = x_com;
    a.R_fmt = std::max(0.0, r0 / 2.0 * packing_radius(n) - r0 / 2.0);
    return a;
}

double ring_radius(std::size_t n, double r0) {
    return static_cast<double>(n) * r0 / (2.0 * std::numbers::pi);
}

FormationAssignment ring_assignment(const AgentState& self, std::span<const PerceivedNeighbor> neighbors,
                                    Vec2 x_com, const FormationSpec& spec, std::optional<double> previous_angle) {
    const Vec2 rel = self.position - x_com;
    double self_angle = 0.0;
    if (rel.norm_sq() > 0.0) {
        self_angle = std::atan2(rel.y, rel.x);
    } else if (previous_angle) {
        self_angle = *previous_angle;
    }

    // Counter-clockwise angular offsets of the neighbors, in [0, 2pi).
    double nearest_ccw = std::numeric_limits<double>::infinity();
    double farthest_ccw = -std::numeric_limits<double>::infinity();
    for (const auto& nb : neighbors) {
        const Vec2 r = nb.position - x_com;
        if (r.norm_sq() == 0.0) continue;
        const double off = wrap_two_pi(std::atan2(r.y, r.x) - self_angle);
        nearest_ccw = std::min(nearest_ccw, off);
        farthest_ccw = std::max(farthest_ccw, off);
    }

    double slot_angle = self_angle;
    if (std::isfinite(nearest_ccw)) {
        // gap bounded by the closest neighbor each way round the ring
        slot_angle = self_angle + (nearest_ccw + farthest_ccw - 2.0 * std::numbers::pi) / 2.0;
    }

    FormationAssignment a;
    const double rho = ring_radius(spec.n_agents, spec.r0);
    a.x_shp = x_com + Vec2{std::cos(slot_angle), std::sin(slot_angle)} * rho;
    a.R_fmt = 0.0;

    if (spec.v_rotation != 0.0) {
        double sign = spec.v_rotation > 0.0 ? 1.0 : -1.0;
        if (spec.rotation == RotationMode::SelfOrganized) {
            std::vector<AgentState> states;
            states.reserve(neighbors.size() + 1);
            states.push_back(self);
            for (const auto& nb : neighbors) states.push_back({nb.id, nb.position, nb.velocity});
            const int observed = rotation_direction(states, x_com);
            if (observed != 0) sign = observed;
        }
        a.tangential_boost = tangent_ccw(self_angle) * (sign * std::abs(spec.v_rotation));
    }
    return a;
}

int rotation_direction(std::span<const AgentState> states, Vec2 x_com) {
    double sum = 0.0;
    for (const auto& s : states) sum += cross(s.position - x_com, s.velocity);
    if (std::abs(sum) < 1e-6) return 0;
    return sum > 0.0 ? 1 : -1;
}

Vec2 line_direction(std::span<const Vec2> points) {
    if (points.empty()) return {1.0, 0.0};
    Vec2 mean;
    for (const auto& p : points) mean += p;
    mean = mean / static_cast<double>(points.size());
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (const auto& p : points) {
        const Vec2 q = p - mean;
        sxx += q.x * q.x;
        syy += q.y * q.y;
        sxy += q.x * q.y;
    }
    if (sxx + syy < 1e-12) return {1.0, 0.0};
    const double angle = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
    Vec2 u{std::cos(angle), std::sin(angle)};
    if (u.x < 0.0 || (u.x == 0.0 && u.y < 0.0)) u = -u;
    return u;
}

FormationAssignment line_assignment(const AgentState& self, std::span<const PerceivedNeighbor> neighbors,
                                    Vec2 x_com, const FormationSpec& spec) {
    std::vector<Vec2> points;
    points.reserve(neighbors.size() + 1);
    points.push_back(self.position);
    for (const auto& nb : neighbors) points.push_back(nb.position);
    const Vec2 u = line_direction(points);

    const double s_self = dot(self.position - x_com, u);
    double below = -std::numeric_limits<double>::infinity();
    double above = std::numeric_limits<double>::infinity();
    for (const auto& nb : neighbors) {
        const double s = dot(nb.position - x_com, u);
        // equal projections are split by id so the ordering stays total
        const bool is_below = s < s_self || (s == s_self && nb.id < self.id);
        if (is_below) {
            below = std::max(below, s);
        } else {
            above = std::min(above, s);
        }
    }

    const double half_length = static_cast<double>(spec.n_agents - 1) * spec.r0 / 2.0;
    double slot;
    if (std::isfinite(below) && std::isfinite(above)) {
        slot = (below + above) / 2.0;
    } else if (std::isfinite(above)) {
        slot = -half_length;
    } else if (std::isfinite(below)) {
        slot = half_length;
    } else {
        slot = s_self < 0.0 ? -half_length : half_length;
    }

    FormationAssignment a;
    a.x_shp = x_com + u * slot;
    a.R_fmt = 0.0;
    return a;
}

FormationAssignment assign_formation(const AgentState& self, std::span<const PerceivedNeighbor> neighbors,
                                     Vec2 x_com, const FormationSpec& spec, std::optional<double> previous_angle) {
    switch (spec.shape) {
        case Shape::Grid: return grid_assignment(spec.n_agents, spec.r0, x_com);
        case Shape::Ring: return ring_assignment(self, neighbors, x_com, spec, previous_angle);
        case Shape::Line: return line_assignment(self, neighbors, x_com, spec);
    }
    return grid_assignment(spec.n_agents, spec.r0, x_com);
}

}  // namespace flocksim
