#pragma once

#include <optional>
#include <span>
#include <string>

#include "flocksim/core.hpp"

namespace flocksim {

struct PerceivedNeighbor;

enum class Shape { Grid, Ring, Line };

const char* to_string(Shape s);
Shape shape_from_string(const std::string& s);

enum class RotationMode {
    Fixed,          // direction given by the sign of v_rotation
    SelfOrganized,  // direction follows the local mean tangential velocity
};

struct FormationSpec {
    Shape shape = Shape::Grid;
    std::size_t n_agents = 1;
    double r0 = 10.0;
    double v_rotation = 0.0;  // ring only; signed, positive is counter-clockwise
    RotationMode rotation = RotationMode::Fixed;

    void validate() const;
};

struct FormationAssignment {
    Vec2 x_shp;
    double R_fmt = 0.0;
    Vec2 tangential_boost;
};

/// Radius of the smallest circle holding n unit circles. Tabulated best known
/// packings up to 20, hexagonal-density estimate above.
/// Throws std::invalid_argument for n == 0.
double packing_radius(std::size_t n);

FormationAssignment grid_assignment(std::size_t n, double r0, Vec2 x_com);

/// Radius of a ring on which n slots sit r0 apart along the arc.
double ring_radius(std::size_t n, double r0);

/// Ring slot on the bisector of the angular gap containing the agent.
/// `previous_angle` is used only when the agent sits exactly on x_com.
FormationAssignment ring_assignment(const AgentState& self, std::span<const PerceivedNeighbor> neighbors,
                                    Vec2 x_com, const FormationSpec& spec,
                                    std::optional<double> previous_angle = std::nullopt);

/// Sign of the summed angular momentum about x_com; 0 when below 1e-6.
int rotation_direction(std::span<const AgentState> states, Vec2 x_com);

/// Principal axis of the point cloud, oriented with a non-negative east
/// component (ties: non-negative north). East for degenerate clouds.
Vec2 line_direction(std::span<const Vec2> points);

FormationAssignment line_assignment(const AgentState& self, std::span<const PerceivedNeighbor> neighbors,
                                    Vec2 x_com, const FormationSpec& spec);

/// Dispatches on spec.shape. `self` is the onboard estimate.
FormationAssignment assign_formation(const AgentState& self, std::span<const PerceivedNeighbor> neighbors,
                                     Vec2 x_com, const FormationSpec& spec,
                                     std::optional<double> previous_angle = std::nullopt);

}  // namespace flocksim
