#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>

namespace flocksim {

/// Planar vector in the world frame: x points east, y points north (meters or m/s).
struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2() = default;
    constexpr Vec2(double x_, double y_) : x(x_), y(y_) {}

    constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    constexpr Vec2 operator-() const { return {-x, -y}; }
    constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
    constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
    constexpr Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
    constexpr Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
    constexpr Vec2& operator*=(double s) { x *= s; y *= s; return *this; }
    constexpr bool operator==(const Vec2&) const = default;

    double norm() const { return std::hypot(x, y); }
    constexpr double norm_sq() const { return x * x + y * y; }
    bool finite() const { return std::isfinite(x) && std::isfinite(y); }
};

constexpr Vec2 operator*(double s, Vec2 v) { return v * s; }
constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
/// z-component of the 3D cross product of two planar vectors.
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }

inline Vec2 rotated(Vec2 v, double angle) {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    return {c * v.x - s * v.y, s * v.x + c * v.y};
}

/// Unit vector along v, or the zero vector when |v| is zero.
inline Vec2 unit_or_zero(Vec2 v) {
    const double n = v.norm();
    return n > 0.0 ? v / n : Vec2{};
}

/// Rescales v to magnitude `cap` when it is longer; the direction is kept.
inline Vec2 clamp_speed(Vec2 v, double cap) {
    const double n = v.norm();
    if (n <= cap || n == 0.0) return v;
    return v * (cap / n);
}

using AgentId = std::uint32_t;

enum class Status { Airborne, Landing, Landed };

const char* to_string(Status s);
Status status_from_string(const std::string& s);

struct AgentState {
    AgentId id = 0;
    Vec2 position;
    Vec2 velocity;
    Status status = Status::Airborne;
    double altitude = 10.0;  // cosmetic only; never read by the controllers
};

/// Thrown for any parameter or configuration that violates its invariants.
/// `field` names the offending entry (dotted path for nested config).
class ConfigError : public std::invalid_argument {
public:
    ConfigError(std::string field, const std::string& what)
        : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Tunable constants of the flocking control law. Defaults sit inside the
/// recommended ranges for outdoor multicopter flocks.
struct ControlParams {
    double r0 = 10.0;            // equilibrium distance [m]
    double r1 = 3.0;             // repulsion cap and friction distance floor [m]
    double r2 = 5.0;             // friction slope width [m]
    double D = 1.0;              // repulsion spring constant [1/s^2]
    double C_frict = 10.0;       // viscous friction coefficient [m^2/s]
    double C_shill = 2.0;        // wall friction coefficient [1/s]
    double v_flock = 2.0;        // self-propelled cruise speed [m/s]
    double v0 = 2.0;             // maximum tracking speed [m/s]
    double alpha = 1.0;          // target (COM) tracking strength
    double beta = 1.0;           // shape tracking strength
    double R = 0.0;              // transfer offset used when no formation supplies one [m]
    double d = 5.0;              // transfer decay width [m]
    double dt_lookahead = 1.0;   // lookahead step of the velocity update [s]
    double tau = 2.0;            // velocity relaxation time [s]
    double v_max = 5.0;          // hard cap on the desired velocity [m/s]

    /// Throws ConfigError naming the first violated invariant.
    void validate() const;
};

struct Disc {
    Vec2 center;
    double radius = 0.0;
};

struct Annulus {
    Vec2 center;
    double r_in = 0.0;
    double r_out = 0.0;
};

struct Rect {
    Vec2 center;
    double half_width = 0.0;
    double half_height = 0.0;
};

struct Arena {
    std::variant<Disc, Annulus, Rect> shape;

    Vec2 center() const;
    /// Signed distance from p to the boundary; negative inside the flight area.
    double signed_distance(Vec2 p) const;
    /// Unit normal at the boundary point nearest to p, pointing into the area.
    Vec2 inward_normal(Vec2 p) const;
    bool contains(Vec2 p) const { return signed_distance(p) <= 0.0; }
    void validate() const;
};

struct TargetState {
    Vec2 position;
};

}  // namespace flocksim
