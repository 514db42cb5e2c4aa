#include "flocksim/core.hpp"

#include <algorithm>

namespace flocksim {

const char* to_string(Status s) {
    switch (s) {
        case Status::Airborne: return "airborne";
        case Status::Landing: return "landing";
        case Status::Landed: return "landed";
    }
    return "airborne";
}

Status status_from_string(const std::string& s) {
    if (s == "airborne") return Status::Airborne;
    if (s == "landing") return Status::Landing;
    if (s == "landed") return Status::Landed;
    throw ConfigError("status", "unknown status '" + s + "'");
}

namespace {

void require(bool ok, const char* field, const char* msg) {
    if (!ok) throw ConfigError(field, msg);
}

bool finite(double v) { return std::isfinite(v); }

}  // namespace

void ControlParams::validate() const {
    for (double v : {r0, r1, r2, D, C_frict, C_shill, v_flock, v0, alpha, beta, R, d, dt_lookahead, tau, v_max})
        require(finite(v), "control", "all parameters must be finite");
    require(r0 > 0.0, "r0", "must be > 0");
    require(r1 > 0.0, "r1", "must be > 0");
    require(r2 > 0.0 && r2 < r0, "r2", "must satisfy 0 < r2 < r0");
    require(D >= 0.0, "D", "must be >= 0");
    require(C_frict >= 0.0, "C_frict", "must be >= 0");
    require(C_shill >= 0.0, "C_shill", "must be >= 0");
    require(v_max > 0.0, "v_max", "must be > 0");
    require(v_flock >= 0.0 && v_flock <= v_max, "v_flock", "must satisfy 0 <= v_flock <= v_max");
    require(v0 >= 0.0 && v0 <= v_max, "v0", "must satisfy 0 <= v0 <= v_max");
    require(alpha >= 0.0 && alpha <= 1.0, "alpha", "must lie in [0, 1]");
    require(beta >= 0.0 && beta <= 1.0, "beta", "must lie in [0, 1]");
    require(R >= 0.0, "R", "must be >= 0");
    require(d > 0.0, "d", "must be > 0");
    require(dt_lookahead > 0.0, "dt_lookahead", "must be > 0");
    require(tau > 0.0, "tau", "must be > 0");
}

Vec2 Arena::center() const {
    return std::visit([](const auto& s) { return s.center; }, shape);
}

double Arena::signed_distance(Vec2 p) const {
    if (const auto* disc = std::get_if<Disc>(&shape)) {
        return (p - disc->center).norm() - disc->radius;
    }
    if (const auto* ring = std::get_if<Annulus>(&shape)) {
        const double r = (p - ring->center).norm();
        return std::max(r - ring->r_out, ring->r_in - r);
    }
    const auto& box = std::get<Rect>(shape);
    const Vec2 q{std::abs(p.x - box.center.x) - box.half_width,
                 std::abs(p.y - box.center.y) - box.half_height};
    const Vec2 outside{std::max(q.x, 0.0), std::max(q.y, 0.0)};
    return outside.norm() + std::min(std::max(q.x, q.y), 0.0);
}

Vec2 Arena::inward_normal(Vec2 p) const {
    if (const auto* disc = std::get_if<Disc>(&shape)) {
        return unit_or_zero(disc->center - p);
    }
    if (const auto* ring = std::get_if<Annulus>(&shape)) {
        const Vec2 rel = p - ring->center;
        const double r = rel.norm();
        if (r - ring->r_out >= ring->r_in - r) return unit_or_zero(-rel);
        // inner wall: inward means away from the hole
        return r > 0.0 ? rel / r : Vec2{1.0, 0.0};
    }
    const auto& box = std::get<Rect>(shape);
    const Vec2 rel = p - box.center;
    const double qx = std::abs(rel.x) - box.half_width;
    const double qy = std::abs(rel.y) - box.half_height;
    const double sx = rel.x >= 0.0 ? 1.0 : -1.0;
    const double sy = rel.y >= 0.0 ? 1.0 : -1.0;
    if (qx > 0.0 || qy > 0.0) {
        // outside: points from p back to its nearest boundary point
        return unit_or_zero(Vec2{-sx * std::max(qx, 0.0), -sy * std::max(qy, 0.0)});
    }
    return qx >= qy ? Vec2{-sx, 0.0} : Vec2{0.0, -sy};
}

void Arena::validate() const {
    if (!center().finite()) throw ConfigError("arena.center", "must be finite");
    if (const auto* disc = std::get_if<Disc>(&shape)) {
        require(disc->radius > 0.0, "arena.radius", "must be > 0");
    } else if (const auto* ring = std::get_if<Annulus>(&shape)) {
        require(ring->r_in > 0.0, "arena.r_in", "must be > 0");
        require(ring->r_out > ring->r_in, "arena.r_out", "must exceed r_in");
    } else {
        const auto& box = std::get<Rect>(shape);
        require(box.half_width > 0.0, "arena.half_width", "must be > 0");
        require(box.half_height > 0.0, "arena.half_height", "must be > 0");
    }
}

}  // namespace flocksim
