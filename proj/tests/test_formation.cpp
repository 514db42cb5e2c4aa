#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "flocksim/control.hpp"
#include "flocksim/formation.hpp"
#include "flocksim/rng.hpp"

using namespace flocksim;
using doctest::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

Vec2 polar(double r, double angle) { return {r * std::cos(angle), r * std::sin(angle)}; }

AgentState at(Vec2 p, Vec2 v = {}, AgentId id = 0) {
    AgentState s;
    s.id = id;
    s.position = p;
    s.velocity = v;
    return s;
}

// Independent packing oracle: can n unit circles fit in a circle of radius
// `container`? Penalty descent on overlaps from many random starts.
bool packing_feasible(std::size_t n, double container, Rng& rng, int restarts = 300) {
    const double inner = container - 1.0;
    if (inner < 0.0) return false;
    if (n == 1) return true;
    std::vector<Vec2> c(n), g(n);
    for (int r = 0; r < restarts; ++r) {
        for (auto& p : c) p = polar(inner * std::sqrt(rng.uniform()), rng.uniform(0, 2 * kPi));
        double step = 0.1;
        for (int it = 0; it < 4000; ++it) {
            double worst = 0.0;
            for (auto& v : g) v = {};
            for (std::size_t i = 0; i < n; ++i) {
                const double out = c[i].norm() - inner;
                if (out > 0.0) {
                    worst = std::max(worst, out);
                    g[i] += unit_or_zero(c[i]) * out;
                }
                for (std::size_t j = i + 1; j < n; ++j) {
                    const Vec2 d = c[j] - c[i];
                    const double gap = 2.0 - d.norm();
                    if (gap > 0.0) {
                        worst = std::max(worst, gap);
                        const Vec2 u = d.norm() > 1e-12 ? d / d.norm() : polar(1.0, rng.uniform(0, 2 * kPi));
                        g[i] += u * gap;
                        g[j] -= u * gap;
                    }
                }
            }
            if (worst < 1e-4) return true;
            for (std::size_t i = 0; i < n; ++i) c[i] -= g[i] * step;
            if (it % 1000 == 999) step *= 0.7;
        }
    }
    return false;
}

double packing_oracle(std::size_t n, Rng& rng) {
    double lo = 1.0, hi = 1.0 + 2.0 * std::sqrt(static_cast<double>(n));
    while (hi - lo > 0.002) {
        const double mid = 0.5 * (lo + hi);
        (packing_feasible(n, mid, rng) ? hi : lo) = mid;
    }
    return hi;
}

}  // namespace

TEST_CASE("packing_radius examples") {
    CHECK(packing_radius(1) == 1.0);
    CHECK(packing_radius(2) == 2.0);
    CHECK(packing_radius(7) == 3.0);
    CHECK_THROWS_AS(packing_radius(0), std::invalid_argument);
}

TEST_CASE("packing table agrees with a numerical packing oracle") {
    Rng rng(2024);
    for (std::size_t n : {1u, 2u, 7u}) {
        CAPTURE(n);
        CHECK(packing_oracle(n, rng) == Approx(packing_radius(n)).epsilon(0.005));
    }
    // the table value itself is feasible and a slightly smaller one is not
    CHECK(packing_feasible(7, 3.002, rng));
    CHECK_FALSE(packing_feasible(7, 2.98, rng, 100));
    CHECK_FALSE(packing_feasible(2, 1.98, rng, 100));
}

TEST_CASE("packing_radius is non-decreasing and continues smoothly past the table") {
    for (std::size_t n = 1; n < 200; ++n) CHECK(packing_radius(n + 1) >= packing_radius(n));
    // hexagonal estimate stays above the area bound sqrt(n)
    for (std::size_t n = 21; n < 200; ++n) CHECK(packing_radius(n) >= std::sqrt(static_cast<double>(n)));
}

TEST_CASE("grid_assignment examples") {
    CHECK(grid_assignment(1, 12.0, {1, 2}).R_fmt == 0.0);
    CHECK(grid_assignment(7, 8.0, {0, 0}).R_fmt == Approx(8.0));
    CHECK(grid_assignment(2, 10.0, {0, 0}).R_fmt == Approx(5.0));
    const auto a = grid_assignment(9, 10.0, {3, -4});
    CHECK(a.x_shp == Vec2{3, -4});
    CHECK(a.tangential_boost == Vec2{0, 0});
}

TEST_CASE("ring_assignment examples") {
    FormationSpec spec;
    spec.shape = Shape::Ring;
    spec.r0 = 7;
    SUBCASE("two agents opposite") {
        spec.n_agents = 2;
        std::vector<PerceivedNeighbor> n{{1, polar(5, kPi), {}, 0}};
        const auto a = ring_assignment(at(polar(5, 0)), n, {0, 0}, spec);
        const double rho = ring_radius(2, 7);
        CHECK(a.x_shp.x == Approx(rho));
        CHECK(a.x_shp.y == Approx(0).scale(1));
        CHECK(a.R_fmt == 0.0);
    }
    SUBCASE("bisector of the gap containing self") {
        spec.n_agents = 4;
        std::vector<PerceivedNeighbor> n{{1, polar(9, kPi / 2), {}, 0}, {2, polar(9, 3 * kPi / 2), {}, 0}};
        const auto a = ring_assignment(at(polar(9, 0.2)), n, {0, 0}, spec);
        CHECK(std::atan2(a.x_shp.y, a.x_shp.x) == Approx(0.0).scale(1));
        CHECK(a.x_shp.norm() == Approx(ring_radius(4, 7)));
    }
    SUBCASE("ring radius") { CHECK(ring_radius(10, 7) == Approx(11.14).epsilon(0.001)); }
    SUBCASE("self on the center falls back to the previous angle, then 0") {
        spec.n_agents = 1;
        const auto a = ring_assignment(at({0, 0}), {}, {0, 0}, spec, kPi / 2);
        CHECK(a.x_shp.x == Approx(0).scale(1));
        CHECK(a.x_shp.y == Approx(ring_radius(1, 7)));
        const auto b = ring_assignment(at({0, 0}), {}, {0, 0}, spec);
        CHECK(b.x_shp.x == Approx(ring_radius(1, 7)));
    }
    SUBCASE("rotation adds a tangential boost") {
        spec.n_agents = 1;
        spec.v_rotation = -2;
        const auto a = ring_assignment(at({5, 0}), {}, {0, 0}, spec);
        CHECK(a.tangential_boost.x == Approx(0).scale(1));
        CHECK(a.tangential_boost.y == Approx(-2));
    }
}

TEST_CASE("ring slots of an evenly spread ring are fixed points spaced r0 apart") {
    for (std::size_t n : {3u, 6u, 10u, 17u}) {
        FormationSpec spec;
        spec.shape = Shape::Ring;
        spec.n_agents = n;
        spec.r0 = 7;
        const double rho = ring_radius(n, spec.r0);
        std::vector<Vec2> slots;
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<PerceivedNeighbor> others;
            for (std::size_t j = 0; j < n; ++j)
                if (j != i) others.push_back({static_cast<AgentId>(j), polar(rho, 2 * kPi * j / n), {}, 0});
            const auto a = ring_assignment(at(polar(rho, 2 * kPi * i / n), {}, static_cast<AgentId>(i)), others,
                                           {0, 0}, spec);
            CHECK((a.x_shp - polar(rho, 2 * kPi * i / n)).norm() < 1e-9);
            slots.push_back(a.x_shp);
        }
        // arc spacing between adjacent slots
        CHECK(rho * 2 * kPi / static_cast<double>(n) == Approx(spec.r0));
        for (std::size_t i = 0; i < n; ++i) {
            const Vec2 a = slots[i], b = slots[(i + 1) % n];
            const double arc = rho * std::acos(std::clamp(dot(a, b) / (rho * rho), -1.0, 1.0));
            CHECK(arc == Approx(spec.r0).epsilon(1e-9));
        }
    }
}

TEST_CASE("rotation_direction examples") {
    std::vector<AgentState> rest{at({1, 0}), at({0, 1}, {}, 1)};
    CHECK(rotation_direction(rest, {0, 0}) == 0);
    std::vector<AgentState> one{at({5, 0}, {0, 1})};
    CHECK(rotation_direction(one, {0, 0}) == 1);
    std::vector<AgentState> cancel{at({5, 0}, {0, 1}), at({-5, 0}, {0, 1}, 1)};
    CHECK(rotation_direction(cancel, {0, 0}) == 0);
    std::vector<AgentState> cw{at({5, 0}, {0, -1})};
    CHECK(rotation_direction(cw, {0, 0}) == -1);
}

TEST_CASE("rotation_direction is invariant under rigid rotation") {
    Rng rng(3);
    for (int trial = 0; trial < 2000; ++trial) {
        std::vector<AgentState> s, sr;
        const double theta = rng.uniform(0, 2 * kPi);
        const Vec2 com{rng.normal(0, 5), rng.normal(0, 5)};
        for (AgentId i = 0; i < 6; ++i) {
            const Vec2 p{rng.normal(0, 10), rng.normal(0, 10)}, v{rng.normal(), rng.normal()};
            s.push_back(at(p, v, i));
            sr.push_back(at(rotated(p, theta), rotated(v, theta), i));
        }
        CHECK(rotation_direction(s, com) == rotation_direction(sr, rotated(com, theta)));
    }
}

TEST_CASE("line_assignment examples") {
    FormationSpec spec;
    spec.shape = Shape::Line;
    spec.r0 = 8;
    SUBCASE("three collinear agents at spacing r0 stay put") {
        spec.n_agents = 3;
        const std::vector<Vec2> pos{{-8, 0}, {0, 0}, {8, 0}};
        for (std::size_t i = 0; i < 3; ++i) {
            std::vector<PerceivedNeighbor> n;
            for (std::size_t j = 0; j < 3; ++j)
                if (j != i) n.push_back({static_cast<AgentId>(j), pos[j], {}, 0});
            const auto a = line_assignment(at(pos[i], {}, static_cast<AgentId>(i)), n, {0, 0}, spec);
            CHECK((a.x_shp - pos[i]).norm() < 1e-9);
            CHECK(a.R_fmt == 0.0);
        }
    }
    SUBCASE("middle agent goes to the midpoint of its neighbors") {
        spec.n_agents = 3;
        std::vector<PerceivedNeighbor> n{{1, {-8, 0}, {}, 0}, {2, {8, 0.0}, {}, 0}};
        const auto a = line_assignment(at({3, 0}), n, {0, 0}, spec);
        CHECK(a.x_shp.x == Approx(0).scale(1));
    }
    SUBCASE("line ends for five agents") {
        spec.n_agents = 5;
        std::vector<PerceivedNeighbor> n{{1, {-5, 0}, {}, 0}, {2, {0, 0}, {}, 0}, {3, {5, 0}, {}, 0}};
        const auto a = line_assignment(at({10, 0}), n, {0, 0}, spec);
        CHECK(a.x_shp.x == Approx(16));
        const auto b = line_assignment(at({-10, 0}, {}, 4), n, {0, 0}, spec);
        CHECK(b.x_shp.x == Approx(-16));
    }
    SUBCASE("coincident points fall back to east") {
        std::vector<Vec2> same{{2, 2}, {2, 2}, {2, 2}};
        CHECK(line_direction(same) == Vec2{1, 0});
    }
}

TEST_CASE("evenly spaced lines are fixed points in any orientation") {
    Rng rng(17);
    for (int trial = 0; trial < 200; ++trial) {
        FormationSpec spec;
        spec.shape = Shape::Line;
        spec.n_agents = 2 + static_cast<std::size_t>(rng.uniform(0, 9));
        spec.r0 = rng.uniform(3, 15);
        const Vec2 u = polar(1.0, rng.uniform(0, 2 * kPi));
        const Vec2 com{rng.normal(0, 50), rng.normal(0, 50)};
        const std::size_t n = spec.n_agents;
        std::vector<Vec2> pos;
        for (std::size_t k = 0; k < n; ++k)
            pos.push_back(com + u * ((static_cast<double>(k) - (static_cast<double>(n) - 1) / 2) * spec.r0));
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<PerceivedNeighbor> others;
            for (std::size_t j = 0; j < n; ++j)
                if (j != i) others.push_back({static_cast<AgentId>(j), pos[j], {}, 0});
            const auto a = line_assignment(at(pos[i], {}, static_cast<AgentId>(i)), others, com, spec);
            CHECK((a.x_shp - pos[i]).norm() < 1e-6 * spec.r0 * static_cast<double>(n));
        }
    }
}

TEST_CASE("line direction is a rotation-equivariant axis with a fixed sign") {
    Rng rng(23);
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<Vec2> pts, rot;
        const double theta = rng.uniform(0, 2 * kPi);
        for (int k = 0; k < 8; ++k) {
            const Vec2 p{rng.normal(0, 10), rng.normal(0, 2)};
            pts.push_back(p);
            rot.push_back(rotated(p, theta));
        }
        const Vec2 a = rotated(line_direction(pts), theta), b = line_direction(rot);
        CHECK(std::abs(cross(a, b)) < 1e-9);
        CHECK((b.x > 0 || (b.x == 0 && b.y >= 0)));
    }
}

TEST_CASE("assign_formation dispatches on shape and validates") {
    FormationSpec spec;
    spec.n_agents = 7;
    spec.r0 = 8;
    CHECK(assign_formation(at({1, 1}), {}, {0, 0}, spec).R_fmt == Approx(8.0));
    spec.n_agents = 0;
    CHECK_THROWS_AS(spec.validate(), ConfigError);
    CHECK(shape_from_string("line") == Shape::Line);
    CHECK_THROWS_AS(shape_from_string("star"), ConfigError);
}
