#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "flocksim/metrics.hpp"
#include "flocksim/rng.hpp"

using namespace flocksim;
using doctest::Approx;

namespace {

AgentState st(Vec2 p, Vec2 v, AgentId id) {
    AgentState s;
    s.id = id;
    s.position = p;
    s.velocity = v;
    return s;
}

// speeds stay above the alignment floor even after scaling by 0.2
std::vector<AgentState> random_states(Rng& rng, std::size_t n) {
    std::vector<AgentState> out;
    for (std::size_t i = 0; i < n; ++i)
        out.push_back(st({rng.normal(0, 20), rng.normal(0, 20)},
                         rotated({rng.uniform(0.5, 3.0), 0.0}, rng.uniform(0, 2 * std::numbers::pi)),
                         static_cast<AgentId>(i)));
    return out;
}

TrackRecord record_of(double t, const std::vector<AgentState>& states) {
    TrackRecord r;
    r.t = t;
    for (const auto& s : states) {
        AgentSample a;
        a.position = s.position;
        a.velocity = s.velocity;
        a.status = s.status;
        r.agents.push_back(a);
    }
    return r;
}

}  // namespace

TEST_CASE("velocity_correlation examples") {
    std::vector<AgentState> same{st({0, 0}, {1, 1}, 0), st({5, 0}, {1, 1}, 1), st({0, 5}, {1, 1}, 2)};
    CHECK(velocity_correlation(same).value() == Approx(1.0));
    std::vector<AgentState> opposite{st({0, 0}, {1, 0}, 0), st({5, 0}, {-1, 0}, 1)};
    CHECK(velocity_correlation(opposite).value() == Approx(-1.0));
    std::vector<AgentState> three{st({0, 0}, {1, 0}, 0), st({5, 0}, {2, 0}, 1), st({0, 5}, {0, 1}, 2)};
    CHECK(velocity_correlation(three).value() == Approx(1.0 / 3.0));
}

TEST_CASE("velocity_correlation is undefined without two moving agents") {
    std::vector<AgentState> one{st({0, 0}, {1, 0}, 0)};
    CHECK_FALSE(velocity_correlation(one).has_value());
    std::vector<AgentState> slow{st({0, 0}, {1, 0}, 0), st({1, 0}, {0.01, 0}, 1)};
    CHECK_FALSE(velocity_correlation(slow).has_value());
}

TEST_CASE("order parameters are bounded and invariant under rigid motion and speed scaling") {
    Rng rng(3);
    for (int trial = 0; trial < 300; ++trial) {
        auto s = random_states(rng, 12);
        const double theta = rng.uniform(0, 2 * std::numbers::pi);
        const Vec2 shift{rng.normal(0, 100), rng.normal(0, 100)};
        const double scale = rng.uniform(0.2, 5.0);
        auto moved = s;
        for (auto& a : moved) {
            a.position = rotated(a.position, theta) + shift;
            a.velocity = rotated(a.velocity, theta) * scale;
        }
        const auto phi = velocity_correlation(s), phi2 = velocity_correlation(moved);
        REQUIRE(phi.has_value());
        CHECK(*phi >= -1.0);
        CHECK(*phi <= 1.0);
        CHECK(*phi2 == Approx(*phi).epsilon(1e-9));

        Tracklog a, b;
        a.records.push_back(record_of(0, s));
        b.records.push_back(record_of(0, moved));
        const auto la = local_correlation(a, 15.0, 0, 1), lb = local_correlation(b, 15.0, 0, 1);
        CHECK(la.has_value() == lb.has_value());
        if (la) {
            CHECK(*la >= -1.0);
            CHECK(*la <= 1.0);
            CHECK(*lb == Approx(*la).epsilon(1e-9));
        }
    }
}

TEST_CASE("local_correlation examples") {
    Rng rng(4);
    Tracklog log;
    const Vec2 v{1.3, -0.7};
    auto s = random_states(rng, 10);
    for (int k = 0; k < 20; ++k) {
        for (auto& a : s) {
            a.velocity = v;
            a.position += v;
        }
        log.records.push_back(record_of(k, s));
    }
    for (double r : {1.0, 10.0, 100.0, 1000.0}) {
        const auto phi = local_correlation(log, r, 0, 19);
        if (phi) CHECK(*phi == Approx(1.0));
    }
    CHECK(local_correlation(log, 1000.0, 0, 19).value() == Approx(1.0));
    CHECK_FALSE(local_correlation(log, 1e-6, 0, 19).has_value());
}

TEST_CASE("local_correlation averages pairs first, then time") {
    Tracklog log;
    // t=0: one close aligned pair; t=1: one close opposed pair and one far aligned pair
    log.records.push_back(record_of(0, {st({0, 0}, {1, 0}, 0), st({1, 0}, {1, 0}, 1)}));
    log.records.push_back(
        record_of(1, {st({0, 0}, {1, 0}, 0), st({1, 0}, {-1, 0}, 1), st({100, 0}, {1, 0}, 2)}));
    log.records.push_back(record_of(2, {st({0, 0}, {1, 0}, 0), st({50, 0}, {1, 0}, 1)}));
    // t=2 has no pair within r and is skipped
    CHECK(local_correlation(log, 5.0, 0, 2).value() == Approx(0.0).scale(1));
    CHECK(local_correlation(log, 5.0, 0, 0.5).value() == Approx(1.0));
}

TEST_CASE("neighbor_stats examples") {
    std::vector<AgentState> two{st({0, 0}, {}, 0), st({10, 0}, {}, 1)};
    auto a = neighbor_stats(two).value();
    CHECK(a.mean == Approx(10));
    CHECK(a.stddev == Approx(0).scale(1));
    std::vector<AgentState> square{st({0, 0}, {}, 0), st({4, 0}, {}, 1), st({4, 4}, {}, 2), st({0, 4}, {}, 3)};
    auto b = neighbor_stats(square).value();
    CHECK(b.mean == Approx(4));
    CHECK(b.stddev == Approx(0).scale(1));
    std::vector<AgentState> line{st({0, 0}, {}, 0), st({8, 0}, {}, 1), st({20, 0}, {}, 2)};
    auto c = neighbor_stats(line).value();
    CHECK(c.mean == Approx(28.0 / 3.0));
    CHECK(c.stddev == Approx(1.8856).epsilon(1e-3));
    std::vector<AgentState> alone{st({0, 0}, {}, 0)};
    CHECK_FALSE(neighbor_stats(alone).has_value());
}

TEST_CASE("safety statistics: collision radius 0 never counts") {
    Rng rng(5);
    MetricsCollector zero(0.0, ExecPolicy::Serial), std_radius(1.5, ExecPolicy::Serial);
    for (int k = 0; k < 200; ++k) {
        auto s = random_states(rng, 15);
        s[1].position = s[0].position;  // coincident pair
        zero.observe_safety(s);
        std_radius.observe_safety(s);
    }
    Tracklog empty;
    const auto r0 = zero.report(empty, 0, 1, {});
    const auto r1 = std_radius.report(empty, 0, 1, {});
    CHECK(r0.collision_count == 0);
    CHECK(r1.collision_count >= 1);
    CHECK(r1.min_pairwise_distance == 0.0);
    CHECK(r1.min_pairwise_distance >= 0.0);
}

TEST_CASE("collisions count distinct pairs once") {
    MetricsCollector m(1.5, ExecPolicy::Serial);
    std::vector<AgentState> s{st({0, 0}, {}, 0), st({1, 0}, {}, 1), st({10, 0}, {}, 2)};
    for (int k = 0; k < 50; ++k) m.observe_safety(s);
    Tracklog empty;
    const auto r = m.report(empty, 0, 1, {});
    CHECK(r.collision_count == 1);
    CHECK(r.min_pairwise_distance == Approx(1.0));
}

TEST_CASE("agents at different altitudes keep their vertical separation") {
    MetricsCollector m(1.5, ExecPolicy::Serial);
    std::vector<AgentState> s{st({0, 0}, {}, 0), st({0, 0}, {}, 1)};
    s[0].altitude = 15.0;
    s[1].altitude = 10.0;
    m.observe_safety(s);
    Tracklog empty;
    const auto r = m.report(empty, 0, 1, {});
    CHECK(r.collision_count == 0);
    CHECK(r.min_pairwise_distance == Approx(5.0));
}

TEST_CASE("report windows, series and serialization") {
    MetricsCollector m(1.5, ExecPolicy::Parallel);
    Tracklog log;
    for (int k = 0; k <= 10; ++k) {
        std::vector<AgentState> s{st({0, 0}, {1, 0}, 0), st({10, 0}, k < 5 ? Vec2{1, 0} : Vec2{-1, 0}, 1)};
        m.observe_safety(s);
        m.observe_sample(k, s);
        log.records.push_back(record_of(k, s));
    }
    const std::vector<double> radii{20.0};
    const auto r = m.report(log, 5, 10, radii);
    CHECK(r.phi_series.size() == 11);
    CHECK(r.phi_mean.value() == Approx(-1.0));
    CHECK(r.phi_std.value() == Approx(0).scale(1));
    CHECK(r.phi_local.at(20.0).value() == Approx(-1.0));
    CHECK(r.nn_series.size() == 11);
    const auto j = r.to_json();
    CHECK(j.at("collision_count") == 0);
    CHECK(j.contains("phi_series"));
    CHECK(r.phi_csv().rfind("t,phi\n", 0) == 0);
    CHECK(r.nn_csv().rfind("t,nn_mean,nn_std\n", 0) == 0);
}

TEST_CASE("serial and parallel pair scans agree exactly") {
    Rng rng(6);
    for (std::size_t n : {0u, 1u, 2u, 17u, 150u}) {
        std::vector<Vec2> pos, vel;
        for (std::size_t i = 0; i < n; ++i) {
            pos.push_back({rng.normal(0, 30), rng.normal(0, 30)});
            vel.push_back({rng.normal(), rng.normal()});
        }
        const auto a = pair_scan_serial(pos, vel, 20.0, 3.0);
        const auto b = pair_scan_parallel(pos, vel, 20.0, 3.0);
        CHECK(a.nearest == b.nearest);
        CHECK(a.min_distance == b.min_distance);
        CHECK(a.align_sum == b.align_sum);
        CHECK(a.align_pairs == b.align_pairs);
        CHECK(a.local_sum == b.local_sum);
        CHECK(a.local_pairs == b.local_pairs);
        CHECK(a.close_pairs == b.close_pairs);
    }
}
