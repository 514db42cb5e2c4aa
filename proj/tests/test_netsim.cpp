#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <memory>
#include <vector>

#include "doctest.h"
#include "flocksim/netsim.hpp"

using namespace flocksim;
using doctest::Approx;

namespace {

NetworkParams clean() {
    NetworkParams p;
    p.delay_std = 0.0;
    p.packet_loss = 0.0;
    p.outage_rate = 0.0;
    return p;
}

BroadcastMessage msg(AgentId sender, double sample_time, Vec2 pos = {}) {
    BroadcastMessage m;
    m.sender = sender;
    m.sample_time = sample_time;
    m.position = pos;
    return m;
}

struct Listening {
    std::unique_ptr<bool[]> flags;
    std::size_t n;
    explicit Listening(std::size_t count) : flags(new bool[count]), n(count) {
        for (std::size_t i = 0; i < n; ++i) flags[i] = true;
    }
    std::span<const bool> span() const { return {flags.get(), n}; }
};

}  // namespace

TEST_CASE("broadcast examples") {
    SUBCASE("out of range") {
        NetworkParams p = clean();
        p.comm_range = 80;
        Medium m(2, p, 1);
        const std::vector<Vec2> pos{{0, 0}, {200, 0}};
        Listening l(2);
        CHECK(m.broadcast(msg(0, 0.0), 1.0, pos, l.span()).empty());
    }
    SUBCASE("degenerate delay gives one packet per receiver at t + mean") {
        NetworkParams p = clean();
        Medium m(3, p, 1);
        const std::vector<Vec2> pos{{0, 0}, {10, 0}, {0, 10}};
        Listening l(3);
        const auto out = m.broadcast(msg(0, 0.9), 1.0, pos, l.span());
        REQUIRE(out.size() == 2);
        for (const auto& pk : out) {
            CHECK(pk.deliver_at == Approx(1.0 + p.delay_mean));
            CHECK(pk.message.sender == 0);
            CHECK(pk.receiver != 0);
        }
    }
    SUBCASE("full connectivity") {
        Medium m(10, clean(), 1);
        std::vector<Vec2> pos;
        for (int i = 0; i < 10; ++i) pos.push_back({i * 3.0, 0});
        Listening l(10);
        CHECK(m.broadcast(msg(4, 0.0), 0.0, pos, l.span()).size() == 9);
    }
    SUBCASE("agents not listening get nothing") {
        Medium m(3, clean(), 1);
        const std::vector<Vec2> pos{{0, 0}, {1, 0}, {2, 0}};
        Listening l(3);
        l.flags[2] = false;
        CHECK(m.broadcast(msg(0, 0.0), 0.0, pos, l.span()).size() == 1);
    }
}

TEST_CASE("deliver examples") {
    Medium m(2, clean(), 1);
    CHECK(m.deliver(1, 10.0).empty());

    InFlightPacket a{msg(0, 1.0), 1, 1.0, 5.0};
    m.enqueue({a});
    CHECK(m.deliver(1, 4.9).empty());
    CHECK(m.deliver(1, 5.0).size() == 1);
    CHECK(m.pending(1) == 0);
}

TEST_CASE("deliver orders by due time and the cache keeps the freshest sample") {
    Medium m(2, clean(), 1);
    m.enqueue({{msg(0, 2.0, {2, 2}), 1, 2.0, 2.3}, {msg(0, 1.0, {1, 1}), 1, 1.0, 2.5}});
    const auto got = m.deliver(1, 3.0);
    REQUIRE(got.size() == 2);
    CHECK(got[0].sample_time == 2.0);
    CHECK(got[1].sample_time == 1.0);
    NeighborCache cache;
    for (const auto& g : got) cache.ingest(g);
    REQUIRE(cache.find(0) != nullptr);
    CHECK(cache.find(0)->sample_time == 2.0);
    CHECK(cache.find(0)->position == Vec2{2, 2});
}

TEST_CASE("cache expiry and landed senders") {
    NeighborCache cache;
    cache.ingest(msg(3, 1.0));
    auto landed = msg(4, 1.0);
    landed.status = Status::Landed;
    cache.ingest(landed);
    std::vector<PerceivedNeighbor> seen;
    cache.perceived(2.0, seen);
    REQUIRE(seen.size() == 1);
    CHECK(seen[0].id == 3);
    CHECK(seen[0].age == Approx(1.0));
    cache.expire(6.0, 5.0);
    CHECK(cache.contains(3));
    cache.expire(6.5, 5.0);
    CHECK_FALSE(cache.contains(3));
}

TEST_CASE("outage examples") {
    SUBCASE("rate zero never blocks") {
        Medium m(2, clean(), 3);
        m.outage_step(0, 1e6);
        CHECK_FALSE(m.link(0, 1).blocked(1e6));
        CHECK(m.link(0, 1).onsets == 0);
    }
    SUBCASE("zero duration has no effect") {
        NetworkParams p = clean();
        p.outage_rate = 1.0;
        p.outage_duration_mean = 0.0;
        Medium m(2, p, 3);
        const std::vector<Vec2> pos{{0, 0}, {1, 0}};
        Listening l(2);
        std::size_t sent = 0;
        for (int k = 0; k < 1000; ++k) sent += m.broadcast(msg(0, k * 0.1), k * 0.1, pos, l.span()).size();
        CHECK(sent == 1000);
        CHECK(m.link(0, 1).onsets > 50);
    }
}

TEST_CASE("outage onsets over 1000 s at 0.01/s follow a Poisson count with mean 10") {
    NetworkParams p = clean();
    p.outage_rate = 0.01;
    p.outage_duration_mean = 2.0;
    const int trials = 4000;
    double sum = 0.0, sum_sq = 0.0;
    for (int s = 0; s < trials; ++s) {
        Medium m(2, p, static_cast<std::uint64_t>(s) + 1);
        for (int t = 1; t <= 1000; ++t) m.outage_step(0, t);
        const double n = static_cast<double>(m.link(0, 1).onsets);
        sum += n;
        sum_sq += n * n;
    }
    const double mean = sum / trials;
    const double var = sum_sq / trials - mean * mean;
    CHECK(std::abs(mean - 10.0) < 3.0 * std::sqrt(10.0 / trials));
    CHECK(var == Approx(10.0).epsilon(0.1));
}

TEST_CASE("blocked links drop packets while the outage lasts") {
    NetworkParams p = clean();
    p.outage_rate = 0.05;
    p.outage_duration_mean = 4.0;
    Medium m(2, p, 9);
    const std::vector<Vec2> pos{{0, 0}, {1, 0}};
    Listening l(2);
    std::size_t blocked_slots = 0, dropped = 0;
    for (int k = 0; k < 40000; ++k) {
        const double t = k * 0.1;
        const auto out = m.broadcast(msg(0, t), t, pos, l.span());
        const bool blocked = m.link(0, 1).blocked(t);
        blocked_slots += blocked;
        if (blocked) dropped += out.empty();
        else CHECK(out.size() == 1);
    }
    CHECK(dropped == blocked_slots);
    // merged on/off renewal process: fraction ~ rate*dur / (1 + rate*dur)
    const double frac = static_cast<double>(blocked_slots) / 40000.0;
    CHECK(frac == Approx(0.2 / 1.2).epsilon(0.25));
}

TEST_CASE("truncated delay matches 0.4 +- 0.2 s") {
    NetworkParams p;
    p.delay_mean = 0.4;
    p.delay_std = 0.2;
    p.delay_min = 0.05;
    Medium m(1, p, 77);
    const int n = 100000;
    double s = 0, s2 = 0, lo = 1e9;
    for (int i = 0; i < n; ++i) {
        const double d = m.sample_delay(0);
        s += d;
        s2 += d * d;
        lo = std::min(lo, d);
    }
    const double mean = s / n;
    const double sd = std::sqrt(s2 / n - mean * mean);
    CHECK(mean == Approx(0.4).epsilon(0.05));
    CHECK(sd == Approx(0.2).epsilon(0.05));
    CHECK(lo >= 0.05);
}

TEST_CASE("packet loss thins deliveries at the configured rate") {
    NetworkParams p = clean();
    p.packet_loss = 0.3;
    Medium m(2, p, 5);
    const std::vector<Vec2> pos{{0, 0}, {1, 0}};
    Listening l(2);
    std::size_t sent = 0;
    const int n = 50000;
    for (int k = 0; k < n; ++k) sent += m.broadcast(msg(0, k), k, pos, l.span()).size();
    CHECK(static_cast<double>(sent) / n == Approx(0.7).epsilon(0.02));
}

TEST_CASE("causality and locality over a random medium") {
    NetworkParams p;
    p.comm_range = 30;
    p.packet_loss = 0.1;
    p.outage_rate = 0.02;
    p.outage_duration_mean = 1.5;
    const std::size_t n = 8;
    Medium m(n, p, 13);
    Rng rng(4);
    std::vector<Vec2> pos(n);
    Listening l(n);
    std::vector<NeighborCache> caches(n);
    for (int k = 0; k < 3000; ++k) {
        const double t = k * 0.1;
        for (auto& x : pos) x = {rng.uniform(-40, 40), rng.uniform(-40, 40)};
        for (AgentId s = 0; s < n; ++s) {
            auto packets = m.broadcast(msg(s, t - 0.05, pos[s]), t, pos, l.span());
            for (const auto& pk : packets) {
                CHECK(pk.deliver_at >= pk.send_time + p.delay_min);
                // range judged on true positions at the broadcast instant
                CHECK((pos[pk.receiver] - pos[s]).norm() <= p.comm_range);
                CHECK(pk.message.sample_time <= pk.send_time);
            }
            m.enqueue(std::move(packets));
        }
        for (AgentId r = 0; r < n; ++r) {
            for (const auto& got : m.deliver(r, t)) {
                CHECK(got.sample_time + p.delay_min <= t + 1e-12);
                caches[r].ingest(got);
            }
        }
    }
}

TEST_CASE("identical seeds give identical packet streams") {
    NetworkParams p;
    p.packet_loss = 0.2;
    p.outage_rate = 0.05;
    p.outage_duration_mean = 1.0;
    auto stream = [&](std::uint64_t seed) {
        Medium m(5, p, seed);
        std::vector<Vec2> pos{{0, 0}, {10, 0}, {20, 0}, {0, 30}, {100, 100}};
        Listening l(5);
        std::vector<double> out;
        for (int k = 0; k < 500; ++k) {
            for (AgentId s = 0; s < 5; ++s) {
                for (const auto& pk : m.broadcast(msg(s, k * 0.1), k * 0.1, pos, l.span())) {
                    out.push_back(pk.receiver);
                    out.push_back(pk.deliver_at);
                }
            }
        }
        return out;
    };
    CHECK(stream(8) == stream(8));
    CHECK(stream(8) != stream(9));
}

TEST_CASE("network parameter validation") {
    NetworkParams p;
    CHECK_NOTHROW(p.validate());
    p.comm_range = 0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = NetworkParams{};
    p.packet_loss = 1.0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = NetworkParams{};
    p.broadcast_hz = 0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
}
