#include "flocksim/netsim.hpp"

#include <algorithm>
#include <limits>

namespace flocksim {

void NetworkParams::validate() const {
    auto require = [](bool ok, const char* field, const char* msg) {
        if (!ok) throw ConfigError(std::string("network.") + field, msg);
    };
    require(comm_range > 0.0, "comm_range", "must be > 0");
    require(delay_min >= 0.0, "delay_min", "must be >= 0");
    require(delay_mean >= 0.0 && std::isfinite(delay_mean), "delay_mean", "must be >= 0");
    require(delay_std >= 0.0 && std::isfinite(delay_std), "delay_std", "must be >= 0");
    require(packet_loss >= 0.0 && packet_loss < 1.0, "packet_loss", "must lie in [0, 1)");
    require(outage_rate >= 0.0 && std::isfinite(outage_rate), "outage_rate", "must be >= 0");
    require(outage_duration_mean >= 0.0 && std::isfinite(outage_duration_mean), "outage_duration_mean",
            "must be >= 0");
    require(broadcast_hz > 0.0 && std::isfinite(broadcast_hz), "broadcast_hz", "must be > 0");
}

Medium::Medium(std::size_t n_agents, const NetworkParams& params, std::uint64_t seed)
    : n_(n_agents), params_(params), links_(n_agents * n_agents), queues_(n_agents) {
    rngs_.reserve(n_);
    for (std::size_t i = 0; i < n_; ++i) rngs_.emplace_back(seed, static_cast<std::uint32_t>(i), Rng::Stream::Network);
    for (std::size_t s = 0; s < n_; ++s) {
        for (std::size_t r = 0; r < n_; ++r) {
            auto& link = links_[s * n_ + r];
            link.next_onset = params_.outage_rate > 0.0 ? rngs_[s].exponential(1.0 / params_.outage_rate)
                                                        : std::numeric_limits<double>::infinity();
        }
    }
}

double Medium::sample_delay(AgentId sender) {
    double delay = params_.delay_mean;
    if (params_.delay_std > 0.0) delay = rngs_[sender].normal(params_.delay_mean, params_.delay_std);
    return std::max(params_.delay_min, delay);
}

void Medium::outage_step(AgentId sender, double t_now) {
    if (params_.outage_rate <= 0.0) return;
    Rng& rng = rngs_[sender];
    for (std::size_t r = 0; r < n_; ++r) {
        auto& link = links_[sender * n_ + r];
        if (!std::isfinite(link.next_onset)) link.next_onset = t_now + rng.exponential(1.0 / params_.outage_rate);
        while (link.next_onset <= t_now) {
            const double end = link.next_onset + rng.exponential(params_.outage_duration_mean);
            link.blocked_until = std::max(link.blocked_until, end);
            ++link.onsets;
            link.next_onset += rng.exponential(1.0 / params_.outage_rate);
        }
    }
}

std::vector<InFlightPacket> Medium::broadcast(const BroadcastMessage& msg, double t_now,
                                              std::span<const Vec2> true_positions,
                                              std::span<const bool> listening) {
    std::vector<InFlightPacket> out;
    const AgentId s = msg.sender;
    outage_step(s, t_now);
    const Vec2 origin = true_positions[s];
    const double range_sq = params_.comm_range * params_.comm_range;
    Rng& rng = rngs_[s];
    for (std::size_t r = 0; r < n_; ++r) {
        if (r == s || !listening[r]) continue;
        if ((true_positions[r] - origin).norm_sq() > range_sq) continue;
        if (links_[s * n_ + r].blocked(t_now)) continue;
        if (params_.packet_loss > 0.0 && rng.uniform() < params_.packet_loss) continue;
        out.push_back({msg, static_cast<AgentId>(r), t_now, t_now + sample_delay(s)});
    }
    return out;
}

void Medium::enqueue(std::vector<InFlightPacket> packets) {
    for (auto& p : packets) {
        const AgentId r = p.receiver;
        queues_[r].push({std::move(p), next_seq_++});
    }
}

std::vector<BroadcastMessage> Medium::deliver(AgentId receiver, double t_now) {
    std::vector<BroadcastMessage> out;
    auto& q = queues_[receiver];
    while (!q.empty() && q.top().packet.deliver_at <= t_now) {
        out.push_back(q.top().packet.message);
        q.pop();
    }
    return out;
}

void NeighborCache::ingest(const BroadcastMessage& msg) {
    auto [it, inserted] = entries_.try_emplace(msg.sender, msg);
    if (!inserted && msg.sample_time > it->second.sample_time) it->second = msg;
}

void NeighborCache::expire(double t_now, double expiry) {
    std::erase_if(entries_, [&](const auto& kv) { return t_now - kv.second.sample_time > expiry; });
}

void NeighborCache::perceived(double t_now, std::vector<PerceivedNeighbor>& out) const {
    out.clear();
    for (const auto& [id, msg] : entries_) {
        if (msg.status == Status::Landed) continue;
        out.push_back({id, msg.position, msg.velocity, std::max(0.0, t_now - msg.sample_time)});
    }
}

const BroadcastMessage* NeighborCache::find(AgentId id) const {
    auto it = entries_.find(id);
    return it == entries_.end() ? nullptr : &it->second;
}

}  // namespace flocksim
