#pragma once

#include <cstdint>
#include <map>
#include <queue>
#include <span>
#include <vector>

#include "flocksim/control.hpp"
#include "flocksim/core.hpp"
#include "flocksim/rng.hpp"

namespace flocksim {

struct BroadcastMessage {
    AgentId sender = 0;
    double sample_time = 0.0;  // when the sender's position fix was taken
    Vec2 position;
    Vec2 velocity;
    Status status = Status::Airborne;
};

struct NetworkParams {
    double comm_range = 80.0;           // r_c [m]
    double delay_mean = 0.4;            // [s]
    double delay_std = 0.2;             // [s]
    double delay_min = 0.05;            // floor of the delay distribution [s]
    double packet_loss = 0.0;           // per-packet drop probability
    double outage_rate = 0.0;           // outage onsets per second per directed link
    double outage_duration_mean = 0.0;  // [s]
    double broadcast_hz = 10.0;

    void validate() const;
};

struct InFlightPacket {
    BroadcastMessage message;
    AgentId receiver = 0;
    double send_time = 0.0;
    double deliver_at = 0.0;
};

/// Outage state of one directed link. Onsets form a Poisson process; each
/// outage lasts an exponentially distributed time. Overlapping outages merge.
struct LinkOutage {
    double next_onset = 0.0;
    double blocked_until = -1.0;
    std::uint64_t onsets = 0;

    bool blocked(double t) const { return t < blocked_until; }
};

/// Shared broadcast medium. broadcast() touches only the sender's own
/// random stream and outgoing links, so different senders may run
/// concurrently; enqueue() and deliver() are serial.
class Medium {
public:
    Medium(std::size_t n_agents, const NetworkParams& params, std::uint64_t seed);

    /// Packets produced by one transmission of `msg` at t_now. Receivers are
    /// the agents whose true position lies within comm_range of the sender's
    /// true position and whose incoming link is neither lossy nor in outage.
    std::vector<InFlightPacket> broadcast(const BroadcastMessage& msg, double t_now,
                                          std::span<const Vec2> true_positions,
                                          std::span<const bool> listening);

    /// Advances the outage processes of every link leaving `sender` up to t_now.
    void outage_step(AgentId sender, double t_now);

    void enqueue(std::vector<InFlightPacket> packets);

    /// Removes and returns the packets due for `receiver`, ordered by deliver_at.
    std::vector<BroadcastMessage> deliver(AgentId receiver, double t_now);

    const LinkOutage& link(AgentId sender, AgentId receiver) const { return links_[sender * n_ + receiver]; }
    std::size_t pending(AgentId receiver) const { return queues_[receiver].size(); }
    double sample_delay(AgentId sender);

    const NetworkParams& params() const { return params_; }
    void set_params(const NetworkParams& params) { params_ = params; }

private:
    struct Queued {
        InFlightPacket packet;
        std::uint64_t seq;
    };
    struct Later {
        bool operator()(const Queued& a, const Queued& b) const {
            if (a.packet.deliver_at != b.packet.deliver_at) return a.packet.deliver_at > b.packet.deliver_at;
            return a.seq > b.seq;
        }
    };

    std::size_t n_;
    NetworkParams params_;
    std::vector<Rng> rngs_;  // one per sender
    std::vector<LinkOutage> links_;
    std::vector<std::priority_queue<Queued, std::vector<Queued>, Later>> queues_;
    std::uint64_t next_seq_ = 0;
};

/// Per-agent store of the freshest message from each sender.
class NeighborCache {
public:
    /// Keeps a message only if it is newer than what is held for that sender.
    void ingest(const BroadcastMessage& msg);
    /// Drops entries sampled more than `expiry` seconds before t_now.
    void expire(double t_now, double expiry);
    /// Airborne and landing senders as seen at t_now, ordered by id.
    void perceived(double t_now, std::vector<PerceivedNeighbor>& out) const;
    std::size_t size() const { return entries_.size(); }
    bool contains(AgentId id) const { return entries_.count(id) != 0; }
    const BroadcastMessage* find(AgentId id) const;

private:
    std::map<AgentId, BroadcastMessage> entries_;
};

}  // namespace flocksim
