#pragma once

#include <optional>
#include <string>
#include <variant>

#include "flocksim/core.hpp"
#include "flocksim/formation.hpp"
#include "json.hpp"

namespace flocksim {

struct SetParam {
    std::string name;
    double value = 0.0;
};
struct SetFormation {
    Shape shape = Shape::Grid;
};
struct SetTarget {
    Vec2 position;
};
struct ForceLand {
    std::optional<AgentId> agent;  // nullopt lands every unit
};
struct Pause {};
struct Resume {};
enum class Pacing { Realtime, MaxSpeed };
struct SetPacing {
    Pacing pacing = Pacing::MaxSpeed;
};

using CommandKind = std::variant<SetParam, SetFormation, SetTarget, ForceLand, Pause, Resume, SetPacing>;

/// Operator command. `issued_at` is simulated time.
struct Command {
    CommandKind kind;
    double issued_at = 0.0;
};

/// Names accepted by SetParam while a run is in progress.
bool is_live_param(const std::string& name);

/// Parses the wire form, e.g. {"kind":"set_param","name":"r0","value":12.0}.
/// Throws ConfigError on malformed input or unknown keys.
Command command_from_json(const nlohmann::json& j);
nlohmann::json command_to_json(const Command& c);

/// True for commands consumed by the run loop rather than the world state.
bool is_runner_command(const Command& c);

}  // namespace flocksim
