#include "flocksim/command.hpp"

#include <array>

#include "flocksim/json_util.hpp"

namespace flocksim {

using nlohmann::json;
using json_util::ObjectReader;

bool is_live_param(const std::string& name) {
    static constexpr std::array<const char*, 6> kLive{"r0", "v_flock", "v0", "C_frict", "D", "v_rotation"};
    for (const char* n : kLive) {
        if (name == n) return true;
    }
    return false;
}

Command command_from_json(const json& j) {
    ObjectReader in(j, "command");
    Command c;
    in.opt("issued_at", c.issued_at);
    const auto kind = in.req<std::string>("kind");
    if (kind == "set_param") {
        SetParam sp;
        sp.name = in.req<std::string>("name");
        sp.value = in.req<double>("value");
        if (!is_live_param(sp.name)) throw ConfigError("command.name", "'" + sp.name + "' is not a live-tunable parameter");
        if (!std::isfinite(sp.value)) throw ConfigError("command.value", "must be finite");
        c.kind = sp;
    } else if (kind == "set_formation") {
        c.kind = SetFormation{shape_from_string(in.req<std::string>("shape"))};
    } else if (kind == "set_target") {
        SetTarget st{{in.req<double>("x"), in.req<double>("y")}};
        if (!st.position.finite()) throw ConfigError("command.x", "target must be finite");
        c.kind = st;
    } else if (kind == "force_land") {
        ForceLand fl;
        const auto& agent = in.raw("agent");
        if (agent.is_string() && agent.get<std::string>() == "all") {
            fl.agent.reset();
        } else if (agent.is_number_unsigned()) {
            fl.agent = agent.get<AgentId>();
        } else {
            throw ConfigError("command.agent", "expected an agent id or \"all\"");
        }
        c.kind = fl;
    } else if (kind == "pause") {
        c.kind = Pause{};
    } else if (kind == "resume") {
        c.kind = Resume{};
    } else if (kind == "set_pacing") {
        const auto pacing = in.req<std::string>("pacing");
        if (pacing == "realtime") {
            c.kind = SetPacing{Pacing::Realtime};
        } else if (pacing == "max_speed") {
            c.kind = SetPacing{Pacing::MaxSpeed};
        } else {
            throw ConfigError("command.pacing", "expected \"realtime\" or \"max_speed\"");
        }
    } else {
        throw ConfigError("command.kind", "unknown command kind '" + kind + "'");
    }
    in.finish();
    return c;
}

json command_to_json(const Command& c) {
    json j = std::visit(
        [](const auto& k) -> json {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, SetParam>) {
                return {{"kind", "set_param"}, {"name", k.name}, {"value", k.value}};
            } else if constexpr (std::is_same_v<T, SetFormation>) {
                return {{"kind", "set_formation"}, {"shape", to_string(k.shape)}};
            } else if constexpr (std::is_same_v<T, SetTarget>) {
                return {{"kind", "set_target"}, {"x", k.position.x}, {"y", k.position.y}};
            } else if constexpr (std::is_same_v<T, ForceLand>) {
                return {{"kind", "force_land"}, {"agent", k.agent ? json(*k.agent) : json("all")}};
            } else if constexpr (std::is_same_v<T, Pause>) {
                return {{"kind", "pause"}};
            } else if constexpr (std::is_same_v<T, Resume>) {
                return {{"kind", "resume"}};
            } else {
                return {{"kind", "set_pacing"}, {"pacing", k.pacing == Pacing::Realtime ? "realtime" : "max_speed"}};
            }
        },
        c.kind);
    j["issued_at"] = c.issued_at;
    return j;
}

bool is_runner_command(const Command& c) {
    return std::holds_alternative<Pause>(c.kind) || std::holds_alternative<Resume>(c.kind) ||
           std::holds_alternative<SetPacing>(c.kind);
}

}  // namespace flocksim
