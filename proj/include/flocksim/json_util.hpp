#pragma once

#include <set>
#include <string>

#include "flocksim/core.hpp"
#include "json.hpp"

namespace flocksim::json_util {

/// Reads fields from a JSON object, remembering which keys were consumed so
/// that leftovers can be rejected. Errors carry the dotted field path.
class ObjectReader {
public:
    ObjectReader(const nlohmann::json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
    }

    std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    bool has(const std::string& key) const { return j_.contains(key); }

    const nlohmann::json& raw(const std::string& key) {
        used_.insert(key);
        if (!j_.contains(key)) throw ConfigError(field(key), "missing required field");
        return j_.at(key);
    }

    template <typename T>
    void opt(const std::string& key, T& out) {
        if (!j_.contains(key)) return;
        used_.insert(key);
        try {
            out = j_.at(key).get<T>();
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(field(key), std::string("wrong type: ") + e.what());
        }
    }

    template <typename T>
    T req(const std::string& key) {
        const auto& v = raw(key);
        try {
            return v.get<T>();
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(field(key), std::string("wrong type: ") + e.what());
        }
    }

    void opt_vec(const std::string& key, Vec2& out) {
        if (!j_.contains(key)) return;
        out = read_vec(raw(key), field(key));
    }

    /// Throws if any key was never read.
    void finish() const {
        for (const auto& [key, value] : j_.items()) {
            if (!used_.count(key)) throw ConfigError(field(key), "unknown key");
        }
    }

    static Vec2 read_vec(const nlohmann::json& v, const std::string& where) {
        if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
            throw ConfigError(where, "expected [x, y]");
        Vec2 out{v[0].get<double>(), v[1].get<double>()};
        if (!out.finite()) throw ConfigError(where, "must be finite");
        return out;
    }

private:
    const nlohmann::json& j_;
    std::string path_;
    std::set<std::string> used_;
};

inline nlohmann::json vec_json(Vec2 v) { return nlohmann::json::array({v.x, v.y}); }

}  // namespace flocksim::json_util
