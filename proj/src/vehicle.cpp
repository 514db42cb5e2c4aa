#include "flocksim/vehicle.hpp"

#include <algorithm>

namespace flocksim {

void PidParams::validate() const {
    if (!(kp >= 0.0 && ki >= 0.0 && kd >= 0.0)) throw ConfigError("pid", "gains must be >= 0");
    if (!(i_limit > 0.0)) throw ConfigError("pid.i_limit", "must be > 0");
    if (!(feedforward_gain >= 0.0)) throw ConfigError("pid.feedforward_gain", "must be >= 0");
}

void PlantParams::validate() const {
    if (!(command_delay >= 0.0)) throw ConfigError("plant.command_delay", "must be >= 0");
    if (!(response_time > 0.0)) throw ConfigError("plant.response_time", "must be > 0");
    if (!(a_max > 0.0)) throw ConfigError("plant.a_max", "must be > 0");
    if (!(drag >= 0.0)) throw ConfigError("plant.drag", "must be >= 0");
    if (!wind.finite()) throw ConfigError("plant.wind", "must be finite");
    if (!(gust_std >= 0.0)) throw ConfigError("plant.gust_std", "must be >= 0");
}

void GpsModel::validate() const {
    if (!(rate > 0.0)) throw ConfigError("gps.rate", "must be > 0");
    if (!(pos_error_std >= 0.0)) throw ConfigError("gps.pos_error_std", "must be >= 0");
    if (!(pos_error_corr_time >= 0.0)) throw ConfigError("gps.pos_error_corr_time", "must be >= 0");
    if (!(vel_error_std >= 0.0)) throw ConfigError("gps.vel_error_std", "must be >= 0");
}

namespace {

double clamp_abs(double v, double limit) { return std::clamp(v, -limit, limit); }

}  // namespace

Vec2 pid_step(Vec2 target_v, Vec2 measured_v, PidState& state, double dt, const PidParams& p) {
    const Vec2 error = target_v - measured_v;
    const Vec2 derivative = state.has_prev ? (error - state.prev_error) / dt : Vec2{};
    const Vec2 command = error * p.kp + derivative * p.kd + state.integral + target_v * p.feedforward_gain;

    state.integral.x = clamp_abs(state.integral.x + p.ki * error.x * dt, p.i_limit);
    state.integral.y = clamp_abs(state.integral.y + p.ki * error.y * dt, p.i_limit);
    state.prev_error = error;
    state.has_prev = true;
    return command;
}

AgentState plant_step(const AgentState& state, PlantState& plant, Vec2 command, double dt,
                      const PlantParams& p, double speed_cap, Rng& rng) {
    // transport delay, quantised to whole steps
    const auto delay_steps = static_cast<std::size_t>(std::lround(p.command_delay / dt));
    plant.command_line.push_back(command);
    Vec2 applied;
    if (plant.command_line.size() > delay_steps) {
        applied = plant.command_line.front();
        plant.command_line.pop_front();
    }

    // exact discretisation of the first-order lag
    const double blend = 1.0 - std::exp(-dt / p.response_time);
    plant.acceleration += (applied - plant.acceleration) * blend;
    plant.acceleration = clamp_speed(plant.acceleration, p.a_max);

    Vec2 gust;
    if (p.gust_std > 0.0) {
        const double s = p.gust_std / std::sqrt(dt);
        gust = {rng.normal(0.0, s), rng.normal(0.0, s)};
    }
    plant.air_velocity += (plant.acceleration - plant.air_velocity * p.drag + gust) * dt;
    plant.air_velocity = clamp_speed(plant.air_velocity, speed_cap);

    AgentState next = state;
    next.velocity = plant.air_velocity + p.wind;
    next.position += next.velocity * dt;
    return next;
}

GpsFix gps_sample(const AgentState& truth, double t, GpsState& state, const GpsModel& model, Rng& rng) {
    const double sigma = model.pos_error_std;
    if (!state.initialized) {
        state.pos_error = {rng.normal(0.0, sigma), rng.normal(0.0, sigma)};
        state.initialized = true;
    } else if (model.pos_error_corr_time > 0.0) {
        const double phi = std::exp(-(t - state.last_time) / model.pos_error_corr_time);
        const double drive = sigma * std::sqrt(1.0 - phi * phi);
        state.pos_error = state.pos_error * phi + Vec2{rng.normal(0.0, drive), rng.normal(0.0, drive)};
    } else {
        state.pos_error = {rng.normal(0.0, sigma), rng.normal(0.0, sigma)};
    }
    state.last_time = t;

    GpsFix fix;
    fix.position = truth.position + state.pos_error;
    fix.velocity = truth.velocity;
    if (model.vel_error_std > 0.0) {
        fix.velocity += Vec2{rng.normal(0.0, model.vel_error_std), rng.normal(0.0, model.vel_error_std)};
    }
    fix.sample_time = t;
    return fix;
}

}  // namespace flocksim
