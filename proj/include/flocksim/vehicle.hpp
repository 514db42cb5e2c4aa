#pragma once

#include <deque>

#include "flocksim/core.hpp"
#include "flocksim/rng.hpp"

namespace flocksim {

/// Velocity PID gains. Commands are horizontal accelerations in m/s^2.
struct PidParams {
    double kp = 0.6;                // [1/s]
    double ki = 0.05;               // [1/s^2]
    double kd = 0.5;                // [-]
    double i_limit = 2.0;           // bound on the integral term per axis [m/s^2]
    double feedforward_gain = 1.0;  // [1/s], matches the plant drag

    void validate() const;
};

struct PidState {
    Vec2 integral;
    Vec2 prev_error;
    bool has_prev = false;
};

/// One PID step per axis: kp*e + kd*de/dt + I + feedforward*target. The
/// integral used is the one accumulated before this step; it is then
/// advanced by ki*e*dt and clamped to +-i_limit.
Vec2 pid_step(Vec2 target_v, Vec2 measured_v, PidState& state, double dt, const PidParams& p);

/// Point-mass plant standing in for an attitude-stabilised multicopter.
struct PlantParams {
    double command_delay = 0.4;  // transport delay of the steering signal [s]
    double response_time = 1.0;  // first-order lag of the achieved acceleration [s]
    double a_max = 3.0;          // tilt-limited acceleration [m/s^2]
    double drag = 1.0;           // linear drag on air-relative velocity [1/s]
    Vec2 wind;                   // mean wind [m/s]
    double gust_std = 0.0;       // velocity diffusion per axis [m/s^1.5]

    void validate() const;
};

struct PlantState {
    Vec2 air_velocity;
    Vec2 acceleration;
    std::deque<Vec2> command_line;  // commands still in transport
};

/// Advances the plant by dt. `speed_cap` bounds the air-relative speed, so
/// ground speed never exceeds speed_cap + |wind|.
AgentState plant_step(const AgentState& state, PlantState& plant, Vec2 command, double dt,
                      const PlantParams& p, double speed_cap, Rng& rng);

struct GpsModel {
    double rate = 5.0;                 // fixes per second
    double pos_error_std = 1.0;        // stationary std per axis [m]
    double pos_error_corr_time = 30.0; // [s]; 0 gives white position noise
    double vel_error_std = 0.1;        // white, per axis [m/s]

    void validate() const;
};

struct GpsFix {
    Vec2 position;
    Vec2 velocity;
    double sample_time = 0.0;
};

struct GpsState {
    Vec2 pos_error;
    double last_time = 0.0;
    bool initialized = false;
};

/// One fix: truth plus a first-order Gauss-Markov position error and white
/// velocity error.
GpsFix gps_sample(const AgentState& truth, double t, GpsState& state, const GpsModel& model, Rng& rng);

}  // namespace flocksim
