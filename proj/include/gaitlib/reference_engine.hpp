#pragma once

#include "gaitlib/gait_model.hpp"
#include "gaitlib/transition.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace gaitlib {

struct EngineConfig {
  double tick_period = 0.02;        // s, 50 Hz
  double deadband = 1e-4;           // m/s change that triggers a re-blend
  double splice_margin = 0.05;      // no re-blend once tau >= 1 - splice_margin
  double residual_bound = 0.3;      // rad, |delta_q| clamp
  double impact_tolerance = 0.05;   // rad, reported step-event mismatch threshold
  Stance initial_stance = Stance::Left;
  bool reblend_every_tick = false;
  InterpolationMode interpolation = InterpolationMode::ContainingSimplex;

  /// Throws std::invalid_argument on non-positive periods or bounds.
  void validate() const;
};

/// One policy-rate input: the user command plus residual corrections.
struct CommandInput {
  Velocity v_user;
  double heading = 0.0;  // rad, command frame yaw relative to robot forward
  Velocity delta_v;
  Vector delta_q;  // empty means no joint residual
};

struct ReferenceSample {
  double t = 0.0;
  Vector q_des;      // q_nominal + clamped delta_q
  Vector qdot_des;
  Vector q_nominal;
  Vector delta_q;    // residual actually applied
  double phase = 0.0;        // step phase (t - t0) / T
  double blend_phase = 0.0;  // rescaled phase of the active transition curve
  Stance stance = Stance::Left;
  std::int64_t step_index = 0;
  Velocity v_target;
  bool residual_saturated = false;
  bool step_event = false;
  double impact_mismatch = 0.0;  // max-norm reference jump at a step event
};

struct EngineState {
  TransitionCurve active;  // active.clock.t is the current time
  Stance stance = Stance::Left;
  std::int64_t step_index = 0;
  std::int64_t tick_count = 0;
  Velocity last_target_velocity;
  EngineConfig config;

  const PhaseClock& clock() const { return active.clock; }
};

Velocity rotate_command(Velocity v_user, double heading);

/// Gait for a stance side: the library gait for Left, the mirrored gait at
/// the reflected velocity for Right.
Gait stance_gait(const GaitLibrary& lib, Velocity v, Stance stance,
                 InterpolationMode mode = InterpolationMode::ContainingSimplex);

/// Starts at t = 0 on the full nominal gait for v0 (clamped to the hull).
EngineState init_engine(const GaitLibrary& lib, Velocity v0, const EngineConfig& config = {});

/// Advances one tick and returns the reference for the new time.
/// Throws std::invalid_argument on a non-finite command or a residual of
/// the wrong size.
ReferenceSample tick(EngineState& state, const GaitLibrary& lib, const CommandInput& cmd);

/// tick() over many independent engines, split across `workers` threads
/// (0 picks the hardware concurrency). Identical to a sequential loop.
std::vector<ReferenceSample> tick_batch(std::span<EngineState> states, const GaitLibrary& lib,
                                        std::span<const CommandInput> cmds, unsigned workers = 0);

}  // namespace gaitlib
