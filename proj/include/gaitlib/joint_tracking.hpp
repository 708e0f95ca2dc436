#pragma once

#include "gaitlib/command_script.hpp"
#include "gaitlib/reference_engine.hpp"

#include <ostream>
#include <vector>

namespace gaitlib {

struct PDGains {
  Vector kp;            // N*m/rad
  Vector kd;            // N*m*s/rad
  Vector torque_limit;  // N*m

  static PDGains uniform(int n, double kp, double kd, double torque_limit);
  /// kd = 2 sqrt(kp I) per joint.
  static PDGains critically_damped(const Vector& kp, const Vector& inertia, double torque_limit);

  void validate(int n) const;
};

/// Decoupled per-joint double integrator.
struct PlantState {
  Vector q;
  Vector qdot;
  Vector inertia;  // kg*m^2

  static PlantState at_rest(const Vector& q, const Vector& inertia);
};

/// clamp(kp (q_des - q) + kd (qdot_des - qdot), +-torque_limit) per joint.
Vector pd_torque(const PDGains& gains, const ReferenceSample& sample, const Vector& q, const Vector& qdot);

/// Semi-implicit Euler: velocity first, then position with the new velocity.
PlantState plant_step(const PlantState& state, const Vector& torque, double dt);

struct ClosedLoopConfig {
  double inner_rate = 2000.0;  // Hz; must be an integer multiple of the engine rate
};

struct TrackingRow {
  double t = 0.0;
  std::size_t sample_index = 0;  // into ClosedLoopTrace::samples
  Vector q;
  Vector qdot;
  Vector torque;  // applied over [t, t + dt)
};

struct ClosedLoopTrace {
  std::vector<ReferenceSample> samples;
  std::vector<TrackingRow> rows;
  int inner_steps_per_tick = 0;

  /// Columns: t, q_des*, q*, qdot_des*, qdot*, torque*.
  void write_csv(std::ostream& out) const;
};

/// Runs the engine at its tick rate and the PD loop at the inner rate with
/// each reference sample held for one tick. Sample k (time t_k) drives the
/// plant over [t_k, t_k + tick_period). Throws std::invalid_argument when
/// the rate ratio is not an integer.
ClosedLoopTrace run_closed_loop(EngineState& engine, const GaitLibrary& lib, PlantState plant,
                                const PDGains& gains, double duration, const CommandScript& schedule,
                                const ClosedLoopConfig& config = {});

}  // namespace gaitlib
