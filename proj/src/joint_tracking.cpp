#include "gaitlib/joint_tracking.hpp"

#include "gaitlib/trace_csv.hpp"

#include <cmath>
#include <stdexcept>

namespace gaitlib {

PDGains PDGains::uniform(int n, double kp, double kd, double torque_limit) {
  return {Vector::Constant(n, kp), Vector::Constant(n, kd), Vector::Constant(n, torque_limit)};
}

PDGains PDGains::critically_damped(const Vector& kp, const Vector& inertia, double torque_limit) {
  if (kp.size() != inertia.size()) throw std::invalid_argument("gain and inertia sizes differ");
  return {kp, 2.0 * (kp.array() * inertia.array()).sqrt().matrix(), Vector::Constant(kp.size(), torque_limit)};
}

void PDGains::validate(int n) const {
  if (kp.size() != n || kd.size() != n || torque_limit.size() != n) {
    throw std::invalid_argument("PD gains do not match the joint count");
  }
  if ((kp.array() < 0.0).any() || (kd.array() < 0.0).any() || !(torque_limit.array() > 0.0).all()) {
    throw std::invalid_argument("PD gains need kp, kd >= 0 and torque_limit > 0");
  }
}

PlantState PlantState::at_rest(const Vector& q, const Vector& inertia) {
  if (q.size() != inertia.size()) throw std::invalid_argument("plant sizes differ");
  if (!(inertia.array() > 0.0).all()) throw std::invalid_argument("plant inertia must be positive");
  return {q, Vector::Zero(q.size()), inertia};
}

Vector pd_torque(const PDGains& gains, const ReferenceSample& sample, const Vector& q, const Vector& qdot) {
  const Vector raw = gains.kp.cwiseProduct(sample.q_des - q) + gains.kd.cwiseProduct(sample.qdot_des - qdot);
  return raw.cwiseMax(-gains.torque_limit).cwiseMin(gains.torque_limit);
}

PlantState plant_step(const PlantState& state, const Vector& torque, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("plant step needs dt > 0");
  PlantState next = state;
  next.qdot += torque.cwiseQuotient(state.inertia) * dt;
  next.q += next.qdot * dt;
  return next;
}

ClosedLoopTrace run_closed_loop(EngineState& engine, const GaitLibrary& lib, PlantState plant,
                                const PDGains& gains, double duration, const CommandScript& schedule,
                                const ClosedLoopConfig& config) {
  const int n = lib.n_outputs();
  gains.validate(n);
  if (plant.q.size() != n || plant.qdot.size() != n || plant.inertia.size() != n) {
    throw std::invalid_argument("plant state does not match the joint count");
  }
  const double period = engine.config.tick_period;
  const double ratio = config.inner_rate * period;
  const long steps = std::lround(ratio);
  if (steps < 1 || std::abs(ratio - static_cast<double>(steps)) > 1e-9 * ratio) {
    throw std::invalid_argument("inner loop rate must be an integer multiple of the engine rate");
  }
  const double dt = 1.0 / config.inner_rate;
  const long ticks = std::lround(duration / period);

  ClosedLoopTrace trace;
  trace.inner_steps_per_tick = static_cast<int>(steps);
  trace.samples.reserve(static_cast<std::size_t>(std::max(ticks, 0L)));
  trace.rows.reserve(static_cast<std::size_t>(std::max(ticks, 0L) * steps));
  for (long k = 0; k < ticks; ++k) {
    trace.samples.push_back(tick(engine, lib, schedule.at(engine.clock().t)));
    const ReferenceSample& sample = trace.samples.back();
    for (long i = 0; i < steps; ++i) {
      TrackingRow row;
      row.t = sample.t + static_cast<double>(i) * dt;
      row.sample_index = trace.samples.size() - 1;
      row.q = plant.q;
      row.qdot = plant.qdot;
      row.torque = pd_torque(gains, sample, plant.q, plant.qdot);
      plant = plant_step(plant, row.torque, dt);
      trace.rows.push_back(std::move(row));
    }
  }
  return trace;
}

void ClosedLoopTrace::write_csv(std::ostream& out) const {
  if (samples.empty()) return;
  const auto n = samples.front().q_des.size();
  out << "t";
  for (const char* name : {"q_des", "q", "qdot_des", "qdot", "torque"}) {
    for (Eigen::Index i = 0; i < n; ++i) out << ',' << name << i;
  }
  out << '\n';
  std::string line;
  for (const TrackingRow& row : rows) {
    const ReferenceSample& s = samples[row.sample_index];
    line.clear();
    append_number(line, row.t);
    for (const Vector* v : {&s.q_des, &row.q, &s.qdot_des, &row.qdot, &row.torque}) {
      for (Eigen::Index i = 0; i < n; ++i) {
        line += ',';
        append_number(line, (*v)(i));
      }
    }
    line += '\n';
    out << line;
  }
}

}  // namespace gaitlib
