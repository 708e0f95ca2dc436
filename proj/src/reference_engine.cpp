#include "gaitlib/reference_engine.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace gaitlib {

namespace {

// Tick times are integer multiples of the period, so a step that ends on
// the grid can land a few ulps short of tau_hat == 1.
constexpr double kEventSlack = 1e-9;

struct StanceQuery {
  Blend blend;
  Velocity target;  // blend.point expressed in the robot frame
};

StanceQuery locate_for_stance(const GaitLibrary& lib, Velocity v, Stance stance, InterpolationMode mode) {
  const Velocity query = stance == Stance::Left ? v : reflect_lateral(v);
  StanceQuery out{lib.locate(query, mode), {}};
  out.target = stance == Stance::Left ? out.blend.point : reflect_lateral(out.blend.point);
  return out;
}

Gait gait_for_stance(const GaitLibrary& lib, const Blend& blend, Stance stance) {
  Gait gait = lib.combine(blend);
  return stance == Stance::Left ? gait : mirror(gait, lib.mirror_map());
}

bool finite(Velocity v) { return std::isfinite(v.x) && std::isfinite(v.y); }

}  // namespace

void EngineConfig::validate() const {
  if (!(tick_period > 0.0 && std::isfinite(tick_period))) throw std::invalid_argument("tick_period must be > 0");
  if (!(deadband >= 0.0)) throw std::invalid_argument("deadband must be >= 0");
  if (!(splice_margin >= 0.0 && splice_margin < 1.0)) throw std::invalid_argument("splice_margin must be in [0, 1)");
  if (!(residual_bound > 0.0)) throw std::invalid_argument("residual_bound must be > 0");
  if (!(impact_tolerance >= 0.0)) throw std::invalid_argument("impact_tolerance must be >= 0");
}

Velocity rotate_command(Velocity v_user, double heading) {
  const double c = std::cos(heading);
  const double s = std::sin(heading);
  return {c * v_user.x - s * v_user.y, s * v_user.x + c * v_user.y};
}

Gait stance_gait(const GaitLibrary& lib, Velocity v, Stance stance, InterpolationMode mode) {
  return gait_for_stance(lib, locate_for_stance(lib, v, stance, mode).blend, stance);
}

EngineState init_engine(const GaitLibrary& lib, Velocity v0, const EngineConfig& config) {
  config.validate();
  if (!finite(v0)) throw std::invalid_argument("initial velocity is not finite");
  const StanceQuery q = locate_for_stance(lib, v0, config.initial_stance, config.interpolation);

  EngineState state;
  state.active = TransitionCurve::steady(gait_for_stance(lib, q.blend, config.initial_stance), 0.0);
  state.stance = config.initial_stance;
  state.last_target_velocity = q.target;
  state.config = config;
  return state;
}

ReferenceSample tick(EngineState& state, const GaitLibrary& lib, const CommandInput& cmd) {
  const EngineConfig& cfg = state.config;
  const int n = lib.n_outputs();
  if (!finite(cmd.v_user) || !std::isfinite(cmd.heading) || !finite(cmd.delta_v)) {
    throw std::invalid_argument("command is not finite");
  }

  ReferenceSample sample;
  sample.delta_q = Vector::Zero(n);
  if (cmd.delta_q.size() != 0) {
    if (cmd.delta_q.size() != n) throw std::invalid_argument("delta_q size does not match the library outputs");
    if (!cmd.delta_q.allFinite()) throw std::invalid_argument("delta_q is not finite");
    sample.delta_q = cmd.delta_q.cwiseMax(-cfg.residual_bound).cwiseMin(cfg.residual_bound);
    sample.residual_saturated = (sample.delta_q.array() != cmd.delta_q.array()).any();
  }

  const Velocity v_cmd = rotate_command(cmd.v_user, cmd.heading) + cmd.delta_v;
  StanceQuery query = locate_for_stance(lib, v_cmd, state.stance, cfg.interpolation);

  // Re-blend toward the new target while enough of the step remains;
  // otherwise the latest command is picked up at the step boundary.
  const double now = state.active.clock.t;
  const bool changed = cfg.reblend_every_tick || norm(query.target - state.last_target_velocity) > cfg.deadband;
  if (changed && state.active.clock.tau(now) < 1.0 - cfg.splice_margin) {
    state.active = retarget(state.active, gait_for_stance(lib, query.blend, state.stance), now);
    state.last_target_velocity = query.target;
  }

  ++state.tick_count;
  const double t = static_cast<double>(state.tick_count) * cfg.tick_period;
  state.active.clock.t = t;

  if (state.active.clock.tau_hat(t) >= 1.0 - kEventSlack) {
    const Vector previous_end = state.active.blended.coeffs().rightCols(1);
    state.stance = opposite(state.stance);
    ++state.step_index;
    // The new step continues the gait the old one blended into; a command
    // latched during the splice margin re-blends on the next tick.
    query = locate_for_stance(lib, state.last_target_velocity, state.stance, cfg.interpolation);
    state.active = TransitionCurve::steady(gait_for_stance(lib, query.blend, state.stance), t);
    state.last_target_velocity = query.target;
    sample.step_event = true;
    sample.impact_mismatch = (state.active.blended.coeffs().col(0) - previous_end).cwiseAbs().maxCoeff();
  }

  const PhaseClock& clock = state.active.clock;
  const double blend_phase = std::clamp(clock.tau_hat(t), 0.0, 1.0);
  sample.t = t;
  sample.q_nominal = state.active.blended.eval(blend_phase);
  sample.qdot_des = state.active.blended.eval_derivative(blend_phase, 1) / clock.remaining();
  sample.q_des = sample.q_nominal + sample.delta_q;
  sample.phase = std::clamp(clock.tau(t), 0.0, 1.0);
  sample.blend_phase = blend_phase;
  sample.stance = state.stance;
  sample.step_index = state.step_index;
  sample.v_target = query.target;
  return sample;
}

std::vector<ReferenceSample> tick_batch(std::span<EngineState> states, const GaitLibrary& lib,
                                        std::span<const CommandInput> cmds, unsigned workers) {
  if (states.size() != cmds.size()) throw std::invalid_argument("tick_batch needs one command per state");
  std::vector<ReferenceSample> samples(states.size());
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(states.size(), 1)));

  const auto run = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) samples[i] = tick(states[i], lib, cmds[i]);
  };
  if (workers <= 1) {
    run(0, states.size());
    return samples;
  }

  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (states.size() + workers - 1) / workers;
    for (std::size_t begin = 0; begin < states.size(); begin += chunk) {
      const std::size_t end = std::min(states.size(), begin + chunk);
      pool.emplace_back([&, begin, end] {
        try {
          run(begin, end);
        } catch (...) {
          const std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
  return samples;
}

}  // namespace gaitlib
