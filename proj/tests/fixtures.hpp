#pragma once

#include "gaitlib/reference_engine.hpp"
#include "gaitlib/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace fixture {

using namespace gaitlib;

inline const GaitLibrary& default_library() {
  static const GaitLibrary lib = generate_synthetic(SyntheticSpec::defaults());
  return lib;
}

// Largest max-norm change of a gait's reference over one tick, by sweeping
// the step on a fine phase grid (independent of the curve's derivative code).
inline double max_tick_change(const Gait& gait, double tick_period, int grid = 2000) {
  const double dtau = tick_period / gait.step_duration;
  double worst = 0.0;
  for (int i = 0; i <= grid; ++i) {
    const double tau = (1.0 - dtau) * i / grid;
    worst = std::max(worst, (gait.curve.eval(tau + dtau) - gait.curve.eval(tau)).cwiseAbs().maxCoeff());
  }
  return worst;
}

// Bound for a command switch between velocities a and b: either gait may
// be tracked on either stance, so all four stance variants are swept.
inline double switch_bound(const GaitLibrary& lib, Velocity a, Velocity b, double tick_period) {
  double worst = 0.0;
  for (Velocity v : {a, b}) {
    for (Stance s : {Stance::Left, Stance::Right}) worst = std::max(worst, max_tick_change(stance_gait(lib, v, s), tick_period));
  }
  return worst;
}

struct StreamCheck {
  double max_jump = 0.0;       // max-norm q_nominal change between consecutive ticks
  bool phase_monotone = true;  // strictly increasing within a step
  bool steps_consistent = true;  // step_index moves exactly when phase resets
  double max_impact = 0.0;
  std::string first_problem;
};

inline StreamCheck check_stream(const std::vector<ReferenceSample>& samples) {
  StreamCheck out;
  for (std::size_t k = 1; k < samples.size(); ++k) {
    const ReferenceSample& prev = samples[k - 1];
    const ReferenceSample& cur = samples[k];
    out.max_jump = std::max(out.max_jump, (cur.q_nominal - prev.q_nominal).cwiseAbs().maxCoeff());
    out.max_impact = std::max(out.max_impact, cur.impact_mismatch);
    const bool reset = cur.phase < prev.phase;
    const bool advanced = cur.step_index == prev.step_index + 1;
    if (!reset && cur.step_index == prev.step_index && !(cur.phase > prev.phase)) {
      out.phase_monotone = false;
      if (out.first_problem.empty()) out.first_problem = "phase not increasing at tick " + std::to_string(k);
    }
    if (reset != advanced || (!advanced && cur.step_index != prev.step_index) || (reset && !(cur.phase < 0.05)) ||
        cur.step_event != advanced) {
      out.steps_consistent = false;
      if (out.first_problem.empty()) out.first_problem = "step bookkeeping mismatch at tick " + std::to_string(k);
    }
  }
  return out;
}

}  // namespace fixture
