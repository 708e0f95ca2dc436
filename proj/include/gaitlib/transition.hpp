#pragma once

#include "gaitlib/bezier.hpp"
#include "gaitlib/gait_model.hpp"

namespace gaitlib {

/// Timing of one step: stride start t0, transition start t1, step
/// duration T and the current time t, all in seconds.
///
/// Step phase tau(t) = (t - t0) / T covers the whole step; the rescaled
/// phase tau_hat(t) maps [t1, t0 + T] onto [0, 1] and drives the curve that
/// was spliced in at t1.
struct PhaseClock {
  double t0 = 0.0;
  double t1 = 0.0;
  double T = 1.0;
  double t = 0.0;

  double step_end() const { return t0 + T; }
  /// Time left in the step after the splice, step_end() - t1.
  double remaining() const { return step_end() - t1; }

  double tau(double time) const { return (time - t0) / T; }
  // Written against step_end() so that tau_hat(step_end()) is exactly 1.
  double tau_hat(double time) const { return (time - t1) / (step_end() - t1); }

  double tau() const { return tau(t); }
  double tau_hat() const { return tau_hat(t); }

  /// Throws std::invalid_argument unless T > 0 and t0 <= t1 < t0 + T.
  void validate() const;
};

/// The curve being tracked over the rest of a step and the two tails it
/// was blended from.
struct TransitionCurve {
  BezierCurve blended;
  BezierCurve source_tail;
  BezierCurve target_tail;
  PhaseClock clock;
  Velocity target_velocity;

  /// Tracks `gait` from its beginning, starting a step at t0.
  static TransitionCurve steady(const Gait& gait, double t0);
};

/// Segment of `curve` after tau1, reparameterised onto [0, 1].
/// Returns the curve unchanged for tau1 == 0; throws std::domain_error
/// unless 0 <= tau1 < 1.
BezierCurve splice_tail(const BezierCurve& curve, double tau1);

/// Keeps the first three control points of alpha1, the last three of
/// alpha2 and averages the ones in between. Requires equal shapes and
/// degree >= 7 (std::invalid_argument otherwise).
BezierCurve blend(const BezierCurve& alpha1, const BezierCurve& alpha2);

/// Splices `current` (a full-step curve in tau) and the target gait at
/// tau(clock.t1) and blends the two tails over the remaining step time.
TransitionCurve make_transition(const BezierCurve& current, const Gait& target_gait, const PhaseClock& clock);

/// Re-blends from an active transition at time t1: the active curve is cut
/// at its own rescaled phase, the target at the step phase. The step end
/// time is unchanged.
TransitionCurve retarget(const TransitionCurve& active, const Gait& target_gait, double t1);

}  // namespace gaitlib
