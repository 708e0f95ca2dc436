#include "gaitlib/transition.hpp"

#include <cmath>
#include <sstream>

namespace gaitlib {

void PhaseClock::validate() const {
  if (!(std::isfinite(T) && T > 0.0)) throw std::invalid_argument("phase clock needs a positive step duration");
  if (!(std::isfinite(t0) && std::isfinite(t1) && t0 <= t1 && t1 < step_end())) {
    std::ostringstream msg;
    msg << "phase clock needs t0 <= t1 < t0 + T (t0=" << t0 << ", t1=" << t1 << ", T=" << T << ")";
    throw std::invalid_argument(msg.str());
  }
}

TransitionCurve TransitionCurve::steady(const Gait& gait, double t0) {
  TransitionCurve out;
  out.blended = gait.curve;
  out.source_tail = gait.curve;
  out.target_tail = gait.curve;
  out.clock = {t0, t0, gait.step_duration, t0};
  out.target_velocity = gait.velocity;
  return out;
}

BezierCurve splice_tail(const BezierCurve& curve, double tau1) {
  if (!(tau1 >= 0.0 && tau1 < 1.0)) {
    std::ostringstream msg;
    msg << "splice phase " << tau1 << " outside [0, 1)";
    throw std::domain_error(msg.str());
  }
  if (tau1 == 0.0) return curve;
  return curve.split(tau1).second;
}

BezierCurve blend(const BezierCurve& alpha1, const BezierCurve& alpha2) {
  const int b = alpha1.degree();
  if (alpha2.degree() != b || alpha1.rows() != alpha2.rows()) {
    throw std::invalid_argument("blend needs curves of identical shape");
  }
  if (b < 7) throw std::invalid_argument("blend needs degree >= 7");

  Matrix out = alpha1.coeffs();
  for (int j = 3; j <= b - 3; ++j) out.col(j) = (alpha1.coeffs().col(j) + alpha2.coeffs().col(j)) / 2.0;
  out.rightCols(3) = alpha2.coeffs().rightCols(3);
  return BezierCurve(std::move(out));
}

TransitionCurve make_transition(const BezierCurve& current, const Gait& target_gait, const PhaseClock& clock) {
  clock.validate();
  const double tau1 = clock.tau(clock.t1);
  TransitionCurve out;
  out.source_tail = splice_tail(current, tau1);
  out.target_tail = splice_tail(target_gait.curve, tau1);
  out.blended = blend(out.source_tail, out.target_tail);
  out.clock = clock;
  out.target_velocity = target_gait.velocity;
  return out;
}

TransitionCurve retarget(const TransitionCurve& active, const Gait& target_gait, double t1) {
  PhaseClock clock = active.clock;
  clock.t1 = t1;
  clock.t = t1;
  clock.validate();
  if (t1 < active.clock.t1) throw std::invalid_argument("retarget time precedes the active splice");

  TransitionCurve out;
  out.source_tail = splice_tail(active.blended, active.clock.tau_hat(t1));
  out.target_tail = splice_tail(target_gait.curve, clock.tau(t1));
  out.blended = blend(out.source_tail, out.target_tail);
  out.clock = clock;
  out.target_velocity = target_gait.velocity;
  return out;
}

}  // namespace gaitlib
