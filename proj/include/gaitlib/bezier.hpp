#pragma once

#include <Eigen/Dense>

#include <span>
#include <stdexcept>
#include <string>
#include <utility>

namespace gaitlib {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Highest polynomial degree with a cached Bernstein binomial row.
inline constexpr int kMaxDegree = 15;

/// Thrown when a curve is fitted from samples that do not determine it.
class FitError : public std::runtime_error {
 public:
  FitError(const std::string& what, double condition)
      : std::runtime_error(what), condition_(condition) {}

  /// Estimated 2-norm condition number of the Bernstein design matrix.
  double condition() const { return condition_; }

 private:
  double condition_;
};

/// A bundle of same-degree Bezier polynomials sharing one phase variable.
///
/// Column j of `coeffs()` is the j-th control point; row i is output i.
/// The curve is immutable once constructed.
class BezierCurve {
 public:
  BezierCurve() = default;

  /// Degree is coeffs.cols() - 1. Throws std::invalid_argument on an empty
  /// matrix, a degree outside [1, kMaxDegree] or a non-finite entry.
  explicit BezierCurve(Matrix coeffs);

  /// Curve whose control points are all equal to `point`.
  static BezierCurve constant(const Vector& point, int degree);

  int degree() const { return static_cast<int>(coeffs_.cols()) - 1; }
  int rows() const { return static_cast<int>(coeffs_.rows()); }
  const Matrix& coeffs() const { return coeffs_; }

  /// Value at tau in [0, 1]; throws std::domain_error outside that range.
  Vector eval(double tau) const;
  void eval_into(double tau, Eigen::Ref<Vector> out) const;

  /// order-th derivative with respect to tau. Zero once order exceeds the
  /// degree; throws std::domain_error for order < 1 or tau outside [0, 1].
  Vector eval_derivative(double tau, int order = 1) const;
  void eval_derivative_into(double tau, int order, Eigen::Ref<Vector> out) const;

  /// Evaluates at many phases in one product: column k is eval(taus[k]).
  Matrix eval_many(std::span<const double> taus) const;

  /// Restrictions to [0, s] and [s, 1], each reparameterised onto [0, 1].
  std::pair<BezierCurve, BezierCurve> split(double s) const;

  friend bool operator==(const BezierCurve& a, const BezierCurve& b) {
    return a.coeffs_.rows() == b.coeffs_.rows() && a.coeffs_.cols() == b.coeffs_.cols() &&
           a.coeffs_ == b.coeffs_;
  }

 private:
  Matrix coeffs_;
};

/// Binomial coefficient C(n, k) from the cached table (n <= kMaxDegree).
double binomial(int n, int k);

/// Writes the degree+1 Bernstein basis values at tau into `basis`.
void bernstein_basis(int degree, double tau, std::span<double> basis);

/// (degree+1) x N matrix whose column k is the basis at taus[k].
Matrix bernstein_matrix(int degree, std::span<const double> taus);

/// Subdivision operators for a split at s: left = P * L^T, right = P * R^T.
struct SubdivisionMatrices {
  Matrix left;
  Matrix right;
};
SubdivisionMatrices subdivision_matrices(int degree, double s);

struct FitSample {
  double tau;
  Vector value;
};

/// Least-squares Bezier fit of the given degree through (tau, value) samples.
/// Throws std::invalid_argument on malformed input and FitError when the
/// design matrix is rank deficient.
BezierCurve fit_least_squares(std::span<const FitSample> samples, int degree);

}  // namespace gaitlib
