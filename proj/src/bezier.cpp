#include "gaitlib/bezier.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

namespace gaitlib {

namespace {

using BinomialTable = std::array<std::array<double, kMaxDegree + 1>, kMaxDegree + 1>;

constexpr BinomialTable make_binomials() {
  BinomialTable table{};
  for (int n = 0; n <= kMaxDegree; ++n) {
    table[n][0] = 1.0;
    for (int k = 1; k <= n; ++k) {
      table[n][k] = table[n - 1][k - 1] + (k <= n - 1 ? table[n - 1][k] : 0.0);
    }
  }
  return table;
}

constexpr BinomialTable kBinomials = make_binomials();

void require_unit_phase(double tau) {
  if (!(tau >= 0.0 && tau <= 1.0)) {
    std::ostringstream msg;
    msg << "phase " << tau << " outside [0, 1]";
    throw std::domain_error(msg.str());
  }
}

// powers[k] = x^k for k = 0..n, by repeated multiplication so that 0^0 = 1.
void fill_powers(double x, int n, std::span<double> powers) {
  powers[0] = 1.0;
  for (int k = 1; k <= n; ++k) powers[k] = powers[k - 1] * x;
}

// coeffs * op^T, accumulated column by column in the same order as
// eval_into so the first right-hand control point equals eval(s) bit for bit.
Matrix apply_subdivision(const Matrix& coeffs, const Matrix& op) {
  Matrix out = Matrix::Zero(coeffs.rows(), op.rows());
  for (Eigen::Index i = 0; i < op.rows(); ++i) {
    for (Eigen::Index j = 0; j < op.cols(); ++j) out.col(i).noalias() += op(i, j) * coeffs.col(j);
  }
  return out;
}

}  // namespace

double binomial(int n, int k) {
  if (n < 0 || n > kMaxDegree || k < 0 || k > n) return 0.0;
  return kBinomials[n][k];
}

void bernstein_basis(int degree, double tau, std::span<double> basis) {
  std::array<double, kMaxDegree + 1> up{};
  std::array<double, kMaxDegree + 1> down{};
  fill_powers(tau, degree, up);
  fill_powers(1.0 - tau, degree, down);
  for (int j = 0; j <= degree; ++j) {
    basis[j] = kBinomials[degree][j] * up[j] * down[degree - j];
  }
}

Matrix bernstein_matrix(int degree, std::span<const double> taus) {
  Matrix basis(degree + 1, static_cast<Eigen::Index>(taus.size()));
  std::array<double, kMaxDegree + 1> column{};
  for (std::size_t k = 0; k < taus.size(); ++k) {
    require_unit_phase(taus[k]);
    bernstein_basis(degree, taus[k], column);
    for (int j = 0; j <= degree; ++j) basis(j, static_cast<Eigen::Index>(k)) = column[j];
  }
  return basis;
}

BezierCurve::BezierCurve(Matrix coeffs) : coeffs_(std::move(coeffs)) {
  if (coeffs_.rows() < 1 || coeffs_.cols() < 2) {
    throw std::invalid_argument("Bezier curve needs at least one row and two control points");
  }
  if (coeffs_.cols() - 1 > kMaxDegree) {
    std::ostringstream msg;
    msg << "Bezier degree " << coeffs_.cols() - 1 << " exceeds maximum " << kMaxDegree;
    throw std::invalid_argument(msg.str());
  }
  if (!coeffs_.allFinite()) {
    throw std::invalid_argument("Bezier coefficients must be finite");
  }
}

BezierCurve BezierCurve::constant(const Vector& point, int degree) {
  Matrix coeffs(point.size(), degree + 1);
  coeffs.colwise() = point;
  return BezierCurve(std::move(coeffs));
}

Vector BezierCurve::eval(double tau) const {
  Vector out(coeffs_.rows());
  eval_into(tau, out);
  return out;
}

void BezierCurve::eval_into(double tau, Eigen::Ref<Vector> out) const {
  require_unit_phase(tau);
  const int b = degree();
  std::array<double, kMaxDegree + 1> basis{};
  bernstein_basis(b, tau, basis);
  out.setZero();
  for (int j = 0; j <= b; ++j) out.noalias() += basis[j] * coeffs_.col(j);
}

Vector BezierCurve::eval_derivative(double tau, int order) const {
  Vector out(coeffs_.rows());
  eval_derivative_into(tau, order, out);
  return out;
}

void BezierCurve::eval_derivative_into(double tau, int order, Eigen::Ref<Vector> out) const {
  if (order < 1) throw std::domain_error("derivative order must be >= 1");
  require_unit_phase(tau);
  const int b = degree();
  if (order > b) {
    out.setZero();
    return;
  }

  // Hodograph: order-th forward differences of the control points.
  Matrix diff = coeffs_;
  for (int r = 1; r <= order; ++r) {
    for (int j = 0; j <= b - r; ++j) diff.col(j) = diff.col(j + 1) - diff.col(j);
  }
  double scale = 1.0;
  for (int k = 0; k < order; ++k) scale *= static_cast<double>(b - k);

  const int reduced = b - order;
  std::array<double, kMaxDegree + 1> basis{};
  bernstein_basis(reduced, tau, basis);
  out.setZero();
  for (int j = 0; j <= reduced; ++j) out.noalias() += basis[j] * diff.col(j);
  out *= scale;
}

Matrix BezierCurve::eval_many(std::span<const double> taus) const {
  return coeffs_ * bernstein_matrix(degree(), taus);
}

SubdivisionMatrices subdivision_matrices(int degree, double s) {
  std::array<double, kMaxDegree + 1> up{};
  std::array<double, kMaxDegree + 1> down{};
  fill_powers(s, degree, up);
  fill_powers(1.0 - s, degree, down);

  SubdivisionMatrices m{Matrix::Zero(degree + 1, degree + 1), Matrix::Zero(degree + 1, degree + 1)};
  for (int i = 0; i <= degree; ++i) {
    for (int j = 0; j <= i; ++j) m.left(i, j) = kBinomials[i][j] * up[j] * down[i - j];
    for (int j = i; j <= degree; ++j) {
      m.right(i, j) = kBinomials[degree - i][j - i] * up[j - i] * down[degree - j];
    }
  }
  return m;
}

std::pair<BezierCurve, BezierCurve> BezierCurve::split(double s) const {
  if (!(s > 0.0 && s <= 1.0)) {
    std::ostringstream msg;
    msg << "split point " << s << " outside (0, 1]";
    throw std::domain_error(msg.str());
  }
  const SubdivisionMatrices m = subdivision_matrices(degree(), s);
  return {BezierCurve(apply_subdivision(coeffs_, m.left)), BezierCurve(apply_subdivision(coeffs_, m.right))};
}

BezierCurve fit_least_squares(std::span<const FitSample> samples, int degree) {
  if (degree < 1 || degree > kMaxDegree) throw std::invalid_argument("fit degree out of range");
  if (samples.size() < static_cast<std::size_t>(degree) + 1) {
    throw std::invalid_argument("fit needs at least degree + 1 samples");
  }
  const Eigen::Index n_rows = samples.front().value.size();
  if (n_rows < 1) throw std::invalid_argument("fit samples must be non-empty vectors");

  std::vector<double> taus;
  taus.reserve(samples.size());
  for (const FitSample& sample : samples) {
    if (sample.value.size() != n_rows) throw std::invalid_argument("fit samples differ in size");
    if (!sample.value.allFinite()) throw std::invalid_argument("fit sample is not finite");
    taus.push_back(sample.tau);
  }
  const Matrix design = bernstein_matrix(degree, taus).transpose();
  Matrix targets(static_cast<Eigen::Index>(samples.size()), n_rows);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    targets.row(static_cast<Eigen::Index>(i)) = samples[i].value.transpose();
  }

  const Eigen::JacobiSVD<Matrix> svd(design);
  const auto& sv = svd.singularValues();
  const double smallest = sv(sv.size() - 1);
  const double condition = smallest > 0.0 ? sv(0) / smallest : std::numeric_limits<double>::infinity();
  if (!(condition < 1e12)) {
    std::ostringstream msg;
    msg << "Bernstein design matrix is rank deficient (condition " << condition << ")";
    throw FitError(msg.str(), condition);
  }

  const Matrix solution = design.colPivHouseholderQr().solve(targets);
  return BezierCurve(solution.transpose());
}

}  // namespace gaitlib
