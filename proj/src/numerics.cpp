#include "vfsm/numerics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include <Eigen/Cholesky>

namespace vfsm {

namespace {

constexpr std::array<double, 3> kJitterSteps{1e-10, 1e-8, 1e-6};
constexpr double kSymmetryTolerance = 1e-12;
constexpr double kClampScale = 1e-6;

bool factor_ok(const Eigen::LLT<Matrix>& llt) {
  if (llt.info() != Eigen::Success) return false;
  const Matrix& l = llt.matrixLLT();
  for (Index i = 0; i < l.rows(); ++i) {
    const double d = l(i, i);
    if (!std::isfinite(d) || d <= 0.0) return false;
  }
  return true;
}

Matrix lower_of(const Eigen::LLT<Matrix>& llt) {
  return llt.matrixL();
}

}  // namespace

SpdMatrix::SpdMatrix(Matrix m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols()) {
    throw DimensionMismatch("SpdMatrix: matrix is " + std::to_string(m_.rows()) + "x" +
                            std::to_string(m_.cols()) + ", expected square");
  }
  const double scale = m_.cwiseAbs().maxCoeff();
  for (Index j = 0; j < m_.cols(); ++j) {
    if (!(m_(j, j) > 0.0) || !std::isfinite(m_(j, j))) {
      throw InvalidArgument("SpdMatrix: diagonal entry " + std::to_string(j) +
                            " is not strictly positive");
    }
    for (Index i = j + 1; i < m_.rows(); ++i) {
      if (std::abs(m_(i, j) - m_(j, i)) > kSymmetryTolerance * scale) {
        throw InvalidArgument("SpdMatrix: matrix is not symmetric at (" + std::to_string(i) +
                              ", " + std::to_string(j) + ")");
      }
    }
  }
}

CholeskyFactor::CholeskyFactor(Matrix lower, double jitter)
    : lower_(std::move(lower)), jitter_(jitter) {
  if (lower_.rows() != lower_.cols()) {
    throw DimensionMismatch("CholeskyFactor: factor must be square");
  }
}

const Matrix& CholeskyFactor::inverse() const {
  if (!inverse_) throw InvalidArgument("CholeskyFactor: no inverse factor attached");
  return *inverse_;
}

CholeskyFactor CholeskyFactor::with_inverse() const {
  CholeskyFactor out = *this;
  if (!out.inverse_) {
    Matrix inv = Matrix::Identity(dim(), dim());
    lower_.triangularView<Eigen::Lower>().solveInPlace(inv);
    inv.triangularView<Eigen::StrictlyUpper>().setZero();
    out.inverse_ = std::move(inv);
  }
  return out;
}

void CholeskyFactor::set_inverse(Matrix inverse) {
  if (inverse.rows() != dim() || inverse.cols() != dim()) {
    throw DimensionMismatch("CholeskyFactor: inverse dimension does not match factor");
  }
  inverse_ = std::move(inverse);
}

double CholeskyFactor::log_determinant() const {
  return 2.0 * lower_.diagonal().array().log().sum();
}

Vector CholeskyFactor::solve(const Vector& b) const {
  if (b.size() != dim()) throw DimensionMismatch("CholeskyFactor::solve: length mismatch");
  Vector x = lower_.triangularView<Eigen::Lower>().solve(b);
  lower_.transpose().triangularView<Eigen::Upper>().solveInPlace(x);
  return x;
}

Matrix CholeskyFactor::solve(const Matrix& b) const {
  if (b.rows() != dim()) throw DimensionMismatch("CholeskyFactor::solve: row mismatch");
  Matrix x = lower_.triangularView<Eigen::Lower>().solve(b);
  lower_.transpose().triangularView<Eigen::Upper>().solveInPlace(x);
  return x;
}

Matrix CholeskyFactor::reconstruct() const {
  return lower_ * lower_.transpose();
}

CholeskyFactor cholesky(const SpdMatrix& m) {
  const Matrix& k = m.matrix();
  Eigen::LLT<Matrix> llt(k);
  if (factor_ok(llt)) return CholeskyFactor(lower_of(llt), 0.0);

  const double mean_diag = k.diagonal().mean();
  for (double delta : kJitterSteps) {
    const double jitter = delta * mean_diag;
    Matrix shifted = k;
    shifted.diagonal().array() += jitter;
    llt.compute(shifted);
    if (factor_ok(llt)) return CholeskyFactor(lower_of(llt), jitter);
  }
  throw NotPositiveDefinite("cholesky: factorization failed after jitter escalation (n = " +
                            std::to_string(k.rows()) + ")");
}

Vector solve_lower(const CholeskyFactor& f, const Vector& b) {
  if (b.size() != f.dim()) {
    throw DimensionMismatch("solve_lower: right-hand side has length " +
                            std::to_string(b.size()) + ", factor has dimension " +
                            std::to_string(f.dim()));
  }
  return f.lower().triangularView<Eigen::Lower>().solve(b);
}

Matrix solve_lower(const CholeskyFactor& f, const Matrix& b) {
  if (b.rows() != f.dim()) {
    throw DimensionMismatch("solve_lower: right-hand side has " + std::to_string(b.rows()) +
                            " rows, factor has dimension " + std::to_string(f.dim()));
  }
  return f.lower().triangularView<Eigen::Lower>().solve(b);
}

CholeskyBorder cholesky_border(const CholeskyFactor& f, const Vector& new_column,
                               double new_diagonal) {
  if (new_column.size() != f.dim()) {
    throw DimensionMismatch("cholesky_border: new column has length " +
                            std::to_string(new_column.size()) + ", factor has dimension " +
                            std::to_string(f.dim()));
  }
  const Matrix& l = f.lower();
  const Index n = f.dim();
  CholeskyBorder border;
  border.row.resize(n);
  // Column-oriented forward substitution: keeps the inner loop on contiguous
  // storage of the column-major factor.
  Vector rhs = new_column;
  for (Index j = 0; j < n; ++j) {
    const double value = rhs(j) / l(j, j);
    border.row(j) = value;
    const Index rest = n - j - 1;
    if (rest > 0) rhs.tail(rest).noalias() -= value * l.col(j).tail(rest);
  }
  const double argument = new_diagonal - border.row.squaredNorm();
  if (argument > 0.0) {
    border.diagonal = std::sqrt(argument);
  } else {
    border.diagonal = kClampScale * std::sqrt(std::max(new_diagonal, 0.0));
    border.clamped = true;
  }
  return border;
}

Vector inverse_border(const CholeskyFactor& f, const CholeskyBorder& border) {
  const double d = border.diagonal;
  if (!std::isfinite(d) || d < std::numeric_limits<double>::min()) {
    throw DegenerateDiagonal("inverse_border: corner element " + std::to_string(d) +
                             " cannot be inverted");
  }
  const Matrix& inv = f.inverse();
  const Index n = f.dim();
  if (border.row.size() != n) throw DimensionMismatch("inverse_border: border length mismatch");
  Vector out(n + 1);
  // row^T L^{-1} with L^{-1} lower triangular: entry j only sees rows i >= j.
  for (Index j = 0; j < n; ++j) {
    out(j) = -inv.col(j).tail(n - j).dot(border.row.tail(n - j)) / d;
  }
  out(n) = 1.0 / d;
  return out;
}

ExtendedCholesky extend_cholesky(const CholeskyFactor& f, const Vector& new_column,
                                 double new_diagonal) {
  const CholeskyBorder border = cholesky_border(f, new_column, new_diagonal);
  const Index n = f.dim();
  Matrix lower = Matrix::Zero(n + 1, n + 1);
  lower.topLeftCorner(n, n) = f.lower();
  lower.row(n).head(n) = border.row.transpose();
  lower(n, n) = border.diagonal;
  return ExtendedCholesky{CholeskyFactor(std::move(lower), f.jitter()), border.clamped};
}

Matrix extend_inverse_cholesky(const CholeskyFactor& f, const CholeskyFactor& extended) {
  const Index n = f.dim();
  if (extended.dim() != n + 1) {
    throw DimensionMismatch("extend_inverse_cholesky: extended factor must have dimension " +
                            std::to_string(n + 1));
  }
  CholeskyBorder border;
  border.row = extended.lower().row(n).head(n).transpose();
  border.diagonal = extended.lower()(n, n);
  const Vector last = inverse_border(f, border);
  Matrix out = Matrix::Zero(n + 1, n + 1);
  out.topLeftCorner(n, n) = f.inverse();
  out.row(n) = last.transpose();
  return out;
}

}  // namespace vfsm
