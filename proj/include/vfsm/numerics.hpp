#ifndef VFSM_NUMERICS_HPP
#define VFSM_NUMERICS_HPP

#include <optional>

#include <Eigen/Core>

#include "vfsm/errors.hpp"

namespace vfsm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Point = Eigen::RowVectorXd;
using Index = Eigen::Index;

/// Square symmetric matrix with a strictly positive diagonal.
///
/// Symmetry is checked to 1e-12 relative to the largest absolute entry. The
/// type does not certify positive definiteness; cholesky() does that.
class SpdMatrix {
 public:
  explicit SpdMatrix(Matrix m);

  Index dim() const { return m_.rows(); }
  const Matrix& matrix() const { return m_; }

 private:
  Matrix m_;
};

/// Lower-triangular factor L with K = L L^T, optionally carrying L^{-1}.
///
/// jitter() is the absolute amount that was added to the diagonal of K to make
/// the factorization succeed (zero when none was needed).
class CholeskyFactor {
 public:
  CholeskyFactor() = default;
  explicit CholeskyFactor(Matrix lower, double jitter = 0.0);

  Index dim() const { return lower_.rows(); }
  const Matrix& lower() const { return lower_; }
  double jitter() const { return jitter_; }

  bool has_inverse() const { return inverse_.has_value(); }
  /// Throws InvalidArgument when no inverse factor is attached.
  const Matrix& inverse() const;
  /// Returns a copy with L^{-1} computed and attached (O(n^3)).
  CholeskyFactor with_inverse() const;
  /// Attaches a caller-computed inverse; dimensions must agree.
  void set_inverse(Matrix inverse);

  /// log|K| = 2 * sum(log diag L).
  double log_determinant() const;
  /// Solves K x = b through two triangular solves.
  Vector solve(const Vector& b) const;
  Matrix solve(const Matrix& b) const;
  /// L L^T.
  Matrix reconstruct() const;

 private:
  Matrix lower_;
  std::optional<Matrix> inverse_;
  double jitter_ = 0.0;
};

/// Cholesky factorization with the escalating jitter policy: on failure the
/// diagonal is shifted by delta * mean(diag) for delta in {1e-10, 1e-8, 1e-6}.
/// Throws NotPositiveDefinite once the escalation is exhausted.
CholeskyFactor cholesky(const SpdMatrix& m);

/// Forward substitution L x = b.
Vector solve_lower(const CholeskyFactor& f, const Vector& b);
Matrix solve_lower(const CholeskyFactor& f, const Matrix& b);

/// New last row of a factor grown by one row/column.
///
/// For K' = [[K, c], [c^T, k]] the top-left block of L' is L, the new row is
/// L^{-1} c, and the corner is sqrt(k - |L^{-1} c|^2). A non-positive argument
/// under the root is replaced by the clamp 1e-6 * sqrt(k) and flagged.
struct CholeskyBorder {
  Vector row;
  double diagonal = 0.0;
  bool clamped = false;
};

/// O(n^2) computation of the border for a new column and diagonal entry.
CholeskyBorder cholesky_border(const CholeskyFactor& f, const Vector& new_column,
                               double new_diagonal);

/// Last row of (L')^{-1}: [-(row^T L^{-1}) / diagonal, 1 / diagonal].
/// Requires f.has_inverse(). Throws DegenerateDiagonal if the corner is zero,
/// subnormal, or non-finite.
Vector inverse_border(const CholeskyFactor& f, const CholeskyBorder& border);

struct ExtendedCholesky {
  CholeskyFactor factor;
  bool clamped = false;
};

/// Materialized (n+1)-dimensional factor. The leading n x n block is a copy of
/// f.lower(), so it is bit-identical to the input.
ExtendedCholesky extend_cholesky(const CholeskyFactor& f, const Vector& new_column,
                                 double new_diagonal);

/// Inverse of the extended factor, assembled from f.inverse() and the last row
/// of `extended` in O(n^2).
Matrix extend_inverse_cholesky(const CholeskyFactor& f, const CholeskyFactor& extended);

}  // namespace vfsm

#endif  // VFSM_NUMERICS_HPP
