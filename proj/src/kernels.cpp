#include "vfsm/kernels.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace vfsm {

namespace {

void check_dimension(Index expected, Index got, const char* where) {
  if (expected != got) {
    throw DimensionMismatch(std::string(where) + ": point dimension " + std::to_string(got) +
                            ", kernel dimension " + std::to_string(expected));
  }
}

}  // namespace

Matrix Kernel::cov(const Matrix& a, const Matrix& b) const {
  check_dimension(dimension(), a.cols(), "Kernel::cov");
  check_dimension(dimension(), b.cols(), "Kernel::cov");
  Matrix out(a.rows(), b.rows());
  for (Index j = 0; j < b.rows(); ++j) {
    const Point bj = b.row(j);
    for (Index i = 0; i < a.rows(); ++i) out(i, j) = eval(a.row(i), bj);
  }
  return out;
}

Vector Kernel::self_cov(const Matrix& a) const {
  Vector out(a.rows());
  for (Index i = 0; i < a.rows(); ++i) {
    const Point ai = a.row(i);
    out(i) = eval(ai, ai);
  }
  return out;
}

SeKernel::SeKernel(double output_scale, Vector length_weights)
    : output_scale_(output_scale), length_weights_(std::move(length_weights)) {
  if (!(output_scale_ > 0.0) || !std::isfinite(output_scale_)) {
    throw InvalidArgument("SeKernel: output scale must be positive and finite");
  }
  if (length_weights_.size() < 1) throw InvalidArgument("SeKernel: dimension must be >= 1");
  for (Index k = 0; k < length_weights_.size(); ++k) {
    if (!(length_weights_(k) >= 0.0) || !std::isfinite(length_weights_(k))) {
      throw InvalidArgument("SeKernel: length weight " + std::to_string(k) +
                            " must be non-negative and finite");
    }
  }
}

SeKernel SeKernel::from_log_params(std::span<const double> log_params) {
  if (log_params.size() < 2) throw InvalidArgument("SeKernel: need at least two log parameters");
  const auto d = static_cast<Index>(log_params.size() - 1);
  Vector weights(d);
  for (Index k = 0; k < d; ++k) weights(k) = std::exp(0.5 * log_params[k + 1]);
  return SeKernel(std::exp(0.5 * log_params[0]), std::move(weights));
}

Vector SeKernel::log_params() const {
  Vector out(dimension() + 1);
  out(0) = std::log(variance());
  for (Index k = 0; k < dimension(); ++k) {
    out(k + 1) = std::log(length_weights_(k) * length_weights_(k));
  }
  return out;
}

double SeKernel::eval(const Point& a, const Point& b) const {
  check_dimension(dimension(), a.size(), "SeKernel::eval");
  check_dimension(dimension(), b.size(), "SeKernel::eval");
  double s = 0.0;
  for (Index k = 0; k < dimension(); ++k) {
    const double t = length_weights_(k) * (a(k) - b(k));
    s += t * t;
  }
  return variance() * std::exp(-s);
}

Matrix SeKernel::cov(const Matrix& a, const Matrix& b) const {
  check_dimension(dimension(), a.cols(), "SeKernel::cov");
  check_dimension(dimension(), b.cols(), "SeKernel::cov");
  const Index n = a.rows();
  const Index m = b.rows();
  // Differences are formed per coordinate rather than through |a|^2 + |b|^2 -
  // 2 a.b, which keeps the value exactly translation invariant.
  Matrix dist = Matrix::Zero(n, m);
  for (Index k = 0; k < dimension(); ++k) {
    const double w2 = length_weights_(k) * length_weights_(k);
    if (w2 == 0.0) continue;
    const auto ak = a.col(k).array();
    for (Index j = 0; j < m; ++j) {
      dist.col(j).array() += w2 * (ak - b(j, k)).square();
    }
  }
  return variance() * (-dist.array()).exp().matrix();
}

Vector SeKernel::self_cov(const Matrix& a) const {
  check_dimension(dimension(), a.cols(), "SeKernel::self_cov");
  return Vector::Constant(a.rows(), variance());
}

NoiseSpec::NoiseSpec(double v) : variance(v) {
  if (!(v >= 0.0) || !std::isfinite(v)) {
    throw InvalidArgument("NoiseSpec: variance must be non-negative and finite");
  }
}

Matrix cov_matrix(const Kernel& kernel, const Matrix& a, const Matrix& b) {
  return kernel.cov(a, b);
}

SpdMatrix add_noise_diagonal(Matrix m, NoiseSpec noise) {
  if (m.rows() != m.cols()) throw DimensionMismatch("add_noise_diagonal: matrix is not square");
  m.diagonal().array() += noise.variance;
  return SpdMatrix(std::move(m));
}

}  // namespace vfsm
