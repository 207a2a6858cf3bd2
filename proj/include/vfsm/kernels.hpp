#ifndef VFSM_KERNELS_HPP
#define VFSM_KERNELS_HPP

#include <memory>
#include <span>

#include "vfsm/numerics.hpp"

namespace vfsm {

/// Covariance function over points in R^d. Point sets are matrices with one
/// point per row.
class Kernel {
 public:
  virtual ~Kernel() = default;

  virtual Index dimension() const = 0;
  virtual double eval(const Point& a, const Point& b) const = 0;
  virtual std::unique_ptr<Kernel> clone() const = 0;

  /// |a| x |b| matrix of pairwise covariances. The default loops over eval().
  virtual Matrix cov(const Matrix& a, const Matrix& b) const;
  /// k(x, x) for every row of a.
  virtual Vector self_cov(const Matrix& a) const;
};

/// Anisotropic squared exponential
///   k(x, x') = theta0^2 exp(-sum_k theta_k^2 (x_k - x'_k)^2).
///
/// output_scale is theta0 (response units); length_weights are theta_1..theta_d
/// (inverse input units).
class SeKernel final : public Kernel {
 public:
  SeKernel(double output_scale, Vector length_weights);

  /// Builds from [log theta0^2, log theta_1^2, ..., log theta_d^2].
  static SeKernel from_log_params(std::span<const double> log_params);
  /// Inverse of from_log_params; length d + 1.
  Vector log_params() const;

  double output_scale() const { return output_scale_; }
  double variance() const { return output_scale_ * output_scale_; }
  const Vector& length_weights() const { return length_weights_; }

  Index dimension() const override { return length_weights_.size(); }
  double eval(const Point& a, const Point& b) const override;
  std::unique_ptr<Kernel> clone() const override { return std::make_unique<SeKernel>(*this); }
  Matrix cov(const Matrix& a, const Matrix& b) const override;
  Vector self_cov(const Matrix& a) const override;

 private:
  double output_scale_;
  Vector length_weights_;
};

/// White-noise variance sigma^2 (response units squared).
struct NoiseSpec {
  NoiseSpec() = default;
  explicit NoiseSpec(double variance);

  double variance = 0.0;
};

Matrix cov_matrix(const Kernel& kernel, const Matrix& a, const Matrix& b);

/// m + sigma^2 I.
SpdMatrix add_noise_diagonal(Matrix m, NoiseSpec noise);

}  // namespace vfsm

#endif  // VFSM_KERNELS_HPP
