#ifndef VFSM_TESTS_SUPPORT_HPP
#define VFSM_TESTS_SUPPORT_HPP

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "vfsm/bbvfgp.hpp"
#include "vfsm/sampling.hpp"
#include "vfsm/svfgp.hpp"
#include "vfsm/vfgp.hpp"

namespace vfsm::testing {

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Matrix random_points(Rng& rng, Index n, Index d) {
  Matrix x(n, d);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < d; ++j) x(i, j) = uniform(rng, 0.0, 1.0);
  return x;
}

inline Vector random_vector(Rng& rng, Index n, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = normal(rng);
  return v;
}

inline Matrix random_spd(Rng& rng, Index n) {
  Matrix a(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) a(i, j) = uniform(rng, -1.0, 1.0);
  return a * a.transpose() + static_cast<double>(n) * Matrix::Identity(n, n);
}

inline SeKernel random_kernel(Rng& rng, Index d) {
  Vector w(d);
  for (Index j = 0; j < d; ++j) w(j) = uniform(rng, 0.5, 3.0);
  return SeKernel(uniform(rng, 0.5, 2.0), w);
}

struct VfInstance {
  VfgpParams params;
  VfDataset data;
};

inline VfInstance random_vf_instance(Rng& rng, Index d, Index n_low, Index n_high) {
  VfgpParams p{random_kernel(rng, d), NoiseSpec(uniform(rng, 1e-3, 0.1)), random_kernel(rng, d),
               NoiseSpec(uniform(rng, 1e-3, 0.1)), uniform(rng, -2.0, 2.0)};
  VfDataset data{Dataset{random_points(rng, n_low, d), random_vector(rng, n_low)},
                 Dataset{random_points(rng, n_high, d), random_vector(rng, n_high)}};
  return {p, data};
}

// Scalar-loop covariance; shares no code with the library's matrix assembly.
inline Matrix gram(const SeKernel& k, const Matrix& a, const Matrix& b) {
  Matrix m(a.rows(), b.rows());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < b.rows(); ++j) {
      double s = 0.0;
      for (Index c = 0; c < a.cols(); ++c) {
        const double w = k.length_weights()(c);
        const double diff = a(i, c) - b(j, c);
        s += w * w * diff * diff;
      }
      m(i, j) = k.variance() * std::exp(-s);
    }
  }
  return m;
}

struct DenseVf {
  Matrix cov;
  Vector y;
};

inline DenseVf dense_joint(const VfgpParams& p, const VfDataset& data) {
  const Index nl = data.low.size();
  const Index nh = data.high.size();
  const double r = p.rho;
  Matrix k(nl + nh, nl + nh);
  k.topLeftCorner(nl, nl) = gram(p.low_kernel, data.low.x, data.low.x) +
                            p.low_noise.variance * Matrix::Identity(nl, nl);
  k.topRightCorner(nl, nh) = r * gram(p.low_kernel, data.low.x, data.high.x);
  k.bottomLeftCorner(nh, nl) = k.topRightCorner(nl, nh).transpose();
  k.bottomRightCorner(nh, nh) = r * r * gram(p.low_kernel, data.high.x, data.high.x) +
                                gram(p.diff_kernel, data.high.x, data.high.x) +
                                (r * r * p.low_noise.variance + p.diff_noise.variance) *
                                    Matrix::Identity(nh, nh);
  Vector y(nl + nh);
  y << data.low.y, data.high.y;
  return {k, y};
}

inline Matrix dense_cross(const VfgpParams& p, const VfDataset& data, const Matrix& q) {
  Matrix c(q.rows(), data.size());
  c.leftCols(data.low.size()) = p.rho * gram(p.low_kernel, q, data.low.x);
  c.rightCols(data.high.size()) =
      p.rho * p.rho * gram(p.low_kernel, q, data.high.x) + gram(p.diff_kernel, q, data.high.x);
  return c;
}

// Posterior mean and covariance through an explicit LU inverse.
inline Prediction dense_vfgp(const VfgpParams& p, const VfDataset& data, const Matrix& q) {
  const DenseVf j = dense_joint(p, data);
  const Matrix inv = j.cov.fullPivLu().inverse();
  const Matrix c = dense_cross(p, data, q);
  Prediction out;
  out.mean = c * inv * j.y;
  out.covariance = p.rho * p.rho * gram(p.low_kernel, q, q) + gram(p.diff_kernel, q, q) -
                   c * inv * c.transpose();
  return out;
}

// Expanded (n+1)-point system with the oracle value appended as a new
// low-fidelity observation.
inline std::pair<double, double> dense_expanded(const VfgpParams& p, const VfDataset& data,
                                                const Point& x, double oracle_value,
                                                bool noisy_oracle) {
  const DenseVf j = dense_joint(p, data);
  const Index n = data.size();
  const Matrix xm = x;
  Matrix k(n + 1, n + 1);
  k.topLeftCorner(n, n) = j.cov;
  Vector col(n);
  col << gram(p.low_kernel, data.low.x, xm).col(0),
      p.rho * gram(p.low_kernel, data.high.x, xm).col(0);
  const double kxx = gram(p.low_kernel, xm, xm)(0, 0);
  k.topRightCorner(n, 1) = col;
  k.bottomLeftCorner(1, n) = col.transpose();
  k(n, n) = kxx + (noisy_oracle ? p.low_noise.variance : 0.0);
  Vector ke(n + 1);
  ke << dense_cross(p, data, xm).row(0).transpose(), p.rho * kxx;
  Vector ye(n + 1);
  ye << j.y, oracle_value;
  const Matrix inv = k.fullPivLu().inverse();
  const double mean = ke.dot(inv * ye);
  const double var =
      p.rho * p.rho * kxx + gram(p.diff_kernel, xm, xm)(0, 0) - ke.dot(inv * ke);
  return {mean, var};
}

inline double relative_error(const Vector& got, const Vector& want) {
  return (got - want).norm() / std::max(1.0, want.norm());
}

}  // namespace vfsm::testing

#endif  // VFSM_TESTS_SUPPORT_HPP
