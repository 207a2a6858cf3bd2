#ifndef VFSM_VFGP_HPP
#define VFSM_VFGP_HPP

#include "vfsm/gp.hpp"

namespace vfsm {

/// Low- and high-fidelity samples over the same input space.
struct VfDataset {
  Dataset low;
  Dataset high;

  Index dimension() const { return low.dimension(); }
  Index size() const { return low.size() + high.size(); }
  void validate() const;
};

/// Co-kriging parameters: y_h = rho * y_l + y_d with independent processes
/// y_l ~ GP(0, k_l) + noise sigma_l^2 and y_d ~ GP(0, k_d) + noise sigma_d^2.
struct VfgpParams {
  SeKernel low_kernel;
  NoiseSpec low_noise;
  SeKernel diff_kernel;
  NoiseSpec diff_noise;
  double rho = 1.0;

  Index dimension() const { return low_kernel.dimension(); }
  /// rho^2 sigma_l^2 + sigma_d^2, the noise on a high-fidelity observation.
  double high_noise_variance() const;
  /// rho^2 k_l(a, b) + k_d(a, b).
  Matrix high_cov(const Matrix& a, const Matrix& b) const;
};

/// Shared input map plus per-fidelity output maps. Both fidelities share one
/// output scale (the low-fidelity standard deviation) so that rho keeps its
/// meaning in original units; each fidelity is centred on its own mean.
struct VfScaling {
  InputScaling inputs;
  OutputScaling low;
  OutputScaling high;

  static VfScaling identity(Index d);
  static VfScaling from_data(const VfDataset& data);
};

/// Noise-free joint covariance between two stacked point sets (rows_low;
/// rows_high) and (cols_low; cols_high):
///   [[K_l, rho K_l], [rho K_l, rho^2 K_l + K_d]].
Matrix joint_block(const VfgpParams& params, const Matrix& rows_low, const Matrix& rows_high,
                   const Matrix& cols_low, const Matrix& cols_high);

/// Joint training covariance with sigma_l^2 on the low block diagonal and
/// rho^2 sigma_l^2 + sigma_d^2 on the high block diagonal.
SpdMatrix assemble_joint_cov(const VfgpParams& params, const Matrix& x_low, const Matrix& x_high);

/// Covariance between high-fidelity values at x_star and the stacked training
/// sample: [rho K_l(x*, X_l), rho^2 K_l(x*, X_h) + K_d(x*, X_h)].
Matrix joint_cross_cov(const VfgpParams& params, const Matrix& x_star, const Matrix& x_low,
                       const Matrix& x_high);

/// Sample for the difference process, y_d = y_h - rho * yhat_l(X_h).
struct DiffDataset {
  Matrix x_high;
  Vector y_diff;
};

DiffDataset make_diff_dataset(const Matrix& x_high, const Vector& y_high,
                              const Vector& low_prediction, double rho);

struct VfgpFitReport {
  FitReport low;
  FitReport diff;
};

class VfgpModel {
 public:
  /// Exact model for given parameters; the identity scaling is used when none
  /// is passed, so params are then interpreted in original units.
  VfgpModel(VfgpParams params, VfDataset training);
  VfgpModel(VfgpParams params, VfDataset training, VfScaling scaling, VfgpFitReport report = {});

  const VfgpParams& params() const { return params_; }
  const VfDataset& training() const { return training_; }
  const VfScaling& scaling() const { return scaling_; }
  const VfgpFitReport& report() const { return report_; }
  const CholeskyFactor& joint_factor() const { return factor_; }
  const Vector& weights() const { return weights_; }

  /// Training inputs and stacked responses in scaled coordinates.
  const Matrix& scaled_low_x() const { return xl_; }
  const Matrix& scaled_high_x() const { return xh_; }
  const Vector& scaled_y() const { return y_; }

  /// Posterior of the high-fidelity function. The prior block is
  /// rho^2 K_l + K_d; include_noise adds rho^2 sigma_l^2 + sigma_d^2.
  Prediction predict(const Matrix& x_star, bool include_noise = false) const;
  Vector predict_mean(const Matrix& x_star) const;
  Vector predict_variance(const Matrix& x_star, bool include_noise = false) const;

 private:
  Matrix scaled_queries(const Matrix& x_star) const;

  VfgpParams params_;
  VfDataset training_;
  VfScaling scaling_;
  VfgpFitReport report_;
  Matrix xl_;
  Matrix xh_;
  Vector y_;
  CholeskyFactor factor_;
  Vector weights_;
};

/// Three-step estimation: (1) k_l, sigma_l^2 by MLE on the low sample;
/// (2) low posterior mean at the high inputs; (3) k_d, sigma_d^2 and rho by
/// MLE on the difference sample, with rho entering y_d. Low parameters stay
/// frozen after step 1.
VfgpModel fit_vfgp(const VfDataset& data, const FitConfig& config = {});

}  // namespace vfsm

#endif  // VFSM_VFGP_HPP
