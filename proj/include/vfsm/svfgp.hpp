#ifndef VFSM_SVFGP_HPP
#define VFSM_SVFGP_HPP

#include <cstdint>
#include <vector>

#include "vfsm/vfgp.hpp"

namespace vfsm {

/// Indices (ascending) of the base points drawn from each fidelity.
struct BaseSelection {
  std::vector<Index> low;
  std::vector<Index> high;
  std::uint64_t seed = 0;

  Index size() const { return static_cast<Index>(low.size() + high.size()); }
};

/// Draws n_low / n_high points without replacement. With params given, each
/// point is weighted by its prior self-covariance (k_l(x, x) for the low
/// sample, rho^2 k_l(x, x) + k_d(x, x) for the high one; inputs taken as
/// already scaled); otherwise the draw is uniform.
BaseSelection select_base_points(const VfDataset& data, Index n_low, Index n_high,
                                 std::uint64_t seed, const VfgpParams* params = nullptr);

/// Rows of data picked by the selection.
VfDataset subset(const VfDataset& data, const BaseSelection& selection);

struct NystromError {
  /// ||K(X*, X) - K_hat(X*, X)||_2 / ||K(X*, X)||_2
  double cross = 0.0;
  /// ||K(X*, X*) - K_hat(X*, X*)||_2 / ||K(X*, X*)||_2
  double self = 0.0;
};

/// Low-rank co-kriging model. Covariances are approximated through the base
/// points as K ~ K_1^T K_11^{-1} K_1 and the posterior is evaluated with the
/// matrix inversion lemma in O(n n_1^2).
class SvfgpModel {
 public:
  SvfgpModel(VfgpParams params, BaseSelection selection, VfDataset training);
  SvfgpModel(VfgpParams params, BaseSelection selection, VfDataset training, VfScaling scaling,
             VfgpFitReport report = {});

  const VfgpParams& params() const { return params_; }
  const BaseSelection& selection() const { return selection_; }
  const VfDataset& training() const { return training_; }
  const VfScaling& scaling() const { return scaling_; }
  const VfgpFitReport& report() const { return report_; }
  Index base_size() const { return selection_.size(); }

  /// Mean and variance of high-fidelity observations; the variance carries
  /// rho^2 sigma_l^2 + sigma_d^2.
  Vector predict_mean(const Matrix& x_star) const;
  Vector predict_variance(const Matrix& x_star) const;

  /// Relative spectral-norm errors of the Nystrom approximation at the probe
  /// points (original units).
  NystromError nystrom_diagnostic(const Matrix& probes) const;

 private:
  Matrix scaled_queries(const Matrix& x_star) const;
  Matrix base_cross(const Matrix& xs) const;

  VfgpParams params_;
  BaseSelection selection_;
  VfDataset training_;
  VfScaling scaling_;
  VfgpFitReport report_;
  Matrix xl_;
  Matrix xh_;
  Matrix base_low_;
  Matrix base_high_;
  CholeskyFactor base_factor_;
  CholeskyFactor core_factor_;
  Vector projected_;
};

/// Selects n_low + n_high base points uniformly, estimates parameters by the
/// three-step procedure on that subsample, then builds the low-rank model on
/// the full data.
SvfgpModel fit_svfgp(const VfDataset& data, Index n_low, Index n_high,
                     const FitConfig& config = {});

}  // namespace vfsm

#endif  // VFSM_SVFGP_HPP
