#ifndef VFSM_GP_HPP
#define VFSM_GP_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "vfsm/kernels.hpp"
#include "vfsm/numerics.hpp"
#include "vfsm/optimize.hpp"

namespace vfsm {

/// Training sample: one input point per row of x, responses in y.
struct Dataset {
  Matrix x;
  Vector y;

  Index size() const { return x.rows(); }
  Index dimension() const { return x.cols(); }
  /// Throws InvalidArgument / DimensionMismatch when the invariants fail.
  void validate() const;
};

struct FitConfig {
  int restarts = 5;
  int max_iterations = 200;
  std::uint64_t seed = 0;
  /// Lower bound on the noise variance as a fraction of var(y). 1e-8 if unset.
  std::optional<double> nugget_floor;
  /// Weight of the quadratic pull towards the heuristic initial log-parameters.
  double penalty = 1e-3;
  /// Half-width (natural-log units) of the box around the initial point.
  double bound_width = 10.0;
};

struct FitReport {
  double log_likelihood = 0.0;
  double penalized_log_likelihood = 0.0;
  double initial_penalized_log_likelihood = 0.0;
  int restarts_used = 0;
  int restarts_failed = 0;
  bool converged = false;
};

/// Per-restart record kept in memory for diagnostics; not persisted.
struct RestartTrace {
  double start_value = 0.0;
  double final_value = 0.0;
  int iterations = 0;
  bool converged = false;
  bool failed = false;
};

/// Per-dimension affine map of inputs, x' = (x - offset) / scale.
struct InputScaling {
  Vector offset;
  Vector scale;

  /// Maps the bounding box of x onto [0, 1]^d; zero-width dimensions keep scale 1.
  static InputScaling from_data(const Matrix& x);
  static InputScaling identity(Index d);
  Matrix apply(const Matrix& x) const;
};

/// y' = (y - shift) / scale.
struct OutputScaling {
  double shift = 0.0;
  double scale = 1.0;

  Vector apply(const Vector& y) const { return (y.array() - shift) / scale; }
  double apply(double y) const { return (y - shift) / scale; }
  Vector restore(const Vector& y) const { return y.array() * scale + shift; }
};

struct Prediction {
  Vector mean;
  Matrix covariance;

  Vector variance() const { return covariance.diagonal(); }
};

/// -1/2 (n log 2 pi + log|K| + y^T K^{-1} y) with K = k(X, X) + sigma^2 I.
double log_likelihood(const Dataset& data, const SeKernel& kernel, NoiseSpec noise);

struct LikelihoodValue {
  double value = 0.0;
  /// d value / d [log theta0^2, log theta_1^2, ..., log theta_d^2, log sigma^2].
  Vector gradient;
  /// K^{-1} y, exposed for callers differentiating through y.
  Vector alpha;
};

LikelihoodValue log_likelihood_gradient(const Matrix& x, const Vector& y, const SeKernel& kernel,
                                        NoiseSpec noise);

/// Penalized multi-start maximization of a log-likelihood over a parameter
/// vector. Components flagged in `penalized` are pulled towards `initial` with
/// weight config.penalty.
struct HyperSearch {
  std::function<LikelihoodValue(const Vector& params)> log_likelihood;
  Vector initial;
  Vector penalized;
  Bounds bounds;
  Vector start_half_width;
};

struct HyperResult {
  Vector params;
  FitReport report;
  std::vector<RestartTrace> traces;
};

/// Throws AllStartsFailed when every restart fails at its start point.
HyperResult maximize_penalized(const HyperSearch& search, const FitConfig& config);

/// Kernel and noise estimated by penalized MLE in the coordinates given.
struct ProcessFit {
  SeKernel kernel;
  NoiseSpec noise;
  FitReport report;
  std::vector<RestartTrace> traces;
};

/// Heuristic start: theta_k = 1/range_k, theta0^2 = var(y), sigma^2 = 1e-2 var(y).
ProcessFit fit_process(const Matrix& x, const Vector& y, const FitConfig& config);

/// Fitted single-fidelity model. The kernel and noise live in the scaled
/// coordinates defined by the input/output scalings; training data is kept in
/// original units.
class GpModel {
 public:
  GpModel(SeKernel kernel, NoiseSpec noise, Dataset training);
  GpModel(SeKernel kernel, NoiseSpec noise, Dataset training, InputScaling inputs,
          OutputScaling outputs, FitReport report = {});

  const SeKernel& kernel() const { return kernel_; }
  NoiseSpec noise() const { return noise_; }
  const Dataset& training() const { return training_; }
  const InputScaling& input_scaling() const { return inputs_; }
  const OutputScaling& output_scaling() const { return outputs_; }
  const FitReport& report() const { return report_; }
  const CholeskyFactor& factor() const { return factor_; }
  const Vector& weights() const { return weights_; }

  /// Posterior mean and covariance. With include_noise the diagonal carries
  /// sigma^2 (noisy-observation covariance); otherwise it is the latent one.
  Prediction predict(const Matrix& x_star, bool include_noise = true) const;
  Vector predict_mean(const Matrix& x_star) const;
  Vector predict_variance(const Matrix& x_star, bool include_noise = true) const;

 private:
  Matrix scaled_queries(const Matrix& x_star) const;

  SeKernel kernel_;
  NoiseSpec noise_;
  Dataset training_;
  InputScaling inputs_;
  OutputScaling outputs_;
  FitReport report_;
  Matrix x_scaled_;
  CholeskyFactor factor_;
  Vector weights_;
};

/// Standardizes the data, runs fit_process and caches factor and weights.
GpModel fit_gp(const Dataset& data, const FitConfig& config = {});

/// Sample variance (divisor n); 0 for fewer than two values.
double sample_variance(const Vector& y);

}  // namespace vfsm

#endif  // VFSM_GP_HPP
