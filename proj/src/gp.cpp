#include "vfsm/gp.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <utility>

namespace vfsm {

namespace {

constexpr double kDefaultNuggetFloor = 1e-8;
constexpr double kInitialNoiseFraction = 1e-2;
constexpr double kStartHalfWidth = 2.0;

double positive_or_one(double v) { return v > 0.0 && std::isfinite(v) ? v : 1.0; }

void check_query_dimension(const Matrix& x, Index d, const char* where) {
  if (x.cols() != d) {
    throw DimensionMismatch(std::string(where) + ": query dimension " + std::to_string(x.cols()) +
                            ", model dimension " + std::to_string(d));
  }
}

}  // namespace

void Dataset::validate() const {
  if (x.rows() != y.size()) {
    throw DimensionMismatch("Dataset: " + std::to_string(x.rows()) + " input rows but " +
                            std::to_string(y.size()) + " responses");
  }
  if (x.rows() < 1) throw InvalidArgument("Dataset: at least one point is required");
  if (x.cols() < 1) throw InvalidArgument("Dataset: input dimension must be >= 1");
  if (!x.allFinite() || !y.allFinite()) throw InvalidArgument("Dataset: non-finite value");
}

double sample_variance(const Vector& y) {
  if (y.size() < 2) return 0.0;
  const double mean = y.mean();
  return (y.array() - mean).square().mean();
}

InputScaling InputScaling::from_data(const Matrix& x) {
  InputScaling s;
  s.offset = x.colwise().minCoeff().transpose();
  s.scale = (x.colwise().maxCoeff().transpose() - s.offset);
  for (Index k = 0; k < s.scale.size(); ++k) {
    if (!(s.scale(k) > 0.0)) s.scale(k) = 1.0;
  }
  return s;
}

InputScaling InputScaling::identity(Index d) {
  return InputScaling{Vector::Zero(d), Vector::Ones(d)};
}

Matrix InputScaling::apply(const Matrix& x) const {
  if (x.cols() != offset.size()) throw DimensionMismatch("InputScaling: dimension mismatch");
  return (x.rowwise() - offset.transpose()).array().rowwise() / scale.transpose().array();
}

double log_likelihood(const Dataset& data, const SeKernel& kernel, NoiseSpec noise) {
  data.validate();
  const CholeskyFactor f =
      cholesky(add_noise_diagonal(kernel.cov(data.x, data.x), noise));
  const Vector z = solve_lower(f, data.y);
  const double n = static_cast<double>(data.size());
  return -0.5 * (n * std::log(2.0 * std::numbers::pi) + f.log_determinant() + z.squaredNorm());
}

LikelihoodValue log_likelihood_gradient(const Matrix& x, const Vector& y, const SeKernel& kernel,
                                        NoiseSpec noise) {
  const Index n = x.rows();
  const Index d = x.cols();
  Matrix kf = kernel.cov(x, x);
  Matrix k = kf;
  k.diagonal().array() += noise.variance;
  const CholeskyFactor f = cholesky(SpdMatrix(std::move(k)));

  LikelihoodValue out;
  out.alpha = f.solve(y);
  out.value = -0.5 * (static_cast<double>(n) * std::log(2.0 * std::numbers::pi) +
                      f.log_determinant() + y.dot(out.alpha));

  // K^{-1} from the inverse factor; only the lower triangle is filled.
  Matrix linv = Matrix::Identity(n, n);
  f.lower().triangularView<Eigen::Lower>().solveInPlace(linv);
  Matrix kinv = Matrix::Zero(n, n);
  kinv.selfadjointView<Eigen::Lower>().rankUpdate(linv.transpose());

  // dL/dp = 1/2 tr((a a^T - K^{-1}) dK/dp), summed over the lower triangle.
  Vector grad = Vector::Zero(d + 2);
  Vector w2(d);
  for (Index k2 = 0; k2 < d; ++k2) {
    w2(k2) = kernel.length_weights()(k2) * kernel.length_weights()(k2);
  }
  double noise_term = 0.0;
  for (Index j = 0; j < n; ++j) {
    const double aj = out.alpha(j);
    noise_term += aj * aj - kinv(j, j);
    grad(0) += 0.5 * (aj * aj - kinv(j, j)) * kf(j, j);
    for (Index i = j + 1; i < n; ++i) {
      const double w = (out.alpha(i) * aj - kinv(i, j)) * kf(i, j);
      grad(0) += w;
      for (Index c = 0; c < d; ++c) {
        const double diff = x(i, c) - x(j, c);
        grad(c + 1) -= w * w2(c) * diff * diff;
      }
    }
  }
  grad(d + 1) = 0.5 * noise.variance * noise_term;
  out.gradient = std::move(grad);
  return out;
}

HyperResult maximize_penalized(const HyperSearch& search, const FitConfig& config) {
  const Vector& center = search.initial;
  const Vector& mask = search.penalized;
  const double lambda = config.penalty;

  Objective negative = [&](const Vector& p, Vector& grad) {
    const LikelihoodValue v = search.log_likelihood(p);
    const Vector delta = (p - center).cwiseProduct(mask);
    grad = -(v.gradient - 2.0 * lambda * delta);
    return -(v.value - lambda * delta.squaredNorm());
  };

  const int restarts = std::max(1, config.restarts);
  const auto starts = multistart_points(center, search.start_half_width, search.bounds, restarts,
                                        config.seed);
  OptimizeOptions options;
  options.max_iterations = config.max_iterations;

  HyperResult best;
  bool have_best = false;
  double best_value = std::numeric_limits<double>::infinity();
  int failed = 0;
  for (std::size_t r = 0; r < starts.size(); ++r) {
    RestartTrace trace;
    try {
      const OptimizeResult res = minimize_bounded(negative, starts[r], search.bounds, options);
      trace.start_value = -res.initial_value;
      trace.final_value = -res.value;
      trace.iterations = res.iterations;
      trace.converged = res.converged;
      // Strict comparison keeps the lowest restart index on ties.
      if (res.value < best_value) {
        best_value = res.value;
        best.params = res.x;
        best.report.converged = res.converged;
        have_best = true;
      }
    } catch (const Error&) {
      trace.failed = true;
      ++failed;
    }
    best.traces.push_back(trace);
  }
  if (!have_best) {
    throw AllStartsFailed("hyperparameter search: all " + std::to_string(restarts) +
                          " restarts failed");
  }

  Vector scratch;
  best.report.penalized_log_likelihood = -best_value;
  best.report.log_likelihood = search.log_likelihood(best.params).value;
  try {
    best.report.initial_penalized_log_likelihood =
        -negative(clamp_to(center, search.bounds), scratch);
  } catch (const Error&) {
    best.report.initial_penalized_log_likelihood = -std::numeric_limits<double>::infinity();
  }
  best.report.restarts_used = restarts;
  best.report.restarts_failed = failed;
  return best;
}

ProcessFit fit_process(const Matrix& x, const Vector& y, const FitConfig& config) {
  const Index d = x.cols();
  const double var_y = positive_or_one(sample_variance(y));
  const double floor_fraction = config.nugget_floor.value_or(kDefaultNuggetFloor);

  Vector initial(d + 2);
  initial(0) = std::log(var_y);
  for (Index k = 0; k < d; ++k) {
    const double range = x.col(k).maxCoeff() - x.col(k).minCoeff();
    const double theta = range > 0.0 ? 1.0 / range : 1.0;
    initial(k + 1) = std::log(theta * theta);
  }
  initial(d + 1) = std::log(kInitialNoiseFraction * var_y);

  HyperSearch search;
  search.initial = initial;
  search.penalized = Vector::Ones(d + 2);
  search.bounds.lower = initial.array() - config.bound_width;
  search.bounds.upper = initial.array() + config.bound_width;
  // The nugget floor, not the +/- width, bounds the noise from below.
  search.bounds.lower(d + 1) = std::min(initial(d + 1), std::log(floor_fraction * var_y));
  search.start_half_width = Vector::Constant(d + 2, kStartHalfWidth);
  search.log_likelihood = [&](const Vector& p) {
    const SeKernel kernel = SeKernel::from_log_params({p.data(), static_cast<std::size_t>(d + 1)});
    return log_likelihood_gradient(x, y, kernel, NoiseSpec(std::exp(p(d + 1))));
  };

  HyperResult res = maximize_penalized(search, config);
  const Vector& p = res.params;
  return ProcessFit{SeKernel::from_log_params({p.data(), static_cast<std::size_t>(d + 1)}),
                    NoiseSpec(std::exp(p(d + 1))), res.report, std::move(res.traces)};
}

GpModel::GpModel(SeKernel kernel, NoiseSpec noise, Dataset training)
    : GpModel(std::move(kernel), noise, training, InputScaling::identity(training.dimension()),
              OutputScaling{}) {}

GpModel::GpModel(SeKernel kernel, NoiseSpec noise, Dataset training, InputScaling inputs,
                 OutputScaling outputs, FitReport report)
    : kernel_(std::move(kernel)),
      noise_(noise),
      training_(std::move(training)),
      inputs_(std::move(inputs)),
      outputs_(outputs),
      report_(report) {
  training_.validate();
  if (kernel_.dimension() != training_.dimension()) {
    throw DimensionMismatch("GpModel: kernel and training data dimensions differ");
  }
  x_scaled_ = inputs_.apply(training_.x);
  factor_ = cholesky(add_noise_diagonal(kernel_.cov(x_scaled_, x_scaled_), noise_));
  weights_ = factor_.solve(outputs_.apply(training_.y));
}

Matrix GpModel::scaled_queries(const Matrix& x_star) const {
  check_query_dimension(x_star, kernel_.dimension(), "GpModel::predict");
  return inputs_.apply(x_star);
}

Prediction GpModel::predict(const Matrix& x_star, bool include_noise) const {
  const Matrix xs = scaled_queries(x_star);
  const Matrix cross = kernel_.cov(xs, x_scaled_);
  Prediction out;
  out.mean = outputs_.restore(cross * weights_);
  const Matrix v = solve_lower(factor_, Matrix(cross.transpose()));
  Matrix cov = kernel_.cov(xs, xs);
  cov.noalias() -= v.transpose() * v;
  if (include_noise) cov.diagonal().array() += noise_.variance;
  for (Index i = 0; i < cov.rows(); ++i) cov(i, i) = std::max(cov(i, i), 0.0);
  out.covariance = cov * (outputs_.scale * outputs_.scale);
  return out;
}

Vector GpModel::predict_mean(const Matrix& x_star) const {
  const Matrix xs = scaled_queries(x_star);
  return outputs_.restore(kernel_.cov(xs, x_scaled_) * weights_);
}

Vector GpModel::predict_variance(const Matrix& x_star, bool include_noise) const {
  const Matrix xs = scaled_queries(x_star);
  const Matrix v = solve_lower(factor_, Matrix(kernel_.cov(x_scaled_, xs)));
  Vector var = kernel_.self_cov(xs) - v.colwise().squaredNorm().transpose();
  if (include_noise) var.array() += noise_.variance;
  return var.cwiseMax(0.0) * (outputs_.scale * outputs_.scale);
}

GpModel fit_gp(const Dataset& data, const FitConfig& config) {
  data.validate();
  InputScaling inputs = InputScaling::from_data(data.x);
  const double var_y = sample_variance(data.y);
  const OutputScaling outputs{data.y.mean(), var_y > 0.0 ? std::sqrt(var_y) : 1.0};
  const Matrix xs = inputs.apply(data.x);
  const Vector ys = outputs.apply(data.y);
  ProcessFit pf = fit_process(xs, ys, config);
  return GpModel(std::move(pf.kernel), pf.noise, data, std::move(inputs), outputs, pf.report);
}

}  // namespace vfsm
