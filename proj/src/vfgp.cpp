#include "vfsm/vfgp.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "vfsm/sampling.hpp"

namespace vfsm {

namespace {

constexpr double kDefaultNuggetFloor = 1e-8;
constexpr double kInitialNoiseFraction = 1e-2;
constexpr double kMinDiffVariance = 1e-4;
constexpr double kStartHalfWidth = 2.0;
constexpr double kRhoStartHalfWidth = 1.0;
constexpr std::uint64_t kDiffStream = 3;

double positive_or_one(double v) { return v > 0.0 && std::isfinite(v) ? v : 1.0; }

Matrix stack_rows(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() + b.rows(), a.cols());
  out << a, b;
  return out;
}

}  // namespace

void VfDataset::validate() const {
  low.validate();
  high.validate();
  if (low.dimension() != high.dimension()) {
    throw DimensionMismatch("VfDataset: low dimension " + std::to_string(low.dimension()) +
                            ", high dimension " + std::to_string(high.dimension()));
  }
}

double VfgpParams::high_noise_variance() const {
  return rho * rho * low_noise.variance + diff_noise.variance;
}

Matrix VfgpParams::high_cov(const Matrix& a, const Matrix& b) const {
  Matrix out = diff_kernel.cov(a, b);
  out.noalias() += (rho * rho) * low_kernel.cov(a, b);
  return out;
}

VfScaling VfScaling::identity(Index d) {
  return VfScaling{InputScaling::identity(d), OutputScaling{}, OutputScaling{}};
}

VfScaling VfScaling::from_data(const VfDataset& data) {
  data.validate();
  const double var_l = sample_variance(data.low.y);
  const double scale = var_l > 0.0 ? std::sqrt(var_l) : 1.0;
  return VfScaling{InputScaling::from_data(stack_rows(data.low.x, data.high.x)),
                   OutputScaling{data.low.y.mean(), scale},
                   OutputScaling{data.high.y.mean(), scale}};
}

Matrix joint_block(const VfgpParams& params, const Matrix& rows_low, const Matrix& rows_high,
                   const Matrix& cols_low, const Matrix& cols_high) {
  const Index rl = rows_low.rows();
  const Index rh = rows_high.rows();
  const Index cl = cols_low.rows();
  const Index ch = cols_high.rows();
  const double rho = params.rho;
  Matrix out(rl + rh, cl + ch);
  if (rl > 0 && cl > 0) out.topLeftCorner(rl, cl) = params.low_kernel.cov(rows_low, cols_low);
  if (rl > 0 && ch > 0) {
    out.topRightCorner(rl, ch) = rho * params.low_kernel.cov(rows_low, cols_high);
  }
  if (rh > 0 && cl > 0) {
    out.bottomLeftCorner(rh, cl) = rho * params.low_kernel.cov(rows_high, cols_low);
  }
  if (rh > 0 && ch > 0) out.bottomRightCorner(rh, ch) = params.high_cov(rows_high, cols_high);
  return out;
}

SpdMatrix assemble_joint_cov(const VfgpParams& params, const Matrix& x_low, const Matrix& x_high) {
  if (x_low.cols() != params.dimension() || x_high.cols() != params.dimension()) {
    throw DimensionMismatch("assemble_joint_cov: point and kernel dimensions differ");
  }
  Matrix k = joint_block(params, x_low, x_high, x_low, x_high);
  const Index nl = x_low.rows();
  k.diagonal().head(nl).array() += params.low_noise.variance;
  k.diagonal().tail(x_high.rows()).array() += params.high_noise_variance();
  // Blocks are computed separately; copy the lower triangle up so the result
  // is exactly symmetric.
  k.triangularView<Eigen::StrictlyUpper>() = k.transpose();
  return SpdMatrix(std::move(k));
}

Matrix joint_cross_cov(const VfgpParams& params, const Matrix& x_star, const Matrix& x_low,
                       const Matrix& x_high) {
  if (x_star.cols() != params.dimension()) {
    throw DimensionMismatch("joint_cross_cov: query dimension " + std::to_string(x_star.cols()) +
                            ", model dimension " + std::to_string(params.dimension()));
  }
  return joint_block(params, Matrix(0, x_star.cols()), x_star, x_low, x_high);
}

DiffDataset make_diff_dataset(const Matrix& x_high, const Vector& y_high,
                              const Vector& low_prediction, double rho) {
  if (y_high.size() != x_high.rows() || low_prediction.size() != x_high.rows()) {
    throw DimensionMismatch("make_diff_dataset: sample sizes differ");
  }
  return DiffDataset{x_high, y_high - rho * low_prediction};
}

VfgpModel::VfgpModel(VfgpParams params, VfDataset training)
    : VfgpModel(params, training, VfScaling::identity(training.dimension())) {}

VfgpModel::VfgpModel(VfgpParams params, VfDataset training, VfScaling scaling,
                     VfgpFitReport report)
    : params_(std::move(params)),
      training_(std::move(training)),
      scaling_(std::move(scaling)),
      report_(report) {
  training_.validate();
  if (params_.dimension() != training_.dimension() ||
      params_.diff_kernel.dimension() != training_.dimension()) {
    throw DimensionMismatch("VfgpModel: kernel and training data dimensions differ");
  }
  if (!std::isfinite(params_.rho)) throw InvalidArgument("VfgpModel: rho must be finite");
  xl_ = scaling_.inputs.apply(training_.low.x);
  xh_ = scaling_.inputs.apply(training_.high.x);
  y_.resize(training_.size());
  y_ << scaling_.low.apply(training_.low.y), scaling_.high.apply(training_.high.y);
  factor_ = cholesky(assemble_joint_cov(params_, xl_, xh_));
  weights_ = factor_.solve(y_);
}

Matrix VfgpModel::scaled_queries(const Matrix& x_star) const {
  if (x_star.cols() != params_.dimension()) {
    throw DimensionMismatch("VfgpModel::predict: query dimension " +
                            std::to_string(x_star.cols()) + ", model dimension " +
                            std::to_string(params_.dimension()));
  }
  return scaling_.inputs.apply(x_star);
}

Prediction VfgpModel::predict(const Matrix& x_star, bool include_noise) const {
  const Matrix xs = scaled_queries(x_star);
  const Matrix cross = joint_cross_cov(params_, xs, xl_, xh_);
  Prediction out;
  out.mean = scaling_.high.restore(cross * weights_);
  const Matrix v = solve_lower(factor_, Matrix(cross.transpose()));
  Matrix cov = params_.high_cov(xs, xs);
  cov.noalias() -= v.transpose() * v;
  if (include_noise) cov.diagonal().array() += params_.high_noise_variance();
  for (Index i = 0; i < cov.rows(); ++i) cov(i, i) = std::max(cov(i, i), 0.0);
  const double s = scaling_.high.scale;
  out.covariance = cov * (s * s);
  return out;
}

Vector VfgpModel::predict_mean(const Matrix& x_star) const {
  const Matrix xs = scaled_queries(x_star);
  return scaling_.high.restore(joint_cross_cov(params_, xs, xl_, xh_) * weights_);
}

Vector VfgpModel::predict_variance(const Matrix& x_star, bool include_noise) const {
  const Matrix xs = scaled_queries(x_star);
  const Matrix v =
      solve_lower(factor_, Matrix(joint_cross_cov(params_, xs, xl_, xh_).transpose()));
  const double rho = params_.rho;
  Vector var = (rho * rho) * params_.low_kernel.self_cov(xs) + params_.diff_kernel.self_cov(xs);
  var -= v.colwise().squaredNorm().transpose();
  if (include_noise) var.array() += params_.high_noise_variance();
  const double s = scaling_.high.scale;
  return var.cwiseMax(0.0) * (s * s);
}

VfgpModel fit_vfgp(const VfDataset& data, const FitConfig& config) {
  data.validate();
  if (data.low.size() < 2 || data.high.size() < 2) {
    throw InvalidArgument("fit_vfgp: need at least two points per fidelity");
  }
  const VfScaling scaling = VfScaling::from_data(data);
  const Index d = data.dimension();
  const Matrix xl = scaling.inputs.apply(data.low.x);
  const Matrix xh = scaling.inputs.apply(data.high.x);
  const Vector yl = scaling.low.apply(data.low.y);
  const Vector yh = scaling.high.apply(data.high.y);

  // Step 1: the low-fidelity process on its own.
  ProcessFit low = fit_process(xl, yl, config);

  // Step 2: its posterior mean at the high-fidelity inputs.
  const Vector low_at_high = GpModel(low.kernel, low.noise, Dataset{xl, yl}).predict_mean(xh);

  // Step 3: difference process and rho; q = [log theta_d0^2, log theta_dk^2,
  // log sigma_d^2, rho].
  const double var_h = positive_or_one(sample_variance(yh));
  const double floor_fraction = config.nugget_floor.value_or(kDefaultNuggetFloor);
  const DiffDataset first = make_diff_dataset(xh, yh, low_at_high, 1.0);
  const double var_d = std::max(sample_variance(first.y_diff), kMinDiffVariance * var_h);

  Vector initial(d + 3);
  initial(0) = std::log(var_d);
  for (Index k = 0; k < d; ++k) {
    const double range = xh.col(k).maxCoeff() - xh.col(k).minCoeff();
    const double theta = range > 0.0 ? 1.0 / range : 1.0;
    initial(k + 1) = std::log(theta * theta);
  }
  initial(d + 1) = std::log(kInitialNoiseFraction * var_d);
  initial(d + 2) = 1.0;

  constexpr double inf = std::numeric_limits<double>::infinity();
  HyperSearch search;
  search.initial = initial;
  search.penalized = Vector::Ones(d + 3);
  search.penalized(d + 2) = 0.0;
  search.bounds.lower = initial.array() - config.bound_width;
  search.bounds.upper = initial.array() + config.bound_width;
  search.bounds.lower(d + 1) = std::min(initial(d + 1), std::log(floor_fraction * var_h));
  search.bounds.lower(d + 2) = -inf;
  search.bounds.upper(d + 2) = inf;
  search.start_half_width = Vector::Constant(d + 3, kStartHalfWidth);
  search.start_half_width(d + 2) = kRhoStartHalfWidth;
  const Vector centered_low_at_high = low_at_high.array() - low_at_high.mean();
  search.log_likelihood = [&](const Vector& q) {
    const SeKernel kernel = SeKernel::from_log_params({q.data(), static_cast<std::size_t>(d + 1)});
    const double rho = q(d + 2);
    // The difference process carries its own constant mean, profiled out.
    Vector y_diff = yh - rho * low_at_high;
    y_diff.array() -= y_diff.mean();
    LikelihoodValue v =
        log_likelihood_gradient(xh, y_diff, kernel, NoiseSpec(std::exp(q(d + 1))));
    Vector grad(d + 3);
    grad << v.gradient, v.alpha.dot(centered_low_at_high);
    v.gradient = std::move(grad);
    return v;
  };

  FitConfig diff_config = config;
  diff_config.seed = derive_seed(config.seed, kDiffStream);
  const HyperResult diff = maximize_penalized(search, diff_config);
  const Vector& q = diff.params;

  VfgpParams params{low.kernel, low.noise,
                    SeKernel::from_log_params({q.data(), static_cast<std::size_t>(d + 1)}),
                    NoiseSpec(std::exp(q(d + 1))), q(d + 2)};
  VfScaling fitted = scaling;
  fitted.high.shift += scaling.high.scale * (yh - params.rho * low_at_high).mean();
  return VfgpModel(std::move(params), data, fitted, VfgpFitReport{low.report, diff.report});
}

}  // namespace vfsm
