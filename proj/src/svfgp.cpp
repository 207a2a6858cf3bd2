#include "vfsm/svfgp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <utility>

#include <Eigen/SVD>

#include "vfsm/sampling.hpp"

namespace vfsm {

namespace {

// Efraimidis-Spirakis: the k largest keys log(u) / w form a weighted sample
// without replacement.
std::vector<Index> weighted_draw(const Vector& weights, Index k, std::uint64_t seed) {
  const Index n = weights.size();
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::pair<double, Index>> keys(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const double u = 1.0 - unit(rng);
    const double w = weights(i);
    keys[static_cast<std::size_t>(i)] = {w > 0.0 ? std::log(u) / w : -HUGE_VAL, i};
  }
  std::partial_sort(keys.begin(), keys.begin() + k, keys.end(), [](const auto& a, const auto& b) {
    return a.first > b.first || (a.first == b.first && a.second < b.second);
  });
  std::vector<Index> out(static_cast<std::size_t>(k));
  for (Index i = 0; i < k; ++i)
    out[static_cast<std::size_t>(i)] = keys[static_cast<std::size_t>(i)].second;
  std::sort(out.begin(), out.end());
  return out;
}

Matrix rows_of(const Matrix& x, const std::vector<Index>& idx) {
  Matrix out(static_cast<Index>(idx.size()), x.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Index>(i)) = x.row(idx[i]);
  return out;
}

Vector entries_of(const Vector& y, const std::vector<Index>& idx) {
  Vector out(static_cast<Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out(static_cast<Index>(i)) = y(idx[i]);
  return out;
}

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return Eigen::BDCSVD<Matrix>(m).singularValues()(0);
}

double relative_error(const Matrix& exact, const Matrix& approx) {
  const double denom = spectral_norm(exact);
  return denom > 0.0 ? spectral_norm(exact - approx) / denom : 0.0;
}

void symmetrize_lower(Matrix& m) { m.triangularView<Eigen::StrictlyUpper>() = m.transpose(); }

}  // namespace

BaseSelection select_base_points(const VfDataset& data, Index n_low, Index n_high,
                                 std::uint64_t seed, const VfgpParams* params) {
  data.validate();
  if (n_low < 0 || n_high < 0 || n_low + n_high < 1) {
    throw InvalidArgument("select_base_points: at least one base point is required");
  }
  if (n_low > data.low.size() || n_high > data.high.size()) {
    throw SubsampleTooLarge("select_base_points: requested " + std::to_string(n_low) + " + " +
                            std::to_string(n_high) + " base points from " +
                            std::to_string(data.low.size()) + " + " +
                            std::to_string(data.high.size()));
  }
  Vector w_low = Vector::Ones(data.low.size());
  Vector w_high = Vector::Ones(data.high.size());
  if (params != nullptr) {
    const double rho = params->rho;
    w_low = params->low_kernel.self_cov(data.low.x);
    w_high = rho * rho * params->low_kernel.self_cov(data.high.x) +
             params->diff_kernel.self_cov(data.high.x);
  }
  BaseSelection out;
  out.seed = seed;
  out.low = weighted_draw(w_low, n_low, derive_seed(seed, 0));
  out.high = weighted_draw(w_high, n_high, derive_seed(seed, 1));
  return out;
}

VfDataset subset(const VfDataset& data, const BaseSelection& selection) {
  return VfDataset{
      Dataset{rows_of(data.low.x, selection.low), entries_of(data.low.y, selection.low)},
      Dataset{rows_of(data.high.x, selection.high), entries_of(data.high.y, selection.high)}};
}

SvfgpModel::SvfgpModel(VfgpParams params, BaseSelection selection, VfDataset training)
    : SvfgpModel(params, std::move(selection), training,
                 VfScaling::identity(training.dimension())) {}

SvfgpModel::SvfgpModel(VfgpParams params, BaseSelection selection, VfDataset training,
                       VfScaling scaling, VfgpFitReport report)
    : params_(std::move(params)),
      selection_(std::move(selection)),
      training_(std::move(training)),
      scaling_(std::move(scaling)),
      report_(report) {
  training_.validate();
  if (params_.dimension() != training_.dimension()) {
    throw DimensionMismatch("SvfgpModel: kernel and training data dimensions differ");
  }
  for (Index i : selection_.low) {
    if (i < 0 || i >= training_.low.size()) throw InvalidArgument("SvfgpModel: bad base index");
  }
  for (Index i : selection_.high) {
    if (i < 0 || i >= training_.high.size()) throw InvalidArgument("SvfgpModel: bad base index");
  }
  if (selection_.size() < 1) throw InvalidArgument("SvfgpModel: empty base selection");
  const double low_noise = params_.low_noise.variance;
  const double high_noise = params_.high_noise_variance();
  if (!(low_noise > 0.0) || !(high_noise > 0.0)) {
    throw InvalidArgument("SvfgpModel: noise variances must be positive");
  }

  xl_ = scaling_.inputs.apply(training_.low.x);
  xh_ = scaling_.inputs.apply(training_.high.x);
  base_low_ = rows_of(xl_, selection_.low);
  base_high_ = rows_of(xh_, selection_.high);

  Matrix k11 = joint_block(params_, base_low_, base_high_, base_low_, base_high_);
  symmetrize_lower(k11);
  base_factor_ = cholesky(SpdMatrix(std::move(k11)));

  const Index nl = xl_.rows();
  const Index n = nl + xh_.rows();
  Vector r(n);
  r.head(nl).setConstant(1.0 / std::sqrt(low_noise));
  r.tail(n - nl).setConstant(1.0 / std::sqrt(high_noise));
  Vector y(n);
  y << scaling_.low.apply(training_.low.y), scaling_.high.apply(training_.high.y);

  // vt = L_11^{-1} K_1 R, the transpose of V.
  Matrix vt = joint_block(params_, base_low_, base_high_, xl_, xh_);
  // A jittered base factor needs the same shift on the base points' own columns.
  if (const double jitter = base_factor_.jitter(); jitter > 0.0) {
    const Index bl = static_cast<Index>(selection_.low.size());
    for (Index j = 0; j < bl; ++j) vt(j, selection_.low[static_cast<std::size_t>(j)]) += jitter;
    for (Index j = 0; j < static_cast<Index>(selection_.high.size()); ++j) {
      vt(bl + j, nl + selection_.high[static_cast<std::size_t>(j)]) += jitter;
    }
  }
  vt *= r.asDiagonal();
  base_factor_.lower().triangularView<Eigen::Lower>().solveInPlace(vt);

  const Index m = base_factor_.dim();
  Matrix core = Matrix::Identity(m, m);
  core.selfadjointView<Eigen::Lower>().rankUpdate(vt);
  symmetrize_lower(core);
  core_factor_ = cholesky(SpdMatrix(std::move(core)));
  projected_ = core_factor_.solve(Vector(vt * r.cwiseProduct(y)));
}

Matrix SvfgpModel::scaled_queries(const Matrix& x_star) const {
  if (x_star.cols() != params_.dimension()) {
    throw DimensionMismatch("SvfgpModel::predict: query dimension " +
                            std::to_string(x_star.cols()) + ", model dimension " +
                            std::to_string(params_.dimension()));
  }
  return scaling_.inputs.apply(x_star);
}

// L_11^{-1} K_1(x*)^T, one column per query.
Matrix SvfgpModel::base_cross(const Matrix& xs) const {
  Matrix w = joint_block(params_, base_low_, base_high_, Matrix(0, xs.cols()), xs);
  base_factor_.lower().triangularView<Eigen::Lower>().solveInPlace(w);
  return w;
}

Vector SvfgpModel::predict_mean(const Matrix& x_star) const {
  const Matrix w = base_cross(scaled_queries(x_star));
  return scaling_.high.restore(w.transpose() * projected_);
}

Vector SvfgpModel::predict_variance(const Matrix& x_star) const {
  Matrix w = base_cross(scaled_queries(x_star));
  core_factor_.lower().triangularView<Eigen::Lower>().solveInPlace(w);
  Vector var = w.colwise().squaredNorm().transpose();
  var.array() += params_.high_noise_variance();
  const double s = scaling_.high.scale;
  return var * (s * s);
}

NystromError SvfgpModel::nystrom_diagnostic(const Matrix& probes) const {
  const Matrix ps = scaled_queries(probes);
  const Matrix w = base_cross(ps);
  Matrix b = joint_block(params_, base_low_, base_high_, xl_, xh_);
  base_factor_.lower().triangularView<Eigen::Lower>().solveInPlace(b);
  NystromError out;
  out.cross = relative_error(joint_cross_cov(params_, ps, xl_, xh_), w.transpose() * b);
  out.self = relative_error(params_.high_cov(ps, ps), w.transpose() * w);
  return out;
}

SvfgpModel fit_svfgp(const VfDataset& data, Index n_low, Index n_high, const FitConfig& config) {
  BaseSelection selection = select_base_points(data, n_low, n_high, config.seed);
  const VfgpModel fitted = fit_vfgp(subset(data, selection), config);
  return SvfgpModel(fitted.params(), std::move(selection), data, fitted.scaling(),
                    fitted.report());
}

}  // namespace vfsm
