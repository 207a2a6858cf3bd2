#include "vfsm/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <limits>
#include <memory>
#include <numbers>
#include <numeric>
#include <random>
#include <tuple>
#include <utility>

namespace vfsm {

namespace {

// Independent random streams derived from a run seed.
constexpr std::uint64_t kToyHighStream = 10;
constexpr std::uint64_t kToyLowStream = 11;
constexpr std::uint64_t kLowDesignStream = 20;
constexpr std::uint64_t kHighDesignStream = 21;
constexpr std::uint64_t kTestDesignStream = 22;
constexpr std::uint64_t kHighNoiseStream = 23;
constexpr std::uint64_t kLowNoiseStream = 24;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Vector evaluate(const Matrix& x, const std::function<double(const Point&)>& f) {
  Vector out(x.rows());
  for (Index i = 0; i < x.rows(); ++i) out(i) = f(x.row(i));
  return out;
}

// Evaluates a noisy function with a per-point noise stream.
Vector evaluate_seeded(const Matrix& x, const std::function<double(const Point&, Rng&)>& f,
                       std::uint64_t seed) {
  return evaluate(x, [&](const Point& p) {
    Rng rng(point_seed(p, seed));
    return f(p, rng);
  });
}

Dataset head(const Dataset& d, Index n) {
  const Index m = std::min(n, d.size());
  return Dataset{d.x.topRows(m), d.y.head(m)};
}

// One discarded fit so that the timed fits do not pay first-touch costs.
void warm_up(const VfDataset& data, const FitConfig& config) {
  try {
    const VfDataset small{head(data.low, 20), head(data.high, 5)};
    FitConfig quick = config;
    quick.restarts = 1;
    (void)fit_vfgp(small, quick);
  } catch (const std::exception&) {
  }
}

void run_methods(const ExperimentPlan& plan, std::uint64_t seed, const VfDataset& data,
                 const Dataset& test, const LowFidelityOracle::Function& oracle,
                 BenchmarkReport& report) {
  FitConfig config = plan.fit;
  config.seed = seed;

  std::optional<VfgpModel> vf;
  std::string vf_error;
  double vf_seconds = 0.0;
  auto ensure_vf = [&]() -> const VfgpModel& {
    if (!vf && vf_error.empty()) {
      const auto t0 = Clock::now();
      try {
        vf.emplace(fit_vfgp(data, config));
      } catch (const std::exception& e) {
        vf_error = e.what();
      }
      vf_seconds = seconds_since(t0);
    }
    if (!vf) throw Error(vf_error);
    return *vf;
  };

  for (Method method : plan.methods) {
    BenchmarkCell cell;
    cell.method = method;
    cell.regime = plan.regime;
    cell.n_low = data.low.size();
    cell.n_high = data.high.size();
    cell.seed = seed;
    try {
      Vector predicted;
      switch (method) {
        case Method::gp: {
          const auto t0 = Clock::now();
          const GpModel model = fit_gp(data.high, config);
          cell.fit_seconds = seconds_since(t0);
          predicted = model.predict_mean(test.x);
          break;
        }
        case Method::vfgp: {
          const VfgpModel& model = ensure_vf();
          cell.fit_seconds = vf_seconds;
          predicted = model.predict_mean(test.x);
          break;
        }
        case Method::svfgp: {
          const auto t0 = Clock::now();
          const SvfgpModel model = fit_svfgp(data, std::min(plan.n_base_low, data.low.size()),
                                             data.high.size(), config);
          cell.fit_seconds = seconds_since(t0);
          predicted = model.predict_mean(test.x);
          break;
        }
        case Method::bbvfgp: {
          const VfgpModel& base = ensure_vf();
          const auto t0 = Clock::now();
          const BbVfgpModel model(base, std::make_shared<LowFidelityOracle>(oracle));
          cell.fit_seconds = vf_seconds + seconds_since(t0);
          predicted = model.predict_batch(test.x).mean();
          break;
        }
      }
      cell.rrms = rrms(test, predicted);
    } catch (const std::exception& e) {
      cell.error = e.what();
    }
    report.cells.push_back(std::move(cell));
  }
}

}  // namespace

Box Box::unit(Index d) { return Box{Vector::Zero(d), Vector::Ones(d)}; }

bool Box::contains(const Point& x) const {
  if (x.size() != dimension()) return false;
  for (Index k = 0; k < x.size(); ++k) {
    if (x(k) < lower(k) || x(k) > upper(k)) return false;
  }
  return true;
}

double toy_high(double x) {
  const double a = 6.0 * x - 2.0;
  return a * a * std::sin(12.0 * x - 4.0);
}

double toy_low(double x) { return 0.5 * toy_high(x) + 10.0 * (x - 1.0); }

double rastrigin_high_mean(const Point& x) {
  double s = 20.0;
  for (Index k = 0; k < x.size(); ++k) {
    s += x(k) * x(k) - 10.0 * std::cos(2.0 * std::numbers::pi * x(k));
  }
  return s;
}

double rastrigin_low_mean(const Point& x) {
  double shift = 0.0;
  for (Index k = 0; k < x.size(); ++k) shift += (x(k) + 1.0) * (x(k) + 1.0);
  return rastrigin_high_mean(x) + 0.2 * shift;
}

double rastrigin_high(const Point& x, Rng& rng) {
  std::normal_distribution<double> noise(0.0, std::sqrt(kRastriginHighNoise));
  return rastrigin_high_mean(x) + noise(rng);
}

double rastrigin_low(const Point& x, Rng& rng) {
  std::normal_distribution<double> noise(0.0, std::sqrt(kRastriginLowNoise));
  return rastrigin_low_mean(x) + noise(rng);
}

std::uint64_t point_seed(const Point& x, std::uint64_t seed) {
  std::uint64_t h = mix_seed(seed);
  for (Index k = 0; k < x.size(); ++k) {
    double v = x(k);
    if (v == 0.0) v = 0.0;  // -0.0 and 0.0 are the same point
    std::uint64_t bits = 0;
    std::memcpy(&bits, &v, sizeof bits);
    h = mix_seed(h ^ bits);
  }
  return h;
}

TestProblem toy_problem() {
  return TestProblem{"toy", Box::unit(1),
                     [](const Point& x, Rng&) { return toy_high(x(0)); },
                     [](const Point& x, Rng&) { return toy_low(x(0)); }, 0.0, 0.0};
}

TestProblem rastrigin_problem() {
  return TestProblem{"rastrigin", Box::unit(kRastriginDimension),
                     [](const Point& x, Rng& rng) { return rastrigin_high(x, rng); },
                     [](const Point& x, Rng& rng) { return rastrigin_low(x, rng); },
                     kRastriginHighNoise, kRastriginLowNoise};
}

LowFidelityOracle::Function builtin_oracle(const std::string& name, std::uint64_t seed) {
  if (name == "toy_low") {
    return [](const Point& x) {
      if (x.size() != 1) throw DimensionMismatch("toy_low: expects a one-dimensional point");
      return toy_low(x(0));
    };
  }
  if (name == "rastrigin_low") {
    return [seed](const Point& x) {
      if (x.size() != kRastriginDimension) {
        throw DimensionMismatch("rastrigin_low: expects a six-dimensional point");
      }
      Rng rng(point_seed(x, seed));
      return rastrigin_low(x, rng);
    };
  }
  throw InvalidArgument("unknown built-in oracle '" + name + "'");
}

Matrix lhs(Index n, const Box& box, std::uint64_t seed) {
  if (n < 1) throw InvalidArgument("lhs: n must be >= 1");
  Rng rng(seed);
  const Matrix unit = latin_hypercube_unit(n, box.dimension(), rng);
  return (unit.array().rowwise() * (box.upper - box.lower).transpose().array()).rowwise() +
         box.lower.transpose().array();
}

Matrix uniform_sample(Index n, const Box& box, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Matrix out(n, box.dimension());
  for (Index i = 0; i < n; ++i) {
    for (Index k = 0; k < box.dimension(); ++k) {
      out(i, k) = box.lower(k) + (box.upper(k) - box.lower(k)) * unit(rng);
    }
  }
  return out;
}

double rrms(const Vector& truth, const Vector& predicted) {
  if (truth.size() != predicted.size()) {
    throw DimensionMismatch("rrms: " + std::to_string(truth.size()) + " test values but " +
                            std::to_string(predicted.size()) + " predictions");
  }
  const double denom = (truth.array() - truth.mean()).square().sum();
  if (!(denom > 0.0)) throw DegenerateTestSample("rrms: test responses are all equal");
  return std::sqrt((predicted - truth).squaredNorm() / denom);
}

double rrms(const Dataset& test, const Vector& predicted) { return rrms(test.y, predicted); }

std::vector<std::vector<Index>> kfold_split(Index n, int folds, std::uint64_t seed) {
  if (folds < 2) throw InvalidArgument("kfold_split: need at least two folds");
  if (n < folds) throw InvalidArgument("kfold_split: fewer points than folds");
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<Index>> out(static_cast<std::size_t>(folds));
  for (std::size_t i = 0; i < order.size(); ++i) out[i % out.size()].push_back(order[i]);
  for (auto& f : out) std::sort(f.begin(), f.end());
  return out;
}

CvResult cv_rrms(const Dataset& sample, int folds, const SurrogateMethod& method,
                 std::uint64_t seed) {
  sample.validate();
  const auto split = kfold_split(sample.size(), folds, seed);
  CvResult out;
  for (const auto& held : split) {
    std::vector<bool> is_test(static_cast<std::size_t>(sample.size()), false);
    for (Index i : held) is_test[static_cast<std::size_t>(i)] = true;
    const Index n_test = static_cast<Index>(held.size());
    Dataset train{Matrix(sample.size() - n_test, sample.dimension()),
                  Vector(sample.size() - n_test)};
    Dataset test{Matrix(n_test, sample.dimension()), Vector(n_test)};
    Index a = 0;
    Index b = 0;
    for (Index i = 0; i < sample.size(); ++i) {
      if (is_test[static_cast<std::size_t>(i)]) {
        test.x.row(b) = sample.x.row(i);
        test.y(b++) = sample.y(i);
      } else {
        train.x.row(a) = sample.x.row(i);
        train.y(a++) = sample.y(i);
      }
    }
    out.folds.push_back(rrms(test, method(train, test.x)));
  }
  const double k = static_cast<double>(out.folds.size());
  out.mean = std::accumulate(out.folds.begin(), out.folds.end(), 0.0) / k;
  double ss = 0.0;
  for (double v : out.folds) ss += (v - out.mean) * (v - out.mean);
  out.std = std::sqrt(ss / (k - 1.0));
  return out;
}

std::string to_string(Method m) {
  switch (m) {
    case Method::gp: return "gp";
    case Method::vfgp: return "vfgp";
    case Method::svfgp: return "svfgp";
    case Method::bbvfgp: return "bbvfgp";
  }
  return "unknown";
}

std::string to_string(Regime r) {
  return r == Regime::interpolation ? "interpolation" : "extrapolation";
}

Method parse_method(const std::string& s) {
  for (Method m : {Method::gp, Method::vfgp, Method::svfgp, Method::bbvfgp}) {
    if (s == to_string(m)) return m;
  }
  throw InvalidArgument("unknown method '" + s + "' (expected gp, vfgp, svfgp or bbvfgp)");
}

Regime parse_regime(const std::string& s) {
  if (s == "interpolation") return Regime::interpolation;
  if (s == "extrapolation") return Regime::extrapolation;
  throw InvalidArgument("unknown regime '" + s + "'");
}

void ExperimentPlan::validate() const {
  if (problem != "toy" && problem != "rastrigin") {
    throw InvalidArgument("ExperimentPlan: unknown problem '" + problem + "'");
  }
  if (seeds.empty()) throw InvalidArgument("ExperimentPlan: no seeds");
  if (methods.empty()) throw InvalidArgument("ExperimentPlan: no methods");
  if (n_high < 2 || n_low < 2) throw InvalidArgument("ExperimentPlan: need n_low, n_high >= 2");
  if (n_high > n_low) throw InvalidArgument("ExperimentPlan: n_high must not exceed n_low");
  if (test_size < 2) throw InvalidArgument("ExperimentPlan: test_size must be >= 2");
  if (n_base_low < 2) throw InvalidArgument("ExperimentPlan: n_base_low must be >= 2");
}

std::vector<BenchmarkSummary> BenchmarkReport::summarize() const {
  std::vector<BenchmarkSummary> out;
  auto key = [](Method m, Regime r, Index nl, Index nh) { return std::make_tuple(m, r, nl, nh); };
  for (const BenchmarkCell& c : cells) {
    const auto k = key(c.method, c.regime, c.n_low, c.n_high);
    auto it = std::find_if(out.begin(), out.end(), [&](const BenchmarkSummary& s) {
      return key(s.method, s.regime, s.n_low, s.n_high) == k;
    });
    if (it != out.end()) continue;
    BenchmarkSummary s;
    s.method = c.method;
    s.regime = c.regime;
    s.n_low = c.n_low;
    s.n_high = c.n_high;
    std::vector<double> values;
    double seconds = 0.0;
    for (const BenchmarkCell& o : cells) {
      if (key(o.method, o.regime, o.n_low, o.n_high) != k) continue;
      ++s.runs;
      if (!o.rrms) {
        ++s.failures;
        continue;
      }
      values.push_back(*o.rrms);
      seconds += o.fit_seconds;
    }
    if (!values.empty()) {
      const double n = static_cast<double>(values.size());
      s.mean_rrms = std::accumulate(values.begin(), values.end(), 0.0) / n;
      s.mean_fit_seconds = seconds / n;
      if (values.size() >= 2) {
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean_rrms) * (v - s.mean_rrms);
        s.std_rrms = std::sqrt(ss / (n - 1.0));
      }
    } else {
      s.mean_rrms = std::numeric_limits<double>::quiet_NaN();
    }
    out.push_back(s);
  }
  return out;
}

bool BenchmarkReport::any_failed() const {
  return std::any_of(cells.begin(), cells.end(), [](const BenchmarkCell& c) { return !c.rrms; });
}

void BenchmarkReport::append(const BenchmarkReport& other) {
  plans.insert(plans.end(), other.plans.begin(), other.plans.end());
  cells.insert(cells.end(), other.cells.begin(), other.cells.end());
}

BenchmarkReport run_toy_experiment(const ExperimentPlan& plan) {
  plan.validate();
  if (plan.problem != "toy") {
    throw InvalidArgument("run_toy_experiment: plan is not for the toy problem");
  }
  const Box box = Box::unit(1);
  Dataset test;
  test.x = Vector::LinSpaced(plan.test_size, 0.0, 1.0);
  test.y = evaluate(test.x, [](const Point& x) { return toy_high(x(0)); });
  const auto oracle = builtin_oracle("toy_low");

  BenchmarkReport report;
  report.plans.push_back(plan);
  bool warmed = false;
  for (std::uint64_t seed : plan.seeds) {
    const Matrix xh = uniform_sample(plan.n_high, box, derive_seed(seed, kToyHighStream));
    Matrix xl(plan.n_low, 1);
    xl << xh, uniform_sample(plan.n_low - plan.n_high, box, derive_seed(seed, kToyLowStream));
    const VfDataset data{Dataset{xl, evaluate(xl, [](const Point& x) { return toy_low(x(0)); })},
                         Dataset{xh, evaluate(xh, [](const Point& x) { return toy_high(x(0)); })}};
    if (!warmed) {
      warm_up(data, plan.fit);
      warmed = true;
    }
    run_methods(plan, seed, data, test, oracle, report);
  }
  return report;
}

BenchmarkReport run_highdim_experiment(const ExperimentPlan& plan) {
  plan.validate();
  if (plan.problem != "rastrigin") {
    throw InvalidArgument("run_highdim_experiment: plan is not for the Rastrigin problem");
  }
  const TestProblem problem = rastrigin_problem();
  Box train_box = problem.box;
  Box test_box = problem.box;
  if (plan.regime == Regime::extrapolation) {
    train_box.upper(0) = 0.5;
    test_box.lower(0) = 0.5;
  }

  BenchmarkReport report;
  report.plans.push_back(plan);
  bool warmed = false;
  for (std::uint64_t seed : plan.seeds) {
    const std::uint64_t low_noise = derive_seed(seed, kLowNoiseStream);
    const Matrix xl = lhs(plan.n_low, train_box, derive_seed(seed, kLowDesignStream));
    const Matrix xh = lhs(plan.n_high, train_box, derive_seed(seed, kHighDesignStream));
    const VfDataset data{Dataset{xl, evaluate_seeded(xl, problem.low, low_noise)},
                         Dataset{xh, evaluate_seeded(xh, problem.high,
                                                     derive_seed(seed, kHighNoiseStream))}};
    Dataset test;
    test.x = lhs(plan.test_size, test_box, derive_seed(seed, kTestDesignStream));
    test.y = evaluate(test.x, rastrigin_high_mean);
    if (!warmed) {
      warm_up(data, plan.fit);
      warmed = true;
    }
    run_methods(plan, seed, data, test, builtin_oracle("rastrigin_low", low_noise), report);
  }
  return report;
}

BenchmarkReport run_experiment(const ExperimentPlan& plan) {
  return plan.problem == "toy" ? run_toy_experiment(plan) : run_highdim_experiment(plan);
}

}  // namespace vfsm
