#ifndef VFSM_EXPERIMENTS_HPP
#define VFSM_EXPERIMENTS_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "vfsm/bbvfgp.hpp"
#include "vfsm/gp.hpp"
#include "vfsm/sampling.hpp"
#include "vfsm/svfgp.hpp"
#include "vfsm/vfgp.hpp"

namespace vfsm {

/// Axis-aligned box [lower, upper].
struct Box {
  Vector lower;
  Vector upper;

  static Box unit(Index d);
  Index dimension() const { return lower.size(); }
  bool contains(const Point& x) const;
};

// One-dimensional toy pair.
double toy_high(double x);
double toy_low(double x);

// Six-dimensional Rastrigin variant on [0, 1]^6. The *_mean functions are the
// noise-free parts; the Rng overloads add Gaussian noise of the stated variance.
inline constexpr Index kRastriginDimension = 6;
inline constexpr double kRastriginHighNoise = 0.001;
inline constexpr double kRastriginLowNoise = 0.002;
double rastrigin_high_mean(const Point& x);
double rastrigin_low_mean(const Point& x);
double rastrigin_high(const Point& x, Rng& rng);
double rastrigin_low(const Point& x, Rng& rng);

/// Seed that depends on the bit pattern of every coordinate of x; used to
/// make noisy functions reproducible per point.
std::uint64_t point_seed(const Point& x, std::uint64_t seed);

struct TestProblem {
  std::string name;
  Box box;
  std::function<double(const Point&, Rng&)> high;
  std::function<double(const Point&, Rng&)> low;
  double high_noise = 0.0;
  double low_noise = 0.0;

  Index dimension() const { return box.dimension(); }
};

TestProblem toy_problem();
TestProblem rastrigin_problem();

/// Low-fidelity function by name: "toy_low" or "rastrigin_low". The Rastrigin
/// noise is drawn from a stream seeded by (seed, point), so repeated or
/// training points see the same value. Throws InvalidArgument for other names.
LowFidelityOracle::Function builtin_oracle(const std::string& name, std::uint64_t seed = 0);

/// Latin hypercube over box; one point per stratum in each dimension.
Matrix lhs(Index n, const Box& box, std::uint64_t seed);
/// i.i.d. uniform points in box.
Matrix uniform_sample(Index n, const Box& box, std::uint64_t seed);

/// sqrt(sum (yhat - y)^2 / sum (mean(y) - y)^2). Throws DegenerateTestSample
/// when the test responses are all equal.
double rrms(const Vector& truth, const Vector& predicted);
double rrms(const Dataset& test, const Vector& predicted);

/// Fits on the training part and predicts at the given inputs.
using SurrogateMethod = std::function<Vector(const Dataset& train, const Matrix& x_test)>;

struct CvResult {
  std::vector<double> folds;
  double mean = 0.0;
  /// Sample standard deviation over folds.
  double std = 0.0;
};

/// Shuffled k-fold partition of 0..n-1; fold sizes differ by at most one.
std::vector<std::vector<Index>> kfold_split(Index n, int folds, std::uint64_t seed);
CvResult cv_rrms(const Dataset& sample, int folds, const SurrogateMethod& method,
                 std::uint64_t seed);

enum class Method { gp, vfgp, svfgp, bbvfgp };
enum class Regime { interpolation, extrapolation };

std::string to_string(Method m);
std::string to_string(Regime r);
Method parse_method(const std::string& s);
Regime parse_regime(const std::string& s);

struct ExperimentPlan {
  std::string problem = "toy";
  /// Total low-fidelity sample size (for the toy problem it includes the
  /// high-fidelity points).
  Index n_low = 100;
  Index n_high = 15;
  Regime regime = Regime::interpolation;
  std::vector<Method> methods{Method::gp, Method::vfgp, Method::bbvfgp};
  std::vector<std::uint64_t> seeds{0};
  Index test_size = 1000;
  /// SVFGP low-fidelity base size; capped at n_low. All high points are used.
  Index n_base_low = 1000;
  /// Optimizer settings; the seed is replaced by each run's seed.
  FitConfig fit;

  void validate() const;
};

struct BenchmarkCell {
  Method method = Method::gp;
  Regime regime = Regime::interpolation;
  Index n_low = 0;
  Index n_high = 0;
  std::uint64_t seed = 0;
  std::optional<double> rrms;
  double fit_seconds = 0.0;
  /// Non-empty when the run failed.
  std::string error;
};

struct BenchmarkSummary {
  Method method = Method::gp;
  Regime regime = Regime::interpolation;
  Index n_low = 0;
  Index n_high = 0;
  int runs = 0;
  int failures = 0;
  double mean_rrms = 0.0;
  /// Absent with fewer than two successful runs.
  std::optional<double> std_rrms;
  double mean_fit_seconds = 0.0;
};

struct BenchmarkReport {
  std::vector<ExperimentPlan> plans;
  std::vector<BenchmarkCell> cells;

  /// One entry per (method, regime, n_low, n_high), in first-seen order.
  std::vector<BenchmarkSummary> summarize() const;
  bool any_failed() const;
  void append(const BenchmarkReport& other);
};

/// Per seed: i.i.d. uniform high sample of size n_high, low sample = the high
/// points plus n_low - n_high further uniform points, exact responses; RRMS
/// on test_size equispaced points of [0, 1].
BenchmarkReport run_toy_experiment(const ExperimentPlan& plan);

/// Per seed: separate Latin hypercube samples of sizes n_low and n_high with
/// noisy responses, test inputs from an independent Latin hypercube scored
/// against the noise-free high-fidelity function. Extrapolation restricts the
/// first input to [0, 0.5] for training and [0.5, 1] for testing.
BenchmarkReport run_highdim_experiment(const ExperimentPlan& plan);

/// Dispatches on plan.problem ("toy" or "rastrigin").
BenchmarkReport run_experiment(const ExperimentPlan& plan);

}  // namespace vfsm

#endif  // VFSM_EXPERIMENTS_HPP
