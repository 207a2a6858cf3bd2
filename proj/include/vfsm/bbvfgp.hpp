#ifndef VFSM_BBVFGP_HPP
#define VFSM_BBVFGP_HPP

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "vfsm/vfgp.hpp"

namespace vfsm {

/// Memoizing wrapper around a low-fidelity function. Each distinct point
/// (compared bit for bit) reaches the wrapped function once per session.
class LowFidelityOracle {
 public:
  using Function = std::function<double(const Point&)>;

  /// With serialize set, calls into the wrapped function never overlap;
  /// otherwise it must tolerate concurrent calls itself.
  explicit LowFidelityOracle(Function f, bool serialize = true);

  /// Throws OracleFailure naming the point when the function throws or
  /// returns a non-finite value.
  double operator()(const Point& x);

  /// Calls that reached the wrapped function.
  std::size_t evaluations() const;
  /// Calls answered, including memoized ones.
  std::size_t requests() const;

 private:
  Function f_;
  bool serialize_;
  mutable std::mutex memo_mutex_;
  std::mutex call_mutex_;
  std::map<std::vector<double>, double> memo_;
  std::size_t evaluations_ = 0;
  std::size_t requests_ = 0;
};

/// Runs `command` through /bin/sh as a long-lived child. Each call writes the
/// point as one whitespace-separated line to its stdin and reads one value
/// per line from its stdout. The returned function is not reentrant; wrap it
/// in a serializing LowFidelityOracle.
LowFidelityOracle::Function make_process_oracle(const std::string& command);

/// Formats a point as "(x1, x2, ...)" for error messages.
std::string format_point(const Point& x);

struct BbPrediction {
  double mean = 0.0;
  double variance = 0.0;
  double oracle_value = 0.0;
  /// The new diagonal of the extended factor had to be clamped.
  bool clamped = false;
};

struct BbBatch {
  std::vector<BbPrediction> points;
  /// Calls that reached the wrapped oracle function during this batch.
  std::size_t oracle_calls = 0;

  Vector mean() const;
  Vector variance() const;
};

struct BbOptions {
  /// Treat oracle values as noisy low-fidelity observations, so the new
  /// diagonal entry is k_l(x, x) + sigma_l^2. When false the entry is
  /// k_l(x, x) and the oracle value is conditioned on as the exact latent
  /// low-fidelity value.
  bool noisy_oracle = true;
};

/// Fitted VFGP plus a low-fidelity oracle. Every query appends the oracle's
/// low-fidelity value at that point to the training sample and extends the
/// joint factor and its inverse by one row in O(n^2). Extensions are scratch
/// state: the base factors are never modified and queries do not chain.
class BbVfgpModel {
 public:
  BbVfgpModel(VfgpModel base, std::shared_ptr<LowFidelityOracle> oracle, BbOptions options = {});

  const VfgpModel& base() const { return base_; }
  const BbOptions& options() const { return options_; }
  LowFidelityOracle& oracle() const { return *oracle_; }
  /// The joint factor of the base model with L^{-1} attached.
  const CholeskyFactor& factor() const { return factor_; }

  /// Mean and variance of the high-fidelity value at x (original units, no
  /// observation noise), conditioned on the oracle value at x.
  BbPrediction predict_one(const Point& x) const;
  /// Oracle values are gathered first, in row order; each row then gives the
  /// same result as predict_one.
  BbBatch predict_batch(const Matrix& x_star) const;

 private:
  BbPrediction condition(const Point& x, double oracle_value) const;

  VfgpModel base_;
  std::shared_ptr<LowFidelityOracle> oracle_;
  BbOptions options_;
  CholeskyFactor factor_;
  Vector projected_;
};

}  // namespace vfsm

#endif  // VFSM_BBVFGP_HPP
