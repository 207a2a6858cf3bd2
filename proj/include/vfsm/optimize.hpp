#ifndef VFSM_OPTIMIZE_HPP
#define VFSM_OPTIMIZE_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "vfsm/numerics.hpp"

namespace vfsm {

struct Bounds {
  Vector lower;
  Vector upper;
};

struct OptimizeOptions {
  int max_iterations = 200;
  int memory = 8;
  /// Stop when the projected gradient's max-norm drops below this times
  /// max(1, |f|).
  double gradient_tolerance = 1e-6;
  /// Stop when one accepted step improves f by less than this times max(1, |f|).
  double value_tolerance = 1e-11;
};

struct OptimizeResult {
  Vector x;
  double value = 0.0;
  double initial_value = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
};

/// Objective returning f(x) and writing its gradient. It may throw vfsm::Error;
/// inside a line search that counts as an infinite value.
using Objective = std::function<double(const Vector& x, Vector& gradient)>;

/// Box-constrained limited-memory BFGS with projected backtracking line
/// search. The returned value never exceeds the value at the (clamped) start.
/// Errors thrown at the start point propagate.
OptimizeResult minimize_bounded(const Objective& objective, const Vector& start,
                                const Bounds& bounds, const OptimizeOptions& options = {});

/// Clamps x into the box.
Vector clamp_to(const Vector& x, const Bounds& bounds);

/// Start points for a multi-start search: the first row is `center`, the rest
/// are a Latin hypercube over center +/- half_width, clamped into the box.
std::vector<Vector> multistart_points(const Vector& center, const Vector& half_width,
                                      const Bounds& bounds, int count, std::uint64_t seed);

}  // namespace vfsm

#endif  // VFSM_OPTIMIZE_HPP
