#include "vfsm/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "vfsm/sampling.hpp"

namespace vfsm {

namespace {

constexpr double kArmijo = 1e-4;
constexpr int kMaxBacktracks = 40;

struct Pair {
  Vector s;
  Vector y;
  double rho;
};

// Components pinned at a bound with the gradient pushing outward.
std::vector<bool> active_set(const Vector& x, const Vector& g, const Bounds& b) {
  std::vector<bool> active(static_cast<std::size_t>(x.size()), false);
  for (Index i = 0; i < x.size(); ++i) {
    active[static_cast<std::size_t>(i)] =
        (x(i) <= b.lower(i) && g(i) > 0.0) || (x(i) >= b.upper(i) && g(i) < 0.0);
  }
  return active;
}

Vector masked(Vector v, const std::vector<bool>& active) {
  for (Index i = 0; i < v.size(); ++i) {
    if (active[static_cast<std::size_t>(i)]) v(i) = 0.0;
  }
  return v;
}

Vector two_loop(const Vector& g, const std::deque<Pair>& memory) {
  Vector q = g;
  std::vector<double> alpha(memory.size());
  for (std::size_t k = memory.size(); k-- > 0;) {
    alpha[k] = memory[k].rho * memory[k].s.dot(q);
    q -= alpha[k] * memory[k].y;
  }
  if (!memory.empty()) {
    const Pair& last = memory.back();
    q *= last.s.dot(last.y) / last.y.squaredNorm();
  }
  for (std::size_t k = 0; k < memory.size(); ++k) {
    const double beta = memory[k].rho * memory[k].y.dot(q);
    q += (alpha[k] - beta) * memory[k].s;
  }
  return -q;
}

}  // namespace

Vector clamp_to(const Vector& x, const Bounds& bounds) {
  return x.cwiseMax(bounds.lower).cwiseMin(bounds.upper);
}

OptimizeResult minimize_bounded(const Objective& objective, const Vector& start,
                                const Bounds& bounds, const OptimizeOptions& options) {
  if (bounds.lower.size() != start.size() || bounds.upper.size() != start.size()) {
    throw DimensionMismatch("minimize_bounded: bounds do not match the start point");
  }
  OptimizeResult result;
  Vector x = clamp_to(start, bounds);
  Vector g(x.size());
  double f = objective(x, g);
  result.evaluations = 1;
  if (!std::isfinite(f) || !g.allFinite()) {
    throw NotPositiveDefinite("minimize_bounded: objective is not finite at the start point");
  }
  result.initial_value = f;

  auto safe_eval = [&](const Vector& p, Vector& grad) {
    ++result.evaluations;
    try {
      const double v = objective(p, grad);
      if (!std::isfinite(v) || !grad.allFinite()) return std::numeric_limits<double>::infinity();
      return v;
    } catch (const Error&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  std::deque<Pair> memory;
  for (int it = 0; it < options.max_iterations; ++it) {
    result.iterations = it + 1;
    const auto active = active_set(x, g, bounds);
    const Vector pg = masked(g, active);
    const double scale = std::max(1.0, std::abs(f));
    if (pg.lpNorm<Eigen::Infinity>() <= options.gradient_tolerance * scale) {
      result.converged = true;
      break;
    }

    Vector direction = masked(two_loop(pg, memory), active);
    if (memory.empty() || !(direction.dot(pg) < 0.0)) {
      memory.clear();
      direction = -pg;
      direction /= std::max(1.0, pg.norm());
    }

    bool accepted = false;
    Vector x_new;
    Vector g_new(x.size());
    double f_new = f;
    double step = 1.0;
    for (int bt = 0; bt < kMaxBacktracks; ++bt, step *= 0.5) {
      x_new = clamp_to(x + step * direction, bounds);
      if ((x_new - x).lpNorm<Eigen::Infinity>() == 0.0) break;
      f_new = safe_eval(x_new, g_new);
      if (f_new <= f + kArmijo * g.dot(x_new - x)) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (!memory.empty()) {
        memory.clear();
        continue;
      }
      // Steepest descent could not make progress: a stationary point to
      // working precision.
      result.converged = true;
      break;
    }

    const Vector s = x_new - x;
    const Vector y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      memory.push_back(Pair{s, y, 1.0 / sy});
      if (static_cast<int>(memory.size()) > options.memory) memory.pop_front();
    }
    const double improvement = f - f_new;
    x = std::move(x_new);
    g = std::move(g_new);
    f = f_new;
    if (improvement <= options.value_tolerance * std::max(1.0, std::abs(f))) {
      result.converged = true;
      break;
    }
  }
  result.x = std::move(x);
  result.value = f;
  return result;
}

std::vector<Vector> multistart_points(const Vector& center, const Vector& half_width,
                                      const Bounds& bounds, int count, std::uint64_t seed) {
  std::vector<Vector> out;
  if (count <= 0) return out;
  out.push_back(clamp_to(center, bounds));
  if (count == 1) return out;
  Rng rng(seed);
  const Matrix unit = latin_hypercube_unit(count - 1, center.size(), rng);
  for (Index i = 0; i < unit.rows(); ++i) {
    Vector p = center.array() + half_width.array() * (2.0 * unit.row(i).transpose().array() - 1.0);
    out.push_back(clamp_to(p, bounds));
  }
  return out;
}

}  // namespace vfsm
