#include "vfsm/bbvfgp.hpp"

#include <csignal>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <sstream>
#include <utility>

#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

namespace vfsm {

namespace {

std::vector<double> key_of(const Point& x) {
  return std::vector<double>(x.data(), x.data() + x.size());
}

// Child process speaking the line protocol over a pair of pipes.
class ChildProcess {
 public:
  explicit ChildProcess(const std::string& command) {
    int to_child[2];
    int from_child[2];
    if (pipe(to_child) != 0) throw OracleFailure("oracle: pipe() failed");
    if (pipe(from_child) != 0) {
      close(to_child[0]);
      close(to_child[1]);
      throw OracleFailure("oracle: pipe() failed");
    }
    std::signal(SIGPIPE, SIG_IGN);
    pid_ = fork();
    if (pid_ < 0) throw OracleFailure("oracle: fork() failed");
    if (pid_ == 0) {
      dup2(to_child[0], STDIN_FILENO);
      dup2(from_child[1], STDOUT_FILENO);
      close(to_child[0]);
      close(to_child[1]);
      close(from_child[0]);
      close(from_child[1]);
      execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
      _exit(127);
    }
    close(to_child[0]);
    close(from_child[1]);
    in_ = fdopen(to_child[1], "w");
    out_ = fdopen(from_child[0], "r");
    if (in_ == nullptr || out_ == nullptr) throw OracleFailure("oracle: fdopen() failed");
  }

  ChildProcess(const ChildProcess&) = delete;
  ChildProcess& operator=(const ChildProcess&) = delete;

  ~ChildProcess() {
    if (in_ != nullptr) std::fclose(in_);
    if (out_ != nullptr) std::fclose(out_);
    if (pid_ > 0) {
      int status = 0;
      waitpid(pid_, &status, 0);
    }
  }

  double query(const Point& x) {
    for (Index k = 0; k < x.size(); ++k) {
      std::fprintf(in_, k == 0 ? "%.17g" : " %.17g", x(k));
    }
    std::fputc('\n', in_);
    if (std::fflush(in_) != 0) {
      throw OracleFailure("oracle process stopped accepting input at " + format_point(x));
    }
    char* line = nullptr;
    std::size_t cap = 0;
    const ssize_t len = getline(&line, &cap, out_);
    std::string text = len > 0 ? std::string(line, static_cast<std::size_t>(len)) : std::string();
    std::free(line);
    if (len <= 0) throw OracleFailure("oracle process closed its output at " + format_point(x));
    const char* begin = text.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    while (end != nullptr && *end != '\0' && std::isspace(static_cast<unsigned char>(*end))) ++end;
    if (end == begin || (end != nullptr && *end != '\0')) {
      throw OracleFailure("oracle process returned an unparsable value '" + text + "' at " +
                          format_point(x));
    }
    return v;
  }

 private:
  pid_t pid_ = -1;
  FILE* in_ = nullptr;
  FILE* out_ = nullptr;
};

}  // namespace

std::string format_point(const Point& x) {
  std::ostringstream os;
  os.precision(17);
  os << '(';
  for (Index k = 0; k < x.size(); ++k) os << (k ? ", " : "") << x(k);
  os << ')';
  return os.str();
}

LowFidelityOracle::LowFidelityOracle(Function f, bool serialize)
    : f_(std::move(f)), serialize_(serialize) {
  if (!f_) throw InvalidArgument("LowFidelityOracle: empty function");
}

double LowFidelityOracle::operator()(const Point& x) {
  auto key = key_of(x);
  {
    std::lock_guard<std::mutex> lock(memo_mutex_);
    ++requests_;
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
  }
  double v = 0.0;
  try {
    if (serialize_) {
      std::lock_guard<std::mutex> lock(call_mutex_);
      v = f_(x);
    } else {
      v = f_(x);
    }
  } catch (const OracleFailure&) {
    throw;
  } catch (const std::exception& e) {
    throw OracleFailure("oracle failed at " + format_point(x) + ": " + e.what());
  }
  if (!std::isfinite(v)) {
    throw OracleFailure("oracle returned a non-finite value at " + format_point(x));
  }
  std::lock_guard<std::mutex> lock(memo_mutex_);
  // A concurrent caller may have stored the same point first; keep that value.
  auto [it, inserted] = memo_.emplace(std::move(key), v);
  if (inserted) ++evaluations_;
  return it->second;
}

std::size_t LowFidelityOracle::evaluations() const {
  std::lock_guard<std::mutex> lock(memo_mutex_);
  return evaluations_;
}

std::size_t LowFidelityOracle::requests() const {
  std::lock_guard<std::mutex> lock(memo_mutex_);
  return requests_;
}

LowFidelityOracle::Function make_process_oracle(const std::string& command) {
  auto child = std::make_shared<ChildProcess>(command);
  return [child](const Point& x) { return child->query(x); };
}

Vector BbBatch::mean() const {
  Vector out(static_cast<Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) out(static_cast<Index>(i)) = points[i].mean;
  return out;
}

Vector BbBatch::variance() const {
  Vector out(static_cast<Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) out(static_cast<Index>(i)) = points[i].variance;
  return out;
}

BbVfgpModel::BbVfgpModel(VfgpModel base, std::shared_ptr<LowFidelityOracle> oracle,
                         BbOptions options)
    : base_(std::move(base)), oracle_(std::move(oracle)), options_(options) {
  if (!oracle_) throw InvalidArgument("BbVfgpModel: no oracle");
  factor_ = base_.joint_factor().with_inverse();
  projected_ = factor_.inverse().triangularView<Eigen::Lower>() * base_.scaled_y();
}

BbPrediction BbVfgpModel::condition(const Point& x, double oracle_value) const {
  const VfgpParams& p = base_.params();
  const VfScaling& s = base_.scaling();
  const Matrix& xl = base_.scaled_low_x();
  const Matrix& xh = base_.scaled_high_x();
  const Matrix xs = s.inputs.apply(Matrix(x));
  const Index n = factor_.dim();
  const double rho = p.rho;
  const double kll = p.low_kernel.variance();

  // Border column of the joint covariance for a low-fidelity observation at x.
  const Vector column = joint_block(p, xs, Matrix(0, xs.cols()), xl, xh).transpose();
  const double noise = options_.noisy_oracle ? p.low_noise.variance : 0.0;
  const CholeskyBorder border = cholesky_border(factor_, column, kll + noise + factor_.jitter());
  const Vector inv_row = inverse_border(factor_, border);

  Vector k_exp(n + 1);
  k_exp.head(n) = joint_cross_cov(p, xs, xl, xh).transpose();
  k_exp(n) = rho * kll;
  Vector y_exp(n + 1);
  y_exp << base_.scaled_y(), s.low.apply(oracle_value);

  Vector u(n + 1);
  u.head(n).noalias() = factor_.inverse().triangularView<Eigen::Lower>() * k_exp.head(n);
  u(n) = inv_row.dot(k_exp);
  Vector w(n + 1);
  w.head(n) = projected_;
  w(n) = inv_row.dot(y_exp);

  const double prior = rho * rho * kll + p.diff_kernel.variance();
  BbPrediction out;
  out.mean = s.high.shift + s.high.scale * u.dot(w);
  out.variance = std::max(prior - u.squaredNorm(), 0.0) * s.high.scale * s.high.scale;
  out.oracle_value = oracle_value;
  out.clamped = border.clamped;
  return out;
}

BbPrediction BbVfgpModel::predict_one(const Point& x) const {
  if (x.size() != base_.params().dimension()) {
    throw DimensionMismatch("BbVfgpModel::predict_one: point dimension " +
                            std::to_string(x.size()) + ", model dimension " +
                            std::to_string(base_.params().dimension()));
  }
  return condition(x, (*oracle_)(x));
}

BbBatch BbVfgpModel::predict_batch(const Matrix& x_star) const {
  if (x_star.rows() < 1) throw InvalidArgument("BbVfgpModel::predict_batch: empty query set");
  if (x_star.cols() != base_.params().dimension()) {
    throw DimensionMismatch("BbVfgpModel::predict_batch: query dimension " +
                            std::to_string(x_star.cols()) + ", model dimension " +
                            std::to_string(base_.params().dimension()));
  }
  const std::size_t before = oracle_->evaluations();
  std::vector<double> values(static_cast<std::size_t>(x_star.rows()));
  for (Index i = 0; i < x_star.rows(); ++i) {
    values[static_cast<std::size_t>(i)] = (*oracle_)(x_star.row(i));
  }
  BbBatch out;
  out.oracle_calls = oracle_->evaluations() - before;
  out.points.reserve(values.size());
  for (Index i = 0; i < x_star.rows(); ++i) {
    out.points.push_back(condition(x_star.row(i), values[static_cast<std::size_t>(i)]));
  }
  return out;
}

}  // namespace vfsm
