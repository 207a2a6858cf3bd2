#include "vfsm/cli/commands.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "vfsm/cli/artifact.hpp"
#include "vfsm/cli/csv.hpp"
#include "vfsm/cli/report.hpp"
#include "vfsm/experiments.hpp"

namespace vfsm::cli {

namespace {

struct Common {
  std::uint64_t seed = 0;
  int restarts = 5;
  int max_iterations = 200;

  FitConfig fit_config() const {
    FitConfig c;
    c.seed = seed;
    c.restarts = restarts;
    c.max_iterations = max_iterations;
    return c;
  }
};

void add_fit_options(CLI::App* cmd, Common& common) {
  cmd->add_option("--restarts", common.restarts, "Optimizer restarts per likelihood search")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--max-iterations", common.max_iterations, "Optimizer iteration cap")
      ->check(CLI::PositiveNumber);
}

template <typename Stream>
Stream open_output(const std::string& path) {
  Stream s(path);
  if (!s) throw InvalidArgument("cannot write '" + path + "'");
  return s;
}

// ---- fit -----------------------------------------------------------------

struct FitArgs {
  std::string method;
  std::string low;
  std::string high;
  std::optional<Index> n_base_low;
  std::optional<Index> n_base_high;
  std::string out;
};

void print_report(std::ostream& os, const std::string& prefix, const FitReport& r) {
  os << prefix << "log_likelihood: " << format_double(r.log_likelihood) << '\n'
     << prefix << "penalized_log_likelihood: " << format_double(r.penalized_log_likelihood) << '\n'
     << prefix << "restarts: " << r.restarts_used << '\n'
     << prefix << "restarts_failed: " << r.restarts_failed << '\n'
     << prefix << "converged: " << (r.converged ? "true" : "false") << '\n';
}

int cmd_fit(const FitArgs& a, const Common& common, std::ostream& out) {
  const Method method = parse_method(a.method);
  const FitConfig config = common.fit_config();
  const Dataset high = read_dataset_file(a.high);
  std::optional<VfDataset> vf;
  if (method != Method::gp) {
    if (a.low.empty()) throw InvalidArgument("--low is required for method " + a.method);
    vf = VfDataset{read_dataset_file(a.low), high};
    vf->validate();
  }

  const auto t0 = std::chrono::steady_clock::now();
  std::optional<Model> model;
  switch (method) {
    case Method::gp:
      model.emplace(fit_gp(high, config));
      break;
    case Method::vfgp:
    case Method::bbvfgp:
      model.emplace(fit_vfgp(*vf, config));
      break;
    case Method::svfgp: {
      const Index nl = a.n_base_low.value_or(std::min<Index>(1000, vf->low.size()));
      const Index nh = a.n_base_high.value_or(vf->high.size());
      model.emplace(fit_svfgp(*vf, nl, nh, config));
      break;
    }
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  save_artifact_file(*model, a.out);

  out << "method: " << a.method << '\n' << "kind: " << model_kind(*model) << '\n';
  if (const auto* g = std::get_if<GpModel>(&*model)) {
    out << "n_high: " << g->training().size() << '\n';
    print_report(out, "", g->report());
  } else {
    const VfgpParams& p = std::holds_alternative<VfgpModel>(*model)
                              ? std::get<VfgpModel>(*model).params()
                              : std::get<SvfgpModel>(*model).params();
    const VfgpFitReport& r = std::holds_alternative<VfgpModel>(*model)
                                 ? std::get<VfgpModel>(*model).report()
                                 : std::get<SvfgpModel>(*model).report();
    out << "n_low: " << vf->low.size() << '\n' << "n_high: " << vf->high.size() << '\n';
    if (const auto* s = std::get_if<SvfgpModel>(&*model)) {
      out << "n_base_low: " << s->selection().low.size() << '\n'
          << "n_base_high: " << s->selection().high.size() << '\n';
    }
    out << "rho: " << format_double(p.rho) << '\n';
    print_report(out, "low.", r.low);
    print_report(out, "diff.", r.diff);
  }
  out << "wall_time_s: " << format_double(seconds) << '\n' << "artifact: " << a.out << '\n';
  return kExitOk;
}

// ---- predict -------------------------------------------------------------

struct PredictArgs {
  std::string model;
  std::string query;
  std::string oracle;
  bool exact_oracle = false;
  std::string out;
};

int cmd_predict(const PredictArgs& a, const Common& common, std::ostream& out) {
  const Model model = load_artifact_file(a.model);
  const Matrix x = read_points_file(a.query);
  Matrix table;
  std::vector<std::string> header{"mean", "variance"};
  if (!a.oracle.empty()) {
    const auto* vf = std::get_if<VfgpModel>(&model);
    if (vf == nullptr) {
      throw InvalidArgument("--oracle requires a vfgp artifact, got " + model_kind(model));
    }
    const BbVfgpModel bb(*vf, make_oracle(a.oracle, common.seed), BbOptions{!a.exact_oracle});
    const BbBatch batch = bb.predict_batch(x);
    table.resize(x.rows(), 3);
    for (Index i = 0; i < x.rows(); ++i) {
      const BbPrediction& p = batch.points[static_cast<std::size_t>(i)];
      table.row(i) << p.mean, p.variance, p.oracle_value;
    }
    header.push_back("oracle_value");
  } else {
    table.resize(x.rows(), 2);
    std::visit(
        [&](const auto& m) {
          table.col(0) = m.predict_mean(x);
          table.col(1) = m.predict_variance(x);
        },
        model);
  }
  if (a.out.empty()) {
    write_table(out, header, table);
  } else {
    auto f = open_output<std::ofstream>(a.out);
    write_table(f, header, table);
  }
  return kExitOk;
}

// ---- benchmark -----------------------------------------------------------

struct BenchmarkArgs {
  std::string suite;
  std::optional<int> seeds;
  std::vector<Index> n_l;
  std::vector<Index> n_h;
  std::vector<std::string> methods;
  std::vector<std::string> regimes;
  Index test_size = 1000;
  Index n_base_low = 1000;
  std::string out;
  bool no_timings = false;
};

int cmd_benchmark(const BenchmarkArgs& a, const Common& common, std::ostream& out,
                  std::ostream& err) {
  const bool toy = a.suite == "toy";
  if (!toy && a.suite != "highdim") {
    throw InvalidArgument("unknown suite '" + a.suite + "' (expected toy or highdim)");
  }
  ExperimentPlan base;
  base.problem = toy ? "toy" : "rastrigin";
  base.fit = common.fit_config();
  base.test_size = a.test_size;
  base.n_base_low = a.n_base_low;
  base.seeds.clear();
  const int count = a.seeds.value_or(toy ? 50 : 5);
  if (count < 1) throw InvalidArgument("--seeds must be >= 1");
  for (int s = 0; s < count; ++s) base.seeds.push_back(common.seed + static_cast<std::uint64_t>(s));
  base.methods.clear();
  const std::vector<std::string> default_methods =
      toy ? std::vector<std::string>{"gp", "vfgp", "bbvfgp"}
          : std::vector<std::string>{"vfgp", "svfgp", "bbvfgp"};
  for (const auto& m : a.methods.empty() ? default_methods : a.methods) {
    base.methods.push_back(parse_method(m));
  }
  const std::vector<Index> n_l = !a.n_l.empty() ? a.n_l
                                 : toy          ? std::vector<Index>{100}
                                                : std::vector<Index>{1000, 3000, 5000};
  const std::vector<Index> n_h = !a.n_h.empty() ? a.n_h : toy ? std::vector<Index>{6, 15, 30}
                                                              : std::vector<Index>{100};
  std::vector<std::string> regimes = a.regimes;
  if (regimes.empty()) {
    regimes = toy ? std::vector<std::string>{"interpolation"}
                  : std::vector<std::string>{"interpolation", "extrapolation"};
  }

  BenchmarkReport report;
  for (const auto& r : regimes) {
    for (Index nl : n_l) {
      for (Index nh : n_h) {
        ExperimentPlan plan = base;
        plan.regime = parse_regime(r);
        plan.n_low = nl;
        plan.n_high = nh;
        report.append(run_experiment(plan));
      }
    }
  }
  out << render_tables(report, !a.no_timings);
  if (!a.out.empty()) {
    auto f = open_output<std::ofstream>(a.out);
    f << report_to_json(report, !a.no_timings).dump(2) << '\n';
  }
  if (report.any_failed()) {
    for (const auto& c : report.cells) {
      if (!c.rrms) {
        err << "failed: " << to_string(c.method) << " n_l=" << c.n_low << " n_h=" << c.n_high
            << " seed=" << c.seed << ": " << c.error << '\n';
      }
    }
    return kExitRuntime;
  }
  return kExitOk;
}

// ---- diagnose ------------------------------------------------------------

struct DiagnoseArgs {
  std::string model;
  std::string query;
  Index probes = 200;
};

int cmd_diagnose(const DiagnoseArgs& a, const Common& common, std::ostream& out) {
  const Model model = load_artifact_file(a.model);
  const auto* s = std::get_if<SvfgpModel>(&model);
  if (s == nullptr)
    throw InvalidArgument("diagnose requires an svfgp artifact, got " + model_kind(model));
  Matrix probes;
  if (!a.query.empty()) {
    probes = read_points_file(a.query);
  } else {
    if (a.probes < 1) throw InvalidArgument("--probes must be >= 1");
    const Matrix& xh = s->training().high.x;
    const Matrix& xl = s->training().low.x;
    Box box{xl.colwise().minCoeff().cwiseMin(xh.colwise().minCoeff()).transpose(),
            xl.colwise().maxCoeff().cwiseMax(xh.colwise().maxCoeff()).transpose()};
    probes = uniform_sample(a.probes, box, common.seed);
  }
  const NystromError e = s->nystrom_diagnostic(probes);
  out << "probes: " << probes.rows() << '\n'
      << "n_base: " << s->base_size() << '\n'
      << "n_train: " << s->training().size() << '\n'
      << "cross_relative_error: " << format_double(e.cross) << '\n'
      << "self_relative_error: " << format_double(e.self) << '\n';
  return kExitOk;
}

}  // namespace

std::shared_ptr<LowFidelityOracle> make_oracle(const std::string& spec, std::uint64_t seed) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) {
    throw InvalidArgument("oracle spec must be builtin:<name> or exec:<command>, got '" + spec +
                          "'");
  }
  const std::string kind = spec.substr(0, colon);
  const std::string rest = spec.substr(colon + 1);
  if (kind == "builtin") return std::make_shared<LowFidelityOracle>(builtin_oracle(rest, seed));
  if (kind == "exec") {
    if (rest.empty()) throw InvalidArgument("exec oracle needs a command");
    return std::make_shared<LowFidelityOracle>(make_process_oracle(rest), true);
  }
  throw InvalidArgument("unknown oracle kind '" + kind + "'");
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Variable-fidelity Gaussian process surrogate models"};
  app.require_subcommand(1);
  app.fallthrough();
  Common common;
  app.add_option("--seed", common.seed, "Seed for every random choice");

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a model and write an artifact");
  fit_cmd->add_option("--method", fit.method, "gp, vfgp, svfgp or bbvfgp")
      ->required()
      ->check(CLI::IsMember({"gp", "vfgp", "svfgp", "bbvfgp"}));
  fit_cmd->add_option("--low", fit.low, "Low-fidelity CSV (x1..xd,y)");
  fit_cmd->add_option("--high", fit.high, "High-fidelity CSV (x1..xd,y)")->required();
  fit_cmd->add_option("--n-base-low", fit.n_base_low, "SVFGP low-fidelity base points");
  fit_cmd->add_option("--n-base-high", fit.n_base_high, "SVFGP high-fidelity base points");
  fit_cmd->add_option("--out", fit.out, "Artifact path")->required();
  add_fit_options(fit_cmd, common);

  PredictArgs pred;
  auto* pred_cmd = app.add_subcommand("predict", "Predict at query points");
  pred_cmd->add_option("--model", pred.model, "Artifact path")->required();
  pred_cmd->add_option("--query", pred.query, "Query CSV (x1..xd)")->required();
  pred_cmd->add_option("--oracle", pred.oracle, "builtin:<name> or exec:<command>");
  pred_cmd->add_flag("--exact-oracle", pred.exact_oracle,
                     "Condition on oracle values without low-fidelity noise");
  pred_cmd->add_option("--out", pred.out, "Output CSV (default: stdout)");

  BenchmarkArgs bench;
  auto* bench_cmd = app.add_subcommand("benchmark", "Run a benchmark suite");
  bench_cmd->add_option("--suite", bench.suite, "toy or highdim")->required();
  bench_cmd->add_option("--seeds", bench.seeds, "Number of seeds, starting at --seed");
  bench_cmd->add_option("--n-l", bench.n_l, "Low-fidelity sample sizes");
  bench_cmd->add_option("--n-h", bench.n_h, "High-fidelity sample sizes");
  bench_cmd->add_option("--methods", bench.methods, "Methods to run");
  bench_cmd->add_option("--regime", bench.regimes, "interpolation and/or extrapolation");
  bench_cmd->add_option("--test-size", bench.test_size, "Test points per run");
  bench_cmd->add_option("--n-base-low", bench.n_base_low, "SVFGP low-fidelity base size");
  bench_cmd->add_option("--out", bench.out, "JSON report path");
  bench_cmd->add_flag("--no-timings", bench.no_timings, "Leave wall-clock fields out");
  add_fit_options(bench_cmd, common);

  DiagnoseArgs diag;
  auto* diag_cmd =
      app.add_subcommand("diagnose", "Nystrom approximation error of an SVFGP artifact");
  diag_cmd->add_option("--model", diag.model, "SVFGP artifact path")->required();
  diag_cmd->add_option("--query", diag.query, "Probe CSV (x1..xd)");
  diag_cmd->add_option("--probes", diag.probes, "Random probe count when no --query is given");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }

  try {
    if (*fit_cmd) return cmd_fit(fit, common, out);
    if (*pred_cmd) return cmd_predict(pred, common, out);
    if (*bench_cmd) return cmd_benchmark(bench, common, out, err);
    return cmd_diagnose(diag, common, out);
  } catch (const ParseError& e) {
    err << "input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const InvalidArgument& e) {
    err << "input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const DimensionMismatch& e) {
    err << "input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const SubsampleTooLarge& e) {
    err << "input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace vfsm::cli
