#include "vfsm/cli/report.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace vfsm::cli {

namespace {

using nlohmann::json;

json plan_json(const ExperimentPlan& p) {
  std::vector<std::string> methods;
  for (Method m : p.methods) methods.push_back(to_string(m));
  return json{{"problem", p.problem},
              {"n_low", p.n_low},
              {"n_high", p.n_high},
              {"regime", to_string(p.regime)},
              {"methods", methods},
              {"seeds", p.seeds},
              {"test_size", p.test_size},
              {"n_base_low", p.n_base_low},
              {"restarts", p.fit.restarts},
              {"max_iterations", p.fit.max_iterations}};
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::string pad(const std::string& s, std::size_t w) {
  return s.size() >= w ? s : s + std::string(w - s.size(), ' ');
}

struct Table {
  std::string title;
  std::vector<std::string> columns;
  std::vector<std::pair<std::string, std::vector<std::string>>> rows;

  std::string render() const {
    std::size_t first = 8;
    for (const auto& r : rows) first = std::max(first, r.first.size() + 2);
    std::vector<std::size_t> width(columns.size());
    for (std::size_t c = 0; c < columns.size(); ++c) {
      width[c] = columns[c].size() + 2;
      for (const auto& r : rows) width[c] = std::max(width[c], r.second[c].size() + 2);
    }
    std::ostringstream os;
    os << title << '\n' << pad("method", first);
    for (std::size_t c = 0; c < columns.size(); ++c) os << pad(columns[c], width[c]);
    os << '\n';
    for (const auto& r : rows) {
      os << pad(r.first, first);
      for (std::size_t c = 0; c < columns.size(); ++c) os << pad(r.second[c], width[c]);
      os << '\n';
    }
    return os.str();
  }
};

}  // namespace

nlohmann::json report_to_json(const BenchmarkReport& report, bool include_timings) {
  json doc{{"version", kLibraryVersion}};
  doc["plans"] = json::array();
  for (const auto& p : report.plans) doc["plans"].push_back(plan_json(p));
  doc["runs"] = json::array();
  for (const auto& c : report.cells) {
    json j{{"method", to_string(c.method)},
           {"regime", to_string(c.regime)},
           {"n_low", c.n_low},
           {"n_high", c.n_high},
           {"seed", c.seed}};
    j["rrms"] = c.rrms ? json(*c.rrms) : json(nullptr);
    if (include_timings) j["fit_seconds"] = c.fit_seconds;
    if (!c.error.empty()) j["error"] = c.error;
    doc["runs"].push_back(std::move(j));
  }
  doc["summary"] = json::array();
  for (const auto& s : report.summarize()) {
    json j{{"method", to_string(s.method)},
           {"regime", to_string(s.regime)},
           {"n_low", s.n_low},
           {"n_high", s.n_high},
           {"runs", s.runs},
           {"failures", s.failures}};
    j["mean_rrms"] = s.runs > s.failures ? json(s.mean_rrms) : json(nullptr);
    if (s.std_rrms) j["std_rrms"] = *s.std_rrms;
    if (include_timings) j["mean_fit_seconds"] = s.mean_fit_seconds;
    doc["summary"].push_back(std::move(j));
  }
  return doc;
}

std::string render_tables(const BenchmarkReport& report, bool include_timings) {
  const auto summary = report.summarize();
  const bool toy = !report.plans.empty() && report.plans.front().problem == "toy";
  auto size_of = [&](const BenchmarkSummary& s) { return toy ? s.n_high : s.n_low; };
  const std::string size_label = toy ? "n_h" : "n_l";

  std::vector<Index> sizes;
  std::vector<Method> methods;
  std::vector<Regime> regimes;
  for (const auto& s : summary) {
    if (std::find(sizes.begin(), sizes.end(), size_of(s)) == sizes.end())
      sizes.push_back(size_of(s));
    if (std::find(methods.begin(), methods.end(), s.method) == methods.end())
      methods.push_back(s.method);
    if (std::find(regimes.begin(), regimes.end(), s.regime) == regimes.end())
      regimes.push_back(s.regime);
  }
  std::sort(sizes.begin(), sizes.end());

  auto find = [&](Method m, Regime r, Index size) -> const BenchmarkSummary* {
    for (const auto& s : summary) {
      if (s.method == m && s.regime == r && size_of(s) == size) return &s;
    }
    return nullptr;
  };

  std::vector<std::string> columns;
  for (Index n : sizes) columns.push_back(size_label + " = " + std::to_string(n));

  std::ostringstream os;
  auto emit = [&](const std::string& title, Regime regime, bool timing) {
    Table t{title, columns, {}};
    for (Method m : methods) {
      std::vector<std::string> cells;
      for (Index n : sizes) {
        const BenchmarkSummary* s = find(m, regime, n);
        if (s == nullptr) {
          cells.push_back("-");
        } else if (s->runs == s->failures) {
          cells.push_back("failed");
        } else if (timing) {
          cells.push_back(fmt(s->mean_fit_seconds));
        } else {
          std::string text = fmt(s->mean_rrms);
          if (s->std_rrms) text += " +/- " + fmt(*s->std_rrms);
          if (s->failures > 0) text += " (" + std::to_string(s->failures) + " failed)";
          cells.push_back(text);
        }
      }
      t.rows.emplace_back(to_string(m), std::move(cells));
    }
    os << t.render() << '\n';
  };

  for (Regime r : regimes) emit("RRMS, " + to_string(r), r, false);
  if (include_timings && !regimes.empty())
    emit("training time (s), " + to_string(regimes.front()), regimes.front(), true);
  return os.str();
}

}  // namespace vfsm::cli
