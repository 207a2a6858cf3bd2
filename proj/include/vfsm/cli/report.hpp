#ifndef VFSM_CLI_REPORT_HPP
#define VFSM_CLI_REPORT_HPP

#include <string>

#include <json.hpp>

#include "vfsm/experiments.hpp"

namespace vfsm::cli {

inline constexpr const char* kLibraryVersion = "0.1.0";

/// Machine-readable report: plans, per-run cells and per-group summaries.
/// Without timings every wall-clock field is left out, which makes the
/// document reproducible byte for byte under fixed seeds.
nlohmann::json report_to_json(const BenchmarkReport& report, bool include_timings = true);

/// Text tables with one row per method and one column per sample size:
/// n_h for the toy problem, n_l otherwise. One block per regime, plus a
/// training-time block when timings are included.
std::string render_tables(const BenchmarkReport& report, bool include_timings = true);

}  // namespace vfsm::cli

#endif  // VFSM_CLI_REPORT_HPP
