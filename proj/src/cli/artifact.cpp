#include "vfsm/cli/artifact.hpp"

#include <fstream>
#include <istream>
#include <ostream>

namespace vfsm::cli {

namespace {

using nlohmann::json;

json vector_json(const Vector& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(m.cols()));
    for (Index k = 0; k < m.cols(); ++k) row[static_cast<std::size_t>(k)] = m(i, k);
    rows.push_back(std::move(row));
  }
  return rows;
}

Vector vector_from(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
}

Matrix matrix_from(const json& j) {
  const auto rows = j.get<std::vector<std::vector<double>>>();
  if (rows.empty()) throw InvalidArgument("artifact: empty matrix");
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.front().size()) throw InvalidArgument("artifact: ragged matrix");
    for (std::size_t k = 0; k < rows[i].size(); ++k) {
      m(static_cast<Index>(i), static_cast<Index>(k)) = rows[i][k];
    }
  }
  return m;
}

json kernel_json(const SeKernel& k) {
  return json{{"output_scale", k.output_scale()},
              {"length_weights", vector_json(k.length_weights())}};
}

SeKernel kernel_from(const json& j) {
  return SeKernel(j.at("output_scale").get<double>(), vector_from(j.at("length_weights")));
}

json dataset_json(const Dataset& d) {
  return json{{"x", matrix_json(d.x)}, {"y", vector_json(d.y)}};
}

Dataset dataset_from(const json& j) {
  return Dataset{matrix_from(j.at("x")), vector_from(j.at("y"))};
}

json input_json(const InputScaling& s) {
  return json{{"offset", vector_json(s.offset)}, {"scale", vector_json(s.scale)}};
}

InputScaling input_from(const json& j) {
  return InputScaling{vector_from(j.at("offset")), vector_from(j.at("scale"))};
}

json output_json(const OutputScaling& s) { return json{{"shift", s.shift}, {"scale", s.scale}}; }

OutputScaling output_from(const json& j) {
  return OutputScaling{j.at("shift").get<double>(), j.at("scale").get<double>()};
}

json report_json(const FitReport& r) {
  return json{{"log_likelihood", r.log_likelihood},
              {"penalized_log_likelihood", r.penalized_log_likelihood},
              {"initial_penalized_log_likelihood", r.initial_penalized_log_likelihood},
              {"restarts_used", r.restarts_used},
              {"restarts_failed", r.restarts_failed},
              {"converged", r.converged}};
}

FitReport report_from(const json& j) {
  FitReport r;
  r.log_likelihood = j.at("log_likelihood").get<double>();
  r.penalized_log_likelihood = j.at("penalized_log_likelihood").get<double>();
  r.initial_penalized_log_likelihood = j.at("initial_penalized_log_likelihood").get<double>();
  r.restarts_used = j.at("restarts_used").get<int>();
  r.restarts_failed = j.at("restarts_failed").get<int>();
  r.converged = j.at("converged").get<bool>();
  return r;
}

json vf_params_json(const VfgpParams& p) {
  return json{{"low_kernel", kernel_json(p.low_kernel)},
              {"low_noise_variance", p.low_noise.variance},
              {"diff_kernel", kernel_json(p.diff_kernel)},
              {"diff_noise_variance", p.diff_noise.variance},
              {"rho", p.rho}};
}

VfgpParams vf_params_from(const json& j) {
  return VfgpParams{
      kernel_from(j.at("low_kernel")), NoiseSpec(j.at("low_noise_variance").get<double>()),
      kernel_from(j.at("diff_kernel")), NoiseSpec(j.at("diff_noise_variance").get<double>()),
      j.at("rho").get<double>()};
}

json vf_scaling_json(const VfScaling& s) {
  return json{
      {"inputs", input_json(s.inputs)}, {"low", output_json(s.low)}, {"high", output_json(s.high)}};
}

VfScaling vf_scaling_from(const json& j) {
  return VfScaling{input_from(j.at("inputs")), output_from(j.at("low")), output_from(j.at("high"))};
}

json vf_training_json(const VfDataset& d) {
  return json{{"low", dataset_json(d.low)}, {"high", dataset_json(d.high)}};
}

VfDataset vf_training_from(const json& j) {
  return VfDataset{dataset_from(j.at("low")), dataset_from(j.at("high"))};
}

json vf_report_json(const VfgpFitReport& r) {
  return json{{"low", report_json(r.low)}, {"diff", report_json(r.diff)}};
}

VfgpFitReport vf_report_from(const json& j) {
  return VfgpFitReport{report_from(j.at("low")), report_from(j.at("diff"))};
}

json header(const std::string& kind) {
  return json{{"schema_version", kArtifactSchemaVersion}, {"kind", kind}};
}

}  // namespace

std::string model_kind(const Model& model) {
  switch (model.index()) {
    case 0: return "gp";
    case 1: return "vfgp";
    default: return "svfgp";
  }
}

nlohmann::json to_json(const Model& model) {
  json doc = header(model_kind(model));
  if (const auto* m = std::get_if<GpModel>(&model)) {
    doc["params"] =
        json{{"kernel", kernel_json(m->kernel())}, {"noise_variance", m->noise().variance}};
    doc["scaling"] = json{{"inputs", input_json(m->input_scaling())},
                          {"output", output_json(m->output_scaling())}};
    doc["training"] = dataset_json(m->training());
    doc["report"] = report_json(m->report());
  } else if (const auto* m = std::get_if<VfgpModel>(&model)) {
    doc["params"] = vf_params_json(m->params());
    doc["scaling"] = vf_scaling_json(m->scaling());
    doc["training"] = vf_training_json(m->training());
    doc["report"] = vf_report_json(m->report());
  } else {
    const auto& s = std::get<SvfgpModel>(model);
    doc["params"] = vf_params_json(s.params());
    doc["scaling"] = vf_scaling_json(s.scaling());
    doc["training"] = vf_training_json(s.training());
    doc["base"] = json{
        {"low", s.selection().low}, {"high", s.selection().high}, {"seed", s.selection().seed}};
    doc["report"] = vf_report_json(s.report());
  }
  return doc;
}

Model model_from_json(const nlohmann::json& doc) {
  const int version = doc.at("schema_version").get<int>();
  if (version != kArtifactSchemaVersion) {
    throw InvalidArgument("artifact: unsupported schema version " + std::to_string(version));
  }
  const std::string kind = doc.at("kind").get<std::string>();
  if (kind == "gp") {
    const json& p = doc.at("params");
    const json& s = doc.at("scaling");
    return GpModel(kernel_from(p.at("kernel")), NoiseSpec(p.at("noise_variance").get<double>()),
                   dataset_from(doc.at("training")), input_from(s.at("inputs")),
                   output_from(s.at("output")), report_from(doc.at("report")));
  }
  if (kind == "vfgp") {
    return VfgpModel(vf_params_from(doc.at("params")), vf_training_from(doc.at("training")),
                     vf_scaling_from(doc.at("scaling")), vf_report_from(doc.at("report")));
  }
  if (kind == "svfgp") {
    const json& b = doc.at("base");
    BaseSelection sel{b.at("low").get<std::vector<Index>>(), b.at("high").get<std::vector<Index>>(),
                      b.at("seed").get<std::uint64_t>()};
    return SvfgpModel(vf_params_from(doc.at("params")), std::move(sel),
                      vf_training_from(doc.at("training")), vf_scaling_from(doc.at("scaling")),
                      vf_report_from(doc.at("report")));
  }
  throw InvalidArgument("artifact: unknown model kind '" + kind + "'");
}

void save_artifact(const Model& model, std::ostream& out) { out << to_json(model).dump(2) << '\n'; }

void save_artifact_file(const Model& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write '" + path + "'");
  save_artifact(model, out);
  if (!out) throw Error("failed writing '" + path + "'");
}

Model load_artifact(std::istream& in, const std::string& source) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(source + ": " + e.what(), 0, 0);
  }
  try {
    return model_from_json(doc);
  } catch (const json::exception& e) {
    throw ParseError(source + ": malformed artifact: " + e.what(), 0, 0);
  }
}

Model load_artifact_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open '" + path + "'");
  return load_artifact(in, path);
}

}  // namespace vfsm::cli
