#ifndef VFSM_CLI_ARTIFACT_HPP
#define VFSM_CLI_ARTIFACT_HPP

#include <iosfwd>
#include <string>
#include <variant>

#include <json.hpp>

#include "vfsm/gp.hpp"
#include "vfsm/svfgp.hpp"
#include "vfsm/vfgp.hpp"

namespace vfsm::cli {

inline constexpr int kArtifactSchemaVersion = 1;

using Model = std::variant<GpModel, VfgpModel, SvfgpModel>;

/// "gp", "vfgp" or "svfgp".
std::string model_kind(const Model& model);

/// JSON document holding everything needed to rebuild the model: parameters
/// in the model's scaled coordinates, the scalings, the original training
/// data, the base selection (sparse models) and the fit reports. No wall-clock
/// data is stored, so a fixed seed gives a byte-identical artifact.
nlohmann::json to_json(const Model& model);
Model model_from_json(const nlohmann::json& doc);

void save_artifact(const Model& model, std::ostream& out);
void save_artifact_file(const Model& model, const std::string& path);
/// Throws ParseError on malformed input or an unsupported schema version.
Model load_artifact(std::istream& in, const std::string& source = "<artifact>");
Model load_artifact_file(const std::string& path);

}  // namespace vfsm::cli

#endif  // VFSM_CLI_ARTIFACT_HPP
