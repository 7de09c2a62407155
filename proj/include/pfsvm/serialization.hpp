#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "pfsvm/classifier.hpp"

namespace pfsvm {

inline constexpr int kModelFormatVersion = 1;

nlohmann::json to_json(const SvmModeld& model);
nlohmann::json to_json(const ClassStatsd& stats);
/// Full two-phase model, with a mandatory "version" field.
nlohmann::json to_json(const PfsvmModel& model);

/// Parsers throw ModelFormatError on missing or ill-typed fields.
SvmModeld svm_model_from_json(const nlohmann::json& j);
ClassStatsd class_stats_from_json(const nlohmann::json& j);
PfsvmModel pfsvm_model_from_json(const nlohmann::json& j);

void save_model(const PfsvmModel& model, const std::filesystem::path& path);
PfsvmModel load_model(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it into place, so a failed
/// write never leaves a partial file at `path`.
void write_file_atomically(const std::filesystem::path& path, const std::string& contents);

}  // namespace pfsvm
