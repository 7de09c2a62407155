#include "pfsvm/serialization.hpp"

#include <fstream>
#include <sstream>

namespace pfsvm {

using nlohmann::json;

namespace {

json vector_json(const Eigen::VectorXd& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

template <typename T>
T field(const json& j, const char* name) {
  if (!j.is_object() || !j.contains(name))
    throw ModelFormatError(std::string("model: missing field '") + name + "'");
  try {
    return j.at(name).get<T>();
  } catch (const json::exception& e) {
    throw ModelFormatError(std::string("model: bad field '") + name + "': " + e.what());
  }
}

Eigen::VectorXd vector_field(const json& j, const char* name) {
  const auto values = field<std::vector<double>>(j, name);
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

json gaussian_json(const GaussianStats<double>& s) {
  return {{"count", s.count}, {"mean", vector_json(s.mean)}, {"std", vector_json(s.std)}};
}

GaussianStats<double> gaussian_from_json(const json& j) {
  GaussianStats<double> s;
  s.count = field<Eigen::Index>(j, "count");
  s.mean = vector_field(j, "mean");
  s.std = vector_field(j, "std");
  if (s.mean.size() != s.std.size()) throw ModelFormatError("model: mean/std length mismatch");
  if (s.count < 0) throw ModelFormatError("model: negative class count");
  if ((s.count == 0) != (s.mean.size() == 0)) throw ModelFormatError("model: empty stats with nonzero count");
  if (!(s.std.array() > 0).all()) throw ModelFormatError("model: standard deviations must be positive");
  return s;
}

}  // namespace

json to_json(const SvmModeld& model) {
  return {{"normal", vector_json(model.normal)},
          {"offset", model.offset},
          {"margin_width", model.margin_width},
          {"converged", model.converged},
          {"iterations", model.iterations},
          {"kkt_gap", model.kkt_gap},
          {"dual_objective", model.dual_objective}};
}

json to_json(const ClassStatsd& stats) {
  return {{"malignant", gaussian_json(stats.malignant)},
          {"benign", gaussian_json(stats.benign)},
          {"sigma_floor", vector_json(stats.sigma_floor)}};
}

json to_json(const PfsvmModel& model) {
  return {{"format", "pfsvm-model"},
          {"version", kModelFormatVersion},
          {"threshold", model.threshold},
          {"malignant_cost_multiplier", model.malignant_cost_multiplier},
          {"base_cost", model.base_cost},
          {"feature_names", model.feature_names},
          {"selected_feature_indices", model.selected_feature_indices},
          {"svm", to_json(model.svm)},
          {"marginal_stats", to_json(model.marginal_stats)},
          {"fallback_stats", to_json(model.fallback_stats)},
          {"malignant_fallback", model.malignant_fallback},
          {"benign_fallback", model.benign_fallback},
          {"warnings", model.warnings}};
}

SvmModeld svm_model_from_json(const json& j) {
  SvmModeld model;
  model.normal = vector_field(j, "normal");
  model.offset = field<double>(j, "offset");
  model.margin_width = field<double>(j, "margin_width");
  model.converged = field<bool>(j, "converged");
  if (j.contains("iterations")) model.iterations = field<std::int64_t>(j, "iterations");
  if (j.contains("kkt_gap")) model.kkt_gap = field<double>(j, "kkt_gap");
  if (j.contains("dual_objective")) model.dual_objective = field<double>(j, "dual_objective");
  if (model.normal.size() == 0) throw ModelFormatError("model: empty normal vector");
  return model;
}

ClassStatsd class_stats_from_json(const json& j) {
  ClassStatsd stats;
  stats.malignant = gaussian_from_json(field<json>(j, "malignant"));
  stats.benign = gaussian_from_json(field<json>(j, "benign"));
  stats.sigma_floor = vector_field(j, "sigma_floor");
  return stats;
}

PfsvmModel pfsvm_model_from_json(const json& j) {
  if (!j.is_object()) throw ModelFormatError("model: expected a JSON object");
  const int version = field<int>(j, "version");
  if (version != kModelFormatVersion)
    throw ModelFormatError("model: unsupported version " + std::to_string(version));
  PfsvmModel model;
  model.threshold = field<double>(j, "threshold");
  model.malignant_cost_multiplier = field<double>(j, "malignant_cost_multiplier");
  model.base_cost = field<double>(j, "base_cost");
  model.feature_names = field<std::vector<std::string>>(j, "feature_names");
  model.selected_feature_indices = field<std::vector<int>>(j, "selected_feature_indices");
  model.svm = svm_model_from_json(field<json>(j, "svm"));
  model.marginal_stats = class_stats_from_json(field<json>(j, "marginal_stats"));
  model.fallback_stats = class_stats_from_json(field<json>(j, "fallback_stats"));
  model.malignant_fallback = field<bool>(j, "malignant_fallback");
  model.benign_fallback = field<bool>(j, "benign_fallback");
  model.warnings = field<std::vector<std::string>>(j, "warnings");

  if (!(model.threshold > 0.5 && model.threshold <= 1.0))
    throw ModelFormatError("model: threshold outside (0.5, 1]");
  if (!(model.malignant_cost_multiplier >= 1.0))
    throw ModelFormatError("model: malignant cost multiplier below 1");
  const Eigen::Index p = model.svm.dimension();
  for (const ClassStatsd* s : {&model.marginal_stats, &model.fallback_stats}) {
    if (s->malignant.mean.size() != p || s->benign.mean.size() != p || s->sigma_floor.size() != p)
      throw ModelFormatError("model: class statistics do not match the hyperplane dimension");
  }
  if (static_cast<Eigen::Index>(model.feature_names.size()) != p ||
      static_cast<Eigen::Index>(model.selected_feature_indices.size()) != p)
    throw ModelFormatError("model: feature list does not match the hyperplane dimension");
  return model;
}

void write_file_atomically(const std::filesystem::path& path, const std::string& contents) {
  auto temp = path;
  temp += ".tmp";
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << contents;
    out.flush();
    if (!out) {
      out.close();
      std::error_code ignored;
      std::filesystem::remove(temp, ignored);
      throw IoError("failed writing '" + path.string() + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(temp, path, ec);
  if (ec) {
    std::filesystem::remove(temp, ec);
    throw IoError("cannot move output into place at '" + path.string() + "'");
  }
}

void save_model(const PfsvmModel& model, const std::filesystem::path& path) {
  write_file_atomically(path, to_json(model).dump(2) + "\n");
}

PfsvmModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model file '" + path.string() + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ModelFormatError("model: '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return pfsvm_model_from_json(j);
}

}  // namespace pfsvm
