#include "pfsvm/evaluation.hpp"

#include <cmath>
#include <fstream>
#include <future>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "pfsvm/serialization.hpp"

namespace pfsvm {

FoldResult evaluate_fold(const Dataset& train, const Dataset& test, const FitOptions& options,
                         int fold) {
  FoldResult r;
  r.fold = fold;
  r.test_size = static_cast<int>(test.size());

  const SvmModeld svm = train_plain_svm(train, options.base_cost, options.train);
  const PfsvmModel model = fit(train, options);
  const ClassStatsd whole = whole_set_stats(train);

  r.margin_width_svm = svm.margin_width;
  r.margin_width_fsvm = model.svm.margin_width;
  r.svm_converged = svm.converged;
  r.fsvm_converged = model.svm.converged;
  const Eigen::VectorXd train_f = decision_values(model.svm, train.features());
  r.marginal_training_points = static_cast<int>((train_f.array().abs() < 1.0).count());

  for (Eigen::Index i = 0; i < test.size(); ++i) {
    const Eigen::VectorXd x = test.features().row(i).transpose();
    const Label truth = test.label(i);
    r.svm_err += predict_svm_baseline(svm, x) != truth;
    r.fsvm_err += predict_fsvm_baseline(model, x) != truth;
    r.fuzzy_err += predict_fuzzy_baseline(whole, x) != truth;

    const Prediction p = predict(model, x);
    if (p.is_definite()) {
      ++r.pfsvm_definite;
      r.pfsvm_definite_err += p.label() != truth;
    } else if (p.is_probabilistic()) {
      ++r.pfsvm_probabilistic;
      r.pfsvm_probabilistic_err += p.label() != truth;
    } else {
      ++r.pfsvm_undetermined;
    }
  }

  std::tie(r.fsvm_errors_inside, r.fsvm_errors_outside) = errors_in_margin(model, test);
  const int errors = r.fsvm_errors_inside + r.fsvm_errors_outside;
  if (errors > 0) r.errors_in_margin_fraction = static_cast<double>(r.fsvm_errors_inside) / errors;
  return r;
}

RunReport run_experiment(const Dataset& data, const ExperimentConfig& config) {
  if (config.k < 2) throw ArgumentError("run_experiment: k must be at least 2");
  const FoldPlan plan = make_folds(data, config.k, config.seed);

  auto run_fold = [&](int fold) {
    try {
      return evaluate_fold(data.subset(plan.train_rows(fold)), data.subset(plan.test_rows(fold)),
                           config.fit, fold);
    } catch (const Error& e) {
      FoldResult failed;
      failed.fold = fold;
      failed.failed = true;
      failed.error = e.what();
      failed.test_size = static_cast<int>(plan.test_rows(fold).size());
      return failed;
    }
  };

  RunReport report;
  report.config = config;
  report.per_fold.resize(static_cast<std::size_t>(config.k));
  if (config.parallel) {
    std::vector<std::future<FoldResult>> pending;
    for (int f = 0; f < config.k; ++f) pending.push_back(std::async(std::launch::async, run_fold, f));
    for (int f = 0; f < config.k; ++f) report.per_fold[static_cast<std::size_t>(f)] = pending[static_cast<std::size_t>(f)].get();
  } else {
    for (int f = 0; f < config.k; ++f) report.per_fold[static_cast<std::size_t>(f)] = run_fold(f);
  }
  report.aggregate = aggregate(report.per_fold);
  return report;
}

std::optional<Aggregate> aggregate(const std::vector<FoldResult>& folds) {
  Aggregate a;
  long svm = 0, fsvm = 0, fuzzy = 0, definite = 0, probabilistic = 0, undetermined = 0;
  long inside = 0, outside = 0;
  double fraction_sum = 0.0;
  int fraction_folds = 0;
  for (const auto& f : folds) {
    if (f.failed) continue;
    ++a.successful_folds;
    a.total_test += f.test_size;
    svm += f.svm_err;
    fsvm += f.fsvm_err;
    fuzzy += f.fuzzy_err;
    definite += f.pfsvm_definite_err;
    probabilistic += f.pfsvm_probabilistic_err;
    undetermined += f.pfsvm_undetermined;
    inside += f.fsvm_errors_inside;
    outside += f.fsvm_errors_outside;
    if (f.errors_in_margin_fraction) {
      fraction_sum += *f.errors_in_margin_fraction;
      ++fraction_folds;
    }
  }
  if (a.successful_folds == 0 || a.total_test == 0) return std::nullopt;
  const auto pct = [&](long count) { return 100.0 * static_cast<double>(count) / a.total_test; };
  a.svm = pct(svm);
  a.fsvm = pct(fsvm);
  a.fuzzy = pct(fuzzy);
  a.pfsvm_definite = pct(definite);
  a.pfsvm_probabilistic = pct(probabilistic);
  a.pfsvm = pct(definite + probabilistic);
  a.pfsvm_undetermined = pct(undetermined);
  if (fraction_folds > 0) a.mean_errors_in_margin_fraction = fraction_sum / fraction_folds;
  if (inside + outside > 0)
    a.pooled_errors_in_margin_fraction = static_cast<double>(inside) / static_cast<double>(inside + outside);
  return a;
}

std::pair<int, int> errors_in_margin(const PfsvmModel& model, const Dataset& test) {
  const Eigen::VectorXd f = decision_values(model.svm, test.features());
  int inside = 0, outside = 0;
  for (Eigen::Index i = 0; i < test.size(); ++i) {
    if (label_from_sign(f[i]) == test.label(i)) continue;
    (std::abs(f[i]) < 1.0 ? inside : outside) += 1;
  }
  return {inside, outside};
}

void export_margin_plot(const SvmModeld& svm, const SvmModeld& fsvm, const Dataset& data,
                        std::ostream& out) {
  const Eigen::VectorXd fs = decision_values(svm, data.features());
  const Eigen::VectorXd ff = decision_values(fsvm, data.features());
  out << "decision_svm,decision_fsvm,label,in_margin_svm,in_margin_fsvm,margin_width_svm,margin_width_fsvm\n";
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    out << fmt::format("{:.17g},{:.17g},{},{},{},{:.17g},{:.17g}\n", fs[i], ff[i],
                       diagnosis_letter(data.label(i)), std::abs(fs[i]) < 1.0 ? 1 : 0,
                       std::abs(ff[i]) < 1.0 ? 1 : 0, svm.margin_width, fsvm.margin_width);
  }
}

void export_margin_plot(const SvmModeld& svm, const SvmModeld& fsvm, const Dataset& data,
                        const std::filesystem::path& path) {
  std::ostringstream buffer;
  export_margin_plot(svm, fsvm, data, buffer);
  write_file_atomically(path, buffer.str());
}

namespace {

std::string pfsvm_cell(const FoldResult& f) {
  if (f.pfsvm_probabilistic_err == 0) return std::to_string(f.pfsvm_definite_err);
  return fmt::format("{}+{}", f.pfsvm_definite_err, f.pfsvm_probabilistic_err);
}

std::string optional_fixed(const std::optional<double>& v, int precision) {
  return v ? fmt::format("{:.{}f}", *v, precision) : std::string("-");
}

}  // namespace

std::string render_text(const RunReport& report) {
  const auto& c = report.config;
  std::string out = fmt::format(
      "k={} seed={} threshold={} malignant_cost_multiplier={} base_cost={}\n", c.k, c.seed,
      c.fit.threshold, c.fit.malignant_cost_multiplier, c.fit.base_cost);

  const auto row = [&](std::string_view name, auto cell, std::string last) {
    std::string line = fmt::format("{:<14}", name);
    for (const auto& f : report.per_fold) line += fmt::format("{:>6}", f.failed ? std::string("fail") : cell(f));
    line += fmt::format("{:>14}\n", last);
    return line;
  };
  const auto& a = report.aggregate;
  const auto pct = [&](double Aggregate::*member) {
    return a ? fmt::format("{:.2f}", (*a).*member) : std::string("-");
  };

  out += row("Method\\Run", [](const FoldResult& f) { return std::to_string(f.fold + 1); }, "percent_ave");
  out += row("SVM_err", [](const FoldResult& f) { return std::to_string(f.svm_err); }, pct(&Aggregate::svm));
  out += row("FSVM_err", [](const FoldResult& f) { return std::to_string(f.fsvm_err); }, pct(&Aggregate::fsvm));
  out += row("FUZZY_err", [](const FoldResult& f) { return std::to_string(f.fuzzy_err); }, pct(&Aggregate::fuzzy));
  out += row("PFSVM_err", pfsvm_cell, pct(&Aggregate::pfsvm));
  out += row("PFSVM_undet", [](const FoldResult& f) { return std::to_string(f.pfsvm_undetermined); },
             pct(&Aggregate::pfsvm_undetermined));
  out += row("test_size", [](const FoldResult& f) { return std::to_string(f.test_size); },
             a ? std::to_string(a->total_test) : std::string("-"));
  out += "\n";
  out += row("width_SVM", [](const FoldResult& f) { return fmt::format("{:.3f}", f.margin_width_svm); }, "");
  out += row("width_FSVM", [](const FoldResult& f) { return fmt::format("{:.3f}", f.margin_width_fsvm); }, "");
  out += row("err_in_margin", [](const FoldResult& f) { return optional_fixed(f.errors_in_margin_fraction, 2); },
             a ? optional_fixed(a->mean_errors_in_margin_fraction, 3) : std::string("-"));
  out += "\nPFSVM_err cells read definite+probabilistic errors.\n";
  for (const auto& f : report.per_fold)
    if (f.failed) out += fmt::format("fold {} failed: {}\n", f.fold + 1, f.error);
  return out;
}

namespace {

nlohmann::json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

std::string render_json(const RunReport& report) {
  using nlohmann::json;
  const auto& c = report.config;
  json j;
  j["config"] = {{"k", c.k},
                 {"seed", c.seed},
                 {"threshold", c.fit.threshold},
                 {"malignant_cost_multiplier", c.fit.malignant_cost_multiplier},
                 {"base_cost", c.fit.base_cost},
                 {"tolerance", c.fit.train.tolerance}};
  json folds = json::array();
  for (const auto& f : report.per_fold) {
    json jf = {{"fold", f.fold + 1}, {"failed", f.failed}, {"test_size", f.test_size}};
    if (f.failed) {
      jf["error"] = f.error;
    } else {
      jf.update({{"svm_err", f.svm_err},
                 {"fsvm_err", f.fsvm_err},
                 {"fuzzy_err", f.fuzzy_err},
                 {"pfsvm_definite", f.pfsvm_definite},
                 {"pfsvm_probabilistic", f.pfsvm_probabilistic},
                 {"pfsvm_definite_err", f.pfsvm_definite_err},
                 {"pfsvm_probabilistic_err", f.pfsvm_probabilistic_err},
                 {"pfsvm_undetermined", f.pfsvm_undetermined},
                 {"margin_width_svm", f.margin_width_svm},
                 {"margin_width_fsvm", f.margin_width_fsvm},
                 {"fsvm_errors_inside", f.fsvm_errors_inside},
                 {"fsvm_errors_outside", f.fsvm_errors_outside},
                 {"errors_in_margin_fraction", optional_json(f.errors_in_margin_fraction)},
                 {"svm_converged", f.svm_converged},
                 {"fsvm_converged", f.fsvm_converged},
                 {"marginal_training_points", f.marginal_training_points}});
    }
    folds.push_back(std::move(jf));
  }
  j["per_fold"] = std::move(folds);
  if (const auto& a = report.aggregate) {
    j["aggregate"] = {{"successful_folds", a->successful_folds},
                      {"total_test", a->total_test},
                      {"svm", a->svm},
                      {"fsvm", a->fsvm},
                      {"fuzzy", a->fuzzy},
                      {"pfsvm", a->pfsvm},
                      {"pfsvm_definite", a->pfsvm_definite},
                      {"pfsvm_probabilistic", a->pfsvm_probabilistic},
                      {"pfsvm_undetermined", a->pfsvm_undetermined},
                      {"mean_errors_in_margin_fraction", optional_json(a->mean_errors_in_margin_fraction)},
                      {"pooled_errors_in_margin_fraction", optional_json(a->pooled_errors_in_margin_fraction)}};
  } else {
    j["aggregate"] = nullptr;
  }
  return j.dump(2) + "\n";
}

std::string render_csv(const RunReport& report) {
  std::string out =
      "fold,failed,test_size,svm_err,fsvm_err,fuzzy_err,pfsvm_definite_err,pfsvm_probabilistic_err,"
      "pfsvm_undetermined,margin_width_svm,margin_width_fsvm,fsvm_errors_inside,fsvm_errors_outside,"
      "errors_in_margin_fraction\n";
  for (const auto& f : report.per_fold) {
    out += fmt::format("{},{},{},{},{},{},{},{},{},{:.17g},{:.17g},{},{},{}\n", f.fold + 1, f.failed ? 1 : 0,
                       f.test_size, f.svm_err, f.fsvm_err, f.fuzzy_err, f.pfsvm_definite_err,
                       f.pfsvm_probabilistic_err, f.pfsvm_undetermined, f.margin_width_svm,
                       f.margin_width_fsvm, f.fsvm_errors_inside, f.fsvm_errors_outside,
                       f.errors_in_margin_fraction ? fmt::format("{:.17g}", *f.errors_in_margin_fraction)
                                                   : std::string());
  }
  return out;
}

}  // namespace pfsvm
