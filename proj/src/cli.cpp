#include "pfsvm/cli.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "pfsvm/classifier.hpp"
#include "pfsvm/dataset.hpp"
#include "pfsvm/evaluation.hpp"
#include "pfsvm/serialization.hpp"

namespace pfsvm {

namespace {

struct CliConfig {
  std::string data_path;
  std::string model_path;
  std::string input_path;
  std::string output_path;
  int k = 10;
  std::uint64_t seed = kDefaultSeed;
  double threshold = 0.9;
  double multiplier = 1.0;
  double base_cost = 1.0;
  double correlation_threshold = 0.95;
  double tolerance = 1e-3;
  int fold = 1;
  bool parallel = false;
  std::string format = "text";
};

FitOptions fit_options(const CliConfig& c) {
  FitOptions o;
  o.threshold = c.threshold;
  o.malignant_cost_multiplier = c.multiplier;
  o.base_cost = c.base_cost;
  o.train.tolerance = c.tolerance;
  return o;
}

Dataset load_pruned(const CliConfig& c) {
  return prune_correlated(load_wdbc(std::filesystem::path(c.data_path)), c.correlation_threshold);
}

void emit(const CliConfig& c, const std::string& text, std::ostream& out) {
  if (c.output_path.empty()) {
    out << text;
  } else {
    write_file_atomically(c.output_path, text);
  }
}

std::vector<Eigen::VectorXd> read_points(const std::string& path, Eigen::Index dimension) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open input file '" + path + "'");
  std::vector<Eigen::VectorXd> points;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> values;
    std::stringstream fields(line);
    std::string field;
    while (std::getline(fields, field, ',')) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(field, &used));
        if (field.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument(field);
      } catch (const std::exception&) {
        throw IngestionError(row, "unparseable number '" + field + "'");
      }
    }
    if (static_cast<Eigen::Index>(values.size()) != dimension)
      throw IngestionError(row, fmt::format("expected {} values, found {}", dimension, values.size()));
    points.push_back(Eigen::Map<const Eigen::VectorXd>(values.data(), dimension));
  }
  return points;
}

std::string describe(const Prediction& p, const std::string& format) {
  std::string kind = p.is_definite() ? "definite" : p.is_probabilistic() ? "probabilistic" : "undetermined";
  const double pm = p.p_malignant();
  if (format == "json") {
    nlohmann::json j = {{"outcome", kind},
                        {"p_malignant", pm},
                        {"p_benign", 1.0 - pm},
                        {"decision_value", p.decision_value},
                        {"in_margin", p.in_margin}};
    if (!p.is_undetermined()) {
      j["class"] = std::string(to_string(p.label()));
      j["probability"] = p.confidence();
    }
    if (p.degenerate) j["degenerate"] = true;
    return j.dump();
  }
  if (format == "csv") {
    return fmt::format("{},{},{:.17g},{:.17g},{:.17g}",
                       p.is_undetermined() ? std::string("UNDETERMINED") : std::string(to_string(p.label())),
                       kind, p.confidence(), pm, p.decision_value);
  }
  if (p.is_undetermined())
    return fmt::format("UNDETERMINED p_malignant={:.6f} p_benign={:.6f} decision={:.6f}", pm, 1.0 - pm,
                       p.decision_value);
  return fmt::format("{} probability={:.6f} {} decision={:.6f}", to_string(p.label()), p.confidence(), kind,
                     p.decision_value);
}

int cmd_prune(const CliConfig& c, std::ostream& out, std::ostream& err) {
  const Dataset full = load_wdbc(std::filesystem::path(c.data_path));
  const Dataset pruned = prune_correlated(full, c.correlation_threshold);
  std::ostringstream csv;
  write_canonical_csv(pruned, csv);
  emit(c, csv.str(), out);
  err << fmt::format("kept {} of {} features\n", pruned.dimension(), full.dimension());
  return kExitOk;
}

int cmd_train(const CliConfig& c, std::ostream& out, std::ostream&) {
  const Dataset data = load_pruned(c);
  const PfsvmModel model = fit(data, fit_options(c));
  save_model(model, c.model_path);
  if (c.format == "json") {
    out << nlohmann::json({{"model", c.model_path},
                           {"features", data.dimension()},
                           {"margin_width", model.svm.margin_width},
                           {"converged", model.svm.converged},
                           {"warnings", model.warnings}})
               .dump(2)
        << "\n";
  } else {
    out << fmt::format("model written to {}\nfeatures: {}\nmargin width: {:.6f}\nconverged: {}\n", c.model_path,
                       data.dimension(), model.svm.margin_width, model.svm.converged ? "yes" : "no");
    for (const auto& w : model.warnings) out << "warning: " << w << "\n";
  }
  return kExitOk;
}

int cmd_predict(const CliConfig& c, std::ostream& out, std::ostream&) {
  const PfsvmModel model = load_model(c.model_path);
  const auto points = read_points(c.input_path, model.dimension());
  std::string text;
  if (c.format == "csv") text += "class,outcome,probability,p_malignant,decision_value\n";
  for (const auto& x : points) text += describe(predict(model, x), c.format) + "\n";
  emit(c, text, out);
  return kExitOk;
}

int cmd_benchmark(const CliConfig& c, std::ostream& out, std::ostream&) {
  const Dataset data = load_pruned(c);
  ExperimentConfig config;
  config.k = c.k;
  config.seed = c.seed;
  config.fit = fit_options(c);
  config.parallel = c.parallel;
  const RunReport report = run_experiment(data, config);
  const std::string text = c.format == "json"  ? render_json(report)
                           : c.format == "csv" ? render_csv(report)
                                               : render_text(report);
  emit(c, text, out);
  return kExitOk;
}

int cmd_plot_export(const CliConfig& c, std::ostream& out, std::ostream&) {
  const Dataset data = load_pruned(c);
  Dataset train = data;
  if (c.fold > 0) {
    if (c.fold > c.k) throw ArgumentError(fmt::format("--fold {} exceeds --k {}", c.fold, c.k));
    train = data.subset(make_folds(data, c.k, c.seed).train_rows(c.fold - 1));
  }
  const FitOptions options = fit_options(c);
  const SvmModeld svm = train_plain_svm(train, options.base_cost, options.train);
  const PfsvmModel model = fit(train, options);
  export_margin_plot(svm, model.svm, data, std::filesystem::path(c.output_path));
  out << fmt::format("wrote {} rows to {} (margin width SVM {:.6f}, FSVM {:.6f})\n", data.size(), c.output_path,
                     svm.margin_width, model.svm.margin_width);
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CliConfig c;
  CLI::App app{"Two-phase fuzzy SVM classifier with abstention"};
  app.require_subcommand(1);

  auto add_data = [&](CLI::App* sub) {
    sub->add_option("--data", c.data_path, "WDBC-format CSV (id, diagnosis, features...)")->required();
    sub->add_option("--correlation-threshold", c.correlation_threshold, "Feature pruning |r| threshold")
        ->check(CLI::Range(1e-12, 1.0));
  };
  auto add_fit = [&](CLI::App* sub) {
    sub->add_option("--threshold", c.threshold, "Minimum class probability for marginal points")
        ->check(CLI::Range(0.5, 1.0));
    sub->add_option("--multiplier", c.multiplier, "Cost multiplier for Malignant samples")
        ->check(CLI::Range(1.0, 1e12));
    sub->add_option("--base-cost", c.base_cost, "Global slack cost multiplier")->check(CLI::PositiveNumber);
    sub->add_option("--tolerance", c.tolerance, "KKT tolerance of the SVM solver")->check(CLI::PositiveNumber);
  };
  auto add_format = [&](CLI::App* sub) {
    sub->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"text", "json", "csv"}));
  };
  auto add_folds = [&](CLI::App* sub) {
    sub->add_option("--k", c.k, "Number of folds")->check(CLI::Range(2, 1 << 30));
    sub->add_option("--seed", c.seed, "Fold assignment seed");
  };

  auto* prune = app.add_subcommand("prune", "Drop correlated features and print the canonical CSV");
  add_data(prune);
  prune->add_option("--output", c.output_path, "Write to this file instead of standard output");

  auto* train = app.add_subcommand("train", "Fit the two-phase model on the whole dataset");
  add_data(train);
  add_fit(train);
  add_format(train);
  train->add_option("--model", c.model_path, "Output model JSON")->required();

  auto* predict_cmd = app.add_subcommand("predict", "Classify points from a headerless CSV");
  predict_cmd->add_option("--model", c.model_path, "Model JSON written by train")->required();
  predict_cmd->add_option("--input", c.input_path, "Headerless CSV, one point per row")->required();
  predict_cmd->add_option("--output", c.output_path, "Write to this file instead of standard output");
  add_format(predict_cmd);

  auto* bench = app.add_subcommand("benchmark", "Cross-validate SVM, FSVM, FUZZY and PFSVM");
  add_data(bench);
  add_fit(bench);
  add_folds(bench);
  add_format(bench);
  bench->add_option("--output", c.output_path, "Write to this file instead of standard output");
  bench->add_flag("--parallel", c.parallel, "Evaluate folds concurrently");

  auto* plot = app.add_subcommand("plot-export", "Write decision values of SVM and FSVM per point");
  add_data(plot);
  add_fit(plot);
  add_folds(plot);
  plot->add_option("--fold", c.fold, "Train on the complement of this fold (1-based); 0 trains on all data")
      ->check(CLI::NonNegativeNumber);
  plot->add_option("--output", c.output_path, "Output CSV")->required();

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
    err << "error: " << e.what() << "\n";
    if (!app.get_subcommands().empty()) err << app.get_subcommands().front()->help();
    return kExitUsage;
  }

  try {
    if (prune->parsed()) return cmd_prune(c, out, err);
    if (train->parsed()) return cmd_train(c, out, err);
    if (predict_cmd->parsed()) return cmd_predict(c, out, err);
    if (bench->parsed()) return cmd_benchmark(c, out, err);
    if (plot->parsed()) return cmd_plot_export(c, out, err);
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace pfsvm
