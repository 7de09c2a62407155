#include "pfsvm/evaluation.hpp"

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "test_data.hpp"

namespace pfsvm {
namespace {

using testing::gaussian_classes;
using testing::make_dataset;

// f(x) = x in one dimension.
PfsvmModel identity_model() {
  PfsvmModel m;
  m.svm.normal = Eigen::VectorXd::Constant(1, 1.0);
  m.svm.offset = 0.0;
  m.svm.margin_width = 2.0;
  return m;
}

Dataset points_1d(std::vector<double> xs, std::vector<Label> labels) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(xs.size()), 1);
  for (std::size_t i = 0; i < xs.size(); ++i) x(static_cast<Eigen::Index>(i), 0) = xs[i];
  return make_dataset(x, std::move(labels));
}

TEST(ErrorsInMargin, Examples) {
  const PfsvmModel m = identity_model();
  EXPECT_EQ(errors_in_margin(m, points_1d({2.0, -0.5}, {Label::Malignant, Label::Benign})),
            std::make_pair(0, 0));
  EXPECT_EQ(errors_in_margin(m, points_1d({0.4, -3.0}, {Label::Benign, Label::Benign})),
            std::make_pair(1, 0));
  EXPECT_EQ(errors_in_margin(m, points_1d({0.4, 1.6}, {Label::Benign, Label::Benign})),
            std::make_pair(1, 1));
  // f = -1 exactly is on the margin, not inside it.
  EXPECT_EQ(errors_in_margin(m, points_1d({-1.0}, {Label::Malignant})), std::make_pair(0, 1));
}

ExperimentConfig small_config(int k = 5) {
  ExperimentConfig c;
  c.k = k;
  c.seed = 3;
  return c;
}

TEST(RunExperiment, AggregateIsRecomputableFromFolds) {
  std::mt19937 rng(5);
  const Dataset d = gaussian_classes(rng, 60, 0.6, 1.0);
  const RunReport r = run_experiment(d, small_config());
  ASSERT_TRUE(r.aggregate.has_value());

  long total = 0, svm = 0, fsvm = 0, fuzzy = 0, pf = 0, undet = 0, inside = 0, errors = 0;
  double fraction_sum = 0.0;
  int fraction_folds = 0;
  for (const FoldResult& f : r.per_fold) {
    ASSERT_FALSE(f.failed);
    for (int count : {f.svm_err, f.fsvm_err, f.fuzzy_err, f.pfsvm_definite_err + f.pfsvm_probabilistic_err,
                      f.pfsvm_undetermined})
      EXPECT_LE(count, f.test_size);
    EXPECT_EQ(f.pfsvm_definite + f.pfsvm_probabilistic + f.pfsvm_undetermined, f.test_size);
    EXPECT_LE(f.pfsvm_definite_err + f.pfsvm_probabilistic_err, f.fsvm_err + f.pfsvm_undetermined);
    EXPECT_EQ(f.fsvm_errors_inside + f.fsvm_errors_outside, f.fsvm_err);
    total += f.test_size;
    svm += f.svm_err;
    fsvm += f.fsvm_err;
    fuzzy += f.fuzzy_err;
    pf += f.pfsvm_definite_err + f.pfsvm_probabilistic_err;
    undet += f.pfsvm_undetermined;
    inside += f.fsvm_errors_inside;
    errors += f.fsvm_err;
    if (f.fsvm_err > 0) {
      fraction_sum += static_cast<double>(f.fsvm_errors_inside) / f.fsvm_err;
      ++fraction_folds;
    }
  }
  const Aggregate& a = *r.aggregate;
  EXPECT_EQ(total, d.size());
  EXPECT_EQ(a.total_test, total);
  EXPECT_NEAR(a.svm, 100.0 * svm / total, 1e-12);
  EXPECT_NEAR(a.fsvm, 100.0 * fsvm / total, 1e-12);
  EXPECT_NEAR(a.fuzzy, 100.0 * fuzzy / total, 1e-12);
  EXPECT_NEAR(a.pfsvm, 100.0 * pf / total, 1e-12);
  EXPECT_NEAR(a.pfsvm_undetermined, 100.0 * undet / total, 1e-12);
  ASSERT_GT(fraction_folds, 0);
  EXPECT_NEAR(*a.mean_errors_in_margin_fraction, fraction_sum / fraction_folds, 1e-12);
  EXPECT_NEAR(*a.pooled_errors_in_margin_fraction, static_cast<double>(inside) / errors, 1e-12);
}

TEST(RunExperiment, IdenticalInputsGiveIdenticalReports) {
  std::mt19937 rng(9);
  const Dataset d = gaussian_classes(rng, 40, 0.7, 1.0);
  const RunReport a = run_experiment(d, small_config());
  const RunReport b = run_experiment(d, small_config());
  ExperimentConfig threaded = small_config();
  threaded.parallel = true;
  const RunReport c = run_experiment(d, threaded);
  EXPECT_EQ(render_text(a), render_text(b));
  EXPECT_EQ(render_json(a), render_json(b));
  EXPECT_EQ(render_csv(a), render_csv(b));
  EXPECT_EQ(render_csv(a), render_csv(c));
  EXPECT_EQ(render_json(a), render_json(c));
}

TEST(RunExperiment, SeparatedBlobsHaveNoErrors) {
  std::mt19937 rng(4);
  const Dataset d = gaussian_classes(rng, 30, 6.0, 0.3);
  const RunReport r = run_experiment(d, small_config(3));
  ASSERT_TRUE(r.aggregate.has_value());
  EXPECT_EQ(r.aggregate->svm, 0.0);
  EXPECT_EQ(r.aggregate->fsvm, 0.0);
  EXPECT_EQ(r.aggregate->fuzzy, 0.0);
  EXPECT_EQ(r.aggregate->pfsvm, 0.0);
  EXPECT_EQ(r.aggregate->pfsvm_undetermined, 0.0);
  EXPECT_FALSE(r.aggregate->mean_errors_in_margin_fraction.has_value());
  for (const FoldResult& f : r.per_fold) EXPECT_FALSE(f.errors_in_margin_fraction.has_value());
}

TEST(RunExperiment, FailedFoldIsReportedAndSkipped) {
  // A single Malignant sample: the fold holding it out trains on one class.
  std::vector<double> xs;
  std::vector<Label> labels;
  for (int i = 0; i < 11; ++i) {
    xs.push_back(-1.0 - 0.1 * i);
    labels.push_back(Label::Benign);
  }
  xs.push_back(2.0);
  labels.push_back(Label::Malignant);
  const Dataset d = points_1d(xs, labels);
  const RunReport r = run_experiment(d, small_config(3));
  int failed = 0;
  for (const FoldResult& f : r.per_fold) {
    if (!f.failed) continue;
    ++failed;
    EXPECT_FALSE(f.error.empty());
    EXPECT_EQ(f.test_size, 4);
  }
  EXPECT_EQ(failed, 1);
  ASSERT_TRUE(r.aggregate.has_value());
  EXPECT_EQ(r.aggregate->successful_folds, 2);
  EXPECT_EQ(r.aggregate->total_test, 8);
  EXPECT_NE(render_text(r).find("fail"), std::string::npos);
  EXPECT_NE(render_text(r).find("failed:"), std::string::npos);
}

TEST(RunExperiment, NoSuccessfulFoldMeansNoAggregate) {
  const Dataset d = points_1d({-1.0, 1.0}, {Label::Benign, Label::Malignant});
  const RunReport r = run_experiment(d, small_config(2));
  EXPECT_FALSE(r.aggregate.has_value());
  EXPECT_TRUE(nlohmann::json::parse(render_json(r))["aggregate"].is_null());
  EXPECT_THROW(run_experiment(d, small_config(3)), ArgumentError);
}

TEST(Aggregate, HandBuiltFolds) {
  FoldResult a;
  a.test_size = 50;
  a.svm_err = 2;
  a.fsvm_err = 4;
  a.pfsvm_definite_err = 1;
  a.pfsvm_probabilistic_err = 1;
  a.pfsvm_undetermined = 3;
  a.fsvm_errors_inside = 3;
  a.fsvm_errors_outside = 1;
  a.errors_in_margin_fraction = 0.75;
  FoldResult b;
  b.test_size = 50;
  b.svm_err = 1;
  FoldResult broken;
  broken.failed = true;
  broken.test_size = 10;
  broken.svm_err = 10;
  const auto agg = aggregate({a, b, broken});
  ASSERT_TRUE(agg.has_value());
  EXPECT_EQ(agg->successful_folds, 2);
  EXPECT_EQ(agg->total_test, 100);
  EXPECT_DOUBLE_EQ(agg->svm, 3.0);
  EXPECT_DOUBLE_EQ(agg->fsvm, 4.0);
  EXPECT_DOUBLE_EQ(agg->pfsvm, 2.0);
  EXPECT_DOUBLE_EQ(agg->pfsvm_definite, 1.0);
  EXPECT_DOUBLE_EQ(agg->pfsvm_undetermined, 3.0);
  EXPECT_DOUBLE_EQ(*agg->mean_errors_in_margin_fraction, 0.75);
  EXPECT_DOUBLE_EQ(*agg->pooled_errors_in_margin_fraction, 0.75);
  EXPECT_FALSE(aggregate({broken}).has_value());
}

TEST(Render, TextLayoutAndCsvShape) {
  std::mt19937 rng(12);
  const Dataset d = gaussian_classes(rng, 20, 0.8, 1.0);
  const RunReport r = run_experiment(d, small_config(4));
  const std::string text = render_text(r);
  for (const char* row : {"SVM_err", "FSVM_err", "FUZZY_err", "PFSVM_err", "PFSVM_undet", "width_SVM",
                          "width_FSVM", "err_in_margin", "percent_ave"})
    EXPECT_NE(text.find(row), std::string::npos) << row;

  std::istringstream csv(render_csv(r));
  std::string line;
  int lines = 0;
  while (std::getline(csv, line)) ++lines;
  EXPECT_EQ(lines, 1 + 4);

  const auto j = nlohmann::json::parse(render_json(r));
  EXPECT_EQ(j["per_fold"].size(), 4u);
  EXPECT_EQ(j["config"]["k"], 4);
  EXPECT_EQ(j.dump(2) + "\n", render_json(r));
}

TEST(MarginPlot, ShapeAndEmptyMarginForSeparatedBlobs) {
  std::mt19937 rng(21);
  const Dataset d = gaussian_classes(rng, 25, 6.0, 0.3);
  const SvmModeld svm = train_plain_svm(d);
  const PfsvmModel model = fit(d);
  std::ostringstream out;
  export_margin_plot(svm, model.svm, d, out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line,
            "decision_svm,decision_fsvm,label,in_margin_svm,in_margin_fsvm,margin_width_svm,margin_width_fsvm");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    ASSERT_EQ(cells.size(), 7u);
    EXPECT_TRUE(cells[2] == "M" || cells[2] == "B");
    EXPECT_EQ(cells[3], "0");
    EXPECT_EQ(cells[4], "0");
    EXPECT_DOUBLE_EQ(std::stod(cells[5]), svm.margin_width);
    EXPECT_DOUBLE_EQ(std::stod(cells[6]), model.svm.margin_width);
  }
  EXPECT_EQ(rows, d.size());
}

TEST(MarginPlot, UnwritablePathIsAnIoError) {
  std::mt19937 rng(21);
  const Dataset d = gaussian_classes(rng, 5, 3.0, 0.3);
  const SvmModeld svm = train_plain_svm(d);
  EXPECT_THROW(export_margin_plot(svm, svm, d, std::filesystem::path("/nonexistent/dir/plot.csv")), IoError);
}

}  // namespace
}  // namespace pfsvm
