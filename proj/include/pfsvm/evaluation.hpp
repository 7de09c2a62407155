#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pfsvm/classifier.hpp"
#include "pfsvm/dataset.hpp"

namespace pfsvm {

inline constexpr std::uint64_t kDefaultSeed = 7;

struct ExperimentConfig {
  int k = 10;
  std::uint64_t seed = kDefaultSeed;
  FitOptions fit;
  /// Run folds on separate threads. Results are merged in fold order.
  bool parallel = false;
};

struct FoldResult {
  int fold = 0;
  bool failed = false;
  std::string error;

  int test_size = 0;
  int svm_err = 0;
  int fsvm_err = 0;
  int fuzzy_err = 0;
  int pfsvm_definite = 0;
  int pfsvm_probabilistic = 0;
  int pfsvm_definite_err = 0;
  int pfsvm_probabilistic_err = 0;
  int pfsvm_undetermined = 0;

  double margin_width_svm = 0.0;
  double margin_width_fsvm = 0.0;
  /// FSVM sign-rule test errors with |f| < 1 and |f| >= 1.
  int fsvm_errors_inside = 0;
  int fsvm_errors_outside = 0;
  /// inside / (inside + outside); empty when the fold has no FSVM errors.
  std::optional<double> errors_in_margin_fraction;

  bool svm_converged = true;
  bool fsvm_converged = true;
  int marginal_training_points = 0;
};

/// Percentages use the pooled test size of the successful folds.
struct Aggregate {
  int successful_folds = 0;
  int total_test = 0;
  double svm = 0.0;
  double fsvm = 0.0;
  double fuzzy = 0.0;
  double pfsvm = 0.0;
  double pfsvm_definite = 0.0;
  double pfsvm_probabilistic = 0.0;
  double pfsvm_undetermined = 0.0;
  /// Mean of the per-fold fractions over folds that have FSVM errors.
  std::optional<double> mean_errors_in_margin_fraction;
  /// Sum of inside errors over sum of FSVM errors.
  std::optional<double> pooled_errors_in_margin_fraction;
};

struct RunReport {
  ExperimentConfig config;
  std::vector<FoldResult> per_fold;
  /// Empty when every fold failed.
  std::optional<Aggregate> aggregate;
};

/// Seeded k-fold cross-validation of SVM, FSVM, FUZZY and PFSVM.
RunReport run_experiment(const Dataset& data, const ExperimentConfig& config);

/// Evaluates all four methods on one train/test split.
FoldResult evaluate_fold(const Dataset& train, const Dataset& test, const FitOptions& options,
                         int fold = 0);

std::optional<Aggregate> aggregate(const std::vector<FoldResult>& folds);

/// Among test points misclassified by the FSVM sign rule: (inside, outside)
/// the margin.
std::pair<int, int> errors_in_margin(const PfsvmModel& model, const Dataset& test);

/// Columns: decision_svm, decision_fsvm, label, in_margin_svm, in_margin_fsvm,
/// margin_width_svm, margin_width_fsvm. One row per point.
void export_margin_plot(const SvmModeld& svm, const SvmModeld& fsvm, const Dataset& data,
                        std::ostream& out);
void export_margin_plot(const SvmModeld& svm, const SvmModeld& fsvm, const Dataset& data,
                        const std::filesystem::path& path);

/// Aligned table in the layout of the per-run comparison tables.
std::string render_text(const RunReport& report);
std::string render_json(const RunReport& report);
std::string render_csv(const RunReport& report);

}  // namespace pfsvm
