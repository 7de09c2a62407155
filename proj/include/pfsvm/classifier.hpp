#pragma once

#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "pfsvm/dataset.hpp"
#include "pfsvm/fuzzy.hpp"
#include "pfsvm/svm.hpp"

namespace pfsvm {

struct FitOptions {
  /// Minimum class probability for a marginal point to be assigned.
  double threshold = 0.9;
  /// Factor applied to the normalized weights of Malignant samples.
  double malignant_cost_multiplier = 1.0;
  /// Global multiplier C on the per-sample costs, c_i = C * W_n(x_i).
  double base_cost = 1.0;
  /// Replace the Gaussian weights with 1 for every sample.
  bool uniform_weights = false;
  TrainOptions train;
};

/// Two-phase classifier: a Gaussian-weighted SVM decides points outside its
/// margin, a membership-probability rule over margin-interior training points
/// decides (or abstains on) the rest.
struct PfsvmModel {
  SvmModeld svm;
  /// Built from training points with |f| < 1 under `svm`.
  ClassStatsd marginal_stats;
  /// Whole-training-set stats; also the source of the phase-1 weights.
  ClassStatsd fallback_stats;
  double threshold = 0.9;
  double malignant_cost_multiplier = 1.0;
  double base_cost = 1.0;

  /// Phase-1 weights. Not persisted.
  WeightVectord weights;
  /// True for a class whose marginal population was empty at fit time, in
  /// which case `marginal_stats` holds that class's whole-set stats.
  bool malignant_fallback = false;
  bool benign_fallback = false;
  std::vector<std::string> warnings;

  std::vector<std::string> feature_names;
  std::vector<int> selected_feature_indices;

  Eigen::Index dimension() const { return svm.dimension(); }
};

struct Definite {
  Label label;
};

struct Probabilistic {
  Label label;
  double probability;
};

struct Undetermined {
  double p_malignant;
};

struct Prediction {
  std::variant<Definite, Probabilistic, Undetermined> outcome;
  double decision_value = 0.0;
  bool in_margin = false;
  /// Set when the point had zero membership in both marginal populations.
  bool degenerate = false;

  bool is_definite() const { return std::holds_alternative<Definite>(outcome); }
  bool is_probabilistic() const { return std::holds_alternative<Probabilistic>(outcome); }
  bool is_undetermined() const { return std::holds_alternative<Undetermined>(outcome); }

  /// Assigned class; throws on Undetermined.
  Label label() const;
  /// Probability of Malignant: 1 or 0 for definite outcomes.
  double p_malignant() const;
  /// Probability attached to the assigned class, or max(p, 1-p) when
  /// undetermined.
  double confidence() const;
};

/// Fits both phases on `train`. Throws TrainingError when a class is missing
/// and ArgumentError for a threshold outside (0.5, 1] or multiplier below 1.
PfsvmModel fit(const Dataset& train, const FitOptions& options = {});

Prediction predict(const PfsvmModel& model, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Classic SVM with every cost equal to `base_cost`.
SvmModeld train_plain_svm(const Dataset& train, double base_cost = 1.0,
                          const TrainOptions& options = {});

Label predict_svm_baseline(const SvmModeld& model, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Sign rule of the phase-1 weighted SVM alone.
Label predict_fsvm_baseline(const PfsvmModel& model, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Membership probability against whole-training-set stats, argmax class, no
/// abstention. p = 0.5 goes to Malignant.
Label predict_fuzzy_baseline(const ClassStatsd& whole_set_stats,
                             const Eigen::Ref<const Eigen::VectorXd>& x);
Label predict_fuzzy_baseline(const Dataset& train, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Whole-set stats with the default sigma floor, as used for the phase-1
/// weights and the fuzzy baseline.
ClassStatsd whole_set_stats(const Dataset& train);

/// Inclusive threshold test with a few ulps of slack so that odds of exactly
/// t:(1-t) count as reaching t.
bool reaches_threshold(double probability, double threshold);

}  // namespace pfsvm
