#include "pfsvm/classifier.hpp"

#include <cmath>
#include <limits>

namespace pfsvm {

namespace {

void require_both_classes(const Dataset& data) {
  if (data.count(Label::Malignant) == 0 || data.count(Label::Benign) == 0)
    throw TrainingError("training data must contain both Malignant and Benign samples");
}

void check_point(Eigen::Index expected, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != expected)
    throw ArgumentError("point has dimension " + std::to_string(x.size()) + ", model expects " +
                        std::to_string(expected));
}

}  // namespace

Label Prediction::label() const {
  if (const auto* d = std::get_if<Definite>(&outcome)) return d->label;
  if (const auto* p = std::get_if<Probabilistic>(&outcome)) return p->label;
  throw ArgumentError("prediction is undetermined");
}

double Prediction::p_malignant() const {
  if (const auto* d = std::get_if<Definite>(&outcome)) return d->label == Label::Malignant ? 1.0 : 0.0;
  if (const auto* p = std::get_if<Probabilistic>(&outcome))
    return p->label == Label::Malignant ? p->probability : 1.0 - p->probability;
  return std::get<Undetermined>(outcome).p_malignant;
}

double Prediction::confidence() const {
  if (is_definite()) return 1.0;
  if (const auto* p = std::get_if<Probabilistic>(&outcome)) return p->probability;
  const double pm = std::get<Undetermined>(outcome).p_malignant;
  return std::max(pm, 1.0 - pm);
}

bool reaches_threshold(double probability, double threshold) {
  return probability >= threshold - 8.0 * std::numeric_limits<double>::epsilon() * threshold;
}

ClassStatsd whole_set_stats(const Dataset& train) {
  return class_stats(train.features(), train.labels(), default_sigma_floor(train.features()));
}

SvmModeld train_plain_svm(const Dataset& train, double base_cost, const TrainOptions& options) {
  require_both_classes(train);
  if (!(base_cost > 0)) throw ArgumentError("base cost must be positive");
  return pfsvm::train(train.features(), train.signs(), Eigen::VectorXd::Constant(train.size(), base_cost),
                      options);
}

PfsvmModel fit(const Dataset& train, const FitOptions& options) {
  require_both_classes(train);
  if (!(options.threshold > 0.5 && options.threshold <= 1.0))
    throw ArgumentError("threshold must lie in (0.5, 1]");
  if (!(options.malignant_cost_multiplier >= 1.0))
    throw ArgumentError("malignant cost multiplier must be at least 1");
  if (!(options.base_cost > 0)) throw ArgumentError("base cost must be positive");

  PfsvmModel model;
  model.threshold = options.threshold;
  model.malignant_cost_multiplier = options.malignant_cost_multiplier;
  model.base_cost = options.base_cost;
  model.feature_names = train.feature_names();
  model.selected_feature_indices = train.selected_feature_indices();

  const Eigen::MatrixXd& x = train.features();
  const Eigen::Index n = train.size();
  const Eigen::VectorXd floor = default_sigma_floor(x);
  model.fallback_stats = class_stats(x, train.labels(), floor);

  // Phase 1: own-class Gaussian weights, normalized to sum N.
  if (options.uniform_weights) {
    model.weights = normalize_weights(Eigen::VectorXd::Ones(n));
  } else {
    Eigen::VectorXd log_raw(n);
    for (Eigen::Index i = 0; i < n; ++i)
      log_raw[i] = log_gaussian_weight(x.row(i).transpose(), model.fallback_stats, train.label(i));
    model.weights = normalize_log_weights(log_raw);
  }

  Eigen::VectorXd cost = options.base_cost * model.weights.normalized;
  Eigen::Index underflowed = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (train.label(i) == Label::Malignant) cost[i] *= options.malignant_cost_multiplier;
    if (!(cost[i] > 0)) {
      cost[i] = std::numeric_limits<double>::min();
      ++underflowed;
    }
  }
  if (underflowed > 0)
    model.warnings.push_back(std::to_string(underflowed) +
                             " sample cost(s) underflowed to zero and were raised to the smallest normal double");

  model.svm = pfsvm::train(x, train.signs(), cost, options.train);
  if (!model.svm.converged)
    model.warnings.push_back("phase-1 SVM stopped at the iteration limit before reaching the KKT tolerance");

  // Phase 2: statistics of the training points strictly inside the margin.
  const Eigen::VectorXd f = decision_values(model.svm, x);
  std::vector<Eigen::Index> inside;
  for (Eigen::Index i = 0; i < n; ++i)
    if (std::abs(f[i]) < 1.0) inside.push_back(i);
  const Dataset marginal = train.subset(inside);
  model.marginal_stats = partial_class_stats(marginal.features(), marginal.labels(), floor);
  for (Label k : {Label::Malignant, Label::Benign}) {
    if (!model.marginal_stats.of(k).empty()) continue;
    model.marginal_stats.of(k) = model.fallback_stats.of(k);
    (k == Label::Malignant ? model.malignant_fallback : model.benign_fallback) = true;
    model.warnings.push_back("no " + std::string(to_string(k)) +
                             " training points inside the margin; using whole-set statistics");
  }
  return model;
}

Prediction predict(const PfsvmModel& model, const Eigen::Ref<const Eigen::VectorXd>& x) {
  check_point(model.dimension(), x);
  Prediction out{Definite{Label::Malignant}, decision_value(model.svm, x), false, false};
  if (std::abs(out.decision_value) >= 1.0) {
    out.outcome = Definite{label_from_sign(out.decision_value)};
    return out;
  }
  out.in_margin = true;
  const double log_m = log_membership(x, model.marginal_stats, Label::Malignant);
  const double log_b = log_membership(x, model.marginal_stats, Label::Benign);
  double p_m = 0.5;
  try {
    p_m = membership_probability(log_m, log_b).first;
  } catch (const ProbabilityError&) {
    out.degenerate = true;
    out.outcome = Undetermined{0.5};
    return out;
  }
  const Label best = p_m >= 0.5 ? Label::Malignant : Label::Benign;
  const double p_best = best == Label::Malignant ? p_m : 1.0 - p_m;
  if (reaches_threshold(p_best, model.threshold)) {
    out.outcome = Probabilistic{best, p_best};
  } else {
    out.outcome = Undetermined{p_m};
  }
  return out;
}

Label predict_svm_baseline(const SvmModeld& model, const Eigen::Ref<const Eigen::VectorXd>& x) {
  check_point(model.dimension(), x);
  return predict_sign(model, x);
}

Label predict_fsvm_baseline(const PfsvmModel& model, const Eigen::Ref<const Eigen::VectorXd>& x) {
  return predict_svm_baseline(model.svm, x);
}

Label predict_fuzzy_baseline(const ClassStatsd& whole_set_stats,
                             const Eigen::Ref<const Eigen::VectorXd>& x) {
  check_point(whole_set_stats.dimension(), x);
  const double log_m = log_membership(x, whole_set_stats, Label::Malignant);
  const double log_b = log_membership(x, whole_set_stats, Label::Benign);
  const double p_m = membership_probability(log_m, log_b).first;
  return p_m >= 0.5 ? Label::Malignant : Label::Benign;
}

Label predict_fuzzy_baseline(const Dataset& train, const Eigen::Ref<const Eigen::VectorXd>& x) {
  return predict_fuzzy_baseline(whole_set_stats(train), x);
}

}  // namespace pfsvm
