#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "pfsvm/types.hpp"

namespace pfsvm {

// Gaussian class statistics, per-sample fuzzy weights and membership
// probabilities. Products of per-feature Gaussians are always formed as sums of
// exponents; they are exponentiated only when a caller asks for the raw value.

template <typename Scalar>
struct GaussianStats {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Vector mean;
  Vector std;
  Eigen::Index count = 0;

  bool empty() const { return count == 0; }
};

/// Per-class, per-feature mean and standard deviation.
template <typename Scalar>
struct ClassStats {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  GaussianStats<Scalar> malignant;
  GaussianStats<Scalar> benign;
  /// Lower clamp applied to every standard deviation, per feature.
  Vector sigma_floor;

  const GaussianStats<Scalar>& of(Label label) const {
    return label == Label::Malignant ? malignant : benign;
  }
  GaussianStats<Scalar>& of(Label label) {
    return label == Label::Malignant ? malignant : benign;
  }
  Eigen::Index dimension() const { return sigma_floor.size(); }
};

using ClassStatsd = ClassStats<double>;

/// 1e-6 times each feature's standard deviation over all rows, never below
/// 1e-12.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> default_sigma_floor(
    const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  Vector floor = Vector::Constant(x.cols(), Scalar(1e-12));
  if (x.rows() < 2) return floor;
  const auto mean = x.colwise().mean();
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const Scalar var = (x.col(j).array() - mean[j]).square().sum() / Scalar(x.rows() - 1);
    floor[j] = std::max(Scalar(1e-12), Scalar(1e-6) * std::sqrt(var));
  }
  return floor;
}

/// Sample mean and (n-1) standard deviation of the rows of `x`, clamped below
/// at `sigma_floor`. One row gives sigma = sigma_floor; zero rows give empty
/// stats.
template <typename Derived, typename DerivedF>
GaussianStats<typename Derived::Scalar> gaussian_stats(const Eigen::MatrixBase<Derived>& x,
                                                       const Eigen::MatrixBase<DerivedF>& sigma_floor) {
  using Scalar = typename Derived::Scalar;
  GaussianStats<Scalar> stats;
  stats.count = x.rows();
  if (x.rows() == 0) return stats;
  if (sigma_floor.size() != x.cols()) throw ArgumentError("fuzzy: sigma floor dimension mismatch");
  stats.mean = x.colwise().mean().transpose();
  stats.std = sigma_floor;
  if (x.rows() >= 2) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      const Scalar var =
          (x.col(j).array() - stats.mean[j]).square().sum() / Scalar(x.rows() - 1);
      stats.std[j] = std::max(std::sqrt(var), static_cast<Scalar>(sigma_floor[j]));
    }
  }
  return stats;
}

namespace detail {

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> rows_of(
    const Eigen::MatrixBase<Derived>& x, const std::vector<Label>& labels, Label which) {
  std::vector<Eigen::Index> rows;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == which) rows.push_back(static_cast<Eigen::Index>(i));
  Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> out(
      static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = x.row(rows[r]);
  return out;
}

}  // namespace detail

/// Stats for both classes, allowing a class to be absent (empty stats).
template <typename Derived, typename DerivedF>
ClassStats<typename Derived::Scalar> partial_class_stats(const Eigen::MatrixBase<Derived>& x,
                                                         const std::vector<Label>& labels,
                                                         const Eigen::MatrixBase<DerivedF>& sigma_floor) {
  if (static_cast<Eigen::Index>(labels.size()) != x.rows())
    throw ArgumentError("fuzzy: one label per row required");
  if (!(sigma_floor.array() > 0).all()) throw ArgumentError("fuzzy: sigma floor must be positive");
  ClassStats<typename Derived::Scalar> stats;
  stats.sigma_floor = sigma_floor;
  stats.malignant = gaussian_stats(detail::rows_of(x, labels, Label::Malignant), sigma_floor);
  stats.benign = gaussian_stats(detail::rows_of(x, labels, Label::Benign), sigma_floor);
  return stats;
}

/// Stats for both classes; throws StatsError naming a class with no members.
template <typename Derived, typename DerivedF>
ClassStats<typename Derived::Scalar> class_stats(const Eigen::MatrixBase<Derived>& x,
                                                 const std::vector<Label>& labels,
                                                 const Eigen::MatrixBase<DerivedF>& sigma_floor) {
  auto stats = partial_class_stats(x, labels, sigma_floor);
  for (Label k : {Label::Malignant, Label::Benign})
    if (stats.of(k).empty())
      throw StatsError(k, "fuzzy: class " + std::string(to_string(k)) + " has no members");
  return stats;
}

template <typename Derived>
ClassStats<typename Derived::Scalar> class_stats(const Eigen::MatrixBase<Derived>& x,
                                                 const std::vector<Label>& labels,
                                                 typename Derived::Scalar sigma_floor) {
  using Vector = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1>;
  return class_stats(x, labels, Vector::Constant(x.cols(), sigma_floor));
}

/// -1/2 sum_j ((x_j - mu_j) / sigma_j)^2, the log of the Gaussian product.
template <typename Scalar, typename Derived>
Scalar log_gaussian(const Eigen::MatrixBase<Derived>& x, const GaussianStats<Scalar>& stats) {
  if (stats.empty()) throw MembershipError("fuzzy: no statistics for this class");
  if (x.size() != stats.mean.size())
    throw ArgumentError("fuzzy: point has dimension " + std::to_string(x.size()) +
                        ", stats expect " + std::to_string(stats.mean.size()));
  const auto z = (x.derived().template cast<Scalar>().array() - stats.mean.array()) / stats.std.array();
  return -z.square().sum() / 2;
}

/// Fuzzy weight of a training point under its own class's statistics,
/// prod_j exp(-(x_j - mu_jk)^2 / (2 sigma_jk^2)).
template <typename Scalar, typename Derived>
Scalar log_gaussian_weight(const Eigen::MatrixBase<Derived>& x, const ClassStats<Scalar>& stats,
                           Label k) {
  return log_gaussian(x, stats.of(k));
}

template <typename Scalar, typename Derived>
Scalar gaussian_weight(const Eigen::MatrixBase<Derived>& x, const ClassStats<Scalar>& stats,
                       Label k) {
  using std::exp;
  return exp(log_gaussian_weight(x, stats, k));
}

/// Membership of a test point in class k, using statistics of the marginal
/// training points. Same Gaussian product as the training weight.
template <typename Scalar, typename Derived>
Scalar log_membership(const Eigen::MatrixBase<Derived>& y, const ClassStats<Scalar>& marginal_stats,
                      Label k) {
  const auto& stats = marginal_stats.of(k);
  if (stats.empty())
    throw MembershipError("fuzzy: empty marginal population for class " + std::string(to_string(k)));
  return log_gaussian(y, stats);
}

template <typename Scalar, typename Derived>
Scalar membership(const Eigen::MatrixBase<Derived>& y, const ClassStats<Scalar>& marginal_stats,
                  Label k) {
  using std::exp;
  return exp(log_membership(y, marginal_stats, k));
}

/// Raw and normalized sample weights; `normalized` sums to N.
template <typename Scalar>
struct WeightVector {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  Vector raw;
  Vector normalized;
};

using WeightVectord = WeightVector<double>;

/// normalized_i = N raw_i / sum(raw).
template <typename Derived>
WeightVector<typename Derived::Scalar> normalize_weights(const Eigen::MatrixBase<Derived>& raw) {
  using Scalar = typename Derived::Scalar;
  if (raw.size() == 0) throw NormalizationError("fuzzy: no weights to normalize");
  if (!raw.allFinite() || (raw.array() < 0).any())
    throw NormalizationError("fuzzy: weights must be finite and non-negative");
  const Scalar total = raw.sum();
  if (!(total > 0)) throw NormalizationError("fuzzy: all weights are zero");
  WeightVector<Scalar> out;
  out.raw = raw;
  out.normalized = raw * (static_cast<Scalar>(raw.size()) / total);
  return out;
}

/// Same normalization starting from log weights. Stable when every raw weight
/// underflows: the shift by the maximum cancels in the ratio.
template <typename Derived>
WeightVector<typename Derived::Scalar> normalize_log_weights(const Eigen::MatrixBase<Derived>& log_raw) {
  using Scalar = typename Derived::Scalar;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  if (log_raw.size() == 0) throw NormalizationError("fuzzy: no weights to normalize");
  if ((log_raw.array().isNaN()).any() || (log_raw.array() == std::numeric_limits<Scalar>::infinity()).any())
    throw NormalizationError("fuzzy: log weights must not be NaN or +inf");
  const Scalar top = log_raw.maxCoeff();
  if (std::isinf(top)) throw NormalizationError("fuzzy: all weights are zero");
  const Vector shifted = (log_raw.array() - top).exp();
  WeightVector<Scalar> out;
  out.raw = log_raw.array().exp();
  out.normalized = shifted * (static_cast<Scalar>(log_raw.size()) / shifted.sum());
  return out;
}

/// p1 = A1 / (A1 + A2) from the log memberships, computed from their
/// difference only. p2 = 1 - p1.
template <typename Scalar>
std::pair<Scalar, Scalar> membership_probability(Scalar log_a1, Scalar log_a2) {
  using std::exp;
  using std::isnan;
  if (isnan(log_a1) || isnan(log_a2))
    throw ProbabilityError("fuzzy: NaN log-membership");
  const Scalar neg_inf = -std::numeric_limits<Scalar>::infinity();
  if (log_a1 == neg_inf && log_a2 == neg_inf)
    throw ProbabilityError("fuzzy: point has zero membership in both classes");
  if (log_a1 == -neg_inf || log_a2 == -neg_inf)
    throw ProbabilityError("fuzzy: log-membership must not be +inf");
  const Scalar d = log_a1 - log_a2;
  Scalar p1;
  if (d >= 0) {
    p1 = Scalar(1) / (Scalar(1) + exp(-d));
  } else {
    const Scalar e = exp(d);
    p1 = e / (Scalar(1) + e);
  }
  return {p1, Scalar(1) - p1};
}

}  // namespace pfsvm
