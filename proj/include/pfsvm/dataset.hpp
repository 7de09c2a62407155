#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pfsvm/types.hpp"

namespace pfsvm {

/// Labelled feature matrix. Rows are instances, columns are the selected
/// features; `selected_feature_indices[j]` is the column of feature j in the
/// original file (0-based over the numeric columns, id and diagnosis excluded).
class Dataset {
 public:
  Dataset() = default;
  Dataset(Eigen::MatrixXd features, std::vector<Label> labels,
          std::vector<std::string> feature_names,
          std::vector<int> selected_feature_indices);

  Eigen::Index size() const { return features_.rows(); }
  Eigen::Index dimension() const { return features_.cols(); }
  bool empty() const { return features_.rows() == 0; }

  const Eigen::MatrixXd& features() const { return features_; }
  const std::vector<Label>& labels() const { return labels_; }
  const std::vector<std::string>& feature_names() const { return feature_names_; }
  const std::vector<int>& selected_feature_indices() const {
    return selected_feature_indices_;
  }

  Label label(Eigen::Index i) const { return labels_[static_cast<std::size_t>(i)]; }

  /// Labels as ±1 reals.
  Eigen::VectorXd signs() const;

  Eigen::Index count(Label label) const;

  /// Rows listed in `rows`, in that order.
  Dataset subset(const std::vector<Eigen::Index>& rows) const;

  /// Columns listed in `columns` (indices into this dataset's features).
  Dataset select_features(const std::vector<int>& columns) const;

 private:
  Eigen::MatrixXd features_;
  std::vector<Label> labels_;
  std::vector<std::string> feature_names_;
  std::vector<int> selected_feature_indices_;
};

/// Standard WDBC column names for the 30 numeric features.
const std::vector<std::string>& wdbc_feature_names();

/// Parses `id, diagnosis, f1..fp` rows. A single leading header row whose
/// first field is non-numeric is skipped.
Dataset load_wdbc(std::istream& in);
Dataset load_wdbc(const std::filesystem::path& path);

/// Greedy correlation pruning in column order: a feature is dropped when its
/// |Pearson r| with any already-kept feature exceeds `threshold`. Zero-variance
/// columns count as perfectly correlated with each other and uncorrelated with
/// everything else.
Dataset prune_correlated(const Dataset& data, double threshold);

/// Pearson correlation of two columns; 0 when exactly one is constant, 1 when
/// both are.
double pearson(const Eigen::Ref<const Eigen::VectorXd>& a,
               const Eigen::Ref<const Eigen::VectorXd>& b);

/// Canonical debug form: header `label,<names...>`, then one row per instance
/// with the label as M/B followed by the selected features.
void write_canonical_csv(const Dataset& data, std::ostream& out);

/// Fold assignment for k-fold cross-validation.
struct FoldPlan {
  int k = 0;
  std::uint64_t seed = 0;
  std::vector<int> fold_assignment;

  std::vector<Eigen::Index> test_rows(int fold) const;
  std::vector<Eigen::Index> train_rows(int fold) const;
  std::vector<Eigen::Index> fold_sizes() const;
};

/// Seeded permutation dealt round-robin into k folds. Not stratified.
FoldPlan make_folds(Eigen::Index n, int k, std::uint64_t seed);
inline FoldPlan make_folds(const Dataset& data, int k, std::uint64_t seed) {
  return make_folds(data.size(), k, seed);
}

/// Fisher-Yates permutation of 0..n-1 driven by a 64-bit Mersenne Twister.
/// Portable: does not depend on the standard library's distributions.
std::vector<Eigen::Index> seeded_permutation(Eigen::Index n, std::uint64_t seed);

}  // namespace pfsvm
