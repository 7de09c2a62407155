#include "pfsvm/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <limits>
#include <random>
#include <sstream>

namespace pfsvm {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

bool parse_double(std::string_view text, double& value) {
  if (text.empty()) return false;
  if (text.front() == '+') text.remove_prefix(1);
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  return ec == std::errc() && ptr == end && std::isfinite(value);
}

}  // namespace

Dataset::Dataset(Eigen::MatrixXd features, std::vector<Label> labels,
                 std::vector<std::string> feature_names,
                 std::vector<int> selected_feature_indices)
    : features_(std::move(features)),
      labels_(std::move(labels)),
      feature_names_(std::move(feature_names)),
      selected_feature_indices_(std::move(selected_feature_indices)) {
  if (static_cast<Eigen::Index>(labels_.size()) != features_.rows())
    throw ArgumentError("dataset: label count does not match row count");
  if (features_.rows() > 0 && features_.cols() < 1)
    throw ArgumentError("dataset: at least one feature is required");
  if (static_cast<Eigen::Index>(feature_names_.size()) != features_.cols())
    throw ArgumentError("dataset: feature name count does not match column count");
  if (static_cast<Eigen::Index>(selected_feature_indices_.size()) != features_.cols())
    throw ArgumentError("dataset: selected index count does not match column count");
  if (!features_.allFinite())
    throw ArgumentError("dataset: non-finite feature value");
  for (Label l : labels_)
    if (l != Label::Malignant && l != Label::Benign)
      throw ArgumentError("dataset: label outside {+1, -1}");
}

Eigen::VectorXd Dataset::signs() const {
  Eigen::VectorXd y(size());
  for (Eigen::Index i = 0; i < size(); ++i) y[i] = sign_of(label(i));
  return y;
}

Eigen::Index Dataset::count(Label which) const {
  return static_cast<Eigen::Index>(std::count(labels_.begin(), labels_.end(), which));
}

Dataset Dataset::subset(const std::vector<Eigen::Index>& rows) const {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), dimension());
  std::vector<Label> y;
  y.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] < 0 || rows[r] >= size()) throw ArgumentError("dataset: row index out of range");
    x.row(static_cast<Eigen::Index>(r)) = features_.row(rows[r]);
    y.push_back(label(rows[r]));
  }
  return Dataset(std::move(x), std::move(y), feature_names_, selected_feature_indices_);
}

Dataset Dataset::select_features(const std::vector<int>& columns) const {
  Eigen::MatrixXd x(size(), static_cast<Eigen::Index>(columns.size()));
  std::vector<std::string> names;
  std::vector<int> original;
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (columns[c] < 0 || columns[c] >= dimension())
      throw ArgumentError("dataset: feature index out of range");
    x.col(static_cast<Eigen::Index>(c)) = features_.col(columns[c]);
    names.push_back(feature_names_[static_cast<std::size_t>(columns[c])]);
    original.push_back(selected_feature_indices_[static_cast<std::size_t>(columns[c])]);
  }
  return Dataset(std::move(x), labels_, std::move(names), std::move(original));
}

const std::vector<std::string>& wdbc_feature_names() {
  static const std::vector<std::string> names = [] {
    const char* base[] = {"radius",     "texture",   "perimeter",      "area",
                          "smoothness", "compactness", "concavity", "concave_points",
                          "symmetry",   "fractal_dimension"};
    std::vector<std::string> out;
    for (const char* suffix : {"mean", "se", "worst"})
      for (const char* b : base) out.push_back(std::string(b) + "_" + suffix);
    return out;
  }();
  return names;
}

Dataset load_wdbc(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::vector<Label> labels;
  std::vector<std::string> header_names;
  std::size_t arity = 0;
  std::size_t row_number = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++row_number;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    double probe = 0.0;
    if (rows.empty() && header_names.empty() && row_number == 1 &&
        !parse_double(fields.front(), probe)) {
      for (std::size_t f = 2; f < fields.size(); ++f) header_names.emplace_back(fields[f]);
      arity = fields.size();
      continue;
    }
    if (fields.size() < 3)
      throw IngestionError(row_number, "expected id, diagnosis and at least one feature");
    if (arity == 0) arity = fields.size();
    if (fields.size() != arity)
      throw IngestionError(row_number, "expected " + std::to_string(arity) + " fields, found " +
                                           std::to_string(fields.size()));
    if (fields[1] == "M") {
      labels.push_back(Label::Malignant);
    } else if (fields[1] == "B") {
      labels.push_back(Label::Benign);
    } else {
      throw IngestionError(row_number, "unknown diagnosis '" + std::string(fields[1]) + "'");
    }
    std::vector<double> values(arity - 2);
    for (std::size_t f = 2; f < arity; ++f) {
      if (!parse_double(fields[f], values[f - 2]))
        throw IngestionError(row_number, "unparseable number '" + std::string(fields[f]) +
                                             "' in column " + std::to_string(f + 1));
    }
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw IngestionError("no data rows");

  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto p = static_cast<Eigen::Index>(arity - 2);
  Eigen::MatrixXd x(n, p);
  for (Eigen::Index i = 0; i < n; ++i)
    x.row(i) = Eigen::Map<const Eigen::RowVectorXd>(rows[static_cast<std::size_t>(i)].data(), p);

  std::vector<std::string> names;
  if (static_cast<Eigen::Index>(header_names.size()) == p) {
    names = header_names;
  } else if (p == static_cast<Eigen::Index>(wdbc_feature_names().size())) {
    names = wdbc_feature_names();
  } else {
    for (Eigen::Index j = 0; j < p; ++j) names.push_back("f" + std::to_string(j + 1));
  }
  std::vector<int> indices(static_cast<std::size_t>(p));
  for (Eigen::Index j = 0; j < p; ++j) indices[static_cast<std::size_t>(j)] = static_cast<int>(j);
  return Dataset(std::move(x), std::move(labels), std::move(names), std::move(indices));
}

Dataset load_wdbc(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open data file '" + path.string() + "'");
  return load_wdbc(in);
}

double pearson(const Eigen::Ref<const Eigen::VectorXd>& a,
               const Eigen::Ref<const Eigen::VectorXd>& b) {
  const Eigen::VectorXd da = a.array() - a.mean();
  const Eigen::VectorXd db = b.array() - b.mean();
  const double va = da.squaredNorm();
  const double vb = db.squaredNorm();
  if (va == 0.0 && vb == 0.0) return 1.0;
  if (va == 0.0 || vb == 0.0) return 0.0;
  return da.dot(db) / std::sqrt(va * vb);
}

Dataset prune_correlated(const Dataset& data, double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0))
    throw ArgumentError("prune_correlated: threshold must lie in (0, 1]");
  if (data.empty()) throw ArgumentError("prune_correlated: empty dataset");

  std::vector<int> kept;
  for (Eigen::Index j = 0; j < data.dimension(); ++j) {
    const bool redundant = std::any_of(kept.begin(), kept.end(), [&](int k) {
      return std::abs(pearson(data.features().col(j), data.features().col(k))) > threshold;
    });
    if (!redundant) kept.push_back(static_cast<int>(j));
  }
  return data.select_features(kept);
}

void write_canonical_csv(const Dataset& data, std::ostream& out) {
  out << "label";
  for (const auto& name : data.feature_names()) out << ',' << name;
  out << '\n';
  std::ostringstream cell;
  cell.precision(17);
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    out << diagnosis_letter(data.label(i));
    for (Eigen::Index j = 0; j < data.dimension(); ++j) {
      cell.str({});
      cell << data.features()(i, j);
      out << ',' << cell.str();
    }
    out << '\n';
  }
}

std::vector<Eigen::Index> seeded_permutation(Eigen::Index n, std::uint64_t seed) {
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
  std::mt19937_64 engine(seed);
  for (Eigen::Index i = n - 1; i > 0; --i) {
    // Rejection sampling for an unbiased draw in [0, i].
    const std::uint64_t bound = static_cast<std::uint64_t>(i) + 1;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t draw = engine();
    while (draw >= limit) draw = engine();
    std::swap(perm[static_cast<std::size_t>(i)], perm[draw % bound]);
  }
  return perm;
}

FoldPlan make_folds(Eigen::Index n, int k, std::uint64_t seed) {
  if (k < 2) throw ArgumentError("make_folds: k must be at least 2");
  if (k > n) throw ArgumentError("make_folds: k = " + std::to_string(k) +
                                 " exceeds the number of instances " + std::to_string(n));
  FoldPlan plan{k, seed, std::vector<int>(static_cast<std::size_t>(n))};
  const auto perm = seeded_permutation(n, seed);
  for (std::size_t r = 0; r < perm.size(); ++r)
    plan.fold_assignment[static_cast<std::size_t>(perm[r])] = static_cast<int>(r % static_cast<std::size_t>(k));
  return plan;
}

std::vector<Eigen::Index> FoldPlan::test_rows(int fold) const {
  std::vector<Eigen::Index> rows;
  for (std::size_t i = 0; i < fold_assignment.size(); ++i)
    if (fold_assignment[i] == fold) rows.push_back(static_cast<Eigen::Index>(i));
  return rows;
}

std::vector<Eigen::Index> FoldPlan::train_rows(int fold) const {
  std::vector<Eigen::Index> rows;
  for (std::size_t i = 0; i < fold_assignment.size(); ++i)
    if (fold_assignment[i] != fold) rows.push_back(static_cast<Eigen::Index>(i));
  return rows;
}

std::vector<Eigen::Index> FoldPlan::fold_sizes() const {
  std::vector<Eigen::Index> sizes(static_cast<std::size_t>(k), 0);
  for (int f : fold_assignment) ++sizes[static_cast<std::size_t>(f)];
  return sizes;
}

}  // namespace pfsvm
