#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pfsvm {

/// Diagnosis label. The numeric value is the SVM target sign.
enum class Label : int { Benign = -1, Malignant = 1 };

inline constexpr int sign_of(Label label) { return static_cast<int>(label); }

inline constexpr Label label_from_sign(double value) {
  // sign(0) resolves to Malignant.
  return value >= 0.0 ? Label::Malignant : Label::Benign;
}

inline constexpr std::string_view to_string(Label label) {
  return label == Label::Malignant ? "Malignant" : "Benign";
}

inline constexpr char diagnosis_letter(Label label) {
  return label == Label::Malignant ? 'M' : 'B';
}

inline constexpr Label other(Label label) {
  return label == Label::Malignant ? Label::Benign : Label::Malignant;
}

// Error hierarchy. Everything the library throws derives from Error.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

class IngestionError : public Error {
 public:
  IngestionError(std::size_t row, const std::string& what)
      : Error("row " + std::to_string(row) + ": " + what), row_(row) {}
  explicit IngestionError(const std::string& what) : Error(what), row_(0) {}

  /// 1-based row number in the source file, 0 when not row specific.
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

class StatsError : public Error {
 public:
  StatsError(Label missing, const std::string& what)
      : Error(what), missing_(missing) {}

  Label missing_class() const noexcept { return missing_; }

 private:
  Label missing_;
};

class NormalizationError : public Error {
 public:
  using Error::Error;
};

class MembershipError : public Error {
 public:
  using Error::Error;
};

class ProbabilityError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ModelFormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace pfsvm
