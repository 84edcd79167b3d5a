#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ccf/matrix.hpp"

namespace ccf {

struct LabeledSet {
  Matrix x;                       // n x dim
  std::vector<std::uint32_t> y;   // episode-local labels 0..n_classes-1
};

enum class ClassifierKind { logistic_regression, cosine, nearest_centroid };

const char* classifier_kind_name(ClassifierKind k);
ClassifierKind classifier_kind_from_name(const std::string& name);

struct ClassifierSpec {
  ClassifierKind kind = ClassifierKind::logistic_regression;
  // Trained kinds only:
  double l2 = 1.0;                // L2 penalty strength on the weights
  std::size_t max_iters = 1000;
  double learning_rate = 1.0;     // initial full-batch step, backtracked
  double tolerance = 1e-6;        // stop when max |gradient| falls below
};

// Episode-level classifier. logistic_regression is multinomial with an
// L2 weight penalty, fitted by full-batch gradient descent from zero
// weights. cosine and nearest_centroid score against per-class mean
// prototypes. Prediction ties break toward the lowest label.
class Classifier {
 public:
  static Classifier fit(const LabeledSet& support, const ClassifierSpec& spec);

  std::uint32_t predict(std::span<const double> query) const;
  std::vector<double> scores(std::span<const double> query) const;

  std::size_t n_classes() const noexcept { return n_classes_; }

 private:
  ClassifierKind kind_ = ClassifierKind::logistic_regression;
  std::size_t n_classes_ = 0;
  Matrix weights_;     // LR: n_classes x dim; prototype kinds: prototypes
  Vector bias_;        // LR only
};

}  // namespace ccf
