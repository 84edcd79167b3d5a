#include "ccf/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ccf/nn.hpp"

namespace ccf {

const char* classifier_kind_name(ClassifierKind k) {
  switch (k) {
    case ClassifierKind::logistic_regression: return "logistic_regression";
    case ClassifierKind::cosine: return "cosine";
    case ClassifierKind::nearest_centroid: return "nearest_centroid";
  }
  return "?";
}

ClassifierKind classifier_kind_from_name(const std::string& name) {
  if (name == "logistic_regression" || name == "lr" || name == "softmax")
    return ClassifierKind::logistic_regression;
  if (name == "cosine") return ClassifierKind::cosine;
  if (name == "nearest_centroid" || name == "centroid")
    return ClassifierKind::nearest_centroid;
  throw std::invalid_argument(
      "unknown classifier '" + name +
      "' (logistic_regression|cosine|nearest_centroid)");
}

namespace {

std::size_t validate_support(const LabeledSet& s) {
  if (s.x.rows() == 0) throw std::invalid_argument("classifier: empty support set");
  if (s.y.size() != s.x.rows())
    throw std::invalid_argument("classifier: one label required per support row");
  std::uint32_t max_label = 0;
  for (std::uint32_t y : s.y) max_label = std::max(max_label, y);
  std::vector<std::size_t> counts(max_label + 1, 0);
  for (std::uint32_t y : s.y) ++counts[y];
  for (std::size_t c = 0; c < counts.size(); ++c)
    if (counts[c] == 0)
      throw std::invalid_argument("classifier: class " + std::to_string(c) +
                                  " has no support samples");
  return max_label + 1;
}

Matrix class_prototypes(const LabeledSet& s, std::size_t n_classes) {
  Matrix proto(n_classes, s.x.cols());
  std::vector<double> counts(n_classes, 0.0);
  for (std::size_t i = 0; i < s.x.rows(); ++i) {
    const auto row = s.x.row(i);
    double* p = proto.data() + s.y[i] * proto.cols();
    for (std::size_t j = 0; j < row.size(); ++j) p[j] += row[j];
    counts[s.y[i]] += 1.0;
  }
  for (std::size_t c = 0; c < n_classes; ++c) {
    double* p = proto.data() + c * proto.cols();
    for (std::size_t j = 0; j < proto.cols(); ++j) p[j] /= counts[c];
  }
  return proto;
}

}  // namespace

Classifier Classifier::fit(const LabeledSet& support, const ClassifierSpec& spec) {
  Classifier clf;
  clf.kind_ = spec.kind;
  clf.n_classes_ = validate_support(support);

  if (spec.kind != ClassifierKind::logistic_regression) {
    clf.weights_ = class_prototypes(support, clf.n_classes_);
    return clf;
  }

  const std::size_t n = support.x.rows();
  const std::size_t d = support.x.cols();
  const std::size_t k = clf.n_classes_;
  const double inv_n = 1.0 / static_cast<double>(n);

  Matrix w(k, d);
  Vector b(k);

  auto objective = [&](const Matrix& wc, const Vector& bc) {
    double obj = 0.0;
    std::vector<double> logits(k);
    for (std::size_t i = 0; i < n; ++i) {
      const auto xi = support.x.row(i);
      for (std::size_t c = 0; c < k; ++c) {
        const double* row = wc.data() + c * d;
        double acc = bc[c];
        for (std::size_t j = 0; j < d; ++j) acc += row[j] * xi[j];
        logits[c] = acc;
      }
      obj += log_sum_exp(logits) - logits[support.y[i]];
    }
    obj *= inv_n;
    double w2 = 0.0;
    for (std::size_t i = 0; i < wc.size(); ++i) w2 += wc.data()[i] * wc.data()[i];
    return obj + 0.5 * spec.l2 * inv_n * w2;
  };

  Matrix gw(k, d);
  Vector gb(k);
  Matrix w_trial(k, d);
  Vector b_trial(k);

  for (std::size_t iter = 0; iter < spec.max_iters; ++iter) {
    // Gradient of the objective.
    std::fill(gw.data(), gw.data() + gw.size(), 0.0);
    std::fill(gb.data(), gb.data() + gb.dim(), 0.0);
    std::vector<double> logits(k);
    for (std::size_t i = 0; i < n; ++i) {
      const auto xi = support.x.row(i);
      for (std::size_t c = 0; c < k; ++c) {
        const double* row = w.data() + c * d;
        double acc = b[c];
        for (std::size_t j = 0; j < d; ++j) acc += row[j] * xi[j];
        logits[c] = acc;
      }
      const double lse = log_sum_exp(logits);
      for (std::size_t c = 0; c < k; ++c) {
        double p = std::exp(logits[c] - lse);
        if (c == support.y[i]) p -= 1.0;
        p *= inv_n;
        gb[c] += p;
        double* grow = gw.data() + c * d;
        for (std::size_t j = 0; j < d; ++j) grow[j] += p * xi[j];
      }
    }
    const double reg = spec.l2 * inv_n;
    for (std::size_t i = 0; i < w.size(); ++i) gw.data()[i] += reg * w.data()[i];

    double gmax = 0.0;
    double gnorm2 = 0.0;
    for (std::size_t i = 0; i < gw.size(); ++i) {
      gmax = std::max(gmax, std::abs(gw.data()[i]));
      gnorm2 += gw.data()[i] * gw.data()[i];
    }
    for (std::size_t c = 0; c < k; ++c) {
      gmax = std::max(gmax, std::abs(gb[c]));
      gnorm2 += gb[c] * gb[c];
    }
    if (gmax <= spec.tolerance) break;

    // Backtracking line search along -gradient (Armijo, c = 1/2).
    const double obj = objective(w, b);
    double step = spec.learning_rate;
    for (int tries = 0; tries < 40; ++tries) {
      for (std::size_t i = 0; i < w.size(); ++i)
        w_trial.data()[i] = w.data()[i] - step * gw.data()[i];
      for (std::size_t c = 0; c < k; ++c) b_trial[c] = b[c] - step * gb[c];
      if (objective(w_trial, b_trial) <= obj - 0.5 * step * gnorm2) break;
      step *= 0.5;
    }
    w = w_trial;
    b = b_trial;
  }

  clf.weights_ = std::move(w);
  clf.bias_ = std::move(b);
  return clf;
}

std::vector<double> Classifier::scores(std::span<const double> query) const {
  if (query.size() != weights_.cols())
    throw std::invalid_argument("classifier: query dim mismatch");
  std::vector<double> s(n_classes_);
  switch (kind_) {
    case ClassifierKind::logistic_regression:
      for (std::size_t c = 0; c < n_classes_; ++c) {
        const double* row = weights_.data() + c * weights_.cols();
        double acc = bias_[c];
        for (std::size_t j = 0; j < query.size(); ++j) acc += row[j] * query[j];
        s[c] = acc;
      }
      break;
    case ClassifierKind::cosine: {
      double qn = 0.0;
      for (double v : query) qn += v * v;
      qn = std::sqrt(qn);
      for (std::size_t c = 0; c < n_classes_; ++c) {
        const double* row = weights_.data() + c * weights_.cols();
        double dot = 0.0, pn = 0.0;
        for (std::size_t j = 0; j < query.size(); ++j) {
          dot += row[j] * query[j];
          pn += row[j] * row[j];
        }
        pn = std::sqrt(pn);
        s[c] = (qn > 0.0 && pn > 0.0) ? dot / (qn * pn) : 0.0;
      }
      break;
    }
    case ClassifierKind::nearest_centroid:
      for (std::size_t c = 0; c < n_classes_; ++c)
        s[c] = -std::sqrt(
            squared_distance(query, weights_.row(c)));
      break;
  }
  return s;
}

std::uint32_t Classifier::predict(std::span<const double> query) const {
  const auto s = scores(query);
  std::size_t best = 0;
  for (std::size_t c = 1; c < s.size(); ++c)
    if (s[c] > s[best]) best = c;  // strict >, ties keep the lowest label
  return static_cast<std::uint32_t>(best);
}

}  // namespace ccf
