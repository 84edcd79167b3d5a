#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <set>

#include "ccf/error.hpp"
#include "ccf/fewshot.hpp"
#include "test_util.hpp"

using namespace ccf;

namespace {

// Bank whose single feature value equals the sample index, so episode rows
// can be traced back to bank samples.
FeatureBank traceable_bank(std::size_t n_classes, std::size_t per_class) {
  Matrix f(n_classes * per_class, 1);
  std::vector<std::uint32_t> labels(n_classes * per_class);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    f(i, 0) = static_cast<double>(i);
    labels[i] = static_cast<std::uint32_t>(i / per_class);
  }
  std::vector<Split> splits(n_classes, Split::novel);
  return FeatureBank(std::move(f), std::move(labels), std::move(splits));
}

FeatureBank clustered_bank(std::uint64_t seed, double stddev) {
  SyntheticSpec spec;
  spec.n_base_classes = 6;
  spec.n_val_classes = 3;
  spec.n_novel_classes = 8;
  spec.feature_dim = 12;
  spec.samples_per_class = 30;
  spec.within_class_stddev = stddev;
  spec.seed = seed;
  return generate_synthetic(spec);
}

}  // namespace

TEST_CASE("sample_episode: 5-way 1-shot 15-query arithmetic") {
  const FeatureBank bank = traceable_bank(8, 20);
  Rng rng(1);
  const Episode ep = sample_episode(bank, Split::novel, 5, 1, 15, rng);
  CHECK(ep.support.x.rows() == 5);
  CHECK(ep.query.x.rows() == 75);
  CHECK(ep.class_ids.size() == 5);
  // episode-local labels are 0..N-1 in draw order, class-major rows
  for (std::size_t i = 0; i < 5; ++i) CHECK(ep.support.y[i] == i);
  for (std::size_t i = 0; i < 75; ++i) CHECK(ep.query.y[i] == i / 15);
}

TEST_CASE("sample_episode: same rng seed, same episode") {
  const FeatureBank bank = traceable_bank(8, 20);
  Rng a(99), b(99);
  const Episode ea = sample_episode(bank, Split::novel, 4, 2, 3, a);
  const Episode eb = sample_episode(bank, Split::novel, 4, 2, 3, b);
  CHECK(ea.class_ids == eb.class_ids);
  CHECK(ea.support.x == eb.support.x);
  CHECK(ea.query.x == eb.query.x);
}

TEST_CASE("sample_episode: support and query never share a sample") {
  const FeatureBank bank = traceable_bank(10, 9);
  Rng rng(5);
  for (int it = 0; it < 300; ++it) {
    const Episode ep = sample_episode(bank, Split::novel, 4, 2, 5, rng);
    std::set<double> support_ids, query_ids;
    for (std::size_t i = 0; i < ep.support.x.rows(); ++i)
      support_ids.insert(ep.support.x(i, 0));
    for (std::size_t i = 0; i < ep.query.x.rows(); ++i)
      query_ids.insert(ep.query.x(i, 0));
    CHECK(support_ids.size() == ep.support.x.rows());
    CHECK(query_ids.size() == ep.query.x.rows());
    for (double id : query_ids) CHECK(support_ids.count(id) == 0);
  }
}

TEST_CASE("sample_episode: class draw is uniform (chi-squared, alpha = 0.01)") {
  const FeatureBank bank = traceable_bank(20, 8);
  std::vector<std::size_t> counts(20, 0);
  const std::size_t episodes = 10000;
  for (std::size_t i = 0; i < episodes; ++i) {
    Rng rng(Rng::derive(424242, i));
    const Episode ep = sample_episode(bank, Split::novel, 5, 1, 1, rng);
    for (auto cid : ep.class_ids) ++counts[cid];
  }
  const double expected = episodes * 5.0 / 20.0;
  double chi2 = 0.0;
  for (auto c : counts) {
    const double d = static_cast<double>(c) - expected;
    chi2 += d * d / expected;
  }
  CHECK(chi2 < 36.191);  // 99th percentile of chi^2 with 19 dof
}

TEST_CASE("sample_episode errors") {
  const FeatureBank bank = traceable_bank(3, 4);
  Rng rng(1);
  CHECK_THROWS_AS(sample_episode(bank, Split::novel, 5, 1, 15, rng), DataError);
  CHECK_THROWS_AS(sample_episode(bank, Split::novel, 3, 2, 3, rng), DataError);
  CHECK_THROWS_AS(sample_episode(bank, Split::base, 1, 1, 1, rng), DataError);
  CHECK_THROWS_AS(sample_episode(bank, Split::novel, 0, 1, 1, rng),
                  std::invalid_argument);
}

TEST_CASE("augment_support doubles the support set, originals first") {
  const FeatureBank bank = traceable_bank(6, 10);
  Rng rng(3);
  const Episode ep = sample_episode(bank, Split::novel, 3, 2, 2, rng);
  Rng mrng(8);
  const CcfModel model(CcfArch{1, 4, 5}, mrng);
  const LabeledSet aug = augment_support(ep, model);
  CHECK(aug.x.rows() == 12);
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(aug.y[i] == ep.support.y[i]);
    CHECK(aug.y[6 + i] == ep.support.y[i]);
    CHECK(aug.x(i, 0) == ep.support.x(i, 0));
    Vector xi(1);
    xi[0] = ep.support.x(i, 0);
    CHECK(aug.x(6 + i, 0) == model.rectify(xi)[0]);
  }
}

TEST_CASE("fit_classifier: logistic regression separates separable clusters") {
  Matrix x = Matrix::from_rows({{0.0, 0.1}, {0.2, -0.1}, {0.1, 0.0},
                                {3.0, 3.1}, {2.9, 3.0}, {3.1, 2.8}});
  const LabeledSet support{x, {0, 0, 0, 1, 1, 1}};
  ClassifierSpec spec;
  const Classifier clf = Classifier::fit(support, spec);
  for (std::size_t i = 0; i < 6; ++i)
    CHECK(clf.predict(x.row(i)) == support.y[i]);
}

TEST_CASE("fit_classifier: K=1 nearest centroid is 1-NN over the support") {
  Rng rng(13);
  Matrix x(4, 3);
  for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform(-2.0, 2.0);
  const LabeledSet support{x, {0, 1, 2, 3}};
  ClassifierSpec spec;
  spec.kind = ClassifierKind::nearest_centroid;
  const Classifier clf = Classifier::fit(support, spec);
  for (int it = 0; it < 100; ++it) {
    Vector q(3);
    for (std::size_t j = 0; j < 3; ++j) q[j] = rng.uniform(-2.0, 2.0);
    std::size_t nn = 0;
    double best = squared_distance(q.span(), x.row(0));
    for (std::size_t i = 1; i < 4; ++i) {
      const double d = squared_distance(q.span(), x.row(i));
      if (d < best) {
        best = d;
        nn = i;
      }
    }
    CHECK(clf.predict(q.span()) == nn);
  }
}

TEST_CASE("fit_classifier: cosine scoring ignores positive query rescaling") {
  Rng rng(14);
  Matrix x(6, 4);
  for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform(-1.0, 1.0);
  const LabeledSet support{x, {0, 0, 1, 1, 2, 2}};
  ClassifierSpec spec;
  spec.kind = ClassifierKind::cosine;
  const Classifier clf = Classifier::fit(support, spec);
  for (int it = 0; it < 100; ++it) {
    Vector q(4), q3(4);
    for (std::size_t j = 0; j < 4; ++j) {
      q[j] = rng.uniform(-1.0, 1.0);
      q3[j] = 3.7 * q[j];
    }
    CHECK(clf.predict(q.span()) == clf.predict(q3.span()));
  }
}

TEST_CASE("predict: a query equal to a prototype lands on its class for all kinds") {
  Matrix x = Matrix::from_rows({{1.0, 0.0}, {0.0, 1.0}, {-1.0, -1.0}});
  const LabeledSet support{x, {0, 1, 2}};
  for (ClassifierKind kind : {ClassifierKind::logistic_regression,
                              ClassifierKind::cosine, ClassifierKind::nearest_centroid}) {
    ClassifierSpec spec;
    spec.kind = kind;
    const Classifier clf = Classifier::fit(support, spec);
    for (std::size_t c = 0; c < 3; ++c) CHECK(clf.predict(x.row(c)) == c);
  }
}

TEST_CASE("predict: exact ties resolve to the lowest label") {
  // two identical prototypes: scores tie exactly
  Matrix x = Matrix::from_rows({{1.0, 1.0}, {1.0, 1.0}, {5.0, -3.0}});
  const LabeledSet support{x, {0, 1, 2}};
  for (ClassifierKind kind : {ClassifierKind::cosine, ClassifierKind::nearest_centroid}) {
    ClassifierSpec spec;
    spec.kind = kind;
    const Classifier clf = Classifier::fit(support, spec);
    CHECK(clf.predict(Vector{1.0, 1.0}.span()) == 0);
  }
}

TEST_CASE("predict: logistic regression argmax equals explicit softmax argmax") {
  Rng rng(15);
  Matrix x(8, 3);
  std::vector<std::uint32_t> y(8);
  for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform(-2.0, 2.0);
  for (std::size_t i = 0; i < 8; ++i) y[i] = static_cast<std::uint32_t>(i % 4);
  const Classifier clf = Classifier::fit({x, y}, ClassifierSpec{});
  for (int it = 0; it < 50; ++it) {
    Vector q(3);
    for (std::size_t j = 0; j < 3; ++j) q[j] = rng.uniform(-2.0, 2.0);
    const auto s = clf.scores(q.span());
    // softmax of the scores preserves the argmax
    double total = 0.0;
    std::vector<double> probs(s.size());
    for (std::size_t c = 0; c < s.size(); ++c) {
      probs[c] = std::exp(s[c]);
      total += probs[c];
    }
    std::size_t amax = 0;
    for (std::size_t c = 1; c < s.size(); ++c)
      if (probs[c] / total > probs[amax] / total) amax = c;
    CHECK(clf.predict(q.span()) == amax);
  }
}

TEST_CASE("fit_classifier input validation") {
  CHECK_THROWS_AS(Classifier::fit({Matrix(), {}}, ClassifierSpec{}),
                  std::invalid_argument);
  Matrix x = Matrix::from_rows({{1.0}, {2.0}});
  CHECK_THROWS_AS(Classifier::fit({x, {0, 2}}, ClassifierSpec{}),
                  std::invalid_argument);  // label 1 missing
}

TEST_CASE("aggregate_report: hand-computed confidence interval") {
  const EvalReport r = aggregate_report({0.8, 0.9});
  CHECK(r.n_episodes == 2);
  CHECK(r.mean_accuracy == doctest::Approx(0.85).epsilon(1e-15));
  // stddev over n-1 = 0.0707106..., halfwidth = 1.96 * s / sqrt(2) = 0.098
  CHECK(r.ci95_halfwidth == doctest::Approx(0.098).epsilon(1e-12));
  CHECK(aggregate_report({0.5}).ci95_halfwidth == 0.0);
  CHECK(aggregate_report({0.7, 0.7, 0.7}).ci95_halfwidth == 0.0);
  CHECK_THROWS_AS(aggregate_report({}), std::invalid_argument);
}

TEST_CASE("evaluate: zero-noise clusters give perfect accuracy for every kind") {
  const FeatureBank bank = clustered_bank(31, 0.0);
  for (ClassifierKind kind : {ClassifierKind::logistic_regression,
                              ClassifierKind::cosine, ClassifierKind::nearest_centroid}) {
    ClassifierSpec spec;
    spec.kind = kind;
    EvalOptions opt;
    opt.way = 5;
    opt.shot = 1;
    opt.query_per_class = 5;
    opt.n_episodes = 40;
    opt.seed = 7;
    const EvalReport r = evaluate(bank, Split::novel, nullptr, spec, opt);
    CHECK(r.mean_accuracy == 1.0);
    CHECK(r.ci95_halfwidth == 0.0);
  }
}

TEST_CASE("evaluate: reproducible and independent of thread count") {
  const FeatureBank bank = clustered_bank(32, 0.8);
  ClassifierSpec spec;
  EvalOptions opt;
  opt.way = 4;
  opt.shot = 2;
  opt.query_per_class = 6;
  opt.n_episodes = 60;
  opt.seed = 11;
  opt.threads = 1;
  const EvalReport a = evaluate(bank, Split::novel, nullptr, spec, opt);
  const EvalReport b = evaluate(bank, Split::novel, nullptr, spec, opt);
  opt.threads = 4;
  const EvalReport c = evaluate(bank, Split::novel, nullptr, spec, opt);
  CHECK(a.per_episode_accuracies == b.per_episode_accuracies);
  CHECK(a.per_episode_accuracies == c.per_episode_accuracies);
  CHECK(a.mean_accuracy == c.mean_accuracy);
}

TEST_CASE("evaluate: query sets are identical with and without augmentation") {
  const FeatureBank bank = clustered_bank(33, 0.5);
  // Episodes are sampled from derive(seed, i) streams; augmentation happens
  // after sampling, so the sampled episodes themselves are equal.
  for (std::size_t i = 0; i < 20; ++i) {
    Rng r1(Rng::derive(21, i)), r2(Rng::derive(21, i));
    const Episode plain = sample_episode(bank, Split::novel, 5, 1, 15, r1);
    const Episode again = sample_episode(bank, Split::novel, 5, 1, 15, r2);
    CHECK(plain.query.x == again.query.x);
    CHECK(plain.support.x == again.support.x);
  }
}

TEST_CASE("evaluate: model/bank mismatch is a data error") {
  const FeatureBank bank = clustered_bank(34, 0.5);  // 6 base classes, dim 12
  Rng rng(1);
  const CcfModel wrong_latent(CcfArch{12, 8, 4}, rng);
  CHECK_THROWS_AS(
      evaluate(bank, Split::novel, &wrong_latent, ClassifierSpec{}, EvalOptions{}),
      DataError);
  const CcfModel wrong_dim(CcfArch{5, 8, 6}, rng);
  CHECK_THROWS_AS(
      evaluate(bank, Split::novel, &wrong_dim, ClassifierSpec{}, EvalOptions{}),
      DataError);
}

TEST_CASE("augment_support rejects a feature-dim mismatch") {
  const FeatureBank bank = traceable_bank(6, 10);
  Rng rng(3);
  const Episode ep = sample_episode(bank, Split::novel, 3, 2, 2, rng);
  Rng mrng(8);
  const CcfModel wrong(CcfArch{2, 4, 5}, mrng);  // expects dim 2, episode has dim 1
  CHECK_THROWS_AS(augment_support(ep, wrong), std::invalid_argument);
}

TEST_CASE("evaluate propagates episode errors from worker threads") {
  const FeatureBank bank = traceable_bank(3, 4);  // too few classes for 5-way
  EvalOptions opt;
  opt.way = 5;
  opt.shot = 1;
  opt.query_per_class = 2;
  opt.n_episodes = 16;
  opt.seed = 1;
  opt.threads = 4;
  CHECK_THROWS_AS(evaluate(bank, Split::novel, nullptr, ClassifierSpec{}, opt), DataError);
}
