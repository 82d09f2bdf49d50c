#include <algorithm>
#include <cmath>
#include <vector>

#include <doctest.h>

#include "fedsim/error.hpp"
#include "fedsim/metrics.hpp"
#include "fedsim/rng.hpp"

using fedsim::ConfusionMatrix;
using fedsim::MetricsError;

TEST_SUITE_BEGIN("metrics");

namespace {

// O(P*N) concordance probability: P(score_pos > score_neg) + 0.5 * ties.
double concordance(const std::vector<int>& labels,
                   const std::vector<double>& scores) {
  double concordant = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < labels.size(); ++j) {
      if (labels[j] != 0) continue;
      ++pairs;
      if (scores[i] > scores[j]) {
        concordant += 1.0;
      } else if (scores[i] == scores[j]) {
        concordant += 0.5;
      }
    }
  }
  return concordant / static_cast<double>(pairs);
}

}  // namespace

TEST_CASE("confusion counts from a hand-checked example") {
  // labels:      1 1 0 0 1 0
  // predictions: 1 0 0 1 1 0
  const ConfusionMatrix cm =
      fedsim::confusion({1, 1, 0, 0, 1, 0}, {1, 0, 0, 1, 1, 0});
  CHECK(cm.tp == 2);
  CHECK(cm.fn == 1);
  CHECK(cm.fp == 1);
  CHECK(cm.tn == 2);
  CHECK(cm.total() == 6);
  CHECK(fedsim::accuracy(cm) == doctest::Approx(4.0 / 6.0).epsilon(1e-15));
  // F1 = 2*2 / (2*2 + 1 + 1) = 2/3.
  CHECK(fedsim::f1(cm) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(fedsim::true_positive_rate(cm) ==
        doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(fedsim::false_positive_rate(cm) ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("four basic confusion cells map one prediction each") {
  const ConfusionMatrix cm = fedsim::confusion({1, 0, 1, 0}, {1, 0, 0, 1});
  CHECK(cm.tp == 1);
  CHECK(cm.tn == 1);
  CHECK(cm.fn == 1);
  CHECK(cm.fp == 1);
  CHECK(fedsim::accuracy(cm) == 0.5);
  CHECK(fedsim::f1(cm) == 0.5);
}

TEST_CASE("confusion rejects non-binary labels and length mismatch") {
  CHECK_THROWS_AS(fedsim::confusion({0, 2}, {0, 1}), MetricsError);
  CHECK_THROWS_AS(fedsim::confusion({0, 1}, {0, -1}), MetricsError);
  CHECK_THROWS_AS(fedsim::confusion({0, 1, 0}, {0, 1}), MetricsError);
}

TEST_CASE("degenerate denominators report zero and raise the flag") {
  bool flag = false;
  const ConfusionMatrix empty;
  CHECK(fedsim::accuracy(empty, &flag) == 0.0);
  CHECK(flag);

  // All-negative ground truth with all-negative predictions: no TP/FP/FN.
  flag = false;
  const ConfusionMatrix all_tn = fedsim::confusion({0, 0, 0}, {0, 0, 0});
  CHECK(fedsim::f1(all_tn, &flag) == 0.0);
  CHECK(flag);
  flag = false;
  CHECK(fedsim::true_positive_rate(all_tn, &flag) == 0.0);
  CHECK(flag);
  flag = false;
  CHECK(fedsim::accuracy(all_tn, &flag) == 1.0);
  CHECK_FALSE(flag);

  // All-positive ground truth: FPR has a zero denominator.
  flag = false;
  const ConfusionMatrix all_p = fedsim::confusion({1, 1}, {1, 0});
  CHECK(fedsim::false_positive_rate(all_p, &flag) == 0.0);
  CHECK(flag);

  // No positive predictions (tp=fp=0, fn>0): precision is 0/0, so F1 is 0
  // with the flag raised even though 2tp+fp+fn is nonzero.
  flag = false;
  const ConfusionMatrix missed = fedsim::confusion({1, 1}, {0, 0});
  CHECK(fedsim::f1(missed, &flag) == 0.0);
  CHECK(flag);

  // No actual positives (tp=fn=0, fp>0): recall is 0/0, same treatment.
  flag = false;
  const ConfusionMatrix spurious = fedsim::confusion({0, 0}, {1, 0});
  CHECK(fedsim::f1(spurious, &flag) == 0.0);
  CHECK(flag);

  // Both denominators positive with tp=0 is a genuine zero, not flagged.
  flag = false;
  const ConfusionMatrix swapped = fedsim::confusion({1, 0}, {0, 1});
  CHECK(fedsim::f1(swapped, &flag) == 0.0);
  CHECK_FALSE(flag);
}

TEST_CASE("perfectly separated scores give AUC 1, reversed give 0") {
  const std::vector<int> labels = {0, 0, 1, 1};
  const auto perfect = fedsim::roc_auc(labels, {0.1, 0.2, 0.8, 0.9});
  CHECK(perfect.auc == doctest::Approx(1.0).epsilon(1e-15));
  const auto reversed = fedsim::roc_auc(labels, {0.9, 0.8, 0.2, 0.1});
  CHECK(std::abs(reversed.auc) <= 1e-15);
}

TEST_CASE("all-equal scores give AUC one half") {
  const auto r = fedsim::roc_auc({0, 1, 0, 1, 1}, {0.5, 0.5, 0.5, 0.5, 0.5});
  CHECK(r.auc == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("ROC endpoints and monotonicity") {
  fedsim::rng::Stream stream(31);
  std::vector<int> labels;
  std::vector<double> scores;
  for (int i = 0; i < 60; ++i) {
    labels.push_back(static_cast<int>(stream.next_below(2)));
    // Quantized scores force threshold ties.
    scores.push_back(std::floor(stream.next_unit() * 8.0) / 8.0);
  }
  const auto r = fedsim::roc_auc(labels, scores);
  REQUIRE(r.points.size() >= 2);
  CHECK(r.points.front().fpr == 0.0);
  CHECK(r.points.front().tpr == 0.0);
  CHECK(r.points.back().fpr == 1.0);
  CHECK(r.points.back().tpr == 1.0);
  for (std::size_t i = 1; i < r.points.size(); ++i) {
    CHECK(r.points[i].fpr >= r.points[i - 1].fpr);
    CHECK(r.points[i].tpr >= r.points[i - 1].tpr);
  }
}

TEST_CASE("trapezoidal AUC equals pairwise concordance probability") {
  fedsim::rng::Stream stream(2024);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 5 + stream.next_below(80);
    std::vector<int> labels;
    std::vector<double> scores;
    bool has[2] = {false, false};
    for (std::size_t i = 0; i < n; ++i) {
      const int y = static_cast<int>(stream.next_below(2));
      has[y] = true;
      labels.push_back(y);
      // Mix continuous and heavily tied scores.
      if (stream.next_below(2) == 0) {
        scores.push_back(stream.next_unit());
      } else {
        scores.push_back(static_cast<double>(stream.next_below(4)) / 4.0);
      }
    }
    if (!has[0] || !has[1]) continue;
    const auto r = fedsim::roc_auc(labels, scores);
    CHECK(r.auc == doctest::Approx(concordance(labels, scores))
                       .epsilon(1e-12));
  }
}

TEST_CASE("single-class score sets are rejected") {
  CHECK_THROWS_WITH_AS(fedsim::roc_auc({1, 1, 1}, {0.2, 0.5, 0.9}),
                       doctest::Contains("AUC undefined"), MetricsError);
  CHECK_THROWS_AS(fedsim::roc_auc({0, 0}, {0.2, 0.5}), MetricsError);
}

TEST_CASE("macro F1 averages one-vs-rest F1 over three classes") {
  // labels:      0 0 1 1 2 2
  // predictions: 0 1 1 2 2 2
  // class 0: tp=1 fp=0 fn=1 -> F1 = 2/3
  // class 1: tp=1 fp=1 fn=1 -> F1 = 1/2
  // class 2: tp=2 fp=1 fn=0 -> F1 = 4/5
  const double expected = (2.0 / 3.0 + 0.5 + 0.8) / 3.0;
  bool degenerate = false;
  const double got = fedsim::macro_f1({0, 0, 1, 1, 2, 2}, {0, 1, 1, 2, 2, 2},
                                      3, &degenerate);
  CHECK(got == doctest::Approx(expected).epsilon(1e-15));
  CHECK_FALSE(degenerate);
}

TEST_CASE("macro F1 on binary data counts both classes") {
  // Same data as the binary hand example; class-1 F1 = 2/3, class-0 F1:
  // tp=2 fp=1 fn=1 -> 2*2/(4+1+1) = 2/3.  Macro = 2/3.
  const double got = fedsim::macro_f1({1, 1, 0, 0, 1, 0}, {1, 0, 0, 1, 1, 0},
                                      2, nullptr);
  CHECK(got == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("macro F1 flags an absent class") {
  bool degenerate = false;
  const double got = fedsim::macro_f1({0, 0, 0}, {0, 0, 0}, 2, &degenerate);
  // Class 1 contributes 0, class 0 contributes 1.
  CHECK(got == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(degenerate);
}

TEST_SUITE_END();
