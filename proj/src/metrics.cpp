//
// Copyright 2026 The fedsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "fedsim/metrics.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "fedsim/error.hpp"

namespace fedsim {

namespace {

void set_flag(bool* flag) {
  if (flag != nullptr) *flag = true;
}

double ratio(std::uint64_t num, std::uint64_t den, bool* degenerate) {
  if (den == 0) {
    set_flag(degenerate);
    return 0.0;
  }
  return static_cast<double>(num) / static_cast<double>(den);
}

// F1 from one class's counts.  When precision (tp+fp) or recall (tp+fn)
// has a zero denominator the harmonic mean is undefined: report 0 and
// flag, rather than letting 2tp/(2tp+fp+fn) mask the ill-posed case.
double f1_counts(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn,
                 bool* degenerate) {
  if (tp + fp == 0 || tp + fn == 0) {
    set_flag(degenerate);
    return 0.0;
  }
  return static_cast<double>(2 * tp) / static_cast<double>(2 * tp + fp + fn);
}

}  // namespace

ConfusionMatrix confusion(const std::vector<int>& labels,
                          const std::vector<int>& predictions) {
  if (labels.size() != predictions.size()) {
    throw MetricsError("labels and predictions differ in length");
  }
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int y = labels[i];
    const int p = predictions[i];
    if ((y != 0 && y != 1) || (p != 0 && p != 1)) {
      throw MetricsError("binary confusion requires labels in {0,1}");
    }
    if (y == 1) {
      p == 1 ? ++cm.tp : ++cm.fn;
    } else {
      p == 1 ? ++cm.fp : ++cm.tn;
    }
  }
  return cm;
}

double accuracy(const ConfusionMatrix& cm, bool* degenerate) {
  return ratio(cm.tp + cm.tn, cm.total(), degenerate);
}

double f1(const ConfusionMatrix& cm, bool* degenerate) {
  return f1_counts(cm.tp, cm.fp, cm.fn, degenerate);
}

double true_positive_rate(const ConfusionMatrix& cm, bool* degenerate) {
  return ratio(cm.tp, cm.tp + cm.fn, degenerate);
}

double false_positive_rate(const ConfusionMatrix& cm, bool* degenerate) {
  return ratio(cm.fp, cm.fp + cm.tn, degenerate);
}

RocResult roc_auc(const std::vector<int>& labels,
                  const std::vector<double>& scores) {
  if (labels.size() != scores.size()) {
    throw MetricsError("labels and scores differ in length");
  }
  std::uint64_t positives = 0;
  std::uint64_t negatives = 0;
  for (int y : labels) {
    if (y == 1) {
      ++positives;
    } else if (y == 0) {
      ++negatives;
    } else {
      throw MetricsError("ROC requires labels in {0,1}");
    }
  }
  if (positives == 0 || negatives == 0) {
    throw MetricsError("AUC undefined: only one class present");
  }

  // Sweep thresholds from high to low; prediction = score >= threshold.
  std::vector<std::size_t> order(labels.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return scores[a] > scores[b];
                   });

  RocResult result;
  result.points.push_back(
      {std::numeric_limits<double>::infinity(), 0.0, 0.0});
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  double auc = 0.0;
  double prev_tpr = 0.0;
  double prev_fpr = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    const double threshold = scores[order[i]];
    // Consume the whole tie group at this score.
    while (i < order.size() && scores[order[i]] == threshold) {
      labels[order[i]] == 1 ? ++tp : ++fp;
      ++i;
    }
    const double tpr =
        static_cast<double>(tp) / static_cast<double>(positives);
    const double fpr =
        static_cast<double>(fp) / static_cast<double>(negatives);
    auc += (fpr - prev_fpr) * (tpr + prev_tpr) / 2.0;
    result.points.push_back({threshold, tpr, fpr});
    prev_tpr = tpr;
    prev_fpr = fpr;
  }
  result.auc = auc;
  return result;
}

double macro_f1(const std::vector<int>& labels,
                const std::vector<int>& predictions, int num_classes,
                bool* degenerate) {
  if (labels.size() != predictions.size()) {
    throw MetricsError("labels and predictions differ in length");
  }
  if (num_classes < 1) throw MetricsError("macro F1 needs >= 1 class");
  double total = 0.0;
  for (int c = 0; c < num_classes; ++c) {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      const bool is_c = labels[i] == c;
      const bool pred_c = predictions[i] == c;
      if (is_c && pred_c) ++tp;
      if (!is_c && pred_c) ++fp;
      if (is_c && !pred_c) ++fn;
    }
    bool class_degenerate = false;
    total += f1_counts(tp, fp, fn, &class_degenerate);
    if (class_degenerate) set_flag(degenerate);
  }
  return total / static_cast<double>(num_classes);
}

}  // namespace fedsim
