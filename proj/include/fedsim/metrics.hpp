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

// Binary/multiclass classification metrics.  The positive class for binary
// summaries is label 1.

#ifndef FEDSIM_METRICS_HPP_
#define FEDSIM_METRICS_HPP_

#include <cstdint>
#include <vector>

namespace fedsim {

struct ConfusionMatrix {
  std::uint64_t tp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const { return tp + tn + fp + fn; }
};

// Binary confusion counts; labels/predictions must be 0/1.
ConfusionMatrix confusion(const std::vector<int>& labels,
                          const std::vector<int>& predictions);

// (TP+TN)/total.  Zero total -> 0 with *degenerate set.
double accuracy(const ConfusionMatrix& cm, bool* degenerate = nullptr);
// 2TP/(2TP+FP+FN).  Zero denominator -> 0 with *degenerate set.
double f1(const ConfusionMatrix& cm, bool* degenerate = nullptr);
double true_positive_rate(const ConfusionMatrix& cm,
                          bool* degenerate = nullptr);
double false_positive_rate(const ConfusionMatrix& cm,
                           bool* degenerate = nullptr);

struct RocPoint {
  double threshold = 0.0;
  double tpr = 0.0;
  double fpr = 0.0;
};

struct RocResult {
  std::vector<RocPoint> points;  // sorted by ascending FPR, (0,0) to (1,1)
  double auc = 0.0;
};

// ROC over score thresholds at every distinct score (prediction = score >=
// threshold), AUC by trapezoidal integration.  Throws MetricsError("AUC
// undefined") unless both classes are present.
RocResult roc_auc(const std::vector<int>& labels,
                  const std::vector<double>& scores);

// Mean of per-class one-vs-rest F1 over classes 0..num_classes-1; absent
// classes contribute 0 and set *degenerate.
double macro_f1(const std::vector<int>& labels,
                const std::vector<int>& predictions, int num_classes,
                bool* degenerate = nullptr);

}  // namespace fedsim

#endif  // FEDSIM_METRICS_HPP_
