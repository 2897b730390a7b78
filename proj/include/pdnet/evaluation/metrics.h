// Copyright (c) 2026 The pdnet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PDNET_EVALUATION_METRICS_H_
#define PDNET_EVALUATION_METRICS_H_

#include <span>
#include <string>
#include <vector>

namespace pdnet {

inline constexpr double kDecisionThreshold = 0.5;

struct SpeakerScore {
  std::string speaker_id;
  int label = 0;
  double score = 0.0;  // mean dysarthric-class probability
  int n_votes = 0;
};

// Arithmetic mean, accumulated in double. Throws EvaluationError naming the
// speaker when `probabilities` is empty.
double SoftVote(std::span<const double> probabilities, const std::string& speaker);

// Groups per-example probabilities by speaker and soft-votes each group.
// Output is sorted by speaker id.
std::vector<SpeakerScore> VoteBySpeaker(std::span<const double> probabilities,
                                        const std::vector<std::string>& speakers,
                                        const std::vector<int>& labels);

// Mann-Whitney AUC with ties counted as one half. Label 1 is the positive
// (dysarthric) class. Throws EvaluationError unless both classes occur.
double RocAuc(std::span<const double> scores, std::span<const int> labels);

// Percentage of correct decisions with "dysarthric iff score > 0.5".
double Accuracy(std::span<const double> scores, std::span<const int> labels);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  double threshold = 0.0;  // positive iff score >= threshold
};

// One point per distinct score from the highest down, preceded by (0, 0) at
// threshold +inf. The last point is (1, 1).
std::vector<RocPoint> RocCurve(std::span<const double> scores, std::span<const int> labels);

// Trapezoidal area under a ROC polyline.
double TrapezoidArea(const std::vector<RocPoint>& points);

}  // namespace pdnet

#endif  // PDNET_EVALUATION_METRICS_H_
