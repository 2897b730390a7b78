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

#include "pdnet/evaluation/metrics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <string>

#include "pdnet/common/errors.h"

namespace pdnet {
namespace {

void CheckSizes(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw EvaluationError("score and label counts differ");
  }
  for (size_t i = 0; i < scores.size(); ++i) {
    if (std::isnan(scores[i])) {
      throw EvaluationError("score " + std::to_string(i) + " is NaN");
    }
  }
}

std::pair<size_t, size_t> ClassCounts(std::span<const int> labels) {
  size_t pos = 0;
  for (int l : labels) pos += l == 1 ? 1 : 0;
  return {pos, labels.size() - pos};
}

// Indices sorted by descending score.
std::vector<size_t> DescendingOrder(std::span<const double> scores) {
  std::vector<size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return scores[a] > scores[b]; });
  return order;
}

}  // namespace

double SoftVote(std::span<const double> probabilities, const std::string& speaker) {
  if (probabilities.empty()) {
    throw EvaluationError("no predictions to vote for speaker " + speaker);
  }
  double sum = 0.0;
  for (double p : probabilities) sum += p;
  return sum / static_cast<double>(probabilities.size());
}

std::vector<SpeakerScore> VoteBySpeaker(std::span<const double> probabilities,
                                        const std::vector<std::string>& speakers,
                                        const std::vector<int>& labels) {
  if (probabilities.size() != speakers.size() || speakers.size() != labels.size()) {
    throw EvaluationError("prediction, speaker and label counts differ");
  }
  std::map<std::string, std::vector<double>> groups;
  std::map<std::string, int> speaker_label;
  for (size_t i = 0; i < speakers.size(); ++i) {
    groups[speakers[i]].push_back(probabilities[i]);
    auto [it, fresh] = speaker_label.emplace(speakers[i], labels[i]);
    if (!fresh && it->second != labels[i]) {
      throw EvaluationError("speaker " + speakers[i] + " has conflicting labels");
    }
  }
  std::vector<SpeakerScore> out;
  for (const auto& [spk, probs] : groups) {
    out.push_back({spk, speaker_label[spk], SoftVote(probs, spk), static_cast<int>(probs.size())});
  }
  return out;
}

double RocAuc(std::span<const double> scores, std::span<const int> labels) {
  CheckSizes(scores, labels);
  const auto [n_pos, n_neg] = ClassCounts(labels);
  if (n_pos == 0 || n_neg == 0) throw EvaluationError("AUC needs both classes present");
  // Walk tie groups from the top; twice the Mann-Whitney count stays integral.
  const auto order = DescendingOrder(scores);
  uint64_t twice = 0;
  uint64_t neg_above = 0;
  for (size_t i = 0; i < order.size();) {
    size_t j = i;
    uint64_t pos = 0, neg = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] == 1 ? pos : neg) += 1;
      ++j;
    }
    // Positives in this group beat every negative below and tie with `neg`.
    twice += pos * (2 * (n_neg - neg_above - neg) + neg);
    neg_above += neg;
    i = j;
  }
  return static_cast<double>(twice) / (2.0 * static_cast<double>(n_pos * n_neg));
}

double Accuracy(std::span<const double> scores, std::span<const int> labels) {
  CheckSizes(scores, labels);
  if (scores.empty()) throw EvaluationError("accuracy of an empty score set");
  size_t correct = 0;
  for (size_t i = 0; i < scores.size(); ++i) {
    const int predicted = scores[i] > kDecisionThreshold ? 1 : 0;
    correct += predicted == labels[i] ? 1 : 0;
  }
  return 100.0 * static_cast<double>(correct) / static_cast<double>(scores.size());
}

std::vector<RocPoint> RocCurve(std::span<const double> scores, std::span<const int> labels) {
  CheckSizes(scores, labels);
  const auto [n_pos, n_neg] = ClassCounts(labels);
  if (n_pos == 0 || n_neg == 0) throw EvaluationError("ROC needs both classes present");
  const auto order = DescendingOrder(scores);
  std::vector<RocPoint> points = {{0.0, 0.0, std::numeric_limits<double>::infinity()}};
  size_t tp = 0, fp = 0;
  for (size_t i = 0; i < order.size();) {
    const double threshold = scores[order[i]];
    while (i < order.size() && scores[order[i]] == threshold) {
      (labels[order[i]] == 1 ? tp : fp) += 1;
      ++i;
    }
    points.push_back({static_cast<double>(fp) / static_cast<double>(n_neg),
                      static_cast<double>(tp) / static_cast<double>(n_pos), threshold});
  }
  return points;
}

double TrapezoidArea(const std::vector<RocPoint>& points) {
  double area = 0.0;
  for (size_t i = 1; i < points.size(); ++i) {
    area += (points[i].fpr - points[i - 1].fpr) * (points[i].tpr + points[i - 1].tpr) / 2.0;
  }
  return area;
}

}  // namespace pdnet
