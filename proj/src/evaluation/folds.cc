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

#include "pdnet/evaluation/folds.h"

#include <algorithm>
#include <cstdlib>
#include <random>
#include <set>

#include "pdnet/common/errors.h"
#include "pdnet/common/util.h"

namespace pdnet {
namespace {

constexpr uint64_t kFoldTag = 0x464f4c44;  // "FOLD"

}  // namespace

SpeakerSplit FoldPlan::Split(int i) const {
  if (i < 0 || i >= k) throw UsageError("fold index out of range");
  SpeakerSplit split;
  split.test = folds[static_cast<size_t>(i)];
  split.dev = folds[static_cast<size_t>(dev_fold(i))];
  for (int j = 0; j < k; ++j) {
    if (j == i || j == dev_fold(i)) continue;
    const auto& f = folds[static_cast<size_t>(j)];
    split.train.insert(split.train.end(), f.begin(), f.end());
  }
  std::sort(split.train.begin(), split.train.end());
  return split;
}

FoldPlan MakeFolds(const Manifest& manifest, int k, uint64_t seed) {
  if (k < 3) throw ConfigError("need at least 3 folds (test, dev and training)");
  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.folds.resize(static_cast<size_t>(k));
  plan.counts.assign(static_cast<size_t>(k), {0, 0});
  std::mt19937_64 rng(MixSeed(seed, kFoldTag));
  size_t next = 0;
  for (int label : {kHealthy, kDysarthric}) {
    auto speakers = manifest.SpeakersWithLabel(label);
    if (static_cast<int>(speakers.size()) < k) {
      throw ConfigError(std::to_string(k) + " folds but only " + std::to_string(speakers.size()) +
                        (label == kHealthy ? " healthy" : " dysarthric") + " speakers");
    }
    std::shuffle(speakers.begin(), speakers.end(), rng);
    for (const auto& s : speakers) {
      const size_t f = next++ % static_cast<size_t>(k);
      plan.folds[f].push_back(s);
      (label == kHealthy ? plan.counts[f].first : plan.counts[f].second) += 1;
    }
  }
  for (auto& f : plan.folds) std::sort(f.begin(), f.end());
  return plan;
}

std::vector<std::string> AuditPlan(const Manifest& manifest, const FoldPlan& plan) {
  std::vector<std::string> issues;
  std::set<std::string> seen;
  for (int i = 0; i < plan.k; ++i) {
    for (const auto& s : plan.folds[static_cast<size_t>(i)]) {
      if (!seen.insert(s).second) issues.push_back("speaker " + s + " is in two folds");
      if (!manifest.HasSpeaker(s)) issues.push_back("fold speaker " + s + " not in manifest");
    }
  }
  for (const auto& s : manifest.speakers()) {
    if (!seen.count(s)) issues.push_back("speaker " + s + " is in no fold");
  }
  const double n = static_cast<double>(manifest.speakers().size());
  const double healthy_ratio = static_cast<double>(manifest.SpeakersWithLabel(kHealthy).size()) / n;
  for (int i = 0; i < plan.k; ++i) {
    int h = 0, d = 0;
    for (const auto& s : plan.folds[static_cast<size_t>(i)]) {
      (manifest.SpeakerLabel(s) == kHealthy ? h : d) += 1;
    }
    // Within one speaker per class of the global ratio.
    const double expect_h = healthy_ratio * (h + d);
    if (std::abs(h - expect_h) > 1.0 || std::abs(d - (h + d - expect_h)) > 1.0) {
      issues.push_back("fold " + std::to_string(i) + " is not stratified (" + std::to_string(h) +
                       " healthy, " + std::to_string(d) + " dysarthric)");
    }
  }
  return issues;
}

std::vector<std::string> AuditFold(const SpeakerSplit& split, const FoldData& data,
                                   const std::string& context) {
  std::vector<std::string> issues;
  const std::set<std::string> test(split.test.begin(), split.test.end());
  auto flag = [&](const std::string& speaker, const std::string& where) {
    if (test.count(speaker)) {
      issues.push_back(context + ": test speaker " + speaker + " appears in " + where);
    }
  };
  for (const auto& s : data.references) flag(s, "the reference set");
  for (const auto& s : data.normalization_speakers) flag(s, "the z-score fit");
  for (const auto& s : split.dev) flag(s, "the dev set");
  for (const auto& s : split.train) flag(s, "the training speakers");
  const std::pair<const char*, const ExampleSet*> sets[] = {{"training examples", data.train.get()},
                                                            {"dev examples", data.dev.get()}};
  for (const auto& [name, set] : sets) {
    if (set == nullptr) continue;
    std::set<std::string> sources;
    for (size_t i = 0; i < set->size(); ++i) {
      for (auto& s : set->SourceSpeakers(i)) sources.insert(std::move(s));
    }
    for (const auto& s : sources) flag(s, name);
  }
  if (data.test != nullptr) {
    for (size_t i = 0; i < data.test->size(); ++i) {
      const auto sources = data.test->SourceSpeakers(i);
      for (size_t j = 1; j < sources.size(); ++j) {
        flag(sources[j], "the references of test examples");
      }
    }
  }
  return issues;
}

}  // namespace pdnet
