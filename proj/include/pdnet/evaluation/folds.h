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

#ifndef PDNET_EVALUATION_FOLDS_H_
#define PDNET_EVALUATION_FOLDS_H_

#include <cstdint>
#include <string>
#include <vector>

#include "pdnet/data/manifest.h"
#include "pdnet/training/examples.h"

namespace pdnet {

// Stratified speaker-independent k-fold partition. Fold i tests on folds[i],
// develops on folds[(i + 1) % k] and trains on the rest.
struct FoldPlan {
  int k = 0;
  uint64_t seed = 0;
  std::vector<std::vector<std::string>> folds;  // each sorted
  // counts[i] = {healthy, dysarthric} speakers in fold i
  std::vector<std::pair<int, int>> counts;

  int dev_fold(int i) const { return (i + 1) % k; }
  SpeakerSplit Split(int i) const;
};

// Per-class seeded shuffle, then round-robin dealing. Each class deal starts
// where the previous one stopped, so fold sizes differ by at most one.
// Throws ConfigError when k < 3 or k exceeds either class's speaker count.
FoldPlan MakeFolds(const Manifest& manifest, int k, uint64_t seed);

// Partition and stratification violations of a plan, as messages.
std::vector<std::string> AuditPlan(const Manifest& manifest, const FoldPlan& plan);

// Speaker-disjointness violations of one prepared fold: a test speaker whose
// data enters a training or dev example, the reference set or the z-score fit.
std::vector<std::string> AuditFold(const SpeakerSplit& split, const FoldData& data,
                                   const std::string& context);

}  // namespace pdnet

#endif  // PDNET_EVALUATION_FOLDS_H_
