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

#ifndef PDNET_TRAINING_PAIRS_H_
#define PDNET_TRAINING_PAIRS_H_

#include <string>
#include <vector>

#include "pdnet/data/manifest.h"

namespace pdnet {

struct PairSample {
  size_t test = 0;       // manifest entry of the test utterance
  size_t reference = 0;  // manifest entry of the healthy reference utterance
  int label = kHealthy;  // label of the test speaker
};

// One pair per (test utterance, reference speaker) sharing the item, never
// pairing a speaker with itself. Ordered by test speaker, item, reference
// speaker. References must be healthy; an empty reference set is a
// ConfigError.
std::vector<PairSample> EnumeratePairs(const Manifest& manifest,
                                       const std::vector<std::string>& test_speakers,
                                       const std::vector<std::string>& reference_speakers);

}  // namespace pdnet

#endif  // PDNET_TRAINING_PAIRS_H_
