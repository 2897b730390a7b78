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

#include "pdnet/training/pairs.h"

#include <algorithm>

namespace pdnet {

std::vector<PairSample> EnumeratePairs(const Manifest& manifest,
                                       const std::vector<std::string>& test_speakers,
                                       const std::vector<std::string>& reference_speakers) {
  if (reference_speakers.empty()) throw ConfigError("reference speaker set is empty");
  std::vector<std::string> refs = reference_speakers;
  std::sort(refs.begin(), refs.end());
  refs.erase(std::unique(refs.begin(), refs.end()), refs.end());
  for (const auto& r : refs) {
    if (manifest.SpeakerLabel(r) != kHealthy) {
      throw ConfigError("reference speaker " + r + " is not healthy");
    }
  }
  std::vector<std::string> tests = test_speakers;
  std::sort(tests.begin(), tests.end());
  tests.erase(std::unique(tests.begin(), tests.end()), tests.end());

  std::vector<PairSample> pairs;
  for (const auto& t : tests) {
    const int label = manifest.SpeakerLabel(t);
    for (size_t ti : manifest.UtterancesOf(t)) {
      const std::string& item = manifest.entry(ti).item_id;
      for (const auto& r : refs) {
        if (r == t) continue;
        const long ri = manifest.Find(r, item);
        if (ri < 0) continue;
        pairs.push_back({ti, static_cast<size_t>(ri), label});
      }
    }
  }
  return pairs;
}

}  // namespace pdnet
