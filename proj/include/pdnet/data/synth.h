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

#ifndef PDNET_DATA_SYNTH_H_
#define PDNET_DATA_SYNTH_H_

#include <array>
#include <cstdint>
#include <filesystem>

#include "pdnet/data/manifest.h"

namespace pdnet {

// Sizes of the four posterior blocks (manner, place, height, vowel).
inline constexpr std::array<int, 4> kApBlocks = {10, 15, 7, 21};
inline constexpr int kApDim = 53;

struct SynthConfig {
  int healthy = 20;
  int dysarthric = 20;
  int items = 10;
  int min_frames = 40;
  int max_frames = 90;
  double severity = 1.0;
  uint64_t seed = 7;

  void Validate() const;  // ConfigError
};

// Generates an AP corpus in memory. Entry paths are set to
// features/<speaker>_<item>.pdn.
Manifest SynthCorpus(const SynthConfig& config);

// Writes every feature file plus manifest.csv under `dir`.
void WriteCorpus(const Manifest& manifest, const std::filesystem::path& dir);

}  // namespace pdnet

#endif  // PDNET_DATA_SYNTH_H_
