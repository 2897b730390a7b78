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

#ifndef PDNET_DATA_STFT_H_
#define PDNET_DATA_STFT_H_

#include <cstdint>
#include <filesystem>
#include <vector>

#include "pdnet/autodiff/tensor.h"

namespace pdnet {

inline constexpr int kSampleRate = 16000;
inline constexpr int kStftWindow = 160;  // 10 ms
inline constexpr int kStftSize = 256;
inline constexpr int kStftBins = kStftSize / 2 + 1;
inline constexpr double kStftFloor = 1e-10;

struct Audio {
  int sample_rate = kSampleRate;
  std::vector<float> samples;  // mono, full scale [-1, 1)
};

// 16-bit PCM mono RIFF/WAVE only. Any other sample rate is an InputError.
Audio ReadWav(const std::filesystem::path& path);
void WriteWav(const std::filesystem::path& path, const Audio& audio);

// Non-overlapping Hann-windowed frames of 160 samples, zero-padded to 256
// points. Returns ln(|X| + 1e-10), 129 x floor(len / 160).
FeatureMatrix StftLogMagnitude(const std::vector<float>& samples);

}  // namespace pdnet

#endif  // PDNET_DATA_STFT_H_
