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

#ifndef PDNET_DATA_TRANSFORMS_H_
#define PDNET_DATA_TRANSFORMS_H_

#include <string>
#include <vector>

#include "pdnet/autodiff/tensor.h"

namespace pdnet {

inline constexpr float kStdFloor = 1e-8f;
inline constexpr float kLogFloor = 1e-10f;
inline constexpr int kSegmentFrames = 16;
inline constexpr int kSegmentHop = 8;

// Frame indices kept when shortening N frames to S: floor(k*N/S).
std::vector<int> RetainedFrameIndices(int n, int s);

// Fixes the number of frames to S. Longer inputs drop frames at regular
// intervals; shorter inputs are padded with the representation maximum,
// floor((S-N)/2) frames in front and the rest at the end.
FeatureMatrix ResizeRepresentation(const FeatureMatrix& rep, int s);

struct ZScoreStats {
  std::vector<float> mean;
  std::vector<float> std;
  // Features whose standard deviation was raised to kStdFloor.
  std::vector<int> floored;

  int dim() const { return static_cast<int>(mean.size()); }
  bool empty() const { return mean.empty(); }
};

// Per-feature mean and population standard deviation over all frames of all
// given matrices. Needs at least two frames in total.
ZScoreStats ZScoreFit(const std::vector<const FeatureMatrix*>& reps);
ZScoreStats ZScoreFit(const std::vector<FeatureMatrix>& reps);
FeatureMatrix ZScoreApply(const FeatureMatrix& rep, const ZScoreStats& stats);

// ln(max(x, floor)); negative entries are rejected.
FeatureMatrix LogTransform(const FeatureMatrix& rep, float floor = kLogFloor);

// 16-frame windows with hop 8; the trailing partial window is dropped.
// Returns an empty list (and logs a warning) when N < 16.
std::vector<FeatureMatrix> Segment(const FeatureMatrix& rep, const std::string& label = "");
int SegmentCount(int n);

}  // namespace pdnet

#endif  // PDNET_DATA_TRANSFORMS_H_
