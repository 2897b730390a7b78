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

#include "pdnet/data/transforms.h"

#include <algorithm>
#include <cmath>

#include <glog/logging.h>

namespace pdnet {

std::vector<int> RetainedFrameIndices(int n, int s) {
  if (n < 1 || s < 1) throw InputError("frame counts must be positive");
  std::vector<int> idx(static_cast<size_t>(s));
  for (int k = 0; k < s; ++k) {
    idx[static_cast<size_t>(k)] =
        static_cast<int>(static_cast<int64_t>(k) * n / s);
  }
  return idx;
}

FeatureMatrix ResizeRepresentation(const FeatureMatrix& rep, int s) {
  if (rep.empty() || rep.rank() != 2) throw InputError("cannot resize an empty representation");
  if (s < 1) throw ConfigError("target length S must be positive");
  const int f = rep.dim(0);
  const int n = rep.dim(1);
  if (n == s) return rep;
  FeatureMatrix out({f, s}, 0.f);
  if (n > s) {
    const auto idx = RetainedFrameIndices(n, s);
    for (int r = 0; r < f; ++r) {
      for (int k = 0; k < s; ++k) out.at(r, k) = rep.at(r, idx[static_cast<size_t>(k)]);
    }
    return out;
  }
  const auto data = rep.data();
  const float pad = *std::max_element(data.begin(), data.end());
  const int before = (s - n) / 2;
  for (int r = 0; r < f; ++r) {
    for (int k = 0; k < s; ++k) {
      const int src = k - before;
      out.at(r, k) = (src >= 0 && src < n) ? rep.at(r, src) : pad;
    }
  }
  return out;
}

ZScoreStats ZScoreFit(const std::vector<const FeatureMatrix*>& reps) {
  int f = -1;
  int64_t frames = 0;
  for (const auto* rep : reps) {
    if (rep->rank() != 2) throw InputError("z-score fit expects F x N matrices");
    if (f < 0) f = rep->dim(0);
    if (rep->dim(0) != f) throw DimensionError("z-score fit: inconsistent feature dimension");
    frames += rep->dim(1);
  }
  if (frames < 2) throw InputError("z-score fit needs at least 2 frames");
  std::vector<double> sum(static_cast<size_t>(f), 0.0);
  for (const auto* rep : reps) {
    for (int r = 0; r < f; ++r) {
      for (int c = 0; c < rep->dim(1); ++c) sum[static_cast<size_t>(r)] += rep->at(r, c);
    }
  }
  std::vector<double> mean(sum.size());
  for (size_t r = 0; r < sum.size(); ++r) mean[r] = sum[r] / static_cast<double>(frames);
  std::vector<double> sq(static_cast<size_t>(f), 0.0);
  for (const auto* rep : reps) {
    for (int r = 0; r < f; ++r) {
      for (int c = 0; c < rep->dim(1); ++c) {
        const double d = rep->at(r, c) - mean[static_cast<size_t>(r)];
        sq[static_cast<size_t>(r)] += d * d;
      }
    }
  }
  ZScoreStats stats;
  for (int r = 0; r < f; ++r) {
    stats.mean.push_back(static_cast<float>(mean[static_cast<size_t>(r)]));
    float sd = static_cast<float>(std::sqrt(sq[static_cast<size_t>(r)] / static_cast<double>(frames)));
    if (!(sd >= kStdFloor)) {
      sd = kStdFloor;
      stats.floored.push_back(r);
    }
    stats.std.push_back(sd);
  }
  if (!stats.floored.empty()) {
    LOG(WARNING) << "z-score: " << stats.floored.size()
                 << " constant feature(s), std floored at " << kStdFloor;
  }
  return stats;
}

ZScoreStats ZScoreFit(const std::vector<FeatureMatrix>& reps) {
  std::vector<const FeatureMatrix*> ptrs;
  for (const auto& r : reps) ptrs.push_back(&r);
  return ZScoreFit(ptrs);
}

FeatureMatrix ZScoreApply(const FeatureMatrix& rep, const ZScoreStats& stats) {
  if (rep.rank() != 2 || rep.dim(0) != stats.dim()) {
    throw DimensionError("z-score stats have dimension " + std::to_string(stats.dim()) +
                         ", representation is " + ShapeToString(rep.shape()));
  }
  FeatureMatrix out = rep;
  for (int r = 0; r < rep.dim(0); ++r) {
    const float m = stats.mean[static_cast<size_t>(r)];
    const float sd = stats.std[static_cast<size_t>(r)];
    for (int c = 0; c < rep.dim(1); ++c) out.at(r, c) = (rep.at(r, c) - m) / sd;
  }
  return out;
}

FeatureMatrix LogTransform(const FeatureMatrix& rep, float floor) {
  FeatureMatrix out = rep;
  for (float& v : out.data()) {
    if (v < 0.f) throw InputError("log transform: negative entry " + std::to_string(v));
    v = std::log(std::max(v, floor));
  }
  return out;
}

int SegmentCount(int n) {
  return n < kSegmentFrames ? 0 : (n - kSegmentFrames) / kSegmentHop + 1;
}

std::vector<FeatureMatrix> Segment(const FeatureMatrix& rep, const std::string& label) {
  if (rep.rank() != 2) throw InputError("segment expects an F x N matrix");
  const int f = rep.dim(0);
  const int n = rep.dim(1);
  std::vector<FeatureMatrix> out;
  if (n < kSegmentFrames) {
    LOG(WARNING) << "skipping " << (label.empty() ? "utterance" : label) << ": " << n
                 << " frames, need " << kSegmentFrames;
    return out;
  }
  for (int i = 0; i < SegmentCount(n); ++i) {
    const int start = i * kSegmentHop;
    FeatureMatrix seg({f, kSegmentFrames}, 0.f);
    for (int r = 0; r < f; ++r) {
      for (int c = 0; c < kSegmentFrames; ++c) seg.at(r, c) = rep.at(r, start + c);
    }
    out.push_back(std::move(seg));
  }
  return out;
}

}  // namespace pdnet
