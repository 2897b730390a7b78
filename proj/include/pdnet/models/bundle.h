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

#ifndef PDNET_MODELS_BUNDLE_H_
#define PDNET_MODELS_BUNDLE_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "pdnet/data/transforms.h"
#include "pdnet/models/models.h"

namespace pdnet {

inline constexpr std::string_view kBundleMagic = "PDNB";
inline constexpr uint16_t kBundleVersion = 1;

struct Provenance {
  uint64_t seed = 0;
  int32_t fold = -1;
  std::string config_hash;
  // Set when the parameters were seeded from trained baselines.
  std::string init = "random";
};

// A trained (or freshly initialized) model with everything needed to run it
// on raw features: geometry, normalization and parameters.
struct ModelBundle {
  ModelKind kind = ModelKind::kProposed;
  int s = kDefaultS;  // ignored by bcnn1
  int f = 0;          // input feature dimension; 0 for bcnn2
  DistanceKind distance = DistanceKind::kEuclidean;
  ZScoreStats zscore;  // empty for bcnn2
  ParameterSet params;
  Provenance provenance;

  // Parameter names and shapes must match the kind and geometry.
  void Validate() const;  // ConfigError
};

ModelBundle NewBundle(ModelKind kind, int s, int f, uint64_t seed);

std::string EncodeBundle(const ModelBundle& bundle);
ModelBundle DecodeBundle(std::string_view bytes);  // FormatError / ConfigError
void SaveBundle(const ModelBundle& bundle, const std::filesystem::path& path);
ModelBundle LoadBundle(const std::filesystem::path& path);

// Front end from the first bcnn1 layer, classifier from bcnn2. The bcnn1
// model must have been trained on features of the proposed model's F.
void InitTransfer(ModelBundle& proposed, const ModelBundle& bcnn1, const ModelBundle& bcnn2);

}  // namespace pdnet

#endif  // PDNET_MODELS_BUNDLE_H_
