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

#ifndef PDNET_DATA_FEATURE_IO_H_
#define PDNET_DATA_FEATURE_IO_H_

#include <filesystem>
#include <string>
#include <string_view>

#include "pdnet/autodiff/tensor.h"

namespace pdnet {

// Feature file layout (little-endian):
//   "PDN1" | u32 F | u32 N | F*N float32, row-major (row = feature).
inline constexpr std::string_view kFeatureMagic = "PDN1";

std::string EncodeFeatureMatrix(const FeatureMatrix& features);
FeatureMatrix DecodeFeatureMatrix(std::string_view bytes);

void WriteFeatureFile(const std::filesystem::path& path, const FeatureMatrix& features);
FeatureMatrix ReadFeatureFile(const std::filesystem::path& path);

}  // namespace pdnet

#endif  // PDNET_DATA_FEATURE_IO_H_
