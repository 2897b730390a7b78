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

#include "pdnet/data/feature_io.h"

#include "pdnet/common/util.h"

namespace pdnet {

std::string EncodeFeatureMatrix(const FeatureMatrix& features) {
  if (features.rank() != 2) {
    throw DimensionError("feature matrix must be F x N, got " + ShapeToString(features.shape()));
  }
  BinaryWriter w;
  w.WriteBytes(kFeatureMagic);
  w.WriteU32(static_cast<uint32_t>(features.dim(0)));
  w.WriteU32(static_cast<uint32_t>(features.dim(1)));
  for (float v : features.data()) w.WriteF32(v);
  return w.buffer();
}

FeatureMatrix DecodeFeatureMatrix(std::string_view bytes) {
  BinaryReader r(bytes);
  if (r.remaining() < 4 || r.ReadBytes(4) != kFeatureMagic) {
    throw FormatError("feature data does not start with magic PDN1");
  }
  const uint32_t f = r.ReadU32();
  const uint32_t n = r.ReadU32();
  if (f == 0 || n == 0) throw FormatError("feature matrix has an empty axis");
  const uint64_t count = static_cast<uint64_t>(f) * n;
  if (r.remaining() != count * 4) {
    throw FormatError("feature payload holds " + std::to_string(r.remaining()) +
                      " bytes, expected " + std::to_string(count * 4));
  }
  std::vector<float> data(count);
  for (auto& v : data) v = r.ReadF32();
  return FeatureMatrix({static_cast<int>(f), static_cast<int>(n)}, std::move(data));
}

void WriteFeatureFile(const std::filesystem::path& path, const FeatureMatrix& features) {
  WriteFileBytes(path, EncodeFeatureMatrix(features));
}

FeatureMatrix ReadFeatureFile(const std::filesystem::path& path) {
  try {
    return DecodeFeatureMatrix(ReadFileBytes(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace pdnet
