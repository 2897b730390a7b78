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

#include "pdnet/models/bundle.h"

#include "pdnet/common/util.h"

namespace pdnet {

void ModelBundle::Validate() const {
  if (kind != ModelKind::kBcnn2 && f < 1) throw ConfigError("bundle has no feature dimension");
  if (distance != DefaultDistance(kind)) {
    throw ConfigError(std::string("bundle distance ") + DistanceKindName(distance) +
                      " does not fit model " + ModelKindName(kind));
  }
  const auto shapes = ExpectedShapes(kind, s, f);
  if (params.size() != shapes.size()) {
    throw ConfigError("bundle has " + std::to_string(params.size()) + " parameters, " +
                      ModelKindName(kind) + " needs " + std::to_string(shapes.size()));
  }
  for (const auto& p : params) {
    auto it = shapes.find(p.name);
    if (it == shapes.end()) throw ConfigError("unexpected parameter " + p.name);
    if (it->second != p.tensor.shape()) {
      throw ConfigError("parameter " + p.name + " has shape " + ShapeToString(p.tensor.shape()) +
                        ", expected " + ShapeToString(it->second) + " for S = " +
                        std::to_string(s));
    }
  }
  if (!zscore.empty()) {
    if (zscore.dim() != f || static_cast<int>(zscore.std.size()) != f) {
      throw ConfigError("z-score statistics do not match F = " + std::to_string(f));
    }
  }
}

ModelBundle NewBundle(ModelKind kind, int s, int f, uint64_t seed) {
  ModelBundle b;
  b.kind = kind;
  b.s = kind == ModelKind::kBcnn1 ? 0 : s;
  b.f = kind == ModelKind::kBcnn2 ? 0 : f;
  b.distance = DefaultDistance(kind);
  b.params = InitRandom(kind, s, b.f, seed);
  b.provenance.seed = seed;
  return b;
}

std::string EncodeBundle(const ModelBundle& b) {
  BinaryWriter w;
  w.WriteBytes(kBundleMagic);
  w.WriteU16(kBundleVersion);
  w.WriteU8(static_cast<uint8_t>(b.kind));
  w.WriteI32(b.s);
  w.WriteI32(b.f);
  w.WriteU8(static_cast<uint8_t>(b.distance));
  w.WriteU32(static_cast<uint32_t>(b.zscore.mean.size()));
  for (float v : b.zscore.mean) w.WriteF32(v);
  for (float v : b.zscore.std) w.WriteF32(v);
  w.WriteU32(static_cast<uint32_t>(b.zscore.floored.size()));
  for (int v : b.zscore.floored) w.WriteI32(v);
  w.WriteU32(static_cast<uint32_t>(b.params.size()));
  for (const auto& p : b.params) {
    w.WriteString16(p.name);
    w.WriteU8(static_cast<uint8_t>(p.tensor.rank()));
    for (int d : p.tensor.shape()) w.WriteI32(d);
    for (float v : p.tensor.data()) w.WriteF32(v);
  }
  w.WriteU64(b.provenance.seed);
  w.WriteI32(b.provenance.fold);
  w.WriteString16(b.provenance.config_hash);
  w.WriteString16(b.provenance.init);
  return w.buffer();
}

ModelBundle DecodeBundle(std::string_view bytes) {
  BinaryReader r(bytes);
  if (r.remaining() < 4 || r.ReadBytes(4) != kBundleMagic) {
    throw FormatError("not a model bundle (bad magic)");
  }
  const uint16_t version = r.ReadU16();
  if (version != kBundleVersion) {
    throw FormatError("unsupported bundle version " + std::to_string(version));
  }
  ModelBundle b;
  const uint8_t kind = r.ReadU8();
  if (kind > 2) throw FormatError("bad model kind tag " + std::to_string(kind));
  b.kind = static_cast<ModelKind>(kind);
  b.s = r.ReadI32();
  b.f = r.ReadI32();
  const uint8_t distance = r.ReadU8();
  if (distance > 2) throw FormatError("bad distance tag " + std::to_string(distance));
  b.distance = static_cast<DistanceKind>(distance);
  const uint32_t dim = r.ReadU32();
  if (dim > r.remaining() / 8) throw FormatError("truncated z-score block");
  b.zscore.mean.resize(dim);
  b.zscore.std.resize(dim);
  for (auto& v : b.zscore.mean) v = r.ReadF32();
  for (auto& v : b.zscore.std) v = r.ReadF32();
  const uint32_t floored = r.ReadU32();
  if (floored > dim) throw FormatError("bad z-score floor list");
  for (uint32_t i = 0; i < floored; ++i) b.zscore.floored.push_back(r.ReadI32());
  const uint32_t count = r.ReadU32();
  for (uint32_t i = 0; i < count; ++i) {
    std::string name = r.ReadString16();
    const uint8_t rank = r.ReadU8();
    Shape shape;
    uint64_t size = 1;
    for (uint8_t k = 0; k < rank; ++k) {
      const int32_t d = r.ReadI32();
      if (d < 1) throw FormatError("parameter " + name + " has a non-positive extent");
      shape.push_back(d);
      size *= static_cast<uint64_t>(d);
    }
    if (size > r.remaining() / 4) throw FormatError("parameter " + name + " is truncated");
    std::vector<float> data(size);
    for (auto& v : data) v = r.ReadF32();
    b.params.Add(std::move(name), Tensor(std::move(shape), std::move(data)));
  }
  b.provenance.seed = r.ReadU64();
  b.provenance.fold = r.ReadI32();
  b.provenance.config_hash = r.ReadString16();
  b.provenance.init = r.ReadString16();
  if (r.remaining() != 0) throw FormatError("trailing bytes after bundle");
  b.Validate();
  return b;
}

void SaveBundle(const ModelBundle& bundle, const std::filesystem::path& path) {
  WriteFileBytes(path, EncodeBundle(bundle));
}

ModelBundle LoadBundle(const std::filesystem::path& path) {
  try {
    return DecodeBundle(ReadFileBytes(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void InitTransfer(ModelBundle& proposed, const ModelBundle& bcnn1, const ModelBundle& bcnn2) {
  if (proposed.kind != ModelKind::kProposed || bcnn1.kind != ModelKind::kBcnn1 ||
      bcnn2.kind != ModelKind::kBcnn2) {
    throw ConfigError("transfer needs a proposed target, a bcnn1 and a bcnn2 source");
  }
  if (bcnn1.f != proposed.f) {
    throw ConfigError("transfer: bcnn1 was trained on F = " + std::to_string(bcnn1.f) +
                      " features, the proposed model uses F = " + std::to_string(proposed.f));
  }
  if (bcnn2.s != proposed.s) {
    throw ConfigError("transfer: bcnn2 was built for S = " + std::to_string(bcnn2.s) +
                      ", the proposed model uses S = " + std::to_string(proposed.s));
  }
  proposed.params.Get("frontend.weight").tensor = bcnn1.params.Get("conv1.weight").tensor;
  proposed.params.Get("frontend.bias").tensor = bcnn1.params.Get("conv1.bias").tensor;
  for (const auto& p : bcnn2.params) proposed.params.Get(p.name).tensor = p.tensor;
  proposed.params.DropGrads();
  proposed.provenance.init = "transfer";
  proposed.Validate();
}

}  // namespace pdnet
