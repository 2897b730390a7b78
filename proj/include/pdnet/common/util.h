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

#ifndef PDNET_COMMON_UTIL_H_
#define PDNET_COMMON_UTIL_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace pdnet {

// 64-bit FNV-1a. Used for config hashes and cache keys, so the value must
// not depend on the standard library implementation.
uint64_t Fnv1a64(std::string_view bytes, uint64_t basis = 0xcbf29ce484222325ULL);

// 16 lowercase hex digits.
std::string HashToHex(uint64_t hash);

// SplitMix64 finalizer; derives independent stream seeds from (seed, tag).
uint64_t MixSeed(uint64_t seed, uint64_t tag);

// Keeps large scratch buffers (im2col, activations) on the heap instead of
// fresh mmap'd pages, which otherwise fault on every training example.
// Process-wide; safe to call repeatedly.
void TuneAllocator();

std::string ReadFileBytes(const std::filesystem::path& path);
void WriteFileBytes(const std::filesystem::path& path, std::string_view bytes);

std::vector<std::string> SplitString(std::string_view text, char sep);
std::string Trim(std::string_view text);

// Little-endian serialization into an in-memory buffer.
class BinaryWriter {
 public:
  void WriteBytes(std::string_view bytes) { buffer_.append(bytes); }
  void WriteU8(uint8_t v);
  void WriteU16(uint16_t v);
  void WriteU32(uint32_t v);
  void WriteU64(uint64_t v);
  void WriteI32(int32_t v) { WriteU32(static_cast<uint32_t>(v)); }
  void WriteF32(float v);
  void WriteString16(std::string_view s);

  const std::string& buffer() const { return buffer_; }

 private:
  std::string buffer_;
};

// Reads the format written by BinaryWriter. Truncation raises FormatError.
class BinaryReader {
 public:
  explicit BinaryReader(std::string_view bytes) : bytes_(bytes) {}

  std::string_view ReadBytes(size_t n);
  uint8_t ReadU8();
  uint16_t ReadU16();
  uint32_t ReadU32();
  uint64_t ReadU64();
  int32_t ReadI32() { return static_cast<int32_t>(ReadU32()); }
  float ReadF32();
  std::string ReadString16();

  size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::string_view bytes_;
  size_t pos_ = 0;
};

}  // namespace pdnet

#endif  // PDNET_COMMON_UTIL_H_
