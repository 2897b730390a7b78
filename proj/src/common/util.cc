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

#include "pdnet/common/util.h"

#include <bit>
#include <cctype>
#include <cstring>
#include <fstream>
#include <mutex>

#include <malloc.h>
#include <sstream>

#include "pdnet/common/errors.h"

namespace pdnet {

void TuneAllocator() {
  static std::once_flag once;
  std::call_once(once, [] {
    mallopt(M_MMAP_THRESHOLD, 256 << 20);
    mallopt(M_TRIM_THRESHOLD, 1 << 30);
  });
}

uint64_t Fnv1a64(std::string_view bytes, uint64_t basis) {
  uint64_t h = basis;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string HashToHex(uint64_t hash) {
  static const char* kDigits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = kDigits[hash & 0xf];
    hash >>= 4;
  }
  return out;
}

uint64_t MixSeed(uint64_t seed, uint64_t tag) {
  uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (tag + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::string ReadFileBytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFileBytes(const std::filesystem::path& path, std::string_view bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw InputError("write failed for " + path.string());
}

std::vector<std::string> SplitString(std::string_view text, char sep) {
  std::vector<std::string> parts;
  size_t start = 0;
  while (true) {
    size_t pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.emplace_back(text.substr(start));
      break;
    }
    parts.emplace_back(text.substr(start, pos - start));
    start = pos + 1;
  }
  return parts;
}

std::string Trim(std::string_view text) {
  size_t b = 0, e = text.size();
  while (b < e && std::isspace(static_cast<unsigned char>(text[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(text[e - 1]))) --e;
  return std::string(text.substr(b, e - b));
}

void BinaryWriter::WriteU8(uint8_t v) { buffer_.push_back(static_cast<char>(v)); }

void BinaryWriter::WriteU16(uint16_t v) {
  for (int i = 0; i < 2; ++i) WriteU8(static_cast<uint8_t>(v >> (8 * i)));
}

void BinaryWriter::WriteU32(uint32_t v) {
  for (int i = 0; i < 4; ++i) WriteU8(static_cast<uint8_t>(v >> (8 * i)));
}

void BinaryWriter::WriteU64(uint64_t v) {
  for (int i = 0; i < 8; ++i) WriteU8(static_cast<uint8_t>(v >> (8 * i)));
}

void BinaryWriter::WriteF32(float v) { WriteU32(std::bit_cast<uint32_t>(v)); }

void BinaryWriter::WriteString16(std::string_view s) {
  if (s.size() > 0xffff) throw FormatError("string too long to serialize");
  WriteU16(static_cast<uint16_t>(s.size()));
  WriteBytes(s);
}

std::string_view BinaryReader::ReadBytes(size_t n) {
  if (remaining() < n) throw FormatError("unexpected end of data");
  std::string_view out = bytes_.substr(pos_, n);
  pos_ += n;
  return out;
}

uint8_t BinaryReader::ReadU8() { return static_cast<uint8_t>(ReadBytes(1)[0]); }

uint16_t BinaryReader::ReadU16() {
  auto b = ReadBytes(2);
  return static_cast<uint16_t>(static_cast<uint8_t>(b[0]) |
                               (static_cast<uint8_t>(b[1]) << 8));
}

uint32_t BinaryReader::ReadU32() {
  auto b = ReadBytes(4);
  uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<uint8_t>(b[i]);
  return v;
}

uint64_t BinaryReader::ReadU64() {
  auto b = ReadBytes(8);
  uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<uint8_t>(b[i]);
  return v;
}

float BinaryReader::ReadF32() { return std::bit_cast<float>(ReadU32()); }

std::string BinaryReader::ReadString16() {
  uint16_t n = ReadU16();
  return std::string(ReadBytes(n));
}

}  // namespace pdnet
