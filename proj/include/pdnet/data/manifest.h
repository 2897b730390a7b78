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

#ifndef PDNET_DATA_MANIFEST_H_
#define PDNET_DATA_MANIFEST_H_

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "pdnet/autodiff/tensor.h"

namespace pdnet {

inline constexpr int kHealthy = 0;
inline constexpr int kDysarthric = 1;

enum class FeatureKind { kAp, kLogStft };

const char* FeatureKindName(FeatureKind kind);
FeatureKind ParseFeatureKind(const std::string& name);  // "ap" | "stft"

struct UtteranceRecord {
  std::string speaker_id;
  int label = kHealthy;
  std::string item_id;     // word / pseudo-word identity
  std::string path;        // as written in the manifest (relative or absolute)
  FeatureMatrix features;  // F x N; empty when loaded without features
};

// An immutable, validated corpus description. Entry order is preserved from
// the source; lookups by speaker and (speaker, item) are indexed.
class Manifest {
 public:
  struct Metadata {
    std::string database = "corpus";
    int frame_rate_ms = 10;
    FeatureKind kind = FeatureKind::kAp;
  };

  Manifest() = default;
  // Validates all invariants; throws InputError on violation.
  Manifest(Metadata meta, std::vector<UtteranceRecord> entries, bool require_features = true);

  const Metadata& metadata() const { return meta_; }
  const std::vector<UtteranceRecord>& entries() const { return entries_; }
  const UtteranceRecord& entry(size_t i) const { return entries_.at(i); }
  size_t size() const { return entries_.size(); }

  // Feature dimension F, or 0 when features are not loaded.
  int feature_dim() const;

  // Sorted speaker ids.
  const std::vector<std::string>& speakers() const { return speakers_; }
  std::vector<std::string> SpeakersWithLabel(int label) const;
  int SpeakerLabel(const std::string& speaker) const;
  bool HasSpeaker(const std::string& speaker) const;
  // Entry indices of one speaker, sorted by item id.
  const std::vector<size_t>& UtterancesOf(const std::string& speaker) const;
  // Entry index of (speaker, item), or -1.
  long Find(const std::string& speaker, const std::string& item) const;

 private:
  Metadata meta_;
  std::vector<UtteranceRecord> entries_;
  std::vector<std::string> speakers_;
  std::map<std::string, int> labels_;
  std::map<std::string, std::vector<size_t>> by_speaker_;
  std::map<std::pair<std::string, std::string>, size_t> by_key_;
};

// Reads `speaker_id,label,item_id,path` CSV; paths resolve relative to the
// manifest's directory. The database name defaults to that directory's name.
Manifest LoadManifest(const std::filesystem::path& csv_path, FeatureKind kind,
                      bool load_features = true);

// Writes the CSV only (feature files are the caller's business).
void WriteManifestCsv(const Manifest& manifest, const std::filesystem::path& csv_path);

}  // namespace pdnet

#endif  // PDNET_DATA_MANIFEST_H_
