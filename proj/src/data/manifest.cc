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

#include "pdnet/data/manifest.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pdnet/common/util.h"
#include "pdnet/data/feature_io.h"

namespace pdnet {

const char* FeatureKindName(FeatureKind kind) {
  return kind == FeatureKind::kAp ? "ap" : "stft";
}

FeatureKind ParseFeatureKind(const std::string& name) {
  if (name == "ap") return FeatureKind::kAp;
  if (name == "stft") return FeatureKind::kLogStft;
  throw ConfigError("unknown feature kind '" + name + "' (expected ap or stft)");
}

Manifest::Manifest(Metadata meta, std::vector<UtteranceRecord> entries, bool require_features)
    : meta_(std::move(meta)), entries_(std::move(entries)) {
  if (entries_.empty()) throw InputError("manifest has no entries");
  int feature_dim = -1;
  for (size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    const std::string where = "entry " + std::to_string(i) + " (" + e.speaker_id + "/" +
                              e.item_id + ")";
    if (e.speaker_id.empty() || e.item_id.empty()) throw InputError(where + ": empty id");
    if (e.label != kHealthy && e.label != kDysarthric) {
      throw InputError(where + ": label must be 0 or 1");
    }
    auto [it, fresh] = labels_.emplace(e.speaker_id, e.label);
    if (!fresh && it->second != e.label) {
      throw InputError("speaker " + e.speaker_id + " has conflicting labels");
    }
    if (!by_key_.emplace(std::make_pair(e.speaker_id, e.item_id), i).second) {
      throw InputError(where + ": duplicate (speaker_id, item_id)");
    }
    by_speaker_[e.speaker_id].push_back(i);

    if (e.features.empty()) {
      if (require_features) throw InputError(where + ": features not loaded");
      continue;
    }
    if (e.features.rank() != 2) throw InputError(where + ": features must be F x N");
    if (feature_dim < 0) feature_dim = e.features.dim(0);
    if (e.features.dim(0) != feature_dim) {
      throw InputError(where + ": feature dimension " + std::to_string(e.features.dim(0)) +
                       " differs from corpus dimension " + std::to_string(feature_dim));
    }
    for (float v : e.features.data()) {
      if (!std::isfinite(v)) throw InputError(where + ": non-finite feature value");
      if (meta_.kind == FeatureKind::kAp && (v < 0.f || v > 1.f)) {
        throw InputError(where + ": articulatory posterior outside [0, 1]");
      }
    }
  }
  for (auto& [spk, idx] : by_speaker_) {
    std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) {
      return entries_[a].item_id < entries_[b].item_id;
    });
    speakers_.push_back(spk);
  }
}

int Manifest::feature_dim() const {
  for (const auto& e : entries_) {
    if (!e.features.empty()) return e.features.dim(0);
  }
  return 0;
}

std::vector<std::string> Manifest::SpeakersWithLabel(int label) const {
  std::vector<std::string> out;
  for (const auto& s : speakers_) {
    if (labels_.at(s) == label) out.push_back(s);
  }
  return out;
}

int Manifest::SpeakerLabel(const std::string& speaker) const {
  auto it = labels_.find(speaker);
  if (it == labels_.end()) throw InputError("unknown speaker " + speaker);
  return it->second;
}

bool Manifest::HasSpeaker(const std::string& speaker) const {
  return labels_.count(speaker) > 0;
}

const std::vector<size_t>& Manifest::UtterancesOf(const std::string& speaker) const {
  auto it = by_speaker_.find(speaker);
  if (it == by_speaker_.end()) throw InputError("unknown speaker " + speaker);
  return it->second;
}

long Manifest::Find(const std::string& speaker, const std::string& item) const {
  auto it = by_key_.find({speaker, item});
  return it == by_key_.end() ? -1 : static_cast<long>(it->second);
}

Manifest LoadManifest(const std::filesystem::path& csv_path, FeatureKind kind,
                      bool load_features) {
  std::istringstream in(ReadFileBytes(csv_path));
  std::string line;
  if (!std::getline(in, line) || Trim(line) != "speaker_id,label,item_id,path") {
    throw InputError(csv_path.string() + ": expected header speaker_id,label,item_id,path");
  }
  const auto base = csv_path.parent_path();
  std::vector<UtteranceRecord> entries;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    auto cols = SplitString(Trim(line), ',');
    if (cols.size() != 4) {
      throw InputError(csv_path.string() + ":" + std::to_string(line_no) +
                       ": expected 4 columns");
    }
    UtteranceRecord rec;
    rec.speaker_id = Trim(cols[0]);
    const std::string label = Trim(cols[1]);
    if (label != "0" && label != "1") {
      throw InputError(csv_path.string() + ":" + std::to_string(line_no) +
                       ": label must be 0 or 1");
    }
    rec.label = label == "1" ? kDysarthric : kHealthy;
    rec.item_id = Trim(cols[2]);
    rec.path = Trim(cols[3]);
    if (load_features) {
      std::filesystem::path p(rec.path);
      if (p.is_relative()) p = base / p;
      if (!std::filesystem::exists(p)) throw InputError("feature file not found: " + p.string());
      rec.features = ReadFeatureFile(p);
    }
    entries.push_back(std::move(rec));
  }
  Manifest::Metadata meta;
  meta.kind = kind;
  const auto dir = std::filesystem::absolute(csv_path).parent_path();
  meta.database = dir.filename().string().empty() ? "corpus" : dir.filename().string();
  return Manifest(std::move(meta), std::move(entries), load_features);
}

void WriteManifestCsv(const Manifest& manifest, const std::filesystem::path& csv_path) {
  std::string out = "speaker_id,label,item_id,path\n";
  for (const auto& e : manifest.entries()) {
    out += e.speaker_id + "," + std::to_string(e.label) + "," + e.item_id + "," + e.path + "\n";
  }
  WriteFileBytes(csv_path, out);
}

}  // namespace pdnet
