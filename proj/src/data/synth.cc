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

#include "pdnet/data/synth.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "pdnet/common/util.h"
#include "pdnet/data/feature_io.h"

namespace pdnet {
namespace {

constexpr int kMinPhones = 4;
constexpr int kMaxPhones = 7;
constexpr double kProtoPeak = 4.0;
constexpr double kFrameNoise = 0.3;

// Stream tags for MixSeed.
constexpr uint64_t kItemTag = 0x1000;
constexpr uint64_t kSpeakerTag = 0x2000;
constexpr uint64_t kUtteranceTag = 0x3000;

using Rng = std::mt19937_64;

struct Phone {
  std::vector<double> logits;  // kApDim
  double weight;               // share of the item's nominal duration
};

struct ItemPrototype {
  std::vector<Phone> phones;
  int nominal_frames;
};

struct SpeakerStyle {
  double gain;                // logit scale
  std::vector<double> shift;  // per-feature logit offset
  double rate;                // duration multiplier
  double severity;            // 0 for healthy speakers
};

std::string Id(const char* prefix, int i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%s%02d", prefix, i);
  return buf;
}

ItemPrototype MakeItem(const SynthConfig& cfg, Rng& rng) {
  std::uniform_int_distribution<int> phones(kMinPhones, kMaxPhones);
  std::normal_distribution<double> base(0.0, 0.5);
  std::uniform_real_distribution<double> weight(0.6, 1.4);
  // Leave headroom for the slower dysarthric rate.
  const int hi = std::max(cfg.min_frames, (cfg.min_frames + cfg.max_frames) / 2 + 5);
  std::uniform_int_distribution<int> frames(cfg.min_frames, hi);
  ItemPrototype item;
  item.nominal_frames = frames(rng);
  const int count = phones(rng);
  for (int p = 0; p < count; ++p) {
    Phone ph;
    ph.logits.resize(kApDim);
    int offset = 0;
    for (int block : kApBlocks) {
      std::uniform_int_distribution<int> pick(0, block - 1);
      const int hot = pick(rng);
      for (int j = 0; j < block; ++j) {
        ph.logits[static_cast<size_t>(offset + j)] = base(rng) + (j == hot ? kProtoPeak : 0.0);
      }
      offset += block;
    }
    ph.weight = weight(rng);
    item.phones.push_back(std::move(ph));
  }
  return item;
}

SpeakerStyle MakeSpeaker(bool dysarthric, double severity, Rng& rng) {
  std::normal_distribution<double> gain(1.0, 0.05);
  std::normal_distribution<double> shift(0.0, 0.1);
  std::uniform_real_distribution<double> rate(0.9, 1.1);
  std::uniform_real_distribution<double> sev(0.5, 1.5);
  SpeakerStyle s;
  s.gain = gain(rng);
  s.shift.resize(kApDim);
  for (auto& v : s.shift) v = shift(rng);
  s.rate = rate(rng);
  // Always drawn so healthy and dysarthric streams consume the same numbers.
  const double draw = sev(rng);
  s.severity = dysarthric ? draw * severity : 0.0;
  return s;
}

// Gaussian smoothing along time with edge clamping.
std::vector<std::vector<double>> Smooth(const std::vector<std::vector<double>>& frames,
                                        double sigma) {
  if (sigma <= 0.0) return frames;
  const int n = static_cast<int>(frames.size());
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> kernel;
  double total = 0.0;
  for (int k = -radius; k <= radius; ++k) {
    kernel.push_back(std::exp(-0.5 * k * k / (sigma * sigma)));
    total += kernel.back();
  }
  for (auto& k : kernel) k /= total;
  std::vector<std::vector<double>> out(frames.size(), std::vector<double>(kApDim, 0.0));
  for (int t = 0; t < n; ++t) {
    for (int k = -radius; k <= radius; ++k) {
      const int src = std::clamp(t + k, 0, n - 1);
      const double w = kernel[static_cast<size_t>(k + radius)];
      for (int f = 0; f < kApDim; ++f) out[t][f] += w * frames[src][f];
    }
  }
  return out;
}

FeatureMatrix Render(const SynthConfig& cfg, const ItemPrototype& item,
                     const SpeakerStyle& spk, Rng& rng) {
  const double sev = spk.severity;
  std::normal_distribution<double> timing(0.0, 0.1);
  std::normal_distribution<double> warp(0.0, 0.45);
  std::normal_distribution<double> noise(0.0, kFrameNoise);

  // Phone durations: speaker rate, mild timing jitter, and for dysarthric
  // speakers a slower rate plus random per-phone warping.
  double weight_sum = 0.0;
  for (const auto& ph : item.phones) weight_sum += ph.weight;
  std::vector<int> durations;
  int total = 0;
  for (const auto& ph : item.phones) {
    const double jitter = std::exp(timing(rng));
    const double dys = std::exp(sev * warp(rng)) * (1.0 + 0.4 * sev);
    const double len = item.nominal_frames * ph.weight / weight_sum * spk.rate * jitter * dys;
    const int d = std::max(1, static_cast<int>(std::lround(len)));
    durations.push_back(d);
    total += d;
  }
  const int n = std::clamp(total, std::max(1, cfg.min_frames), cfg.max_frames);

  // Map output frames onto the phone sequence proportionally.
  std::vector<std::vector<double>> logits(static_cast<size_t>(n));
  for (int t = 0; t < n; ++t) {
    const double pos = (t + 0.5) * total / n;
    int acc = 0;
    size_t p = 0;
    while (p + 1 < durations.size() && pos >= acc + durations[p]) acc += durations[p++];
    logits[static_cast<size_t>(t)] = item.phones[p].logits;
  }
  // Articulatory undershoot: wider transitions for dysarthric speakers.
  logits = Smooth(logits, 1.0 + 2.5 * sev);

  const double temperature = 1.0 + 0.8 * sev;
  FeatureMatrix out({kApDim, n}, 0.f);
  for (int t = 0; t < n; ++t) {
    std::vector<double> z(kApDim);
    for (int f = 0; f < kApDim; ++f) {
      z[f] = (spk.gain * logits[t][f] + spk.shift[f] + noise(rng)) / temperature;
    }
    int offset = 0;
    for (int block : kApBlocks) {
      double mx = -1e300;
      for (int j = 0; j < block; ++j) mx = std::max(mx, z[offset + j]);
      double sum = 0.0;
      for (int j = 0; j < block; ++j) sum += std::exp(z[offset + j] - mx);
      for (int j = 0; j < block; ++j) {
        out.at(offset + j, t) = static_cast<float>(std::exp(z[offset + j] - mx) / sum);
      }
      offset += block;
    }
  }
  return out;
}

}  // namespace

void SynthConfig::Validate() const {
  if (healthy < 2 || dysarthric < 2) throw ConfigError("synth: need at least 2 speakers per class");
  if (items < 2) throw ConfigError("synth: need at least 2 items");
  if (min_frames < 1 || max_frames < min_frames) {
    throw ConfigError("synth: need 1 <= min_frames <= max_frames");
  }
  if (!std::isfinite(severity) || severity < 0.0) {
    throw ConfigError("synth: severity must be finite and non-negative");
  }
}

Manifest SynthCorpus(const SynthConfig& cfg) {
  cfg.Validate();
  std::vector<ItemPrototype> items;
  for (int i = 0; i < cfg.items; ++i) {
    Rng rng(MixSeed(cfg.seed, kItemTag + static_cast<uint64_t>(i)));
    items.push_back(MakeItem(cfg, rng));
  }
  std::vector<UtteranceRecord> entries;
  const int speakers = cfg.healthy + cfg.dysarthric;
  for (int s = 0; s < speakers; ++s) {
    const bool dys = s >= cfg.healthy;
    const std::string spk_id = dys ? Id("D", s - cfg.healthy + 1) : Id("H", s + 1);
    Rng spk_rng(MixSeed(cfg.seed, kSpeakerTag + static_cast<uint64_t>(s)));
    const SpeakerStyle style = MakeSpeaker(dys, cfg.severity, spk_rng);
    for (int i = 0; i < cfg.items; ++i) {
      Rng rng(MixSeed(MixSeed(cfg.seed, kUtteranceTag + static_cast<uint64_t>(s)),
                      static_cast<uint64_t>(i)));
      UtteranceRecord rec;
      rec.speaker_id = spk_id;
      rec.label = dys ? kDysarthric : kHealthy;
      rec.item_id = Id("w", i + 1);
      rec.path = "features/" + spk_id + "_" + rec.item_id + ".pdn";
      rec.features = Render(cfg, items[static_cast<size_t>(i)], style, rng);
      entries.push_back(std::move(rec));
    }
  }
  Manifest::Metadata meta;
  meta.database = "synthetic";
  meta.kind = FeatureKind::kAp;
  return Manifest(std::move(meta), std::move(entries));
}

void WriteCorpus(const Manifest& manifest, const std::filesystem::path& dir) {
  for (const auto& e : manifest.entries()) WriteFeatureFile(dir / e.path, e.features);
  WriteManifestCsv(manifest, dir / "manifest.csv");
}

}  // namespace pdnet
