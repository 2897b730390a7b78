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

#include "pdnet/training/examples.h"

#include <algorithm>

#include "pdnet/autodiff/ops.h"

namespace pdnet {

FeatureMatrix PrepareRepresentation(ModelKind kind, FeatureKind features, const ZScoreStats& zscore,
                                    int s, const FeatureMatrix& raw) {
  switch (kind) {
    case ModelKind::kProposed:
      return ResizeRepresentation(ZScoreApply(raw, zscore), s);
    case ModelKind::kBcnn2:
      if (features != FeatureKind::kAp) throw ConfigError("bcnn2 needs posterior (ap) features");
      return ResizeRepresentation(raw, s);
    case ModelKind::kBcnn1:
      return ZScoreApply(features == FeatureKind::kAp ? LogTransform(raw) : raw, zscore);
  }
  return raw;
}

ZScoreStats FitNormalization(ModelKind kind, const Manifest& manifest,
                             const std::vector<std::string>& speakers) {
  if (kind == ModelKind::kBcnn2) return {};
  const bool log = kind == ModelKind::kBcnn1 && manifest.metadata().kind == FeatureKind::kAp;
  std::vector<FeatureMatrix> logged;
  std::vector<const FeatureMatrix*> reps;
  for (const auto& spk : speakers) {
    for (size_t i : manifest.UtterancesOf(spk)) {
      if (log) {
        logged.push_back(LogTransform(manifest.entry(i).features));
      } else {
        reps.push_back(&manifest.entry(i).features);
      }
    }
  }
  for (const auto& m : logged) reps.push_back(&m);
  return ZScoreFit(reps);
}

namespace {

// Prepared representation for every entry of the given speakers; other
// entries stay empty.
std::vector<FeatureMatrix> PrepareEntries(const Manifest& manifest, ModelKind kind, int s,
                                          const ZScoreStats& zscore,
                                          const std::vector<std::string>& speakers) {
  std::vector<FeatureMatrix> reps(manifest.size());
  for (const auto& spk : speakers) {
    for (size_t i : manifest.UtterancesOf(spk)) {
      if (reps[i].empty()) {
        reps[i] = PrepareRepresentation(kind, manifest.metadata().kind, zscore, s,
                                        manifest.entry(i).features);
      }
    }
  }
  return reps;
}

std::vector<std::string> Concat(std::initializer_list<const std::vector<std::string>*> lists) {
  std::vector<std::string> out;
  for (const auto* l : lists) out.insert(out.end(), l->begin(), l->end());
  return out;
}

std::vector<std::string> Healthy(const Manifest& manifest, const std::vector<std::string>& spk) {
  std::vector<std::string> out;
  for (const auto& s : spk) {
    if (manifest.SpeakerLabel(s) == kHealthy) out.push_back(s);
  }
  return out;
}

}  // namespace

PairExamples::PairExamples(const Manifest& manifest, std::vector<PairSample> pairs,
                           std::shared_ptr<const std::vector<FeatureMatrix>> reps)
    : manifest_(&manifest), pairs_(std::move(pairs)), reps_(std::move(reps)) {}

const std::string& PairExamples::speaker(size_t i) const {
  return manifest_->entry(pairs_[i].test).speaker_id;
}

const std::string& PairExamples::item(size_t i) const {
  return manifest_->entry(pairs_[i].test).item_id;
}

std::vector<std::string> PairExamples::SourceSpeakers(size_t i) const {
  return {manifest_->entry(pairs_[i].test).speaker_id,
          manifest_->entry(pairs_[i].reference).speaker_id};
}

Var PairExamples::Logits(const BoundParams<float>& params, Tape& tape, size_t i,
                         const ForwardMode& mode) const {
  const auto& p = pairs_[i];
  return ProposedLogits(params, tape.Constant((*reps_)[p.test]), tape.Constant((*reps_)[p.reference]),
                        mode);
}

DistanceExamples::DistanceExamples(const Manifest& manifest, std::vector<PairSample> pairs,
                                   const std::vector<FeatureMatrix>& reps)
    : manifest_(&manifest), pairs_(std::move(pairs)) {
  images_.reserve(pairs_.size());
  for (const auto& p : pairs_) images_.push_back(PairwiseKl(reps[p.test], reps[p.reference]));
}

const std::string& DistanceExamples::speaker(size_t i) const {
  return manifest_->entry(pairs_[i].test).speaker_id;
}

const std::string& DistanceExamples::item(size_t i) const {
  return manifest_->entry(pairs_[i].test).item_id;
}

std::vector<std::string> DistanceExamples::SourceSpeakers(size_t i) const {
  return {manifest_->entry(pairs_[i].test).speaker_id,
          manifest_->entry(pairs_[i].reference).speaker_id};
}

Var DistanceExamples::Logits(const BoundParams<float>& params, Tape& tape, size_t i,
                             const ForwardMode& mode) const {
  return Bcnn2Logits(params, tape.Constant(images_[i]), mode);
}

SegmentExamples::SegmentExamples(const Manifest& manifest,
                                 const std::vector<std::string>& speakers,
                                 const std::vector<FeatureMatrix>& reps) {
  std::vector<std::string> sorted = speakers;
  std::sort(sorted.begin(), sorted.end());
  for (const auto& spk : sorted) {
    const int label = manifest.SpeakerLabel(spk);
    for (size_t i : manifest.UtterancesOf(spk)) {
      const auto& e = manifest.entry(i);
      for (auto& seg : Segment(reps[i], e.speaker_id + "/" + e.item_id)) {
        segments_.push_back(std::move(seg));
        labels_.push_back(label);
        speakers_.push_back(spk);
        items_.push_back(e.item_id);
      }
    }
  }
}

Var SegmentExamples::Logits(const BoundParams<float>& params, Tape& tape, size_t i,
                            const ForwardMode& mode) const {
  return Bcnn1Logits(params, tape.Constant(segments_[i]), mode);
}

FoldData PrepareFold(const Manifest& manifest, ModelKind kind, int s, const SpeakerSplit& split) {
  FoldData fold;
  fold.zscore = FitNormalization(kind, manifest, split.train);
  if (kind != ModelKind::kBcnn2) fold.normalization_speakers = split.train;
  fold.references = Healthy(manifest, split.train);
  const auto all = Concat({&split.train, &split.dev, &split.test});
  auto reps = PrepareEntries(manifest, kind, s, fold.zscore, all);
  if (kind == ModelKind::kBcnn1) {
    fold.train = std::make_unique<SegmentExamples>(manifest, split.train, reps);
    fold.dev = std::make_unique<SegmentExamples>(manifest, split.dev, reps);
    fold.test = std::make_unique<SegmentExamples>(manifest, split.test, reps);
    return fold;
  }
  auto train = EnumeratePairs(manifest, split.train, fold.references);
  auto dev = EnumeratePairs(manifest, split.dev, fold.references);
  auto test = EnumeratePairs(manifest, split.test, fold.references);
  if (kind == ModelKind::kBcnn2) {
    fold.train = std::make_unique<DistanceExamples>(manifest, std::move(train), reps);
    fold.dev = std::make_unique<DistanceExamples>(manifest, std::move(dev), reps);
    fold.test = std::make_unique<DistanceExamples>(manifest, std::move(test), reps);
    return fold;
  }
  auto shared = std::make_shared<const std::vector<FeatureMatrix>>(std::move(reps));
  fold.train = std::make_unique<PairExamples>(manifest, std::move(train), shared);
  fold.dev = std::make_unique<PairExamples>(manifest, std::move(dev), shared);
  fold.test = std::make_unique<PairExamples>(manifest, std::move(test), shared);
  return fold;
}

std::unique_ptr<ExampleSet> PrepareScoring(const Manifest& manifest, ModelKind kind, int s,
                                           const ZScoreStats& zscore,
                                           const std::vector<std::string>& test_speakers,
                                           const std::vector<std::string>& references) {
  const auto all = Concat({&test_speakers, &references});
  auto reps = PrepareEntries(manifest, kind, s, zscore, all);
  if (kind == ModelKind::kBcnn1) {
    return std::make_unique<SegmentExamples>(manifest, test_speakers, reps);
  }
  auto pairs = EnumeratePairs(manifest, test_speakers, references);
  if (kind == ModelKind::kBcnn2) {
    return std::make_unique<DistanceExamples>(manifest, std::move(pairs), reps);
  }
  return std::make_unique<PairExamples>(
      manifest, std::move(pairs), std::make_shared<const std::vector<FeatureMatrix>>(std::move(reps)));
}

}  // namespace pdnet
