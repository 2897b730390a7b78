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

#ifndef PDNET_TRAINING_EXAMPLES_H_
#define PDNET_TRAINING_EXAMPLES_H_

#include <memory>
#include <string>
#include <vector>

#include "pdnet/data/manifest.h"
#include "pdnet/data/transforms.h"
#include "pdnet/models/models.h"
#include "pdnet/training/pairs.h"

namespace pdnet {

// A labelled, indexable set of network inputs. Each example belongs to one
// (test) speaker, which is what soft voting groups by.
class ExampleSet {
 public:
  virtual ~ExampleSet() = default;
  virtual size_t size() const = 0;
  virtual int label(size_t i) const = 0;
  virtual const std::string& speaker(size_t i) const = 0;
  // Logits of example i on `tape`.
  virtual Var Logits(const BoundParams<float>& params, Tape& tape, size_t i,
                     const ForwardMode& mode) const = 0;
  // Every speaker whose data enters example i.
  virtual std::vector<std::string> SourceSpeakers(size_t i) const { return {speaker(i)}; }
  // Item id of the test utterance behind example i.
  virtual const std::string& item(size_t i) const = 0;
};

// Model input preparation from raw features.
//   proposed: z-score, then resize to S.
//   bcnn2:    resize raw posteriors to S (distances are taken on those).
//   bcnn1:    log (AP input only), z-score, then 16-frame segments.
FeatureMatrix PrepareRepresentation(ModelKind kind, FeatureKind features, const ZScoreStats& zscore,
                                    int s, const FeatureMatrix& raw);

// The matrices the z-score statistics are fitted on for a model (log-AP for
// bcnn1 on AP input, raw features otherwise). Empty for bcnn2.
ZScoreStats FitNormalization(ModelKind kind, const Manifest& manifest,
                             const std::vector<std::string>& speakers);

// Test/reference pairs fed through the proposed model.
class PairExamples : public ExampleSet {
 public:
  PairExamples(const Manifest& manifest, std::vector<PairSample> pairs,
               std::shared_ptr<const std::vector<FeatureMatrix>> reps);
  size_t size() const override { return pairs_.size(); }
  int label(size_t i) const override { return pairs_[i].label; }
  const std::string& speaker(size_t i) const override;
  Var Logits(const BoundParams<float>& params, Tape& tape, size_t i,
             const ForwardMode& mode) const override;
  std::vector<std::string> SourceSpeakers(size_t i) const override;
  const std::string& item(size_t i) const override;
  const std::vector<PairSample>& pairs() const { return pairs_; }

 private:
  const Manifest* manifest_;
  std::vector<PairSample> pairs_;
  std::shared_ptr<const std::vector<FeatureMatrix>> reps_;  // indexed by manifest entry
};

// Precomputed KL distance images fed through the bcnn2 classifier.
class DistanceExamples : public ExampleSet {
 public:
  DistanceExamples(const Manifest& manifest, std::vector<PairSample> pairs,
                   const std::vector<FeatureMatrix>& reps);
  size_t size() const override { return pairs_.size(); }
  int label(size_t i) const override { return pairs_[i].label; }
  const std::string& speaker(size_t i) const override;
  Var Logits(const BoundParams<float>& params, Tape& tape, size_t i,
             const ForwardMode& mode) const override;
  std::vector<std::string> SourceSpeakers(size_t i) const override;
  const std::string& item(size_t i) const override;
  const Tensor& image(size_t i) const { return images_[i]; }

 private:
  const Manifest* manifest_;
  std::vector<PairSample> pairs_;
  std::vector<Tensor> images_;
};

// Segments of every utterance of the given speakers, labelled by speaker.
class SegmentExamples : public ExampleSet {
 public:
  SegmentExamples(const Manifest& manifest, const std::vector<std::string>& speakers,
                  const std::vector<FeatureMatrix>& reps);
  size_t size() const override { return segments_.size(); }
  int label(size_t i) const override { return labels_[i]; }
  const std::string& speaker(size_t i) const override { return speakers_[i]; }
  const std::string& item(size_t i) const override { return items_[i]; }
  Var Logits(const BoundParams<float>& params, Tape& tape, size_t i,
             const ForwardMode& mode) const override;

 private:
  std::vector<FeatureMatrix> segments_;
  std::vector<int> labels_;
  std::vector<std::string> speakers_;
  std::vector<std::string> items_;
};

struct SpeakerSplit {
  std::vector<std::string> train;  // excludes dev and test
  std::vector<std::string> dev;
  std::vector<std::string> test;
};

// Everything one (model, fold) job trains and scores on.
struct FoldData {
  ZScoreStats zscore;
  std::vector<std::string> normalization_speakers;  // what zscore was fitted on
  std::vector<std::string> references;  // healthy training speakers
  std::unique_ptr<ExampleSet> train;
  std::unique_ptr<ExampleSet> dev;
  std::unique_ptr<ExampleSet> test;
};

// Normalization is fitted on split.train only. References are the healthy
// speakers of split.train.
FoldData PrepareFold(const Manifest& manifest, ModelKind kind, int s, const SpeakerSplit& split);

// Scoring-time examples: `test_speakers` of `manifest` against the
// references, prepared with frozen statistics.
std::unique_ptr<ExampleSet> PrepareScoring(const Manifest& manifest, ModelKind kind, int s,
                                           const ZScoreStats& zscore,
                                           const std::vector<std::string>& test_speakers,
                                           const std::vector<std::string>& references);

}  // namespace pdnet

#endif  // PDNET_TRAINING_EXAMPLES_H_
