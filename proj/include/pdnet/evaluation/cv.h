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

#ifndef PDNET_EVALUATION_CV_H_
#define PDNET_EVALUATION_CV_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pdnet/data/manifest.h"
#include "pdnet/evaluation/folds.h"
#include "pdnet/evaluation/metrics.h"
#include "pdnet/models/bundle.h"
#include "pdnet/training/schedule.h"

namespace pdnet {

struct CvConfig {
  ModelKind model = ModelKind::kProposed;
  int s = kDefaultS;
  bool transfer = false;  // proposed only: initialize from trained baselines
  int folds = 5;
  std::vector<uint64_t> seeds = {1, 2, 3};
  TrainConfig train;
  int jobs = 1;
  std::string config_hash;

  void Validate() const;  // ConfigError
};

struct FoldOutcome {
  std::vector<SpeakerScore> scores;  // test speakers of the fold
  std::vector<std::string> audit;    // disjointness violations
};

// Trains on one fold and scores its test speakers. Implementations must be
// safe to call concurrently for different (seed, fold).
class FoldModel {
 public:
  virtual ~FoldModel() = default;
  virtual FoldOutcome Run(const Manifest& manifest, const SpeakerSplit& split, uint64_t seed,
                          int fold) const = 0;
};

// Output directory layout for bundles, epoch logs and the baseline cache.
// Files are written to a temporary name and renamed, so an interrupted run
// never leaves a truncated artifact behind.
class ArtifactStore {
 public:
  explicit ArtifactStore(std::filesystem::path root);
  const std::filesystem::path& root() const { return root_; }

  // <root>/bundles/seed<seed>_fold<fold>_<model>.pdnb
  std::filesystem::path BundlePath(uint64_t seed, int fold, ModelKind kind) const;
  // <root>/logs/seed<seed>_fold<fold>_<model>.csv
  std::filesystem::path LogPath(uint64_t seed, int fold, ModelKind kind) const;
  // <root>/cache/<hash>/seed<seed>_fold<fold>_<model>.pdnb
  std::filesystem::path CachePath(const std::string& hash, uint64_t seed, int fold,
                                  ModelKind kind) const;

  std::optional<ModelBundle> LoadCached(const std::string& hash, uint64_t seed, int fold,
                                        ModelKind kind) const;
  void Write(const std::filesystem::path& path, const std::string& bytes) const;

 private:
  std::filesystem::path root_;
};

// The real thing: per-fold normalization, training with the plateau
// schedule, scoring against the fold's references and soft voting. With
// `transfer`, B-CNN1 and B-CNN2 are trained (or loaded from the cache) on the
// same fold and seed first. `store` may be null.
class NetworkFoldModel : public FoldModel {
 public:
  NetworkFoldModel(CvConfig config, const ArtifactStore* store);
  FoldOutcome Run(const Manifest& manifest, const SpeakerSplit& split, uint64_t seed,
                  int fold) const override;

  // Trains one model kind on one fold; returns the best-dev bundle.
  ModelBundle TrainModel(const Manifest& manifest, const SpeakerSplit& split, ModelKind kind,
                         uint64_t seed, int fold, std::vector<std::string>* audit) const;

 private:
  ModelBundle TrainOrLoadBaseline(const Manifest& manifest, const SpeakerSplit& split,
                                  ModelKind kind, uint64_t seed, int fold,
                                  std::vector<std::string>* audit) const;

  CvConfig config_;
  const ArtifactStore* store_;
};

// Scores the test speakers of `manifest` with a bundle against references.
std::vector<SpeakerScore> ScoreSpeakers(const ModelBundle& bundle, const Manifest& manifest,
                                        const std::vector<std::string>& test_speakers,
                                        const std::vector<std::string>& references);

struct FoldScore {
  int fold = 0;
  SpeakerScore speaker;
};

struct SeedResult {
  uint64_t seed = 0;
  double auc = 0.0;
  double accuracy = 0.0;
  std::vector<FoldScore> scores;  // pooled over folds, in fold order
};

struct Aggregate {
  double auc_mean = 0.0;
  double auc_std = 0.0;  // population standard deviation over seeds
  double acc_mean = 0.0;
  double acc_std = 0.0;
};

struct JobTiming {
  uint64_t seed = 0;
  int fold = 0;
  double seconds = 0.0;
};

struct RunReport {
  std::string config_hash;
  std::string model;
  std::string database;
  std::vector<SeedResult> seeds;
  Aggregate aggregate;
  std::vector<std::string> audit;  // empty for a clean run
  std::vector<JobTiming> timings;  // not exported
};

Aggregate AggregateSeeds(const std::vector<SeedResult>& seeds);

// Full stratified cross-validation for every seed. Fold x seed jobs run on
// `config.jobs` threads; the report is assembled in (seed, fold) order.
// Job failures are rethrown with seed and fold context.
RunReport RunCv(const Manifest& manifest, const CvConfig& config, const FoldModel& model);

}  // namespace pdnet

#endif  // PDNET_EVALUATION_CV_H_
