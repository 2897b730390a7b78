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

#ifndef PDNET_CLI_CLI_H_
#define PDNET_CLI_CLI_H_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "pdnet/data/manifest.h"
#include "pdnet/models/models.h"
#include "pdnet/training/schedule.h"

namespace pdnet {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;   // configuration or input error
inline constexpr int kExitRuntime = 3;  // training or evaluation failure

// Everything that determines the results of `cv` and `train`.
struct RunConfig {
  TrainConfig train;
  ModelKind model = ModelKind::kProposed;
  int s = kDefaultS;
  DistanceKind distance = DistanceKind::kEuclidean;
  bool transfer = false;
  int folds = 5;
  int fold = 0;  // `train` only
  std::vector<uint64_t> seeds = {1, 2, 3};
  FeatureKind features = FeatureKind::kAp;
  std::string manifest;
  std::string out;
  int jobs = 1;

  // Sorted `key=value` lines of every result-affecting field. The output
  // directory and the worker count are excluded; the manifest enters by the
  // hash of its bytes rather than its path.
  std::string Canonical(const std::string& manifest_bytes) const;
};

// FNV-1a 64 of Canonical(), as 16 hex digits.
std::string ConfigHash(const RunConfig& config, const std::string& manifest_bytes);

// Runs one command line (args exclude the program name). Returns the exit
// code; never throws.
int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pdnet

#endif  // PDNET_CLI_CLI_H_
