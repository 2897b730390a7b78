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

#ifndef PDNET_EVALUATION_REPORT_H_
#define PDNET_EVALUATION_REPORT_H_

#include <filesystem>
#include <string>
#include <vector>

#include "pdnet/evaluation/cv.h"

namespace pdnet {

inline constexpr int kMetricsSchemaVersion = 1;

// File names inside an export directory.
inline constexpr const char* kMetricsFile = "metrics.json";
inline constexpr const char* kSpeakerFile = "speaker_scores.csv";
std::string RocFileName(uint64_t seed);  // roc_seed<seed>.csv

std::string MetricsJson(const RunReport& report);
std::string SpeakerCsv(const RunReport& report);
std::string RocCsv(const SeedResult& seed);

// Writes metrics JSON, the speaker-score CSV and one ROC CSV per seed.
// Errors name the failing path.
void ExportReport(const RunReport& report, const std::filesystem::path& dir);

// Parses a metrics JSON document. Throws FormatError on malformed input and
// ConfigError on a schema-version mismatch.
RunReport ParseMetricsJson(const std::string& text);

// Metrics JSON plus, when present next to it, the speaker-score CSV.
RunReport LoadReport(const std::filesystem::path& metrics_path);

// One row per report: model, database, AUC and accuracy mean and std.
std::string ComparisonTable(const std::vector<RunReport>& reports);
std::string ComparisonCsv(const std::vector<RunReport>& reports);

}  // namespace pdnet

#endif  // PDNET_EVALUATION_REPORT_H_
