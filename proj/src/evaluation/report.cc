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

#include "pdnet/evaluation/report.h"

#include <cstdio>
#include <cstdlib>
#include <sstream>

#include <json.hpp>

#include "pdnet/common/errors.h"
#include "pdnet/common/util.h"

namespace pdnet {
namespace {

using nlohmann::json;

std::string Num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double ParseDouble(const std::string& text, const std::string& where) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || *end != '\0') throw FormatError(where + ": bad number '" + text + "'");
  return v;
}

}  // namespace

std::string RocFileName(uint64_t seed) { return "roc_seed" + std::to_string(seed) + ".csv"; }

std::string MetricsJson(const RunReport& report) {
  json seeds = json::array();
  for (const auto& s : report.seeds) {
    seeds.push_back({{"seed", s.seed}, {"auc", s.auc}, {"accuracy", s.accuracy}});
  }
  json doc = {{"schema_version", kMetricsSchemaVersion},
              {"config_hash", report.config_hash},
              {"model", report.model},
              {"database", report.database},
              {"seeds", seeds},
              {"aggregate",
               {{"auc_mean", report.aggregate.auc_mean},
                {"auc_std", report.aggregate.auc_std},
                {"acc_mean", report.aggregate.acc_mean},
                {"acc_std", report.aggregate.acc_std}}}};
  return doc.dump(2) + "\n";
}

std::string SpeakerCsv(const RunReport& report) {
  std::string out = "seed,fold,speaker_id,label,score,n_votes\n";
  for (const auto& s : report.seeds) {
    for (const auto& fs : s.scores) {
      out += std::to_string(s.seed) + "," + std::to_string(fs.fold) + "," +
             fs.speaker.speaker_id + "," + std::to_string(fs.speaker.label) + "," +
             Num(fs.speaker.score) + "," + std::to_string(fs.speaker.n_votes) + "\n";
    }
  }
  return out;
}

std::string RocCsv(const SeedResult& seed) {
  std::vector<double> scores;
  std::vector<int> labels;
  for (const auto& fs : seed.scores) {
    scores.push_back(fs.speaker.score);
    labels.push_back(fs.speaker.label);
  }
  std::string out = "fpr,tpr,threshold\n";
  for (const auto& p : RocCurve(scores, labels)) {
    out += Num(p.fpr) + "," + Num(p.tpr) + "," + Num(p.threshold) + "\n";
  }
  return out;
}

void ExportReport(const RunReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  WriteFileBytes(dir / kMetricsFile, MetricsJson(report));
  WriteFileBytes(dir / kSpeakerFile, SpeakerCsv(report));
  for (const auto& s : report.seeds) WriteFileBytes(dir / RocFileName(s.seed), RocCsv(s));
}

RunReport ParseMetricsJson(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("metrics JSON: ") + e.what());
  }
  try {
    if (!doc.contains("schema_version") || doc["schema_version"] != kMetricsSchemaVersion) {
      throw ConfigError("metrics schema version " +
                        (doc.contains("schema_version") ? doc["schema_version"].dump() : "missing") +
                        " (expected " + std::to_string(kMetricsSchemaVersion) + ")");
    }
    RunReport r;
    r.config_hash = doc.at("config_hash").get<std::string>();
    r.model = doc.at("model").get<std::string>();
    r.database = doc.at("database").get<std::string>();
    for (const auto& s : doc.at("seeds")) {
      SeedResult seed;
      seed.seed = s.at("seed").get<uint64_t>();
      seed.auc = s.at("auc").get<double>();
      seed.accuracy = s.at("accuracy").get<double>();
      r.seeds.push_back(std::move(seed));
    }
    const auto& a = doc.at("aggregate");
    r.aggregate.auc_mean = a.at("auc_mean").get<double>();
    r.aggregate.auc_std = a.at("auc_std").get<double>();
    r.aggregate.acc_mean = a.at("acc_mean").get<double>();
    r.aggregate.acc_std = a.at("acc_std").get<double>();
    return r;
  } catch (const json::exception& e) {
    throw FormatError(std::string("metrics JSON: ") + e.what());
  }
}

RunReport LoadReport(const std::filesystem::path& metrics_path) {
  if (!std::filesystem::exists(metrics_path)) {
    throw InputError("metrics file not found: " + metrics_path.string());
  }
  RunReport r;
  try {
    r = ParseMetricsJson(ReadFileBytes(metrics_path));
  } catch (const FormatError& e) {
    throw FormatError(metrics_path.string() + ": " + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError(metrics_path.string() + ": " + e.what());
  }
  const auto csv_path = metrics_path.parent_path() / kSpeakerFile;
  if (!std::filesystem::exists(csv_path)) return r;
  std::istringstream in(ReadFileBytes(csv_path));
  std::string line;
  std::getline(in, line);
  if (Trim(line) != "seed,fold,speaker_id,label,score,n_votes") {
    throw FormatError(csv_path.string() + ": unexpected header");
  }
  while (std::getline(in, line)) {
    if (Trim(line).empty()) continue;
    const auto cols = SplitString(Trim(line), ',');
    if (cols.size() != 6) throw FormatError(csv_path.string() + ": expected 6 columns");
    const auto seed = static_cast<uint64_t>(ParseDouble(cols[0], csv_path.string()));
    FoldScore fs;
    fs.fold = static_cast<int>(ParseDouble(cols[1], csv_path.string()));
    fs.speaker.speaker_id = cols[2];
    fs.speaker.label = static_cast<int>(ParseDouble(cols[3], csv_path.string()));
    fs.speaker.score = ParseDouble(cols[4], csv_path.string());
    fs.speaker.n_votes = static_cast<int>(ParseDouble(cols[5], csv_path.string()));
    bool placed = false;
    for (auto& s : r.seeds) {
      if (s.seed == seed) {
        s.scores.push_back(fs);
        placed = true;
      }
    }
    if (!placed) throw FormatError(csv_path.string() + ": seed not in metrics");
  }
  return r;
}

std::string ComparisonTable(const std::vector<RunReport>& reports) {
  std::string out;
  char buf[200];
  std::snprintf(buf, sizeof(buf), "%-10s %-16s %-20s %-20s\n", "model", "database", "AUC",
                "accuracy (%)");
  out += buf;
  for (const auto& r : reports) {
    char auc[40], acc[40];
    std::snprintf(auc, sizeof(auc), "%.4f +/- %.4f", r.aggregate.auc_mean, r.aggregate.auc_std);
    std::snprintf(acc, sizeof(acc), "%.2f +/- %.2f", r.aggregate.acc_mean, r.aggregate.acc_std);
    std::snprintf(buf, sizeof(buf), "%-10s %-16s %-20s %-20s\n", r.model.c_str(),
                  r.database.c_str(), auc, acc);
    out += buf;
  }
  return out;
}

std::string ComparisonCsv(const std::vector<RunReport>& reports) {
  std::string out = "model,database,auc_mean,auc_std,acc_mean,acc_std\n";
  for (const auto& r : reports) {
    out += r.model + "," + r.database + "," + Num(r.aggregate.auc_mean) + "," +
           Num(r.aggregate.auc_std) + "," + Num(r.aggregate.acc_mean) + "," +
           Num(r.aggregate.acc_std) + "\n";
  }
  return out;
}

}  // namespace pdnet
