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

#include <cmath>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "pdnet/autodiff/ops.h"
#include "pdnet/common/errors.h"
#include "pdnet/data/synth.h"
#include "pdnet/training/pairs.h"
#include "pdnet/training/schedule.h"
#include "pdnet/training/trainer.h"
#include "support/corpora.h"

namespace pdnet {
namespace {

using testing::ShapedManifest;

// ---- schedule ----------------------------------------------------------------

TEST(ScheduleTest, DropsAfterExactlyFiveNonImprovingEpochs) {
  PlateauSchedule s(TrainConfig{});
  const double trace[] = {1.0, 0.9, 0.9, 0.9, 0.9, 0.9, 0.9};
  std::vector<bool> dropped;
  for (double loss : trace) dropped.push_back(s.Observe(loss).lr_dropped);
  EXPECT_EQ(dropped, (std::vector<bool>{false, false, false, false, false, false, true}));
  EXPECT_DOUBLE_EQ(s.lr(), 0.01);
  EXPECT_EQ(s.since_improvement(), 0);
  EXPECT_EQ(s.best_epoch(), 2);
  EXPECT_FALSE(s.done());
}

TEST(ScheduleTest, ImprovementMustExceedThreshold) {
  PlateauSchedule s(TrainConfig{});
  EXPECT_TRUE(s.Observe(1.0).improved);
  EXPECT_FALSE(s.Observe(1.0 - 1e-6).improved);
  EXPECT_FALSE(s.Observe(1.0 - 0.5e-6).improved);
  EXPECT_TRUE(s.Observe(1.0 - 2e-6).improved);
  EXPECT_EQ(s.since_improvement(), 0);
}

TEST(ScheduleTest, ImprovementResetsPatience) {
  PlateauSchedule s(TrainConfig{});
  for (double loss : {1.0, 1.0, 1.0, 1.0, 1.0}) EXPECT_FALSE(s.Observe(loss).lr_dropped);
  EXPECT_TRUE(s.Observe(0.5).improved);
  for (int i = 0; i < 4; ++i) EXPECT_FALSE(s.Observe(0.7).lr_dropped);
  EXPECT_TRUE(s.Observe(0.7).lr_dropped);
}

TEST(ScheduleTest, FlatLossStopsWhenLrFallsBelowMinimum) {
  PlateauSchedule s(TrainConfig{});
  std::vector<double> lrs;
  int epochs = 0;
  while (!s.done()) {
    lrs.push_back(s.lr());
    s.Observe(1.0);
    ++epochs;
  }
  // Epoch 1 improves on +inf; drops at 6, 11, ..., 36; 0.05 / 5^7 < 1e-6.
  EXPECT_EQ(epochs, 36);
  EXPECT_LT(s.lr(), 1e-6);
  EXPECT_NEAR(s.lr(), 0.05 / std::pow(5.0, 7), 1e-18);
  for (size_t i = 1; i < lrs.size(); ++i) EXPECT_LE(lrs[i], lrs[i - 1]);
  for (double lr : lrs) {
    const double k = std::log(0.05 / lr) / std::log(5.0);
    EXPECT_NEAR(k, std::round(k), 1e-9);
  }
}

TEST(ScheduleTest, StopsAtMaxEpochs) {
  PlateauSchedule s(TrainConfig{});
  double loss = 10.0;
  int epochs = 0;
  while (!s.done()) {
    const auto step = s.Observe(loss);
    loss -= 0.01;
    ++epochs;
    EXPECT_TRUE(step.improved);
  }
  EXPECT_EQ(epochs, 100);
  EXPECT_DOUBLE_EQ(s.lr(), 0.05);
  EXPECT_THROW(s.Observe(0.0), UsageError);
}

TEST(ScheduleTest, InvalidConfig) {
  TrainConfig c;
  c.lr_min = 1.0;
  EXPECT_THROW(PlateauSchedule{c}, ConfigError);
  c = TrainConfig{};
  c.batch_size = 0;
  EXPECT_THROW(c.Validate(), ConfigError);
}

// ---- pairs -----------------------------------------------------------------

std::vector<std::string> Speakers(const Manifest& m, int label) { return m.SpeakersWithLabel(label); }

// Round-robin speaker folds per class; dev is the next fold.
struct Split {
  std::vector<std::string> test, dev, train;
};
Split RoundRobin(const Manifest& m, int k, int fold) {
  Split s;
  for (int label : {kHealthy, kDysarthric}) {
    const auto spk = Speakers(m, label);
    for (size_t i = 0; i < spk.size(); ++i) {
      const int f = static_cast<int>(i % static_cast<size_t>(k));
      if (f == fold) {
        s.test.push_back(spk[i]);
      } else if (f == (fold + 1) % k) {
        s.dev.push_back(spk[i]);
      } else {
        s.train.push_back(spk[i]);
      }
    }
  }
  return s;
}

std::vector<std::string> HealthyOf(const Manifest& m, const std::vector<std::string>& spk) {
  std::vector<std::string> out;
  for (const auto& s : spk) {
    if (m.SpeakerLabel(s) == kHealthy) out.push_back(s);
  }
  return out;
}

// Brute-force oracle: every (test entry, reference entry) with equal items
// and distinct speakers.
size_t BruteForcePairs(const Manifest& m, const std::vector<std::string>& test,
                       const std::vector<std::string>& refs) {
  const std::set<std::string> t(test.begin(), test.end()), r(refs.begin(), refs.end());
  size_t n = 0;
  for (const auto& a : m.entries()) {
    if (!t.count(a.speaker_id)) continue;
    for (const auto& b : m.entries()) {
      if (r.count(b.speaker_id) && a.item_id == b.item_id && a.speaker_id != b.speaker_id) ++n;
    }
  }
  return n;
}

size_t TestPairTotal(const Manifest& m, int k, bool brute) {
  size_t total = 0;
  for (int f = 0; f < k; ++f) {
    const auto split = RoundRobin(m, k, f);
    const auto refs = HealthyOf(m, split.train);
    total += brute ? BruteForcePairs(m, split.test, refs)
                   : EnumeratePairs(m, split.test, refs).size();
  }
  return total;
}

TEST(PairsTest, SmallCorpusTotal) {
  const auto m = ShapedManifest(20, 20, 54);
  EXPECT_EQ(TestPairTotal(m, 5, false), 40u * 54u * 12u);
  EXPECT_EQ(TestPairTotal(m, 5, false), TestPairTotal(m, 5, true));
}

TEST(PairsTest, LargeCorpusTotal) {
  const auto m = ShapedManifest(50, 50, 24);
  EXPECT_EQ(TestPairTotal(m, 10, false), 100u * 24u * 40u);
}

TEST(PairsTest, OneUtteranceThreeReferences) {
  std::vector<UtteranceRecord> e;
  for (const char* s : {"t", "r1", "r2", "r3"}) {
    UtteranceRecord r;
    r.speaker_id = s;
    r.item_id = "x";
    r.label = std::string(s) == "t" ? kDysarthric : kHealthy;
    e.push_back(r);
  }
  Manifest m({}, e, false);
  const auto pairs = EnumeratePairs(m, {"t"}, {"r1", "r2", "r3"});
  ASSERT_EQ(pairs.size(), 3u);
  for (const auto& p : pairs) EXPECT_EQ(p.label, kDysarthric);
}

TEST(PairsTest, InvariantsHoldExhaustively) {
  const auto m = ShapedManifest(7, 6, 5);
  const auto refs = m.SpeakersWithLabel(kHealthy);
  const auto pairs = EnumeratePairs(m, m.speakers(), refs);
  EXPECT_EQ(pairs.size(), BruteForcePairs(m, m.speakers(), refs));
  for (const auto& p : pairs) {
    const auto& t = m.entry(p.test);
    const auto& r = m.entry(p.reference);
    ASSERT_EQ(t.item_id, r.item_id);
    ASSERT_EQ(r.label, kHealthy);
    ASSERT_NE(t.speaker_id, r.speaker_id);
    ASSERT_EQ(p.label, t.label);
  }
  // Deterministic ordering: test speaker, item, reference speaker.
  for (size_t i = 1; i < pairs.size(); ++i) {
    const auto key = [&](const PairSample& p) {
      return std::make_tuple(m.entry(p.test).speaker_id, m.entry(p.test).item_id,
                             m.entry(p.reference).speaker_id);
    };
    ASSERT_LT(key(pairs[i - 1]), key(pairs[i]));
  }
}

TEST(PairsTest, Errors) {
  const auto m = ShapedManifest(3, 3, 2);
  EXPECT_THROW(EnumeratePairs(m, {"H000"}, {}), ConfigError);
  EXPECT_THROW(EnumeratePairs(m, {"H000"}, {"D000"}), ConfigError);
}

TEST(PairsTest, MissingItemsAreSkipped) {
  std::vector<UtteranceRecord> e;
  auto add = [&](const char* s, const char* item, int label) {
    UtteranceRecord r;
    r.speaker_id = s;
    r.item_id = item;
    r.label = label;
    e.push_back(r);
  };
  add("t", "a", 1);
  add("t", "b", 1);
  add("r", "a", 0);
  Manifest m({}, e, false);
  EXPECT_EQ(EnumeratePairs(m, {"t"}, {"r"}).size(), 1u);
}

// ---- fold preparation --------------------------------------------------------

TEST(PrepareFoldTest, CountsAndNormalizationScope) {
  SynthConfig c;
  c.healthy = c.dysarthric = 10;
  c.items = 3;
  const auto m = SynthCorpus(c);
  const auto split = RoundRobin(m, 5, 0);
  SpeakerSplit sp{split.train, split.dev, split.test};
  auto fold = PrepareFold(m, ModelKind::kProposed, 56, sp);
  EXPECT_EQ(fold.references.size(), 6u);
  // 12 training speakers x 3 items x 6 references, minus 6 healthy self-pairs x 3.
  EXPECT_EQ(fold.train->size(), 12u * 3u * 6u - 6u * 3u);
  EXPECT_EQ(fold.dev->size(), 4u * 3u * 6u);
  EXPECT_EQ(fold.test->size(), 4u * 3u * 6u);
  const auto expect = FitNormalization(ModelKind::kProposed, m, split.train);
  EXPECT_EQ(fold.zscore.mean, expect.mean);
  std::vector<std::string> with_test = split.train;
  with_test.insert(with_test.end(), split.test.begin(), split.test.end());
  EXPECT_NE(fold.zscore.mean, FitNormalization(ModelKind::kProposed, m, with_test).mean);

  auto seg = PrepareFold(m, ModelKind::kBcnn1, 56, sp);
  EXPECT_GT(seg.train->size(), 0u);
  for (size_t i = 0; i < seg.test->size(); ++i) {
    EXPECT_NE(std::find(split.test.begin(), split.test.end(), seg.test->speaker(i)),
              split.test.end());
  }
  auto kl = PrepareFold(m, ModelKind::kBcnn2, 56, sp);
  EXPECT_TRUE(kl.zscore.empty());
  EXPECT_EQ(kl.train->size(), fold.train->size());
}

// ---- training loop on a toy linear model --------------------------------------

// Logits = W x + b on 2-D points.
class ToySet : public ExampleSet {
 public:
  void Add(float x0, float x1, int label) {
    xs_.push_back(Tensor({2}, std::vector<float>{x0, x1}));
    labels_.push_back(label);
    speakers_.push_back("s" + std::to_string(xs_.size() % 4));
  }
  size_t size() const override { return xs_.size(); }
  int label(size_t i) const override { return labels_[i]; }
  const std::string& speaker(size_t i) const override { return speakers_[i]; }
  const std::string& item(size_t i) const override { return speakers_[i]; }
  Var Logits(const BoundParams<float>& p, Tape& tape, size_t i,
             const ForwardMode&) const override {
    return Affine(tape.Constant(xs_[i]), p["w"], p["b"]);
  }

 private:
  std::vector<Tensor> xs_;
  std::vector<int> labels_;
  std::vector<std::string> speakers_;
};

ParameterSet ToyParams() {
  ParameterSet p;
  p.Add("w", Tensor({2, 2}, std::vector<float>{0.1f, -0.2f, 0.05f, 0.3f}));
  p.Add("b", Tensor({2}, 0.f));
  return p;
}

ToySet Separable(uint64_t seed, int n) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> d(0.f, 0.3f);
  ToySet s;
  for (int i = 0; i < n; ++i) {
    const int label = i % 2;
    const float c = label ? 1.5f : -1.5f;
    s.Add(c + d(rng), c + d(rng), label);
  }
  return s;
}

TEST(TrainTest, SeparableDataReachesLowLoss) {
  const auto train = Separable(1, 300);
  const auto dev = Separable(2, 100);
  TrainConfig c;
  c.batch_size = 32;
  auto r = Train(ToyParams(), train, dev, c);
  EXPECT_LE(r.log.size(), 100u);
  EXPECT_LT(r.log.back().train_loss, 0.1);
  EXPECT_LT(r.best_dev_loss, 0.1);
}

TEST(TrainTest, BestCheckpointIsReturned) {
  const auto train = Separable(1, 300);
  const auto dev = Separable(2, 100);
  TrainConfig c;
  c.batch_size = 64;
  c.max_epochs = 12;
  auto r = Train(ToyParams(), train, dev, c);
  double best = 1e9;
  int best_epoch = 0;
  for (const auto& e : r.log) {
    if (e.dev_loss < best - 1e-6) {
      best = e.dev_loss;
      best_epoch = e.epoch;
    }
    EXPECT_GE(e.dev_loss, r.best_dev_loss);
  }
  EXPECT_EQ(r.best_epoch, best_epoch);
  EXPECT_DOUBLE_EQ(EvaluateDevLoss(r.best, dev), r.best_dev_loss);
}

TEST(TrainTest, BestCheckpointSurvivesLaterDegradation) {
  // Dev labels are the opposite of training labels, so dev loss is best
  // after the first epoch and grows afterwards.
  const auto train = Separable(1, 200);
  ToySet dev;
  std::mt19937_64 rng(5);
  std::normal_distribution<float> d(0.f, 0.3f);
  for (int i = 0; i < 50; ++i) {
    const float c = (i % 2) ? 1.5f : -1.5f;
    dev.Add(c + d(rng), c + d(rng), 1 - i % 2);
  }
  TrainConfig c;
  c.batch_size = 16;
  c.max_epochs = 8;
  auto r = Train(ToyParams(), train, dev, c);
  EXPECT_EQ(r.best_epoch, 1);
  EXPECT_LT(r.best_dev_loss, r.log.back().dev_loss);
  EXPECT_DOUBLE_EQ(EvaluateDevLoss(r.best, dev), r.log[0].dev_loss);
}

TEST(TrainTest, Deterministic) {
  const auto train = Separable(1, 100);
  const auto dev = Separable(2, 40);
  TrainConfig c;
  c.batch_size = 7;  // final partial batch is kept
  c.max_epochs = 5;
  auto a = Train(ToyParams(), train, dev, c);
  auto b = Train(ToyParams(), train, dev, c);
  EXPECT_TRUE(a.best.SameValues(b.best));
  EXPECT_EQ(EpochLogCsv(a.log), EpochLogCsv(b.log));
  c.seed = 2;
  auto other = Train(ToyParams(), train, dev, c);
  EXPECT_FALSE(a.best.SameValues(other.best));
}

TEST(TrainTest, NonFiniteLossAborts) {
  ToySet train;
  train.Add(1.f, 1.f, 0);
  train.Add(std::numeric_limits<float>::infinity(), 1.f, 1);
  const auto dev = Separable(2, 10);
  try {
    Train(ToyParams(), train, dev, TrainConfig{});
    FAIL() << "expected TrainingError";
  } catch (const TrainingError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("epoch 1"), std::string::npos);
    EXPECT_NE(what.find("batch 0"), std::string::npos);
    EXPECT_NE(what.find("lr"), std::string::npos);
  }
}

TEST(TrainTest, EmptySetsAreConfigErrors) {
  ToySet empty;
  const auto some = Separable(1, 10);
  EXPECT_THROW(Train(ToyParams(), empty, some, TrainConfig{}), ConfigError);
  EXPECT_THROW(Train(ToyParams(), some, empty, TrainConfig{}), ConfigError);
  EXPECT_THROW(EvaluateDevLoss(ToyParams(), empty), ConfigError);
}

TEST(DevLossTest, UniformModelGivesLn2) {
  ParameterSet p;
  p.Add("w", Tensor({2, 2}, 0.f));
  p.Add("b", Tensor({2}, 0.f));
  EXPECT_NEAR(EvaluateDevLoss(p, Separable(3, 20)), std::log(2.0), 1e-7);
}

TEST(DevLossTest, MatchesPerSampleOracle) {
  const auto set = Separable(4, 57);
  const auto p = ToyParams();
  double sum = 0.0;
  for (size_t i = 0; i < set.size(); ++i) {
    Tape tape(false);
    ParameterSet q = p;
    BoundParams<float> bound(tape, q);
    const auto x = set.Logits(bound, tape, i, ForwardMode{}).value();
    const double l0 = x[0], l1 = x[1];
    const double mx = std::max(l0, l1);
    const double lse = mx + std::log(std::exp(l0 - mx) + std::exp(l1 - mx));
    sum += lse - (set.label(i) ? l1 : l0);
  }
  EXPECT_NEAR(EvaluateDevLoss(p, set), sum / static_cast<double>(set.size()), 1e-6);
}

TEST(DevLossTest, PerfectModelNearZero) {
  ParameterSet p;
  p.Add("w", Tensor({2, 2}, std::vector<float>{-20.f, -20.f, 20.f, 20.f}));
  p.Add("b", Tensor({2}, 0.f));
  EXPECT_LT(EvaluateDevLoss(p, Separable(3, 20)), 1e-6);
}

TEST(EpochLogTest, CsvLayout) {
  std::vector<EpochReport> log = {{1, 0.05, 0.7, 0.6, true}, {2, 0.01, 0.5, 0.65, false}};
  EXPECT_EQ(EpochLogCsv(log),
            "epoch,lr,train_loss,dev_loss,improved\n1,0.05,0.7,0.6,1\n2,0.01,0.5,0.65,0\n");
}

}  // namespace
}  // namespace pdnet
