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
#include <filesystem>
#include <random>

#include <gtest/gtest.h>

#include "pdnet/common/errors.h"
#include "pdnet/common/util.h"
#include "pdnet/models/bundle.h"
#include "pdnet/models/models.h"
#include "support/model_gradcheck.h"

namespace pdnet {
namespace {

using testing::CheckModel;
using testing::RandomInstance;

Tensor Normal(const Shape& shape, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> d;
  Tensor t(shape, 0.f);
  for (float& v : t.data()) v = d(rng);
  return t;
}

std::vector<float> Probs(const Var& logits) {
  return Softmax<float>(logits.value().data());
}

// ---- geometry ------------------------------------------------------------

TEST(GeometryTest, ReferenceChainAt56) {
  EXPECT_EQ(ClassifierSpatial(56), 7);
  EXPECT_EQ(ClassifierFlatten(56), 784);
  EXPECT_EQ(Bcnn1Flatten(), 208);
}

TEST(GeometryTest, OnlyS55To58GiveReferenceFlatten) {
  for (int s = kMinS; s <= 120; ++s) {
    EXPECT_EQ(IsReferenceS(s), s >= 55 && s <= 58) << s;
    // Oracle: step the chain by hand.
    const int a = (((s - 9) / 2) - 9) / 2;
    EXPECT_EQ(ClassifierFlatten(s), 16 * a * a);
  }
  EXPECT_THROW(ClassifierSpatial(30), ConfigError);
  EXPECT_EQ(ClassifierSpatial(31), 1);
}

TEST(GeometryTest, IntermediateShapesAt56) {
  const int f = 53;
  const int s = 56;
  auto params = InitRandom(ModelKind::kProposed, s, f, 1);
  Tape tape(false);
  BoundParams<float> p(tape, params);
  auto fe = FrontEnd(p, tape.Constant(Normal({f, s}, 2)));
  EXPECT_EQ(fe.shape(), (Shape{32, 56}));
  auto d = PairwiseEuclidean(fe, fe);
  EXPECT_EQ(d.shape(), (Shape{56, 56}));
  auto h = Conv2dValid(Reshape(d, {1, s, s}), p["classifier.conv1.weight"],
                       p["classifier.conv1.bias"]);
  EXPECT_EQ(h.shape(), (Shape{16, 47, 47}));
  h = MaxPool2d(h);
  EXPECT_EQ(h.shape(), (Shape{16, 23, 23}));
  h = Conv2dValid(h, p["classifier.conv2.weight"], p["classifier.conv2.bias"]);
  EXPECT_EQ(h.shape(), (Shape{16, 14, 14}));
  h = MaxPool2d(h);
  EXPECT_EQ(h.shape(), (Shape{16, 7, 7}));
  EXPECT_EQ(h.size(), 784u);
  EXPECT_EQ(params.Get("classifier.fc1.weight").tensor.shape(), (Shape{128, 784}));
}

TEST(GeometryTest, Bcnn1FlattenIndependentOfF) {
  for (int f : {53, 129}) {
    auto params = InitRandom(ModelKind::kBcnn1, 0, f, 1);
    EXPECT_EQ(params.Get("fc1.weight").tensor.shape(), (Shape{128, 208}));
    Tape tape(false);
    BoundParams<float> p(tape, params);
    auto logits = Bcnn1Logits(p, tape.Constant(Normal({f, 16}, 3)), ForwardMode{});
    EXPECT_EQ(logits.size(), 2u);
  }
}

TEST(GeometryTest, NonReferenceSResizesFc1) {
  auto params = InitRandom(ModelKind::kProposed, 64, 53, 1);
  EXPECT_EQ(params.Get("classifier.fc1.weight").tensor.shape(), (Shape{128, 16 * 9 * 9}));
  Tape tape(false);
  BoundParams<float> p(tape, params);
  auto logits = ProposedLogits(p, tape.Constant(Normal({53, 64}, 1)),
                               tape.Constant(Normal({53, 64}, 2)), ForwardMode{});
  EXPECT_EQ(logits.size(), 2u);
}

// ---- initialization ---------------------------------------------------------

TEST(InitTest, SeedDeterminism) {
  auto a = InitRandom(ModelKind::kProposed, 56, 53, 5);
  auto b = InitRandom(ModelKind::kProposed, 56, 53, 5);
  auto c = InitRandom(ModelKind::kProposed, 56, 53, 6);
  EXPECT_TRUE(a.SameValues(b));
  EXPECT_FALSE(a.SameValues(c));
}

TEST(InitTest, UniformFanInMomentsAndZeroBias) {
  // classifier.conv2.weight: 16*16*10*10 = 25600 draws, fan_in 1600.
  auto params = InitRandom(ModelKind::kProposed, 56, 53, 9);
  const auto& w = params.Get("classifier.conv2.weight").tensor;
  const double b = std::sqrt(1.0 / 1600.0);
  double sum = 0.0, sq = 0.0;
  for (float v : w.data()) {
    ASSERT_LE(std::abs(v), b);
    sum += v;
    sq += static_cast<double>(v) * v;
  }
  const double n = static_cast<double>(w.size());
  const double sd = std::sqrt(sq / n - (sum / n) * (sum / n));
  EXPECT_NEAR(sd, b / std::sqrt(3.0), 0.05 * b / std::sqrt(3.0));
  for (const auto& p : params) {
    if (p.tensor.rank() == 1) {
      for (float v : p.tensor.data()) EXPECT_EQ(v, 0.f);
    }
  }
}

TEST(InitTest, FrontEndFanInIsF) {
  auto params = InitRandom(ModelKind::kProposed, 56, 53, 3);
  const float b = static_cast<float>(std::sqrt(1.0 / 53.0));
  for (float v : params.Get("frontend.weight").tensor.data()) EXPECT_LE(std::abs(v), b);
}

// ---- forward semantics ------------------------------------------------------

TEST(ForwardTest, OutputsAreDistributions) {
  for (auto kind : {ModelKind::kProposed, ModelKind::kBcnn2, ModelKind::kBcnn1}) {
    auto params = InitRandom(kind, 56, 53, 4);
    Tape tape(false);
    BoundParams<float> p(tape, params);
    Var logits;
    if (kind == ModelKind::kProposed) {
      auto x = tape.Constant(Normal({53, 56}, 1));
      logits = ProposedLogits(p, x, x, ForwardMode{});
    } else if (kind == ModelKind::kBcnn2) {
      logits = Bcnn2Logits(p, tape.Constant(Normal({56, 56}, 1)), ForwardMode{});
    } else {
      logits = Bcnn1Logits(p, tape.Constant(Normal({53, 16}, 1)), ForwardMode{});
    }
    const auto probs = Probs(logits);
    ASSERT_EQ(probs.size(), 2u);
    EXPECT_NEAR(probs[0] + probs[1], 1.0, 1e-6);
    for (float q : probs) {
      EXPECT_GE(q, 0.f);
      EXPECT_LE(q, 1.f);
    }
  }
}

TEST(ForwardTest, SelfPairDiagonalIsSqrtEps) {
  auto params = InitRandom(ModelKind::kProposed, 56, 53, 4);
  Tape tape(false);
  BoundParams<float> p(tape, params);
  auto x = tape.Constant(Normal({53, 56}, 1));
  auto fe = FrontEnd(p, x);
  auto d = PairwiseEuclidean(fe, fe);
  for (int i = 0; i < 56; ++i) EXPECT_LE(d.value().at(i, i), 1e-5f);
}

TEST(ForwardTest, Bcnn1ZeroInputZeroBiasIsUniform) {
  auto params = InitRandom(ModelKind::kBcnn1, 0, 53, 2);
  Tape tape(false);
  BoundParams<float> p(tape, params);
  const auto probs = Probs(Bcnn1Logits(p, tape.Constant(Tensor({53, 16}, 0.f)), ForwardMode{}));
  EXPECT_FLOAT_EQ(probs[0], 0.5f);
  EXPECT_FLOAT_EQ(probs[1], 0.5f);
}

TEST(ForwardTest, Bcnn1RejectsWrongF) {
  auto params = InitRandom(ModelKind::kBcnn1, 0, 53, 2);
  Tape tape(false);
  BoundParams<float> p(tape, params);
  EXPECT_THROW(Bcnn1Logits(p, tape.Constant(Tensor({129, 16}, 0.f)), ForwardMode{}),
               DimensionError);
}

TEST(ForwardTest, Bcnn2IdenticalInputsGiveZeroDiagonal) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<float> u(0.05f, 1.f);
  Tensor a({53, 56}, 0.f);
  for (float& v : a.data()) v = u(rng);
  const auto d = PairwiseKl(a, a);
  for (int i = 0; i < 56; ++i) EXPECT_LE(std::abs(d.at(i, i)), 1e-6f);
}

TEST(ForwardTest, SameClassifierAndImageGiveSameProbabilities) {
  auto proposed = InitRandom(ModelKind::kProposed, 56, 53, 8);
  ParameterSet bcnn2;
  for (const auto& p : proposed) {
    if (p.name.rfind("classifier.", 0) == 0) bcnn2.Add(p.name, p.tensor);
  }
  Tape tape(false);
  BoundParams<float> pp(tape, proposed);
  BoundParams<float> pb(tape, bcnn2);
  auto x = tape.Constant(Normal({53, 56}, 1));
  auto y = tape.Constant(Normal({53, 56}, 2));
  auto image = PairwiseEuclidean(FrontEnd(pp, x), FrontEnd(pp, y));
  const auto a = Probs(ProposedLogits(pp, x, y, ForwardMode{}));
  const auto b = Probs(Bcnn2Logits(pb, tape.Constant(image.value()), ForwardMode{}));
  EXPECT_EQ(a, b);
}

TEST(ForwardTest, SwappingPairTransposesDistanceImage) {
  auto params = InitRandom(ModelKind::kProposed, 56, 53, 4);
  Tape tape(false);
  BoundParams<float> p(tape, params);
  auto x = FrontEnd(p, tape.Constant(Normal({53, 56}, 1)));
  auto y = FrontEnd(p, tape.Constant(Normal({53, 56}, 2)));
  auto dxy = PairwiseEuclidean(x, y);
  auto dyx = PairwiseEuclidean(y, x);
  for (int i = 0; i < 56; ++i) {
    for (int j = 0; j < 56; ++j) ASSERT_EQ(dxy.value().at(i, j), dyx.value().at(j, i));
  }
}

TEST(ForwardTest, SharedFrontEndPerturbationHitsBothBranches) {
  auto params = InitRandom(ModelKind::kProposed, 56, 53, 4);
  const Tensor x = Normal({53, 56}, 1);
  auto run = [&](ParameterSet& ps) {
    Tape tape(false);
    BoundParams<float> p(tape, ps);
    auto t = FrontEnd(p, tape.Constant(x)).value();
    auto r = FrontEnd(p, tape.Constant(x)).value();
    return std::make_pair(t, r);
  };
  const auto before = run(params);
  params.Get("frontend.weight").tensor[7] += 0.25f;
  const auto after = run(params);
  EXPECT_TRUE(after.first.SameValues(after.second));
  EXPECT_FALSE(after.first.SameValues(before.first));
  // The gradient of a pair loss lands in the single stored front end.
  Tape tape;
  BoundParams<float> p(tape, params);
  params.ZeroGrads();
  auto loss = SoftmaxCrossEntropy(
      ProposedLogits(p, tape.Constant(x), tape.Constant(Normal({53, 56}, 2)), ForwardMode{}), 1);
  tape.Backward(loss.loss);
  double norm = 0.0;
  for (float g : params.Get("frontend.weight").tensor.grad()) norm += std::abs(g);
  EXPECT_GT(norm, 0.0);
}

TEST(ForwardTest, BatchEqualsPerSegment) {
  auto params = InitRandom(ModelKind::kBcnn1, 0, 53, 2);
  std::vector<Tensor> segs;
  for (int i = 0; i < 6; ++i) segs.push_back(Normal({53, 16}, 100 + i));
  std::vector<std::vector<float>> single;
  for (const auto& s : segs) {
    Tape tape(false);
    BoundParams<float> p(tape, params);
    single.push_back(Probs(Bcnn1Logits(p, tape.Constant(s), ForwardMode{})));
  }
  Tape tape(false);
  BoundParams<float> p(tape, params);
  for (size_t i = 0; i < segs.size(); ++i) {
    EXPECT_EQ(Probs(Bcnn1Logits(p, tape.Constant(segs[i]), ForwardMode{})), single[i]);
  }
}

TEST(ForwardTest, TrainingModeNeedsRng) {
  auto params = InitRandom(ModelKind::kBcnn1, 0, 53, 2);
  Tape tape;
  BoundParams<float> p(tape, params);
  EXPECT_THROW(Bcnn1Logits(p, tape.Constant(Tensor({53, 16}, 0.f)), ForwardMode{true, nullptr}),
               UsageError);
}

// ---- gradients --------------------------------------------------------------

TEST(ModelGradientTest, FullGraphsMatchFiniteDifferences) {
  struct Case {
    ModelKind kind;
    int s;
    int f;
  };
  const Case cases[] = {{ModelKind::kProposed, 56, 53},
                        {ModelKind::kProposed, 33, 7},
                        {ModelKind::kBcnn2, 56, 0},
                        {ModelKind::kBcnn2, 35, 0},
                        {ModelKind::kBcnn1, 0, 53},
                        {ModelKind::kBcnn1, 0, 129}};
  for (const auto& c : cases) {
    const int f = c.kind == ModelKind::kBcnn2 ? 6 : c.f;
    auto inst = RandomInstance(c.kind, c.s, f, 11 + static_cast<uint64_t>(c.s));
    if (c.kind == ModelKind::kBcnn2) inst.params = InitRandom(c.kind, c.s, 0, 11).Cast<double>();
    const auto report = CheckModel(inst, 3);
    EXPECT_LT(report.max_rel_error, 1e-3) << ModelKindName(c.kind) << " S=" << c.s;
    EXPECT_GT(report.checked, 20);
    EXPECT_LE(report.kinks, report.checked / 10);
  }
}

// ---- bundles ---------------------------------------------------------------

ModelBundle SampleBundle(ModelKind kind) {
  auto b = NewBundle(kind, 56, kind == ModelKind::kBcnn2 ? 0 : 53, 21);
  if (kind != ModelKind::kBcnn2) {
    b.zscore = ZScoreFit(std::vector<FeatureMatrix>{Normal({53, 30}, 4)});
  }
  b.provenance = {21, 3, "00ff00ff00ff00ff", "random"};
  return b;
}

TEST(BundleTest, SaveLoadSaveIsByteIdentical) {
  for (auto kind : {ModelKind::kProposed, ModelKind::kBcnn2, ModelKind::kBcnn1}) {
    const auto b = SampleBundle(kind);
    const std::string bytes = EncodeBundle(b);
    const auto back = DecodeBundle(bytes);
    EXPECT_EQ(EncodeBundle(back), bytes);
    EXPECT_TRUE(back.params.SameValues(b.params));
    EXPECT_EQ(back.zscore.mean, b.zscore.mean);
    EXPECT_EQ(back.zscore.std, b.zscore.std);
    EXPECT_EQ(back.provenance.fold, 3);
    EXPECT_EQ(back.provenance.config_hash, "00ff00ff00ff00ff");
  }
}

TEST(BundleTest, LoadedBundleReproducesForward) {
  const auto dir = std::filesystem::temp_directory_path() / "pdnet_models_test";
  std::filesystem::create_directories(dir);
  auto b = SampleBundle(ModelKind::kProposed);
  SaveBundle(b, dir / "p.pdnb");
  auto back = LoadBundle(dir / "p.pdnb");
  const Tensor x = Normal({53, 56}, 1), y = Normal({53, 56}, 2);
  auto run = [&](ParameterSet& ps) {
    Tape tape(false);
    BoundParams<float> p(tape, ps);
    return Probs(ProposedLogits(p, tape.Constant(x), tape.Constant(y), ForwardMode{}));
  };
  EXPECT_EQ(run(b.params), run(back.params));
}

TEST(BundleTest, CorruptMagicAndVersion) {
  std::string bytes = EncodeBundle(SampleBundle(ModelKind::kBcnn1));
  std::string bad = bytes;
  bad[1] = 'X';
  EXPECT_THROW(DecodeBundle(bad), FormatError);
  bad = bytes;
  bad[4] = 9;
  EXPECT_THROW(DecodeBundle(bad), FormatError);
  EXPECT_THROW(DecodeBundle(bytes.substr(0, bytes.size() - 3)), FormatError);
}

TEST(BundleTest, InconsistentSRejectedAtLoad) {
  auto b = SampleBundle(ModelKind::kBcnn2);
  b.s = 64;  // fc1 still sized for 784
  EXPECT_THROW(DecodeBundle(EncodeBundle(b)), ConfigError);
}

TEST(TransferTest, CopiesFrontEndAndClassifier) {
  auto proposed = NewBundle(ModelKind::kProposed, 56, 53, 1);
  auto bcnn1 = NewBundle(ModelKind::kBcnn1, 56, 53, 2);
  auto bcnn2 = NewBundle(ModelKind::kBcnn2, 56, 0, 3);
  InitTransfer(proposed, bcnn1, bcnn2);
  EXPECT_TRUE(proposed.params.Get("frontend.weight")
                  .tensor.SameValues(bcnn1.params.Get("conv1.weight").tensor));
  EXPECT_TRUE(proposed.params.Get("frontend.bias")
                  .tensor.SameValues(bcnn1.params.Get("conv1.bias").tensor));
  for (const auto& p : bcnn2.params) {
    EXPECT_TRUE(proposed.params.Get(p.name).tensor.SameValues(p.tensor)) << p.name;
  }
  EXPECT_EQ(proposed.provenance.init, "transfer");
}

TEST(TransferTest, RejectsStftBaseline) {
  auto proposed = NewBundle(ModelKind::kProposed, 56, 53, 1);
  auto bcnn1 = NewBundle(ModelKind::kBcnn1, 56, 129, 2);
  auto bcnn2 = NewBundle(ModelKind::kBcnn2, 56, 0, 3);
  EXPECT_THROW(InitTransfer(proposed, bcnn1, bcnn2), ConfigError);
  auto bcnn2_64 = NewBundle(ModelKind::kBcnn2, 64, 0, 3);
  EXPECT_THROW(InitTransfer(proposed, NewBundle(ModelKind::kBcnn1, 56, 53, 2), bcnn2_64),
               ConfigError);
}

TEST(TransferTest, TransferredModelGivesValidButDifferentOutput) {
  auto proposed = NewBundle(ModelKind::kProposed, 56, 53, 1);
  auto bcnn1 = NewBundle(ModelKind::kBcnn1, 56, 53, 2);
  auto bcnn2 = NewBundle(ModelKind::kBcnn2, 56, 0, 3);
  InitTransfer(proposed, bcnn1, bcnn2);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<float> u(0.05f, 1.f);
  Tensor a({53, 56}, 0.f), b({53, 56}, 0.f);
  for (float& v : a.data()) v = u(rng);
  for (float& v : b.data()) v = u(rng);
  Tape tape(false);
  BoundParams<float> pp(tape, proposed.params);
  BoundParams<float> pb(tape, bcnn2.params);
  const auto p1 = Probs(ProposedLogits(pp, tape.Constant(a), tape.Constant(b), ForwardMode{}));
  const auto p2 = Probs(Bcnn2Logits(pb, tape.Constant(PairwiseKl(a, b)), ForwardMode{}));
  EXPECT_NEAR(p1[0] + p1[1], 1.0, 1e-6);
  EXPECT_NE(p1, p2);
}

}  // namespace
}  // namespace pdnet
