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

// Finite-difference check of a whole model graph with respect to its
// parameters (and differentiable inputs), run in double precision.

#ifndef PDNET_TESTS_SUPPORT_MODEL_GRADCHECK_H_
#define PDNET_TESTS_SUPPORT_MODEL_GRADCHECK_H_

#include <random>
#include <vector>

#include "pdnet/autodiff/ops.h"
#include "pdnet/models/models.h"
#include "support/gradcheck.h"

namespace pdnet::testing {

using ParameterSetD = BasicParameterSet<double>;

struct ModelGradReport {
  double max_rel_error = 0.0;
  int checked = 0;
  // Coordinates where the base step crossed a ReLU or max-pool switch and a
  // 10x smaller step (confirmed by a 100x smaller one) was used instead.
  int refined = 0;
  // Coordinates where no step gave a consistent estimate; not compared.
  int kinks = 0;
};

struct ModelInstance {
  ModelKind kind;
  ParameterSetD params;
  std::vector<TensorD> inputs;  // proposed: test, ref; bcnn2: distance; bcnn1: segment
  int label;
  uint64_t dropout_seed;
};

inline ModelInstance RandomInstance(ModelKind kind, int s, int f, uint64_t seed) {
  std::mt19937_64 rng(seed);
  ModelInstance m{kind, InitRandom(kind, s, f, seed).Cast<double>(), {}, static_cast<int>(seed % 2),
                  seed ^ 0x5eed};
  // Non-zero biases so every bias gradient path is exercised.
  for (auto& p : m.params) {
    if (p.tensor.rank() == 1) {
      for (size_t i = 0; i < p.tensor.size(); ++i) p.tensor[i] = 0.05 * std::sin(1.0 + i);
    }
  }
  switch (kind) {
    case ModelKind::kProposed:
      m.inputs.push_back(RandomTensor({f, s}, rng, -2.0, 2.0));
      m.inputs.push_back(RandomTensor({f, s}, rng, -2.0, 2.0));
      break;
    case ModelKind::kBcnn2: {
      TensorD a = RandomTensor({f, s}, rng, 0.05, 1.0);
      TensorD b = RandomTensor({f, s}, rng, 0.05, 1.0);
      m.inputs.push_back(PairwiseKl(a.Cast<float>(), b.Cast<float>()).Cast<double>());
      break;
    }
    case ModelKind::kBcnn1:
      m.inputs.push_back(RandomTensor({f, 16}, rng, -2.0, 2.0));
      break;
  }
  return m;
}

inline VarD InstanceLoss(TapeD& tape, ParameterSetD& params, const ModelInstance& m,
                         const std::vector<TensorD>& inputs, std::vector<VarD>* leaves) {
  BoundParams<double> bound(tape, params);
  std::mt19937_64 rng(m.dropout_seed);
  ForwardMode mode{true, &rng};
  std::vector<VarD> in;
  for (size_t i = 0; i < inputs.size(); ++i) {
    // KL distances are precomputed and carry no gradient.
    in.push_back(m.kind == ModelKind::kBcnn2 ? tape.Constant(inputs[i]) : tape.Input(inputs[i]));
  }
  if (leaves != nullptr) *leaves = in;
  VarD logits;
  switch (m.kind) {
    case ModelKind::kProposed:
      logits = ProposedLogits(bound, in[0], in[1], mode);
      break;
    case ModelKind::kBcnn2:
      logits = Bcnn2Logits(bound, in[0], mode);
      break;
    case ModelKind::kBcnn1:
      logits = Bcnn1Logits(bound, in[0], mode);
      break;
  }
  return SoftmaxCrossEntropy(logits, m.label).loss;
}

inline double InstanceValue(const ModelInstance& m, ParameterSetD params,
                            const std::vector<TensorD>& inputs) {
  TapeD tape(false);
  return InstanceLoss(tape, params, m, inputs, nullptr).value()[0];
}

// Checks `coords` random coordinates of every parameter and input tensor.
inline ModelGradReport CheckModel(const ModelInstance& m, int coords, double step = 1e-4) {
  ParameterSetD params = m.params;
  params.ZeroGrads();
  TapeD tape;
  std::vector<VarD> leaves;
  VarD loss = InstanceLoss(tape, params, m, m.inputs, &leaves);
  tape.Backward(loss);

  ModelGradReport report;
  std::mt19937_64 rng(m.dropout_seed + 17);
  auto numeric = [&](auto perturb, double h) {
    return (perturb(h) - perturb(-h)) / (2 * h);
  };
  auto check = [&](std::span<const double> analytic, auto perturb_at, size_t size) {
    std::uniform_int_distribution<size_t> pick(0, size - 1);
    int done = 0;
    for (int attempt = 0; done < coords && attempt < coords * 4; ++attempt) {
      const size_t i = pick(rng);
      auto perturb = [&](double h) { return perturb_at(i, h); };
      double n1 = numeric(perturb, step);
      const double n2 = numeric(perturb, step / 10);
      if (RelativeError(n1, n2) > 1e-4) {
        const double n3 = numeric(perturb, step / 100);
        if (RelativeError(n2, n3) > 1e-4) {
          ++report.kinks;
          continue;
        }
        n1 = n2;
        ++report.refined;
      }
      const double a = analytic.empty() ? 0.0 : analytic[i];
      report.max_rel_error = std::max(report.max_rel_error, RelativeError(a, n1));
      ++report.checked;
      ++done;
    }
  };
  for (size_t k = 0; k < params.size(); ++k) {
    std::vector<double> analytic(params[k].tensor.grad().begin(), params[k].tensor.grad().end());
    check(analytic,
          [&](size_t i, double h) {
            ParameterSetD p = m.params;
            p[k].tensor[i] += h;
            return InstanceValue(m, p, m.inputs);
          },
          params[k].tensor.size());
  }
  if (m.kind != ModelKind::kBcnn2) {
    for (size_t k = 0; k < m.inputs.size(); ++k) {
      std::vector<double> analytic(leaves[k].grad().begin(), leaves[k].grad().end());
      check(analytic,
            [&](size_t i, double h) {
              auto in = m.inputs;
              in[k][i] += h;
              return InstanceValue(m, m.params, in);
            },
            m.inputs[k].size());
    }
  }
  return report;
}

}  // namespace pdnet::testing

#endif  // PDNET_TESTS_SUPPORT_MODEL_GRADCHECK_H_
