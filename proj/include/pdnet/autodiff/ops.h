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

#ifndef PDNET_AUTODIFF_OPS_H_
#define PDNET_AUTODIFF_OPS_H_

#include <random>
#include <span>
#include <vector>

#include "pdnet/autodiff/tape.h"

namespace pdnet {

// Default constants for the two distance operators.
inline constexpr double kEuclideanEps = 1e-12;
inline constexpr double kKlFloor = 1e-10;

// Valid (unpadded) 2-D cross-correlation.
//   input   C_in x H x W
//   weights C_out x C_in x kH x kW
//   bias    C_out
// Output is C_out x ((H-kH)/stride+1) x ((W-kW)/stride+1).
template <typename T>
BasicVar<T> Conv2dValid(BasicVar<T> input, BasicVar<T> weights, BasicVar<T> bias,
                        int stride = 1);

// Max pooling over C x H x W. Trailing rows/columns that do not fill a window
// are dropped. On ties the first maximum in row-major window order wins and
// receives the whole gradient.
template <typename T>
BasicVar<T> MaxPool2d(BasicVar<T> input, int kernel = 2, int stride = 2);

// Subgradient at 0 is 0.
template <typename T>
BasicVar<T> Relu(BasicVar<T> input);

// Inverted dropout: in training mode each element is zeroed with
// probability p and survivors are scaled by 1/(1-p); identity otherwise.
template <typename T>
BasicVar<T> Dropout(BasicVar<T> input, double p, bool training, std::mt19937_64& rng);

// weights (m x n) * input (n, any shape with n elements) + bias (m).
template <typename T>
BasicVar<T> Affine(BasicVar<T> input, BasicVar<T> weights, BasicVar<T> bias);

template <typename T>
BasicVar<T> Reshape(BasicVar<T> input, Shape shape);

// Sum of all elements, as a 1-element tensor.
template <typename T>
BasicVar<T> Sum(BasicVar<T> input);

template <typename T>
struct CrossEntropyResult {
  BasicVar<T> loss;               // 1-element tensor
  std::vector<T> probabilities;   // softmax(logits)
};

// Softmax cross-entropy via log-sum-exp. d loss / d logits = p - onehot.
template <typename T>
CrossEntropyResult<T> SoftmaxCrossEntropy(BasicVar<T> logits, int label);

// Stable softmax of a logit vector, outside any tape.
template <typename T>
std::vector<T> Softmax(std::span<const T> logits);

// D[i][j] = sqrt(sum_f (test[f][i] - ref[f][j])^2 + eps) for F x S inputs.
// Row index follows the test frame, column index the reference frame.
template <typename T>
BasicVar<T> PairwiseEuclidean(BasicVar<T> test, BasicVar<T> reference,
                              double eps = kEuclideanEps);

// D[i][j] = KL(test column i || reference column j) for F x S posterior
// matrices. Columns are clamped at `floor` and renormalized first. Forward
// only; computed in double precision.
Tensor PairwiseKl(const Tensor& test, const Tensor& reference, double floor = kKlFloor);

// w <- w - lr * grad for every parameter, then zero the gradients.
// Throws UsageError if a parameter has no gradient buffer.
template <typename T>
void SgdStep(BasicParameterSet<T>& params, double lr);

}  // namespace pdnet

#endif  // PDNET_AUTODIFF_OPS_H_
