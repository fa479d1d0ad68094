// Copyright 2026 The nasklab authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef NASK_ATTENTION_HPP_
#define NASK_ATTENTION_HPP_

#include <cstdint>
#include <vector>

#include "nask/layers.hpp"
#include "nask/tensor.hpp"

namespace nask {

/// Group Spatial and Channel Attention.
///
/// Spatial branch: the feature map is split into G channel groups; within a
/// group every element (y, x, c) attends to every other element through a
/// rank-1 affinity theta(h)[u] * phi(h)[v], softmax-normalized along the key
/// dimension, applied to q(h). Theta/phi/q and the output projection are
/// grouped 1x1 convolutions so no cross-group mixing happens here; inter-group
/// information flows only through the channel branch.
///
/// Channel branch: squeeze-and-excitation,
/// lambda = softmax(W2 * relu(W1 * avgpool(h))), one weight per channel.
///
/// Output: M = h + lambda (.) spatial_branch(h).
class Gsca {
 public:
  Gsca() = default;
  /// `expansion` is the SE bottleneck ratio kappa (W1: kappa*C x C).
  Gsca(int channels, int groups, double expansion, Rng& rng);

  /// Spatial branch Y' (attention + output projection). Shape-preserving.
  Tensor spatial_attention(const Tensor& h);

  /// Channel weights lambda, length C, positive, summing to 1.
  std::vector<double> channel_attention(const Tensor& h) const;

  /// M = h + lambda (.) Y'. Caches intermediates for backward().
  Tensor forward(const Tensor& h);

  /// dL/dh given dL/dM; accumulates parameter gradients.
  Tensor backward(const Tensor& dM);

  /// Normalized affinity rows for one group (N x N, N = H*W*C/G). Intended
  /// for tests and raw-map dumps; quadratic in N.
  std::vector<std::vector<double>> spatial_affinity(const Tensor& h,
                                                    int group) const;

  std::vector<Param*> params();

  int channels() const { return channels_; }
  int groups() const { return groups_; }

  /// Softmax-normalized affinity (default) vs the raw matrix product of
  /// Eq-style f(.,.); the raw mode is kept for comparison runs.
  bool normalize = true;

  Conv2d theta, phi, q, out_proj;
  Param se_w1, se_w2;  // (kappa*C x C) and (C x kappa*C)

 private:
  void check_input(const Tensor& h) const;
  Tensor attention_core(const Tensor& th, const Tensor& ph,
                        const Tensor& qh) const;

  int channels_ = 0, groups_ = 1;
  double expansion_ = 2.0;

  // forward() caches
  Tensor cached_h_, cached_th_, cached_ph_, cached_qh_, cached_attn_,
      cached_yprime_;
  std::vector<double> cached_lambda_, cached_se_z_, cached_se_a_;
};

/// Multiply-accumulate count of the intra-group affinity product (logits plus
/// the weighted sum over values): 2 * (H*W*C)^2 / G.
uint64_t attention_flops(int h, int w, int c, int groups);

}  // namespace nask

#endif  // NASK_ATTENTION_HPP_
