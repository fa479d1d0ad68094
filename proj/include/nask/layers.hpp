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

#ifndef NASK_LAYERS_HPP_
#define NASK_LAYERS_HPP_

#include <string>
#include <vector>

#include "nask/rng.hpp"
#include "nask/tensor.hpp"

namespace nask {

/// 2D convolution over (y, x, c) tensors with same-padding, optional stride
/// and channel grouping. Weight layout: (out_c, k*k*in_per_group, 1).
class Conv2d {
 public:
  Conv2d() = default;
  Conv2d(std::string name, int in_c, int out_c, int ksize, int stride,
         int groups, bool bias, Rng& rng);

  Tensor forward(const Tensor& x);
  /// Returns dL/dx and accumulates weight/bias gradients. Uses the input
  /// cached by the last forward().
  Tensor backward(const Tensor& dy);

  std::vector<Param*> params();

  void set_identity();   // ksize 1, square per-group blocks only
  void set_zero();

  int in_channels() const { return in_c_; }
  int out_channels() const { return out_c_; }

  Param weight;
  Param bias_p;
  bool has_bias = false;

 private:
  int in_c_ = 0, out_c_ = 0, k_ = 0, stride_ = 1, groups_ = 1;
  Tensor cached_x_;
};

Tensor relu(const Tensor& x);
Tensor relu_backward(const Tensor& x, const Tensor& dy);

/// Nearest-neighbour upsampling by an integer factor.
Tensor upsample_nearest(const Tensor& x, int factor);
Tensor upsample_nearest_backward(const Tensor& dy, int factor);

/// Adam over a fixed parameter list. State is positional, so the list must be
/// identical across steps.
class Adam {
 public:
  explicit Adam(std::vector<Param*> params, double beta1 = 0.9,
                double beta2 = 0.999, double eps = 1e-8);
  void step(double lr);
  void zero_grad();

 private:
  std::vector<Param*> params_;
  std::vector<Tensor> m_, v_;
  double beta1_, beta2_, eps_;
  long t_ = 0;
};

}  // namespace nask

#endif  // NASK_LAYERS_HPP_
