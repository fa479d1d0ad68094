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

#ifndef NASK_TENSOR_HPP_
#define NASK_TENSOR_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace nask {

/// Dense rank-3 activation array, (y, x, channel) row-major, double precision.
/// The currency of all neural stages; vectors/matrices use h=rows, w=cols, c=1.
struct Tensor {
  int h = 0;
  int w = 0;
  int c = 0;
  std::vector<double> v;

  Tensor() = default;
  Tensor(int h_, int w_, int c_, double fill = 0.0)
      : h(h_), w(w_), c(c_), v(static_cast<size_t>(h_) * w_ * c_, fill) {
    if (h_ < 0 || w_ < 0 || c_ < 0)
      throw std::invalid_argument("Tensor: negative dimension");
  }

  double& at(int y, int x, int ch) {
    return v[(static_cast<size_t>(y) * w + x) * c + ch];
  }
  double at(int y, int x, int ch) const {
    return v[(static_cast<size_t>(y) * w + x) * c + ch];
  }
  size_t size() const { return v.size(); }
  bool empty() const { return v.empty(); }

  bool same_shape(const Tensor& o) const {
    return h == o.h && w == o.w && c == o.c;
  }
  std::string shape_str() const {
    return "(" + std::to_string(h) + "," + std::to_string(w) + "," +
           std::to_string(c) + ")";
  }

  void zero() { v.assign(v.size(), 0.0); }

  Tensor& operator+=(const Tensor& o) {
    require_same_shape(o, "operator+=");
    for (size_t i = 0; i < v.size(); ++i) v[i] += o.v[i];
    return *this;
  }
  Tensor& operator*=(double s) {
    for (double& x : v) x *= s;
    return *this;
  }

  void require_same_shape(const Tensor& o, const char* who) const {
    if (!same_shape(o))
      throw std::invalid_argument(std::string(who) + ": shape mismatch " +
                                  shape_str() + " vs " + o.shape_str());
  }
};

/// Learnable array with its accumulated gradient.
struct Param {
  std::string name;
  Tensor value;
  Tensor grad;

  Param() = default;
  Param(std::string n, Tensor t) : name(std::move(n)), value(std::move(t)) {
    grad = Tensor(value.h, value.w, value.c);
  }
  void zero_grad() { grad.zero(); }
};

bool all_finite(const Tensor& t);

}  // namespace nask

#endif  // NASK_TENSOR_HPP_
