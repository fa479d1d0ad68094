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

#include "nask/layers.hpp"

#include <cmath>
#include <stdexcept>

namespace nask {

Conv2d::Conv2d(std::string name, int in_c, int out_c, int ksize, int stride,
               int groups, bool bias, Rng& rng)
    : has_bias(bias),
      in_c_(in_c),
      out_c_(out_c),
      k_(ksize),
      stride_(stride),
      groups_(groups) {
  if (in_c % groups != 0 || out_c % groups != 0)
    throw std::invalid_argument("Conv2d: channels not divisible by groups");
  const int in_pg = in_c / groups;
  weight = Param(name + ".weight", Tensor(out_c, ksize * ksize * in_pg, 1));
  // He-style fan-in scaling
  const double scale = std::sqrt(2.0 / (ksize * ksize * in_pg));
  for (double& w : weight.value.v) w = scale * rng.normal();
  if (bias) bias_p = Param(name + ".bias", Tensor(out_c, 1, 1));
}

Tensor Conv2d::forward(const Tensor& x) {
  if (x.c != in_c_)
    throw std::invalid_argument("Conv2d: expected " + std::to_string(in_c_) +
                                " input channels, got " + std::to_string(x.c));
  cached_x_ = x;
  const int out_h = (x.h + stride_ - 1) / stride_;
  const int out_w = (x.w + stride_ - 1) / stride_;
  const int pad = k_ / 2;
  const int in_pg = in_c_ / groups_;
  const int out_pg = out_c_ / groups_;
  Tensor y(out_h, out_w, out_c_);
  for (int oy = 0; oy < out_h; ++oy)
    for (int ox = 0; ox < out_w; ++ox)
      for (int oc = 0; oc < out_c_; ++oc) {
        const int g = oc / out_pg;
        double acc = has_bias ? bias_p.value.at(oc, 0, 0) : 0.0;
        int widx = 0;
        for (int ky = 0; ky < k_; ++ky) {
          const int iy = oy * stride_ + ky - pad;
          for (int kx = 0; kx < k_; ++kx) {
            const int ix = ox * stride_ + kx - pad;
            if (iy < 0 || iy >= x.h || ix < 0 || ix >= x.w) {
              widx += in_pg;
              continue;
            }
            for (int ic = 0; ic < in_pg; ++ic)
              acc += weight.value.at(oc, widx + ic, 0) *
                     x.at(iy, ix, g * in_pg + ic);
            widx += in_pg;
          }
        }
        y.at(oy, ox, oc) = acc;
      }
  return y;
}

Tensor Conv2d::backward(const Tensor& dy) {
  const Tensor& x = cached_x_;
  const int pad = k_ / 2;
  const int in_pg = in_c_ / groups_;
  const int out_pg = out_c_ / groups_;
  Tensor dx(x.h, x.w, x.c);
  for (int oy = 0; oy < dy.h; ++oy)
    for (int ox = 0; ox < dy.w; ++ox)
      for (int oc = 0; oc < out_c_; ++oc) {
        const double g_out = dy.at(oy, ox, oc);
        if (g_out == 0.0) continue;
        const int g = oc / out_pg;
        if (has_bias) bias_p.grad.at(oc, 0, 0) += g_out;
        int widx = 0;
        for (int ky = 0; ky < k_; ++ky) {
          const int iy = oy * stride_ + ky - pad;
          for (int kx = 0; kx < k_; ++kx) {
            const int ix = ox * stride_ + kx - pad;
            if (iy < 0 || iy >= x.h || ix < 0 || ix >= x.w) {
              widx += in_pg;
              continue;
            }
            for (int ic = 0; ic < in_pg; ++ic) {
              weight.grad.at(oc, widx + ic, 0) +=
                  g_out * x.at(iy, ix, g * in_pg + ic);
              dx.at(iy, ix, g * in_pg + ic) +=
                  g_out * weight.value.at(oc, widx + ic, 0);
            }
            widx += in_pg;
          }
        }
      }
  return dx;
}

std::vector<Param*> Conv2d::params() {
  std::vector<Param*> p{&weight};
  if (has_bias) p.push_back(&bias_p);
  return p;
}

void Conv2d::set_identity() {
  if (k_ != 1 || in_c_ != out_c_)
    throw std::logic_error("Conv2d::set_identity: needs square 1x1 blocks");
  const int in_pg = in_c_ / groups_;
  weight.value.zero();
  for (int oc = 0; oc < out_c_; ++oc)
    weight.value.at(oc, oc % in_pg, 0) = 1.0;
  if (has_bias) bias_p.value.zero();
}

void Conv2d::set_zero() {
  weight.value.zero();
  if (has_bias) bias_p.value.zero();
}

Tensor relu(const Tensor& x) {
  Tensor y = x;
  for (double& v : y.v) v = v > 0.0 ? v : 0.0;
  return y;
}

Tensor relu_backward(const Tensor& x, const Tensor& dy) {
  Tensor dx = dy;
  for (size_t i = 0; i < x.v.size(); ++i)
    if (x.v[i] <= 0.0) dx.v[i] = 0.0;
  return dx;
}

Tensor upsample_nearest(const Tensor& x, int factor) {
  Tensor y(x.h * factor, x.w * factor, x.c);
  for (int yy = 0; yy < y.h; ++yy)
    for (int xx = 0; xx < y.w; ++xx)
      for (int c = 0; c < x.c; ++c)
        y.at(yy, xx, c) = x.at(yy / factor, xx / factor, c);
  return y;
}

Tensor upsample_nearest_backward(const Tensor& dy, int factor) {
  Tensor dx(dy.h / factor, dy.w / factor, dy.c);
  for (int yy = 0; yy < dy.h; ++yy)
    for (int xx = 0; xx < dy.w; ++xx)
      for (int c = 0; c < dy.c; ++c)
        dx.at(yy / factor, xx / factor, c) += dy.at(yy, xx, c);
  return dx;
}

Adam::Adam(std::vector<Param*> params, double beta1, double beta2, double eps)
    : params_(std::move(params)), beta1_(beta1), beta2_(beta2), eps_(eps) {
  for (Param* p : params_) {
    m_.emplace_back(p->value.h, p->value.w, p->value.c);
    v_.emplace_back(p->value.h, p->value.w, p->value.c);
  }
}

void Adam::step(double lr) {
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, t_);
  const double bc2 = 1.0 - std::pow(beta2_, t_);
  for (size_t i = 0; i < params_.size(); ++i) {
    Param* p = params_[i];
    for (size_t j = 0; j < p->value.v.size(); ++j) {
      const double g = p->grad.v[j];
      m_[i].v[j] = beta1_ * m_[i].v[j] + (1.0 - beta1_) * g;
      v_[i].v[j] = beta2_ * v_[i].v[j] + (1.0 - beta2_) * g * g;
      const double mhat = m_[i].v[j] / bc1;
      const double vhat = v_[i].v[j] / bc2;
      p->value.v[j] -= lr * mhat / (std::sqrt(vhat) + eps_);
    }
  }
}

void Adam::zero_grad() {
  for (Param* p : params_) p->zero_grad();
}

}  // namespace nask
