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

#include "nask/attention.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nask {

namespace {

// Flattens one channel group to a contiguous vector, index (y, x, local c).
void gather_group(const Tensor& t, int group, int cprime,
                  std::vector<double>* out) {
  out->resize(static_cast<size_t>(t.h) * t.w * cprime);
  size_t i = 0;
  for (int y = 0; y < t.h; ++y)
    for (int x = 0; x < t.w; ++x)
      for (int c = 0; c < cprime; ++c)
        (*out)[i++] = t.at(y, x, group * cprime + c);
}

void scatter_group(const std::vector<double>& in, int group, int cprime,
                   Tensor* t) {
  size_t i = 0;
  for (int y = 0; y < t->h; ++y)
    for (int x = 0; x < t->w; ++x)
      for (int c = 0; c < cprime; ++c)
        t->at(y, x, group * cprime + c) = in[i++];
}

}  // namespace

Gsca::Gsca(int channels, int groups, double expansion, Rng& rng)
    : channels_(channels), groups_(groups), expansion_(expansion) {
  if (groups < 1 || channels % groups != 0)
    throw std::invalid_argument("Gsca: channels must be divisible by groups");
  if (expansion <= 0.0) throw std::invalid_argument("Gsca: expansion <= 0");
  theta = Conv2d("gsca.theta", channels, channels, 1, 1, groups, false, rng);
  phi = Conv2d("gsca.phi", channels, channels, 1, 1, groups, false, rng);
  q = Conv2d("gsca.q", channels, channels, 1, 1, groups, false, rng);
  out_proj = Conv2d("gsca.out", channels, channels, 1, 1, groups, false, rng);
  out_proj.set_zero();  // forward starts as the identity map

  const int hidden = std::max(1, static_cast<int>(expansion * channels));
  se_w1 = Param("gsca.se_w1", Tensor(hidden, channels, 1));
  se_w2 = Param("gsca.se_w2", Tensor(channels, hidden, 1));
  const double s1 = std::sqrt(2.0 / channels);
  for (double& w : se_w1.value.v) w = s1 * rng.normal();
  // zero W2 keeps lambda uniform at initialization
}

void Gsca::check_input(const Tensor& h) const {
  if (h.c != channels_)
    throw std::invalid_argument("Gsca: input has " + std::to_string(h.c) +
                                " channels, module built for " +
                                std::to_string(channels_));
  if (h.c % groups_ != 0)
    throw std::invalid_argument("Gsca: channels not divisible by groups");
  if (!all_finite(h)) throw std::domain_error("Gsca: non-finite input values");
}

Tensor Gsca::attention_core(const Tensor& th, const Tensor& ph,
                            const Tensor& qh) const {
  const int cprime = channels_ / groups_;
  Tensor out(th.h, th.w, th.c);
  std::vector<double> t, p, val;
  for (int g = 0; g < groups_; ++g) {
    gather_group(th, g, cprime, &t);
    gather_group(ph, g, cprime, &p);
    gather_group(qh, g, cprime, &val);
    const size_t n = t.size();
    std::vector<double> o(n, 0.0);
    if (normalize) {
      double pmin = p[0], pmax = p[0];
      for (double x : p) {
        pmin = std::min(pmin, x);
        pmax = std::max(pmax, x);
      }
      for (size_t u = 0; u < n; ++u) {
        const double tu = t[u];
        const double m = tu >= 0.0 ? tu * pmax : tu * pmin;
        double denom = 0.0, acc = 0.0;
        for (size_t v = 0; v < n; ++v) {
          const double e = std::exp(tu * p[v] - m);
          denom += e;
          acc += e * val[v];
        }
        o[u] = acc / denom;
      }
    } else {
      // raw matrix product: out_u = t_u * sum_v p_v q_v
      double pq = 0.0;
      for (size_t v = 0; v < n; ++v) pq += p[v] * val[v];
      for (size_t u = 0; u < n; ++u) o[u] = t[u] * pq;
    }
    scatter_group(o, g, cprime, &out);
  }
  return out;
}

Tensor Gsca::spatial_attention(const Tensor& h) {
  check_input(h);
  Tensor th = theta.forward(h);
  Tensor ph = phi.forward(h);
  Tensor qh = q.forward(h);
  Tensor attn = attention_core(th, ph, qh);
  return out_proj.forward(attn);
}

std::vector<double> Gsca::channel_attention(const Tensor& h) const {
  check_input(h);
  if (se_w1.value.w != channels_ || se_w2.value.h != channels_ ||
      se_w1.value.h != se_w2.value.w)
    throw std::invalid_argument("Gsca: SE weight shapes inconsistent");
  const int C = channels_;
  const int hidden = se_w1.value.h;
  std::vector<double> z(C, 0.0);
  for (int y = 0; y < h.h; ++y)
    for (int x = 0; x < h.w; ++x)
      for (int c = 0; c < C; ++c) z[c] += h.at(y, x, c);
  const double inv = 1.0 / (static_cast<double>(h.h) * h.w);
  for (double& x : z) x *= inv;

  std::vector<double> a(hidden, 0.0);
  for (int i = 0; i < hidden; ++i) {
    for (int c = 0; c < C; ++c) a[i] += se_w1.value.at(i, c, 0) * z[c];
  }
  std::vector<double> l(C, 0.0);
  for (int c = 0; c < C; ++c)
    for (int i = 0; i < hidden; ++i)
      l[c] += se_w2.value.at(c, i, 0) * std::max(0.0, a[i]);

  double m = *std::max_element(l.begin(), l.end());
  double denom = 0.0;
  for (double x : l) denom += std::exp(x - m);
  std::vector<double> lam(C);
  for (int c = 0; c < C; ++c) lam[c] = std::exp(l[c] - m) / denom;
  return lam;
}

Tensor Gsca::forward(const Tensor& h) {
  check_input(h);
  cached_h_ = h;
  cached_th_ = theta.forward(h);
  cached_ph_ = phi.forward(h);
  cached_qh_ = q.forward(h);
  cached_attn_ = attention_core(cached_th_, cached_ph_, cached_qh_);
  cached_yprime_ = out_proj.forward(cached_attn_);

  // squeeze-and-excitation (kept inline so backward sees the pre-relu a)
  const int C = channels_;
  const int hidden = se_w1.value.h;
  cached_se_z_.assign(C, 0.0);
  for (int y = 0; y < h.h; ++y)
    for (int x = 0; x < h.w; ++x)
      for (int c = 0; c < C; ++c) cached_se_z_[c] += h.at(y, x, c);
  const double inv = 1.0 / (static_cast<double>(h.h) * h.w);
  for (double& x : cached_se_z_) x *= inv;
  cached_se_a_.assign(hidden, 0.0);
  for (int i = 0; i < hidden; ++i)
    for (int c = 0; c < C; ++c)
      cached_se_a_[i] += se_w1.value.at(i, c, 0) * cached_se_z_[c];
  std::vector<double> l(C, 0.0);
  for (int c = 0; c < C; ++c)
    for (int i = 0; i < hidden; ++i)
      l[c] += se_w2.value.at(c, i, 0) * std::max(0.0, cached_se_a_[i]);
  double m = *std::max_element(l.begin(), l.end());
  double denom = 0.0;
  for (double x : l) denom += std::exp(x - m);
  cached_lambda_.resize(C);
  for (int c = 0; c < C; ++c) cached_lambda_[c] = std::exp(l[c] - m) / denom;

  Tensor out = h;
  for (int y = 0; y < h.h; ++y)
    for (int x = 0; x < h.w; ++x)
      for (int c = 0; c < C; ++c)
        out.at(y, x, c) += cached_lambda_[c] * cached_yprime_.at(y, x, c);
  return out;
}

Tensor Gsca::backward(const Tensor& dM) {
  const Tensor& h = cached_h_;
  dM.require_same_shape(h, "Gsca::backward");
  const int C = channels_;
  const int hidden = se_w1.value.h;
  const int cprime = C / groups_;

  Tensor dh = dM;  // residual path

  // channel reweighting: Y_c = lambda_c * Y'_c
  Tensor dyprime(h.h, h.w, C);
  std::vector<double> dlambda(C, 0.0);
  for (int y = 0; y < h.h; ++y)
    for (int x = 0; x < h.w; ++x)
      for (int c = 0; c < C; ++c) {
        const double g = dM.at(y, x, c);
        dyprime.at(y, x, c) = cached_lambda_[c] * g;
        dlambda[c] += g * cached_yprime_.at(y, x, c);
      }

  // SE branch backward
  double lam_dot = 0.0;
  for (int c = 0; c < C; ++c) lam_dot += cached_lambda_[c] * dlambda[c];
  std::vector<double> dl(C);
  for (int c = 0; c < C; ++c)
    dl[c] = cached_lambda_[c] * (dlambda[c] - lam_dot);
  std::vector<double> dr(hidden, 0.0);
  for (int c = 0; c < C; ++c)
    for (int i = 0; i < hidden; ++i) {
      se_w2.grad.at(c, i, 0) += dl[c] * std::max(0.0, cached_se_a_[i]);
      dr[i] += se_w2.value.at(c, i, 0) * dl[c];
    }
  std::vector<double> dz(C, 0.0);
  for (int i = 0; i < hidden; ++i) {
    const double da = cached_se_a_[i] > 0.0 ? dr[i] : 0.0;
    for (int c = 0; c < C; ++c) {
      se_w1.grad.at(i, c, 0) += da * cached_se_z_[c];
      dz[c] += se_w1.value.at(i, c, 0) * da;
    }
  }
  const double inv = 1.0 / (static_cast<double>(h.h) * h.w);
  for (int y = 0; y < h.h; ++y)
    for (int x = 0; x < h.w; ++x)
      for (int c = 0; c < C; ++c) dh.at(y, x, c) += dz[c] * inv;

  // spatial branch backward
  Tensor dattn = out_proj.backward(dyprime);
  Tensor dth(h.h, h.w, C), dph(h.h, h.w, C), dqh(h.h, h.w, C);
  std::vector<double> t, p, val, attn_out, da, dt, dp, dq, row;
  for (int g = 0; g < groups_; ++g) {
    gather_group(cached_th_, g, cprime, &t);
    gather_group(cached_ph_, g, cprime, &p);
    gather_group(cached_qh_, g, cprime, &val);
    gather_group(cached_attn_, g, cprime, &attn_out);
    gather_group(dattn, g, cprime, &da);
    const size_t n = t.size();
    dt.assign(n, 0.0);
    dp.assign(n, 0.0);
    dq.assign(n, 0.0);
    if (normalize) {
      row.resize(n);
      double pmin = p[0], pmax = p[0];
      for (double x : p) {
        pmin = std::min(pmin, x);
        pmax = std::max(pmax, x);
      }
      for (size_t u = 0; u < n; ++u) {
        const double g_u = da[u];
        const double tu = t[u];
        if (g_u == 0.0) continue;
        const double m = tu >= 0.0 ? tu * pmax : tu * pmin;
        double denom = 0.0;
        for (size_t v = 0; v < n; ++v) {
          row[v] = std::exp(tu * p[v] - m);
          denom += row[v];
        }
        const double out_u = attn_out[u];
        double dtu = 0.0;
        for (size_t v = 0; v < n; ++v) {
          const double w = row[v] / denom;
          const double centered = val[v] - out_u;
          dq[v] += g_u * w;
          dtu += g_u * w * centered * p[v];
          dp[v] += g_u * tu * w * centered;
        }
        dt[u] += dtu;
      }
    } else {
      double pq = 0.0, tda = 0.0;
      for (size_t v = 0; v < n; ++v) pq += p[v] * val[v];
      for (size_t u = 0; u < n; ++u) {
        dt[u] += da[u] * pq;
        tda += t[u] * da[u];
      }
      for (size_t v = 0; v < n; ++v) {
        dp[v] += tda * val[v];
        dq[v] += tda * p[v];
      }
    }
    scatter_group(dt, g, cprime, &dth);
    scatter_group(dp, g, cprime, &dph);
    scatter_group(dq, g, cprime, &dqh);
  }
  dh += theta.backward(dth);
  dh += phi.backward(dph);
  dh += q.backward(dqh);
  return dh;
}

std::vector<std::vector<double>> Gsca::spatial_affinity(const Tensor& h,
                                                        int group) const {
  check_input(h);
  if (group < 0 || group >= groups_)
    throw std::invalid_argument("Gsca::spatial_affinity: bad group index");
  // const-friendly transform evaluation (convs cache state on forward)
  Conv2d th_c = theta, ph_c = phi;
  Tensor th = th_c.forward(h);
  Tensor ph = ph_c.forward(h);
  const int cprime = channels_ / groups_;
  std::vector<double> t, p;
  gather_group(th, group, cprime, &t);
  gather_group(ph, group, cprime, &p);
  const size_t n = t.size();
  std::vector<std::vector<double>> aff(n, std::vector<double>(n));
  for (size_t u = 0; u < n; ++u) {
    if (normalize) {
      double m = t[u] * p[0];
      for (size_t v = 1; v < n; ++v) m = std::max(m, t[u] * p[v]);
      double denom = 0.0;
      for (size_t v = 0; v < n; ++v) {
        aff[u][v] = std::exp(t[u] * p[v] - m);
        denom += aff[u][v];
      }
      for (size_t v = 0; v < n; ++v) aff[u][v] /= denom;
    } else {
      for (size_t v = 0; v < n; ++v) aff[u][v] = t[u] * p[v];
    }
  }
  return aff;
}

std::vector<Param*> Gsca::params() {
  std::vector<Param*> out;
  for (Conv2d* c : {&theta, &phi, &q, &out_proj})
    for (Param* p : c->params()) out.push_back(p);
  out.push_back(&se_w1);
  out.push_back(&se_w2);
  return out;
}

uint64_t attention_flops(int h, int w, int c, int groups) {
  if (groups < 1 || c % groups != 0)
    throw std::invalid_argument("attention_flops: invalid groups");
  const uint64_t n = static_cast<uint64_t>(h) * w * c;
  return 2 * n * n / static_cast<uint64_t>(groups);
}

}  // namespace nask
