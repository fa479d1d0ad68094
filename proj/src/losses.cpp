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

#include "nask/losses.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace nask {

namespace {

// per-pixel softmax cross-entropy of a 2-class logit pair
double pixel_ce(double l0, double l1, bool positive, double* p0 = nullptr,
                double* p1 = nullptr) {
  const double m = std::max(l0, l1);
  const double e0 = std::exp(l0 - m), e1 = std::exp(l1 - m);
  const double z = e0 + e1;
  if (p0) *p0 = e0 / z;
  if (p1) *p1 = e1 / z;
  const double lse = m + std::log(z);
  return positive ? lse - l1 : lse - l0;
}

}  // namespace

std::vector<size_t> ohem_select(const Tensor& pred_logits,
                                const Tensor& gt_mask, const OhemConfig& cfg) {
  const size_t n = static_cast<size_t>(pred_logits.h) * pred_logits.w;
  std::vector<size_t> selected;
  if (!cfg.enabled) {
    selected.resize(n);
    for (size_t i = 0; i < n; ++i) selected[i] = i;
    return selected;
  }
  std::vector<std::pair<double, size_t>> negatives;
  int positives = 0;
  for (size_t i = 0; i < n; ++i) {
    const bool pos = gt_mask.v[i] > 0.5;
    const double ce =
        pixel_ce(pred_logits.v[i * 2], pred_logits.v[i * 2 + 1], pos);
    if (pos) {
      selected.push_back(i);
      ++positives;
    } else {
      negatives.push_back({ce, i});
    }
  }
  std::sort(negatives.begin(), negatives.end(), [](auto& a, auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;  // deterministic tie-break
  });
  size_t keep = static_cast<size_t>(std::max(
      cfg.neg_pos_ratio * positives, static_cast<double>(cfg.min_kept)));
  keep = std::min(keep, negatives.size());
  for (size_t i = 0; i < keep; ++i) selected.push_back(negatives[i].second);
  std::sort(selected.begin(), selected.end());
  return selected;
}

double loss_tis(const Tensor& pred_logits, const Tensor& gt_mask,
                const OhemConfig& cfg, Tensor* dlogits) {
  if (pred_logits.c != 2)
    throw std::invalid_argument("loss_tis: expected 2-channel logits");
  if (pred_logits.h != gt_mask.h || pred_logits.w != gt_mask.w)
    throw std::invalid_argument("loss_tis: logits/mask shape mismatch");
  const std::vector<size_t> sel = ohem_select(pred_logits, gt_mask, cfg);
  if (dlogits) *dlogits = Tensor(pred_logits.h, pred_logits.w, 2);
  if (sel.empty()) return 0.0;
  const double inv = 1.0 / static_cast<double>(sel.size());
  double total = 0.0;
  for (size_t i : sel) {
    const bool pos = gt_mask.v[i] > 0.5;
    double p0, p1;
    total +=
        pixel_ce(pred_logits.v[i * 2], pred_logits.v[i * 2 + 1], pos, &p0, &p1);
    if (dlogits) {
      dlogits->v[i * 2] = inv * (p0 - (pos ? 0.0 : 1.0));
      dlogits->v[i * 2 + 1] = inv * (p1 - (pos ? 1.0 : 0.0));
    }
  }
  return total * inv;
}

double loss_align(const SamplingGrid& warped, const SamplingGrid& targets,
                  Tensor* dwarped) {
  warped.points.require_same_shape(targets.points, "loss_align");
  const size_t n = warped.points.v.size();  // 2 coords per point
  if (n == 0) throw std::invalid_argument("loss_align: empty grids");
  if (dwarped) *dwarped = Tensor(warped.points.h, warped.points.w, 2);
  const double inv = 1.0 / static_cast<double>(n);
  double total = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double d = warped.points.v[i] - targets.points.v[i];
    total += std::abs(d);
    if (dwarped) dwarped->v[i] = inv * (d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0));
  }
  return total * inv;
}

double smoothed_l1(double x) {
  const double a = std::abs(x);
  return a < 1.0 ? 0.5 * x * x : a - 0.5;
}

double smoothed_l1_grad(double x) {
  if (x >= 1.0) return 1.0;
  if (x <= -1.0) return -1.0;
  return x;
}

double loss_fox(const Tensor& pred_raw, const GeometryLabels& gt,
                const LossWeights& w, Tensor* dpred, double scale_eps) {
  const Tensor& gtm = gt.maps.maps;
  if (pred_raw.c != 6)
    throw std::invalid_argument("loss_fox: expected 6-channel prediction");
  pred_raw.require_same_shape(gtm, "loss_fox");
  if (dpred) *dpred = Tensor(pred_raw.h, pred_raw.w, 6);

  const size_t npix = static_cast<size_t>(pred_raw.h) * pred_raw.w;
  const double inv_all = 1.0 / static_cast<double>(npix);

  // TCL classification: binary CE with logits over all pixels
  double l_tcl = 0.0;
  for (int y = 0; y < pred_raw.h; ++y)
    for (int x = 0; x < pred_raw.w; ++x) {
      const double logit = pred_raw.at(y, x, kGeoTcl);
      const double label = gtm.at(y, x, kGeoTcl) > 0.5 ? 1.0 : 0.0;
      // stable log(1 + exp(-|l|)) formulation
      const double abs_l = std::abs(logit);
      l_tcl += std::max(logit, 0.0) - logit * label + std::log1p(std::exp(-abs_l));
      if (dpred) {
        const double sig = 1.0 / (1.0 + std::exp(-logit));
        dpred->at(y, x, kGeoTcl) = w.lambda[0] * inv_all * (sig - label);
      }
    }
  l_tcl *= inv_all;

  // regression terms on TCL pixels only
  double l_reg[5] = {0, 0, 0, 0, 0};  // s, sin t, cos t, sin p, cos p
  const size_t ntcl = gt.tcl.size();
  static bool warned_clamp = false;
  if (ntcl > 0) {
    const double inv_tcl = 1.0 / static_cast<double>(ntcl);
    for (const auto& [px, py] : gt.tcl) {
      double s_gt = gtm.at(py, px, kGeoScale);
      if (s_gt <= scale_eps) {
        if (!warned_clamp) {
          std::fprintf(stderr,
                       "loss_fox: ground-truth scale %.3g clamped to %.3g\n",
                       s_gt, scale_eps);
          warned_clamp = true;
        }
        s_gt = scale_eps;
      }
      const double rs = (pred_raw.at(py, px, kGeoScale) - s_gt) / s_gt;
      const int chans[4] = {kGeoSinT, kGeoCosT, kGeoSinP, kGeoCosP};
      l_reg[0] += smoothed_l1(rs);
      if (dpred)
        dpred->at(py, px, kGeoScale) +=
            w.lambda[1] * inv_tcl * smoothed_l1_grad(rs) / s_gt;
      for (int t = 0; t < 4; ++t) {
        const double r = pred_raw.at(py, px, chans[t]) - gtm.at(py, px, chans[t]);
        l_reg[1 + t] += smoothed_l1(r);
        if (dpred)
          dpred->at(py, px, chans[t]) +=
              w.lambda[2 + t] * inv_tcl * smoothed_l1_grad(r);
      }
    }
    for (double& l : l_reg) l *= inv_tcl;
  }

  return w.lambda[0] * l_tcl + w.lambda[1] * l_reg[0] + w.lambda[2] * l_reg[1] +
         w.lambda[3] * l_reg[2] + w.lambda[4] * l_reg[3] + w.lambda[5] * l_reg[4];
}

double loss_total(double l_tis, double l_align, double l_fox,
                  const LossWeights& w) {
  return l_tis + w.alpha * l_align + w.beta * l_fox;
}

}  // namespace nask
