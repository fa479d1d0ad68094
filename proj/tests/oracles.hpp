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
//
// Test-only reference implementations. Everything here recomputes results by
// direct formula evaluation (nested loops, exhaustive sorts, brute-force
// assignment) and stays independent of the library's computation paths.

#ifndef NASK_TESTS_ORACLES_HPP_
#define NASK_TESTS_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <vector>

#include "nask/geometry.hpp"
#include "nask/tensor.hpp"

namespace nask::oracle {

// --- grouped 1x1 transform, explicit loops ---------------------------------

// weight layout matches Conv2d: (out_c, in_per_group, 1); out channel oc
// belongs to group oc / (C/G) and consumes that group's input channels.
inline Tensor grouped_1x1(const Tensor& h, const Tensor& weight, int groups) {
  const int cprime = h.c / groups;
  Tensor out(h.h, h.w, h.c);
  for (int y = 0; y < h.h; ++y)
    for (int x = 0; x < h.w; ++x)
      for (int oc = 0; oc < h.c; ++oc) {
        const int g = oc / cprime;
        double acc = 0.0;
        for (int ic = 0; ic < cprime; ++ic)
          acc += weight.at(oc, ic, 0) * h.at(y, x, g * cprime + ic);
        out.at(y, x, oc) = acc;
      }
  return out;
}

// --- brute-force intra-group attention over all (H*W*C')^2 pairs -----------

// Direct evaluation of the grouped all-pairs weighted sum: for every output
// element u of a group, weights over all elements v of the same group come
// from theta(h)[u] * phi(h)[v], softmax-normalized along v when `normalize`.
inline Tensor attention_bruteforce(const Tensor& th, const Tensor& ph,
                                   const Tensor& qh, int groups,
                                   bool normalize) {
  const int cprime = th.c / groups;
  Tensor out(th.h, th.w, th.c);
  for (int g = 0; g < groups; ++g) {
    for (int uy = 0; uy < th.h; ++uy)
      for (int ux = 0; ux < th.w; ++ux)
        for (int uc = 0; uc < cprime; ++uc) {
          const double tu = th.at(uy, ux, g * cprime + uc);
          double denom = 0.0;
          double acc = 0.0;
          for (int vy = 0; vy < th.h; ++vy)
            for (int vx = 0; vx < th.w; ++vx)
              for (int vc = 0; vc < cprime; ++vc) {
                const double pv = ph.at(vy, vx, g * cprime + vc);
                const double qv = qh.at(vy, vx, g * cprime + vc);
                const double wuv =
                    normalize ? std::exp(tu * pv) : tu * pv;
                denom += wuv;
                acc += wuv * qv;
              }
          out.at(uy, ux, g * cprime + uc) = normalize ? acc / denom : acc;
        }
  }
  return out;
}

// Full spatial branch: theta/phi/q transforms, attention, output projection.
inline Tensor spatial_branch_bruteforce(const Tensor& h, const Tensor& w_theta,
                                        const Tensor& w_phi, const Tensor& w_q,
                                        const Tensor& w_out, int groups,
                                        bool normalize) {
  Tensor th = grouped_1x1(h, w_theta, groups);
  Tensor ph = grouped_1x1(h, w_phi, groups);
  Tensor qh = grouped_1x1(h, w_q, groups);
  Tensor attn = attention_bruteforce(th, ph, qh, groups, normalize);
  return grouped_1x1(attn, w_out, groups);
}

// Squeeze-and-excitation by direct formula: softmax(W2 relu(W1 avgpool(h))).
inline std::vector<double> channel_weights_bruteforce(const Tensor& h,
                                                      const Tensor& w1,
                                                      const Tensor& w2) {
  const int C = h.c;
  const int hidden = w1.h;
  std::vector<double> z(C, 0.0);
  for (int y = 0; y < h.h; ++y)
    for (int x = 0; x < h.w; ++x)
      for (int c = 0; c < C; ++c) z[c] += h.at(y, x, c);
  for (int c = 0; c < C; ++c) z[c] /= static_cast<double>(h.h) * h.w;

  std::vector<double> a(hidden, 0.0);
  for (int i = 0; i < hidden; ++i)
    for (int c = 0; c < C; ++c) a[i] += w1.at(i, c, 0) * z[c];
  for (double& x : a) x = std::max(0.0, x);

  std::vector<double> l(C, 0.0);
  for (int c = 0; c < C; ++c)
    for (int i = 0; i < hidden; ++i) l[c] += w2.at(c, i, 0) * a[i];

  double m = *std::max_element(l.begin(), l.end());
  double denom = 0.0;
  for (double x : l) denom += std::exp(x - m);
  std::vector<double> lam(C);
  for (int c = 0; c < C; ++c) lam[c] = std::exp(l[c] - m) / denom;
  return lam;
}

// --- central finite differences ---------------------------------------------

// Gradient of f() with respect to the entries of x, where f reads x through
// the reference (re-runs the full forward per probe).
inline std::vector<double> fd_gradient(std::vector<double>& x,
                                       const std::function<double()>& f,
                                       double eps = 1e-6) {
  std::vector<double> g(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    const double orig = x[i];
    x[i] = orig + eps;
    const double fp = f();
    x[i] = orig - eps;
    const double fm = f();
    x[i] = orig;
    g[i] = (fp - fm) / (2.0 * eps);
  }
  return g;
}

// Relative error with a floor so near-zero gradients compare absolutely.
inline double grad_rel_error(const std::vector<double>& analytic,
                             const std::vector<double>& numeric) {
  double worst = 0.0;
  for (size_t i = 0; i < analytic.size(); ++i) {
    const double denom =
        std::max({std::abs(analytic[i]), std::abs(numeric[i]), 1e-3});
    worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / denom);
  }
  return worst;
}

// --- bilinear interpolation by direct formula -------------------------------

// Pixel centers at integer coordinates; missing neighbours read as zero.
inline double bilinear_at(const Tensor& m, double x, double y, int ch) {
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const double fx = x - x0;
  const double fy = y - y0;
  auto pix = [&](int yy, int xx) -> double {
    if (yy < 0 || yy >= m.h || xx < 0 || xx >= m.w) return 0.0;
    return m.at(yy, xx, ch);
  };
  return (1 - fy) * ((1 - fx) * pix(y0, x0) + fx * pix(y0, x0 + 1)) +
         fy * ((1 - fx) * pix(y0 + 1, x0) + fx * pix(y0 + 1, x0 + 1));
}

// --- point-in-polygon (ray casting, independent of geometry.cpp) -----------

inline bool point_in_polygon_ray(const std::vector<Point>& poly, Point p,
                                 double boundary_eps = 1e-7) {
  const size_t n = poly.size();
  // boundary proximity counts as inside
  for (size_t i = 0; i < n; ++i) {
    Point a = poly[i], b = poly[(i + 1) % n];
    double vx = b.x - a.x, vy = b.y - a.y;
    double len2 = vx * vx + vy * vy;
    double t = len2 > 0 ? ((p.x - a.x) * vx + (p.y - a.y) * vy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    double dx = p.x - (a.x + t * vx), dy = p.y - (a.y + t * vy);
    if (std::sqrt(dx * dx + dy * dy) <= boundary_eps) return true;
  }
  bool inside = false;
  for (size_t i = 0, j = n - 1; i < n; j = i++) {
    if ((poly[i].y > p.y) != (poly[j].y > p.y)) {
      double xint = poly[j].x + (p.y - poly[j].y) / (poly[i].y - poly[j].y) *
                                    (poly[i].x - poly[j].x);
      if (p.x < xint) inside = !inside;
    }
  }
  return inside;
}

// --- exhaustive OHEM selection ----------------------------------------------

// All positives plus the hardest negatives by per-pixel cross-entropy,
// descending, ties by index; K = max(ratio * #pos, min_kept) capped by #neg.
inline std::vector<size_t> ohem_bruteforce(const Tensor& logits,
                                           const Tensor& mask, double ratio,
                                           int min_kept) {
  const int n = logits.h * logits.w;
  std::vector<size_t> selected;
  std::vector<std::pair<double, size_t>> negatives;
  int positives = 0;
  for (int i = 0; i < n; ++i) {
    const double l0 = logits.v[static_cast<size_t>(i) * 2];
    const double l1 = logits.v[static_cast<size_t>(i) * 2 + 1];
    const double m = std::max(l0, l1);
    const double lse = m + std::log(std::exp(l0 - m) + std::exp(l1 - m));
    const bool pos = mask.v[i] > 0.5;
    const double ce = pos ? lse - l1 : lse - l0;
    if (pos) {
      selected.push_back(i);
      ++positives;
    } else {
      negatives.push_back({ce, static_cast<size_t>(i)});
    }
  }
  std::sort(negatives.begin(), negatives.end(), [](auto& a, auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  size_t keep = static_cast<size_t>(
      std::max(ratio * positives, static_cast<double>(min_kept)));
  keep = std::min(keep, negatives.size());
  for (size_t i = 0; i < keep; ++i) selected.push_back(negatives[i].second);
  std::sort(selected.begin(), selected.end());
  return selected;
}

// --- exhaustive one-to-one assignment ---------------------------------------

// Maximum number of (pred, gt) pairs with iou >= thresh over all injective
// assignments; exponential, for <= ~6x6 cases.
inline int assignment_bruteforce(const std::vector<std::vector<double>>& iou,
                                 double thresh) {
  const int np = static_cast<int>(iou.size());
  const int ng = np ? static_cast<int>(iou[0].size()) : 0;
  std::vector<char> used(ng, 0);
  std::function<int(int)> rec = [&](int p) -> int {
    if (p == np) return 0;
    int best = rec(p + 1);  // leave pred p unmatched
    for (int g = 0; g < ng; ++g) {
      if (!used[g] && iou[p][g] >= thresh) {
        used[g] = 1;
        best = std::max(best, 1 + rec(p + 1));
        used[g] = 0;
      }
    }
    return best;
  };
  return rec(0);
}

}  // namespace nask::oracle

#endif  // NASK_TESTS_ORACLES_HPP_
