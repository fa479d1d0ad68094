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

#include "nask/eval.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include <boost/geometry.hpp>
#include <boost/geometry/geometries/point_xy.hpp>
#include <boost/geometry/geometries/polygon.hpp>

namespace nask {

namespace {

namespace bg = boost::geometry;
using BgPoint = bg::model::d2::point_xy<double>;
using BgPolygon = bg::model::polygon<BgPoint>;

BgPolygon to_bg(const TextPolygon& p) {
  BgPolygon out;
  for (const Point& v : p.vertices)
    bg::append(out.outer(), BgPoint(v.x, v.y));
  bg::correct(out);  // closes the ring and fixes orientation
  return out;
}

}  // namespace

double polygon_iou(const TextPolygon& a, const TextPolygon& b) {
  if (a.vertices.size() < 3 || b.vertices.size() < 3)
    throw std::invalid_argument("polygon_iou: degenerate polygon");
  const BgPolygon pa = to_bg(a), pb = to_bg(b);
  const double area_a = bg::area(pa);
  const double area_b = bg::area(pb);
  if (area_a <= 0.0 || area_b <= 0.0)
    throw std::invalid_argument("polygon_iou: zero-area polygon");
  std::vector<BgPolygon> inter;
  bg::intersection(pa, pb, inter);
  double ia = 0.0;
  for (const BgPolygon& p : inter) ia += bg::area(p);
  const double ua = area_a + area_b - ia;
  return ua > 0.0 ? std::clamp(ia / ua, 0.0, 1.0) : 0.0;
}

MatchResult evaluate(const std::vector<Detection>& preds,
                     const std::vector<TextPolygon>& gts, double iou_thresh) {
  if (iou_thresh <= 0.0 || iou_thresh >= 1.0)
    throw std::invalid_argument("evaluate: threshold must be in (0,1)");
  std::vector<size_t> order(preds.size());
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(), [&](size_t i, size_t j) {
    return preds[i].score > preds[j].score;
  });

  MatchResult r;
  std::vector<char> gt_used(gts.size(), 0);
  for (size_t oi : order) {
    double best = 0.0;
    int best_gt = -1;
    for (size_t g = 0; g < gts.size(); ++g) {
      if (gt_used[g]) continue;
      const double iou = polygon_iou(preds[oi].polygon, gts[g]);
      if (iou >= iou_thresh && iou > best) {
        best = iou;
        best_gt = static_cast<int>(g);
      }
    }
    if (best_gt >= 0) {
      gt_used[best_gt] = 1;
      ++r.tp;
    } else {
      ++r.fp;
    }
  }
  r.fn = static_cast<int>(gts.size()) - r.tp;
  r.precision = preds.empty() ? 0.0 : static_cast<double>(r.tp) / preds.size();
  r.recall = gts.empty() ? 0.0 : static_cast<double>(r.tp) / gts.size();
  r.hmean = (r.precision + r.recall) > 0.0
                ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
                : 0.0;
  return r;
}

MatchResult combine(const std::vector<MatchResult>& per_image) {
  MatchResult r;
  for (const MatchResult& m : per_image) {
    r.tp += m.tp;
    r.fp += m.fp;
    r.fn += m.fn;
  }
  const int npred = r.tp + r.fp;
  const int ngt = r.tp + r.fn;
  r.precision = npred ? static_cast<double>(r.tp) / npred : 0.0;
  r.recall = ngt ? static_cast<double>(r.tp) / ngt : 0.0;
  r.hmean = (r.precision + r.recall) > 0.0
                ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
                : 0.0;
  return r;
}

}  // namespace nask
