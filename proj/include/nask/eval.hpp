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

#ifndef NASK_EVAL_HPP_
#define NASK_EVAL_HPP_

#include <vector>

#include "nask/geometry.hpp"

namespace nask {

/// One detected instance; score is the mean text probability over the
/// proposal's support.
struct Detection {
  TextPolygon polygon;
  double score = 0.0;
};

struct MatchResult {
  int tp = 0;
  int fp = 0;
  int fn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double hmean = 0.0;
};

/// area(a intersect b) / area(a union b) via exact polygon clipping.
/// Throws std::invalid_argument on degenerate input.
double polygon_iou(const TextPolygon& a, const TextPolygon& b);

/// Greedy one-to-one matching in descending prediction score; a pair matches
/// iff IoU >= iou_thresh, each ground truth used at most once. Empty
/// prediction sets score precision 0 by convention.
MatchResult evaluate(const std::vector<Detection>& preds,
                     const std::vector<TextPolygon>& gts,
                     double iou_thresh = 0.5);

/// Accumulates per-image counts and finalizes P/R/H once.
MatchResult combine(const std::vector<MatchResult>& per_image);

}  // namespace nask

#endif  // NASK_EVAL_HPP_
