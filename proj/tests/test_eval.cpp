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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "nask/eval.hpp"
#include "nask/rng.hpp"
#include "oracles.hpp"

using namespace nask;

namespace {

TextPolygon square(double x, double y, double side) {
  return {{{x, y}, {x + side, y}, {x + side, y + side}, {x, y + side}}};
}

TextPolygon random_convex(Rng& rng) {
  // random points on a circle, sorted by angle
  const Point c{rng.uniform(5, 25), rng.uniform(5, 25)};
  const double r = rng.uniform(2, 8);
  std::vector<double> angles;
  const int n = rng.uniform_int(3, 8);
  for (int i = 0; i < n; ++i) angles.push_back(rng.uniform(0, 2 * M_PI));
  std::sort(angles.begin(), angles.end());
  TextPolygon p;
  for (double a : angles)
    p.vertices.push_back({c.x + r * std::cos(a), c.y + r * std::sin(a)});
  if (!is_simple(p)) return square(c.x, c.y, r);
  return p;
}

}  // namespace

TEST_CASE("IoU basics: identical, disjoint, half overlap") {
  TextPolygon a = square(0, 0, 1);
  CHECK(polygon_iou(a, a) == doctest::Approx(1.0));
  CHECK(polygon_iou(a, square(5, 5, 1)) == doctest::Approx(0.0));
  // two unit squares overlapping half their area: I=0.5, U=1.5
  CHECK(polygon_iou(a, square(0.5, 0, 1)) ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-9));
}

TEST_CASE("IoU rejects degenerate polygons") {
  TextPolygon degenerate;
  degenerate.vertices = {{0, 0}, {1, 1}};
  CHECK_THROWS_AS(polygon_iou(degenerate, square(0, 0, 1)),
                  std::invalid_argument);
  TextPolygon zero_area;
  zero_area.vertices = {{0, 0}, {1, 0}, {2, 0}};
  CHECK_THROWS_AS(polygon_iou(zero_area, square(0, 0, 1)),
                  std::invalid_argument);
}

TEST_CASE("IoU is symmetric and bounded on random convex pairs") {
  Rng rng(71);
  for (int i = 0; i < 40; ++i) {
    TextPolygon a = random_convex(rng);
    TextPolygon b = random_convex(rng);
    const double ab = polygon_iou(a, b);
    const double ba = polygon_iou(b, a);
    CHECK(ab == doctest::Approx(ba).epsilon(1e-9));
    CHECK(ab >= 0.0);
    CHECK(ab <= 1.0);
  }
}

TEST_CASE("matching: exact single match gives P=R=H=1") {
  std::vector<Detection> preds{{square(0, 0, 4), 0.9}};
  std::vector<TextPolygon> gts{square(0, 0, 4)};
  MatchResult r = evaluate(preds, gts, 0.5);
  CHECK(r.tp == 1);
  CHECK(r.precision == doctest::Approx(1.0));
  CHECK(r.recall == doctest::Approx(1.0));
  CHECK(r.hmean == doctest::Approx(1.0));
}

TEST_CASE("matching: no predictions against 3 ground truths") {
  std::vector<TextPolygon> gts{square(0, 0, 2), square(5, 0, 2),
                               square(10, 0, 2)};
  MatchResult r = evaluate({}, gts, 0.5);
  CHECK(r.tp == 0);
  CHECK(r.fn == 3);
  CHECK(r.precision == 0.0);  // empty-prediction convention
  CHECK(r.recall == 0.0);
  CHECK(r.hmean == 0.0);
}

TEST_CASE("matching: 5x5 case agrees with the exhaustive assignment oracle") {
  // five gts in a row; five predictions with varying offsets and scores,
  // generic positions so greedy and optimal agree
  std::vector<TextPolygon> gts;
  for (int i = 0; i < 5; ++i) gts.push_back(square(10.0 * i, 0, 4));
  std::vector<Detection> preds;
  const double offs[5] = {0.4, 1.1, 0.2, 5.0, 1.8};
  const double scores[5] = {0.95, 0.7, 0.9, 0.8, 0.6};
  for (int i = 0; i < 5; ++i)
    preds.push_back({square(10.0 * i + offs[i], 0.3, 4), scores[i]});

  std::vector<std::vector<double>> iou(5, std::vector<double>(5));
  for (int p = 0; p < 5; ++p)
    for (int g = 0; g < 5; ++g)
      iou[p][g] = polygon_iou(preds[p].polygon, gts[g]);

  MatchResult r = evaluate(preds, gts, 0.5);
  CHECK(r.tp == oracle::assignment_bruteforce(iou, 0.5));
  CHECK(r.tp + r.fn == 5);
  CHECK(r.tp + r.fp == 5);
}

TEST_CASE("matching is invariant under prediction reordering") {
  Rng rng(72);
  std::vector<TextPolygon> gts;
  for (int i = 0; i < 4; ++i) gts.push_back(square(8.0 * i, 0, 4));
  std::vector<Detection> preds;
  for (int i = 0; i < 6; ++i)
    preds.push_back(
        {square(rng.uniform(0, 30), rng.uniform(-1, 1), 4),
         0.1 * i + 0.3});  // distinct scores
  MatchResult base = evaluate(preds, gts, 0.5);
  for (int trial = 0; trial < 5; ++trial) {
    for (size_t i = preds.size() - 1; i > 0; --i)
      std::swap(preds[i], preds[rng.uniform_int(0, (int)i)]);
    MatchResult r = evaluate(preds, gts, 0.5);
    CHECK(r.tp == base.tp);
    CHECK(r.fp == base.fp);
    CHECK(r.fn == base.fn);
  }
}

TEST_CASE("count identities and combine") {
  std::vector<TextPolygon> gts{square(0, 0, 4), square(10, 0, 4)};
  std::vector<Detection> preds{{square(0.2, 0, 4), 0.9},
                               {square(20, 0, 4), 0.8},
                               {square(30, 0, 4), 0.7}};
  MatchResult r = evaluate(preds, gts, 0.5);
  CHECK(r.tp + r.fn == (int)gts.size());
  CHECK(r.tp + r.fp == (int)preds.size());

  MatchResult all = combine({r, r});
  CHECK(all.tp == 2 * r.tp);
  CHECK(all.fp == 2 * r.fp);
  CHECK(all.precision == doctest::Approx(r.precision));
}
