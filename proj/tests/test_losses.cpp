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

#include <cmath>

#include "nask/losses.hpp"
#include "nask/rng.hpp"
#include "oracles.hpp"

using namespace nask;

namespace {

Tensor random_tensor(int h, int w, int c, Rng& rng, double lo = -1.0,
                     double hi = 1.0) {
  Tensor t(h, w, c);
  for (double& v : t.v) v = rng.uniform(lo, hi);
  return t;
}

GeometryLabels make_labels(int h, int w, Rng& rng, double tcl_fraction = 0.3) {
  GeometryLabels gt;
  gt.maps.maps = Tensor(h, w, 6);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (rng.uniform() < tcl_fraction) {
        gt.tcl.push_back({x, y});
        gt.maps.maps.at(y, x, kGeoTcl) = 1.0;
        gt.maps.maps.at(y, x, kGeoScale) = rng.uniform(1.0, 6.0);
        const double t = rng.uniform(-M_PI, M_PI);
        const double p = rng.uniform(-M_PI, M_PI);
        gt.maps.maps.at(y, x, kGeoCosT) = std::cos(t);
        gt.maps.maps.at(y, x, kGeoSinT) = std::sin(t);
        gt.maps.maps.at(y, x, kGeoCosP) = std::cos(p);
        gt.maps.maps.at(y, x, kGeoSinP) = std::sin(p);
      }
    }
  return gt;
}

}  // namespace

TEST_CASE("saturated-correct logits give near-zero TIS loss") {
  Tensor logits(4, 4, 2);
  Tensor mask(4, 4, 1);
  Rng rng(41);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) {
      const bool pos = rng.uniform() < 0.5;
      mask.at(y, x, 0) = pos ? 1.0 : 0.0;
      logits.at(y, x, 0) = pos ? -10.0 : 10.0;  // margin 20
      logits.at(y, x, 1) = pos ? 10.0 : -10.0;
    }
  CHECK(loss_tis(logits, mask, OhemConfig{}) < 1e-6);
}

TEST_CASE("uniform zero logits give ln 2 regardless of the mask") {
  Tensor logits(5, 3, 2);
  for (int trial = 0; trial < 4; ++trial) {
    Rng rng(50 + trial);
    Tensor mask(5, 3, 1);
    for (double& v : mask.v) v = rng.uniform() < 0.5 ? 1.0 : 0.0;
    CHECK(loss_tis(logits, mask, OhemConfig{}) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-9));
  }
}

TEST_CASE("OHEM selection equals the exhaustive sort oracle (4x4, 2 pos)") {
  Rng rng(42);
  Tensor logits = random_tensor(4, 4, 2, rng, -2.0, 2.0);
  Tensor mask(4, 4, 1);
  mask.at(0, 1, 0) = 1.0;
  mask.at(2, 3, 0) = 1.0;
  OhemConfig cfg;
  cfg.neg_pos_ratio = 3.0;
  cfg.min_kept = 0;
  auto got = ohem_select(logits, mask, cfg);
  auto expected = oracle::ohem_bruteforce(logits, mask, 3.0, 0);
  CHECK(got == expected);
  CHECK(got.size() == 8);  // 2 positives + 6 hardest negatives
}

TEST_CASE("OHEM matches the oracle on random maps up to 64 pixels") {
  Rng rng(43);
  for (int trial = 0; trial < 20; ++trial) {
    const int h = 2 + trial % 7, w = 2 + (trial * 3) % 8;
    Tensor logits = random_tensor(h, w, 2, rng, -3.0, 3.0);
    Tensor mask(h, w, 1);
    for (double& v : mask.v) v = rng.uniform() < 0.3 ? 1.0 : 0.0;
    OhemConfig cfg;
    cfg.min_kept = trial % 2 ? 16 : 4;
    CHECK(ohem_select(logits, mask, cfg) ==
          oracle::ohem_bruteforce(logits, mask, cfg.neg_pos_ratio,
                                  cfg.min_kept));
  }
}

TEST_CASE("warp loss: zero at equality, 0.5 for a constant (1,0) offset") {
  Rng rng(44);
  SamplingGrid a, b;
  a.points = random_tensor(4, 6, 2, rng, 0.0, 20.0);
  b.points = a.points;
  CHECK(loss_align(a, b) == doctest::Approx(0.0));

  for (int gy = 0; gy < 4; ++gy)
    for (int gx = 0; gx < 6; ++gx) b.points.at(gy, gx, 0) += 1.0;
  CHECK(loss_align(a, b) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("warp loss matches a direct summation oracle on random grids") {
  Rng rng(45);
  SamplingGrid a, b;
  a.points = random_tensor(3, 5, 2, rng, -4.0, 4.0);
  b.points = random_tensor(3, 5, 2, rng, -4.0, 4.0);
  double total = 0.0;
  for (size_t i = 0; i < a.points.v.size(); ++i)
    total += std::abs(a.points.v[i] - b.points.v[i]);
  total /= static_cast<double>(a.points.v.size());
  CHECK(loss_align(a, b) == doctest::Approx(total).epsilon(1e-9));
}

TEST_CASE("smoothed L1 piecewise values") {
  CHECK(smoothed_l1(0.5) == doctest::Approx(0.125));
  CHECK(smoothed_l1(2.0) == doctest::Approx(1.5));
  CHECK(smoothed_l1(-2.0) == doctest::Approx(1.5));
  CHECK(smoothed_l1(0.0) == doctest::Approx(0.0));
}

TEST_CASE("FOX loss: all regression terms exactly zero at ground truth") {
  Rng rng(46);
  GeometryLabels gt = make_labels(6, 8, rng);
  Tensor pred = gt.maps.maps;  // predictions equal ground truth
  LossWeights w;
  // isolate the five smoothed-L1 terms by zeroing the tcl weight
  w.lambda[0] = 0.0;
  CHECK(loss_fox(pred, gt, w) == 0.0);
}

TEST_CASE("FOX loss scale term uses relative error: s_hat=3, s=2 -> 0.125") {
  GeometryLabels gt;
  gt.maps.maps = Tensor(1, 1, 6);
  gt.maps.maps.at(0, 0, kGeoTcl) = 1.0;
  gt.maps.maps.at(0, 0, kGeoScale) = 2.0;
  gt.maps.maps.at(0, 0, kGeoCosT) = 1.0;
  gt.maps.maps.at(0, 0, kGeoCosP) = 1.0;
  gt.tcl = {{0, 0}};
  Tensor pred = gt.maps.maps;
  pred.at(0, 0, kGeoScale) = 3.0;  // residual (3-2)/2 = 0.5
  LossWeights w;
  w.lambda[0] = 0.0;
  CHECK(loss_fox(pred, gt, w) == doctest::Approx(0.125).epsilon(1e-12));
}

TEST_CASE("FOX loss is homogeneous in the lambda weights") {
  Rng rng(47);
  GeometryLabels gt = make_labels(5, 7, rng);
  Tensor pred = random_tensor(5, 7, 6, rng, -2.0, 2.0);
  LossWeights w;
  const double base = loss_fox(pred, gt, w);
  LossWeights w3 = w;
  for (double& l : w3.lambda) l *= 3.0;
  CHECK(loss_fox(pred, gt, w3) == doctest::Approx(3.0 * base).epsilon(1e-12));
}

TEST_CASE("total loss: weighted sum and ablation by weight zeroing") {
  LossWeights w;
  CHECK(loss_total(1.0, 2.0, 3.0, w) == doctest::Approx(6.0));
  w.alpha = 0.0;
  CHECK(loss_total(1.0, 2.0, 3.0, w) == doctest::Approx(4.0));
  LossWeights defaults;
  CHECK(defaults.alpha == 1.0);
  CHECK(defaults.beta == 1.0);
  for (double l : defaults.lambda) CHECK(l == 1.0);
}

TEST_CASE("loss gradients match finite differences") {
  Rng rng(48);

  SUBCASE("tis") {
    Tensor logits = random_tensor(4, 5, 2, rng, -2.0, 2.0);
    Tensor mask(4, 5, 1);
    for (double& v : mask.v) v = rng.uniform() < 0.4 ? 1.0 : 0.0;
    OhemConfig cfg;
    Tensor dlogits;
    loss_tis(logits, mask, cfg, &dlogits);
    auto fd = oracle::fd_gradient(
        logits.v, [&]() { return loss_tis(logits, mask, cfg); });
    CHECK(oracle::grad_rel_error(dlogits.v, fd) < 1e-4);
  }

  SUBCASE("align") {
    SamplingGrid a, b;
    a.points = random_tensor(3, 4, 2, rng, -3.0, 3.0);
    b.points = random_tensor(3, 4, 2, rng, -3.0, 3.0);
    Tensor da;
    loss_align(a, b, &da);
    auto fd = oracle::fd_gradient(a.points.v,
                                  [&]() { return loss_align(a, b); });
    CHECK(oracle::grad_rel_error(da.v, fd) < 1e-4);
  }

  SUBCASE("fox") {
    GeometryLabels gt = make_labels(4, 6, rng);
    // keep residuals away from the |x| = 1 kink
    Tensor pred = gt.maps.maps;
    for (int y = 0; y < 4; ++y)
      for (int x = 0; x < 6; ++x)
        for (int c = 0; c < 6; ++c)
          pred.at(y, x, c) += (c == kGeoTcl) ? rng.uniform(-1.0, 1.0)
                                             : 0.3 * rng.uniform(-1.0, 1.0);
    LossWeights w;
    Tensor dpred;
    loss_fox(pred, gt, w, &dpred);
    auto fd =
        oracle::fd_gradient(pred.v, [&]() { return loss_fox(pred, gt, w); });
    CHECK(oracle::grad_rel_error(dpred.v, fd) < 1e-4);
  }
}

TEST_CASE("losses are non-negative and reject mismatched shapes") {
  Rng rng(49);
  Tensor logits = random_tensor(3, 3, 2, rng);
  Tensor mask(3, 4, 1);
  CHECK_THROWS_AS(loss_tis(logits, mask, OhemConfig{}), std::invalid_argument);

  SamplingGrid a, b;
  a.points = random_tensor(2, 2, 2, rng);
  b.points = random_tensor(2, 3, 2, rng);
  CHECK_THROWS_AS(loss_align(a, b), std::invalid_argument);

  GeometryLabels gt = make_labels(3, 3, rng);
  Tensor pred = random_tensor(3, 3, 6, rng, -2.0, 2.0);
  CHECK(loss_fox(pred, gt, LossWeights{}) >= 0.0);
}
