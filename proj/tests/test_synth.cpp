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
#include <cstdio>
#include <filesystem>

#include "nask/fox.hpp"
#include "nask/synth.hpp"

using namespace nask;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("nask_synth_" + std::to_string(::getpid()) + "_" +
            std::to_string(rand()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("line family with zero shear: theta 0, phi pi/2 on every character") {
  SynthSpec spec;
  spec.families = {CurveFamily::kLine};
  spec.seed = 100;
  for (int idx = 0; idx < 4; ++idx) {
    SynthInstance inst = render(spec, idx);
    REQUIRE(!inst.words.empty());
    for (const SynthWord& w : inst.words)
      for (const CharacterSegment& s : w.segments) {
        CHECK(std::abs(s.text_orientation) < 1e-9);
        CHECK(s.char_orientation == doctest::Approx(M_PI / 2).epsilon(1e-9));
      }
  }
}

TEST_CASE("rendering is deterministic per (seed, index)") {
  SynthSpec spec;
  spec.seed = 101;
  spec.words_max = 2;
  spec.distractors_max = 3;
  spec.noise_level = 0.02;
  const SynthInstance a = render(spec, 7);
  const SynthInstance b = render(spec, 7);
  REQUIRE(a.image.v.size() == b.image.v.size());
  CHECK(a.image.v == b.image.v);
  REQUIRE(a.words.size() == b.words.size());
  for (size_t i = 0; i < a.words.size(); ++i) {
    const auto& pa = a.words[i].geometry.word_polygon.vertices;
    const auto& pb = b.words[i].geometry.word_polygon.vertices;
    REQUIRE(pa.size() == pb.size());
    for (size_t j = 0; j < pa.size(); ++j) CHECK(dist(pa[j], pb[j]) == 0.0);
  }
  // a different index draws a different sample
  const SynthInstance c = render(spec, 8);
  CHECK(a.image.v != c.image.v);
}

TEST_CASE("arc family: per-character theta tracks the analytic tangent") {
  SynthSpec spec;
  spec.families = {CurveFamily::kArc};
  spec.seed = 102;
  spec.char_count_min = 8;
  spec.char_count_max = 8;
  spec.char_height_min = 7.0;
  spec.char_height_max = 9.0;
  spec.arc_radius_min = 60.0;
  spec.arc_radius_max = 60.0;
  spec.image_w = 160;
  spec.image_h = 140;
  SynthInstance inst = render(spec, 0);
  REQUIRE(!inst.words.empty());
  const SynthWord& w = inst.words[0];
  REQUIRE(w.segments.size() == 8);
  // the tangent at c_i equals the chord direction rotated by half the
  // spacing-subtended angle; with ~5px spacing on R=60 both stay within 0.05
  for (size_t i = 0; i + 1 < w.segments.size(); ++i) {
    const Point a = w.segments[i].center;
    const Point b = w.segments[i + 1].center;
    const double chord = std::atan2(-(b.y - a.y), b.x - a.x);
    // analytic tangent at c_i on a circle: chord direction minus half the
    // subtended angle (sign depends on bend)
    const double half_subtended = dist(a, b) / (2.0 * 60.0);
    const double lo = chord - half_subtended - 0.002;
    const double hi = chord + half_subtended + 0.002;
    CHECK(w.segments[i].text_orientation >= lo);
    CHECK(w.segments[i].text_orientation <= hi);
    CHECK(std::abs(w.segments[i].text_orientation - chord) < 0.05);
  }
}

TEST_CASE("stored attributes equal those derived from the quads") {
  SynthSpec spec;
  spec.seed = 103;
  spec.shear_min = -0.3;
  spec.shear_max = 0.3;
  for (int idx = 0; idx < 5; ++idx) {
    SynthInstance inst = render(spec, idx);
    for (const SynthWord& w : inst.words) {
      const auto derived = derive_segments(w.geometry);
      REQUIRE(derived.size() == w.segments.size());
      for (size_t i = 0; i < derived.size(); ++i) {
        CHECK(dist(derived[i].center, w.segments[i].center) < 1e-6);
        CHECK(std::abs(derived[i].scale - w.segments[i].scale) < 1e-6);
        CHECK(std::abs(derived[i].char_orientation -
                       w.segments[i].char_orientation) < 1e-6);
        CHECK(std::abs(derived[i].text_orientation -
                       w.segments[i].text_orientation) < 1e-6);
      }
    }
  }
}

TEST_CASE("characters stay inside the word polygon; words inside the image") {
  SynthSpec spec;
  spec.seed = 104;
  spec.shear_min = -0.25;
  spec.shear_max = 0.25;
  for (int idx = 0; idx < 6; ++idx) {
    SynthInstance inst = render(spec, idx);
    for (const SynthWord& w : inst.words) {
      for (const CharQuad& q : w.geometry.char_quads)
        for (const Point& p : q)
          CHECK(point_in_polygon(w.geometry.word_polygon, p, 1e-6));
      for (const Point& p : w.geometry.word_polygon.vertices) {
        CHECK(p.x >= 0.0);
        CHECK(p.x <= spec.image_w);
        CHECK(p.y >= 0.0);
        CHECK(p.y <= spec.image_h);
      }
    }
  }
}

TEST_CASE("dataset write/read round trip") {
  TempDir tmp;
  SynthSpec spec;
  spec.seed = 105;
  spec.words_max = 2;
  write_dataset(spec, 5, tmp.path.string());
  auto samples = read_dataset(tmp.path.string());
  REQUIRE(samples.size() == 5);
  for (int i = 0; i < 5; ++i) {
    const SynthInstance inst = render(spec, i);
    CHECK(samples[i].image.v == inst.image.v);  // lossless image format
    REQUIRE(samples[i].instances.size() == inst.words.size());
    for (size_t wi = 0; wi < inst.words.size(); ++wi) {
      const auto& got = samples[i].instances[wi];
      const auto& want = inst.words[wi].geometry;
      REQUIRE(got.word_polygon.vertices.size() ==
              want.word_polygon.vertices.size());
      for (size_t j = 0; j < got.word_polygon.vertices.size(); ++j)
        CHECK(dist(got.word_polygon.vertices[j],
                   want.word_polygon.vertices[j]) == 0.0);  // exact decimals
      REQUIRE(got.char_quads.size() == want.char_quads.size());
      for (size_t j = 0; j < got.char_quads.size(); ++j)
        for (int corner = 0; corner < 4; ++corner)
          CHECK(dist(got.char_quads[j][corner], want.char_quads[j][corner]) ==
                0.0);
    }
  }
}

TEST_CASE("identical seeds produce identical dataset directories") {
  TempDir a, b;
  SynthSpec spec;
  spec.seed = 106;
  write_dataset(spec, 3, a.path.string());
  write_dataset(spec, 3, b.path.string());
  for (const char* sub : {"gt", "chars"}) {
    for (const auto& e : fs::directory_iterator(a.path / sub)) {
      std::ifstream fa(e.path());
      std::ifstream fb(b.path / sub / e.path().filename());
      std::string sa((std::istreambuf_iterator<char>(fa)),
                     std::istreambuf_iterator<char>());
      std::string sb((std::istreambuf_iterator<char>(fb)),
                     std::istreambuf_iterator<char>());
      CHECK(sa == sb);
    }
  }
}

TEST_CASE("CTW-style 14-point export matches the source within 0.5 px") {
  SynthSpec spec;
  spec.seed = 107;
  SynthInstance inst = render(spec, 2);
  const TextPolygon& poly = inst.words[0].geometry.word_polygon;
  TextPolygon ctw = polygon_to_ctw14(poly);
  REQUIRE(ctw.vertices.size() == 14);
  // every resampled vertex lies on (or within resampling tolerance of) the
  // source boundary
  for (const Point& p : ctw.vertices)
    CHECK(distance_to_boundary(poly, p) <= 0.5);

  // verbatim export is a pass-through
  TempDir tmp;
  write_dataset(spec, 1, tmp.path.string(), AnnotationStyle::kVerbatim);
  auto samples = read_dataset(tmp.path.string());
  CHECK(samples[0].instances[0].word_polygon.vertices.size() ==
        poly.vertices.size());
}

TEST_CASE("CTW-style dataset reimports within tolerance") {
  TempDir tmp;
  SynthSpec spec;
  spec.seed = 108;
  write_dataset(spec, 2, tmp.path.string(), AnnotationStyle::kCtw14);
  auto samples = read_dataset(tmp.path.string());
  for (size_t i = 0; i < samples.size(); ++i) {
    const SynthInstance inst = render(spec, (int)i);
    for (size_t wi = 0; wi < samples[i].instances.size(); ++wi) {
      const TextPolygon& got = samples[i].instances[wi].word_polygon;
      REQUIRE(got.vertices.size() == 14);
      for (const Point& p : got.vertices)
        CHECK(distance_to_boundary(inst.words[wi].geometry.word_polygon, p) <=
              0.5);
    }
  }
}

TEST_CASE("malformed annotation lines report the line number") {
  TempDir tmp;
  fs::create_directories(tmp.path / "gt");
  fs::create_directories(tmp.path / "images");
  SynthSpec spec;
  spec.seed = 109;
  save_image_gray((tmp.path / "images" / "0000.png").string(),
                  render(spec, 0).image);
  std::ofstream gt(tmp.path / "gt" / "0000.txt");
  gt << "1,2,3,4,5,6,7,8\n";
  gt << "not,a,number\n";
  gt.close();
  try {
    read_dataset(tmp.path.string());
    FAIL("expected a parse error");
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find(":2") != std::string::npos);
  }
}

TEST_CASE("coverage: families and shear range are exercised over many draws") {
  SynthSpec spec;
  spec.seed = 110;
  spec.image_w = 96;
  spec.image_h = 72;
  spec.char_count_min = 3;
  spec.char_count_max = 5;
  spec.char_height_min = 8.0;
  spec.char_height_max = 12.0;
  spec.shear_min = -0.4;
  spec.shear_max = 0.4;
  int family_hits[3] = {0, 0, 0};
  double shear_lo = 1e9, shear_hi = -1e9;
  const int total = 1000;
  for (int idx = 0; idx < total; ++idx) {
    SynthInstance inst = render(spec, idx);
    for (const SynthWord& w : inst.words) {
      family_hits[static_cast<int>(w.family)]++;
      const double tangent0 =
          w.segments[0].text_orientation;  // shear = phi - tangent - pi/2
      const double shear =
          w.segments[0].char_orientation - tangent0 - M_PI / 2;
      shear_lo = std::min(shear_lo, shear);
      shear_hi = std::max(shear_hi, shear);
    }
  }
  for (int f = 0; f < 3; ++f) CHECK(family_hits[f] > total / 10);
  CHECK(shear_lo < -0.3);
  CHECK(shear_hi > 0.3);
}
