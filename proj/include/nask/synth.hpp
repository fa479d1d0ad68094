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

#ifndef NASK_SYNTH_HPP_
#define NASK_SYNTH_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "nask/fox.hpp"
#include "nask/geometry.hpp"
#include "nask/tensor.hpp"

namespace nask {

enum class CurveFamily { kLine, kArc, kSine };

const char* curve_family_name(CurveFamily f);

/// Deterministic generator spec; (seed, index) fixes every draw.
struct SynthSpec {
  std::vector<CurveFamily> families = {CurveFamily::kLine, CurveFamily::kArc,
                                       CurveFamily::kSine};
  int char_count_min = 5, char_count_max = 9;
  double char_height_min = 12.0, char_height_max = 20.0;
  double shear_min = 0.0, shear_max = 0.0;  // phi offset from upright, radians
  double line_angle_min = 0.0, line_angle_max = 0.0;  // line-family slope
  int image_w = 128, image_h = 96;
  int words_min = 1, words_max = 1;
  int distractors_min = 0, distractors_max = 0;
  double noise_level = 0.0;  // uniform pixel noise amplitude, [0,1] scale
  double arc_radius_min = 40.0, arc_radius_max = 80.0;
  double sine_amplitude_min = 4.0, sine_amplitude_max = 9.0;
  uint64_t seed = 1;
};

struct SynthWord {
  InstanceGeometry geometry;
  std::vector<CharacterSegment> segments;  // derived (c_i, s_i, phi_i, theta_i)
  CurveFamily family = CurveFamily::kLine;
};

struct SynthInstance {
  Tensor image;  // (h, w, 1), values are exact multiples of 1/255
  std::vector<SynthWord> words;
};

/// Deterministic per (spec.seed, index). Out-of-bounds layouts are re-drawn
/// with shrunken height (bounded retries, then error).
SynthInstance render(const SynthSpec& spec, int index);

enum class AnnotationStyle {
  kVerbatim,  // Total-Text style: variable vertex count, exact decimals
  kCtw14,     // 14 points: boundary resampled to 7 top + 7 bottom
};

/// Resamples a top+reversed-bottom polygon to the 14-point CTW layout.
TextPolygon polygon_to_ctw14(const TextPolygon& polygon);

/// Directory layout: images/NNNN.png, gt/NNNN.txt, chars/NNNN.txt.
void write_dataset(const SynthSpec& spec, int count, const std::string& dir,
                   AnnotationStyle style = AnnotationStyle::kVerbatim);

struct DatasetSample {
  Tensor image;
  std::vector<InstanceGeometry> instances;
};

/// Reads a dataset written by write_dataset (or hand-supplied files in the
/// same layout). Instances missing a chars entry get quads from
/// slice_polygon_to_chars. Throws std::runtime_error with the offending line
/// number on malformed annotations.
std::vector<DatasetSample> read_dataset(const std::string& dir);

/// Annotation text codecs (one instance per line, "x1,y1,x2,y2,...").
std::string format_polygon_line(const TextPolygon& poly);
TextPolygon parse_polygon_line(const std::string& line);

Tensor load_image_gray(const std::string& path);
void save_image_gray(const std::string& path, const Tensor& image);

}  // namespace nask

#endif  // NASK_SYNTH_HPP_
