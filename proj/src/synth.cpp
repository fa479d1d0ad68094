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

#include "nask/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <sstream>
#include <stdexcept>

#include <opencv2/imgcodecs.hpp>

#include "nask/rng.hpp"

namespace fs = std::filesystem;

namespace nask {

const char* curve_family_name(CurveFamily f) {
  switch (f) {
    case CurveFamily::kLine: return "line";
    case CurveFamily::kArc: return "arc";
    case CurveFamily::kSine: return "sine";
  }
  return "?";
}

namespace {

struct Curve {
  // arc-length parameterized position; tangent via central differences
  std::function<Point(double)> at;
  double length = 0.0;
};

// word layout drawn for one attempt
struct WordDraw {
  CurveFamily family;
  int chars;
  double char_h, char_w, gap;
  double line_angle;
  double arc_radius;
  bool arc_up;
  double sine_amp, sine_period, sine_phase;
  std::vector<double> shear;
};

Curve make_curve(const WordDraw& d) {
  const double span = d.chars * (d.char_w + d.gap);
  Curve c;
  switch (d.family) {
    case CurveFamily::kLine: {
      const double ca = std::cos(d.line_angle), sa = std::sin(d.line_angle);
      c.at = [=](double t) { return Point{t * ca, -t * sa}; };
      c.length = span;
      break;
    }
    case CurveFamily::kArc: {
      const double R = d.arc_radius;
      const double sweep = span / R;
      const double a0 = M_PI / 2 + sweep / 2;  // sweep symmetric about the top
      const double sign = d.arc_up ? 1.0 : -1.0;
      c.at = [=](double t) {
        const double a = a0 - t / R;
        return Point{R * std::cos(a), -sign * R * std::sin(a)};
      };
      c.length = span;
      break;
    }
    case CurveFamily::kSine: {
      // y(x) = A sin(2 pi x / P + phase); approximate arc length by chords
      const double A = d.sine_amp, P = d.sine_period, ph = d.sine_phase;
      auto f = [=](double x) { return A * std::sin(2 * M_PI * x / P + ph); };
      // invert arc length numerically on a fixed grid
      const int kSteps = 512;
      auto table = std::make_shared<std::vector<std::pair<double, double>>>();
      double acc = 0.0, prev = f(0.0);
      table->push_back({0.0, 0.0});
      const double x_max = span * 1.5 + 1.0;
      for (int i = 1; i <= kSteps; ++i) {
        const double x = x_max * i / kSteps;
        const double y = f(x);
        acc += std::hypot(x_max / kSteps, y - prev);
        prev = y;
        table->push_back({acc, x});
      }
      c.at = [=](double t) {
        auto it = std::lower_bound(
            table->begin(), table->end(), std::make_pair(t, -1e300));
        double x;
        if (it == table->begin()) {
          x = 0.0;
        } else if (it == table->end()) {
          x = table->back().second;
        } else {
          auto p = it - 1;
          const double u =
              (t - p->first) / std::max(1e-12, it->first - p->first);
          x = p->second + u * (it->second - p->second);
        }
        return Point{x, f(x)};
      };
      c.length = span;
      break;
    }
  }
  return c;
}

Point unit_dir(double angle) { return {std::cos(angle), -std::sin(angle)}; }

// corner-cut quad, the "rounded" glyph body
TextPolygon rounded_quad(const CharQuad& q, double cut = 0.22) {
  TextPolygon p;
  for (int i = 0; i < 4; ++i) {
    const Point prev = q[(i + 3) % 4], cur = q[i], next = q[(i + 1) % 4];
    p.vertices.push_back(cur + cut * (prev - cur));
    p.vertices.push_back(cur + cut * (next - cur));
  }
  return p;
}

struct BuiltWord {
  SynthWord word;
  double min_x = 0, min_y = 0, max_x = 0, max_y = 0;
};

BuiltWord build_word(const WordDraw& d) {
  Curve curve = make_curve(d);
  const double spacing = d.char_w + d.gap;
  BuiltWord out;
  out.word.family = d.family;
  InstanceGeometry& geom = out.word.geometry;

  const double s = d.char_h / 2;
  const double hw = d.char_w / 2;
  for (int i = 0; i < d.chars; ++i) {
    const double t = (i + 0.5) * spacing;
    const Point c = curve.at(t);
    const Point ta = curve.at(std::min(curve.length, t + 0.5));
    const Point tb = curve.at(std::max(0.0, t - 0.5));
    const double tangent = std::atan2(-(ta.y - tb.y), ta.x - tb.x);
    const double phi = tangent + M_PI / 2 + d.shear[i];
    const Point up = unit_dir(phi);
    const Point along = unit_dir(tangent);
    const Point top_mid = c + s * up;
    const Point bot_mid = c - s * up;
    geom.char_quads.push_back({top_mid - hw * along, top_mid + hw * along,
                               bot_mid + hw * along, bot_mid - hw * along});
  }
  // band polygon through every top corner, then every bottom corner reversed
  for (const CharQuad& q : geom.char_quads) {
    geom.word_polygon.vertices.push_back(q[0]);
    geom.word_polygon.vertices.push_back(q[1]);
  }
  for (auto it = geom.char_quads.rbegin(); it != geom.char_quads.rend(); ++it) {
    geom.word_polygon.vertices.push_back((*it)[2]);
    geom.word_polygon.vertices.push_back((*it)[3]);
  }
  out.word.segments = derive_segments(geom);

  out.min_x = out.max_x = geom.word_polygon.vertices[0].x;
  out.min_y = out.max_y = geom.word_polygon.vertices[0].y;
  for (const Point& p : geom.word_polygon.vertices) {
    out.min_x = std::min(out.min_x, p.x);
    out.max_x = std::max(out.max_x, p.x);
    out.min_y = std::min(out.min_y, p.y);
    out.max_y = std::max(out.max_y, p.y);
  }
  return out;
}

void translate_word(SynthWord* w, Point offset) {
  for (Point& p : w->geometry.word_polygon.vertices) p = p + offset;
  for (CharQuad& q : w->geometry.char_quads)
    for (Point& p : q) p = p + offset;
  for (CharacterSegment& s : w->segments) s.center = s.center + offset;
}

double quantize255(double v) {
  return std::clamp(std::round(v * 255.0), 0.0, 255.0) / 255.0;
}

}  // namespace

SynthInstance render(const SynthSpec& spec, int index) {
  if (spec.families.empty() || spec.char_count_min < 2 ||
      spec.char_count_max < spec.char_count_min ||
      spec.char_height_max < spec.char_height_min || spec.image_w < 16 ||
      spec.image_h < 16)
    throw std::invalid_argument("render: invalid spec");
  Rng rng = Rng::for_index(spec.seed, static_cast<uint64_t>(index));

  SynthInstance inst;
  inst.image = Tensor(spec.image_h, spec.image_w, 1);
  const double margin = 2.0;

  const int n_words = rng.uniform_int(spec.words_min, spec.words_max);
  std::vector<std::array<double, 4>> placed;  // x0 y0 x1 y1 boxes

  for (int wi = 0; wi < n_words; ++wi) {
    bool done = false;
    double shrink = 1.0;
    for (int attempt = 0; attempt < 12 && !done; ++attempt) {
      WordDraw d;
      d.family = spec.families[rng.uniform_int(
          0, static_cast<int>(spec.families.size()) - 1)];
      d.chars = rng.uniform_int(spec.char_count_min, spec.char_count_max);
      d.char_h =
          shrink * rng.uniform(spec.char_height_min, spec.char_height_max);
      d.char_w = d.char_h * rng.uniform(0.5, 0.7);
      d.gap = d.char_w * rng.uniform(0.1, 0.3);
      d.line_angle = rng.uniform(spec.line_angle_min, spec.line_angle_max);
      d.arc_radius = rng.uniform(spec.arc_radius_min, spec.arc_radius_max);
      d.arc_up = rng.uniform() < 0.5;
      d.sine_amp = rng.uniform(spec.sine_amplitude_min, spec.sine_amplitude_max);
      d.sine_period =
          rng.uniform(0.8, 1.6) * d.chars * (d.char_w + d.gap);
      d.sine_phase = rng.uniform(0.0, 2 * M_PI);
      for (int i = 0; i < d.chars; ++i)
        d.shear.push_back(rng.uniform(spec.shear_min, spec.shear_max));

      BuiltWord built = build_word(d);
      const double bw = built.max_x - built.min_x;
      const double bh = built.max_y - built.min_y;
      if (bw > spec.image_w - 2 * margin || bh > spec.image_h - 2 * margin) {
        shrink *= 0.82;  // re-draw with shrunken height
        continue;
      }
      const Point offset{
          rng.uniform(margin - built.min_x,
                      spec.image_w - margin - bw - built.min_x),
          rng.uniform(margin - built.min_y,
                      spec.image_h - margin - bh - built.min_y)};
      const std::array<double, 4> box{
          built.min_x + offset.x, built.min_y + offset.y,
          built.max_x + offset.x, built.max_y + offset.y};
      bool overlaps = false;
      for (const auto& other : placed)
        if (box[0] < other[2] && other[0] < box[2] && box[1] < other[3] &&
            other[1] < box[3])
          overlaps = true;
      if (overlaps && attempt < 11) continue;
      if (overlaps) break;  // give up on this word, keep the rest

      translate_word(&built.word, offset);
      placed.push_back(box);
      inst.words.push_back(std::move(built.word));
      done = true;
    }
    if (!done && inst.words.empty() && wi == n_words - 1)
      throw std::runtime_error("render: could not place any word");
  }

  // paint characters (brightest wins where quads touch)
  for (const SynthWord& w : inst.words) {
    for (const CharQuad& q : w.geometry.char_quads) {
      const double level = quantize255(rng.uniform(0.6, 1.0));
      for (auto& [x, y] : rasterize_polygon(rounded_quad(q), spec.image_w,
                                            spec.image_h))
        inst.image.at(y, x, 0) = std::max(inst.image.at(y, x, 0), level);
    }
  }

  // distractor clutter: filled circles and triangles away from the words
  const int n_distract =
      rng.uniform_int(spec.distractors_min, spec.distractors_max);
  for (int di = 0; di < n_distract; ++di) {
    for (int attempt = 0; attempt < 8; ++attempt) {
      const double r = rng.uniform(2.0, 5.0);
      const Point c{rng.uniform(r + 1, spec.image_w - r - 1),
                    rng.uniform(r + 1, spec.image_h - r - 1)};
      bool clash = false;
      for (const auto& b : placed)
        if (c.x > b[0] - r - 2 && c.x < b[2] + r + 2 && c.y > b[1] - r - 2 &&
            c.y < b[3] + r + 2)
          clash = true;
      if (clash) continue;
      const double level = quantize255(rng.uniform(0.6, 1.0));
      if (rng.uniform() < 0.5) {
        for (int y = (int)(c.y - r); y <= (int)(c.y + r); ++y)
          for (int x = (int)(c.x - r); x <= (int)(c.x + r); ++x)
            if (y >= 0 && y < spec.image_h && x >= 0 && x < spec.image_w &&
                std::hypot(x + 0.5 - c.x, y + 0.5 - c.y) <= r)
              inst.image.at(y, x, 0) =
                  std::max(inst.image.at(y, x, 0), level);
      } else {
        TextPolygon tri;
        for (int k = 0; k < 3; ++k) {
          const double a = rng.uniform(0.0, 2 * M_PI);
          tri.vertices.push_back({c.x + r * std::cos(a), c.y + r * std::sin(a)});
        }
        for (auto& [x, y] :
             rasterize_polygon(tri, spec.image_w, spec.image_h))
          inst.image.at(y, x, 0) = std::max(inst.image.at(y, x, 0), level);
      }
      break;
    }
  }

  if (spec.noise_level > 0.0) {
    for (double& v : inst.image.v)
      v = quantize255(v + spec.noise_level * rng.uniform(-1.0, 1.0));
  }
  return inst;
}

TextPolygon polygon_to_ctw14(const TextPolygon& polygon) {
  const size_t nv = polygon.vertices.size();
  if (nv < 4 || nv % 2 != 0)
    throw std::invalid_argument("polygon_to_ctw14: invalid band polygon");
  const size_t half = nv / 2;
  std::vector<Point> top(polygon.vertices.begin(),
                         polygon.vertices.begin() + half);
  std::vector<Point> bottom(polygon.vertices.rbegin(),
                            polygon.vertices.rbegin() + half);
  const auto top7 = resample_polyline(top, 7);
  const auto bot7 = resample_polyline(bottom, 7);
  TextPolygon out;
  out.vertices.insert(out.vertices.end(), top7.begin(), top7.end());
  out.vertices.insert(out.vertices.end(), bot7.rbegin(), bot7.rend());
  return out;
}

std::string format_polygon_line(const TextPolygon& poly) {
  std::ostringstream os;
  char buf[32];
  for (size_t i = 0; i < poly.vertices.size(); ++i) {
    if (i) os << ',';
    std::snprintf(buf, sizeof buf, "%.17g", poly.vertices[i].x);
    os << buf << ',';
    std::snprintf(buf, sizeof buf, "%.17g", poly.vertices[i].y);
    os << buf;
  }
  return os.str();
}

TextPolygon parse_polygon_line(const std::string& line) {
  std::vector<double> vals;
  std::stringstream ss(line);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    size_t pos = 0;
    vals.push_back(std::stod(tok, &pos));
  }
  if (vals.size() < 6 || vals.size() % 2 != 0)
    throw std::runtime_error("bad vertex count");
  TextPolygon poly;
  for (size_t i = 0; i < vals.size(); i += 2)
    poly.vertices.push_back({vals[i], vals[i + 1]});
  return poly;
}

void save_image_gray(const std::string& path, const Tensor& image) {
  cv::Mat m(image.h, image.w, CV_8U);
  for (int y = 0; y < image.h; ++y)
    for (int x = 0; x < image.w; ++x)
      m.at<uint8_t>(y, x) = static_cast<uint8_t>(
          std::clamp(std::lround(image.at(y, x, 0) * 255.0), 0L, 255L));
  if (!cv::imwrite(path, m))
    throw std::runtime_error("save_image_gray: cannot write " + path);
}

Tensor load_image_gray(const std::string& path) {
  cv::Mat m = cv::imread(path, cv::IMREAD_GRAYSCALE);
  if (m.empty())
    throw std::runtime_error("load_image_gray: cannot read " + path);
  Tensor t(m.rows, m.cols, 1);
  for (int y = 0; y < m.rows; ++y)
    for (int x = 0; x < m.cols; ++x)
      t.at(y, x, 0) = m.at<uint8_t>(y, x) / 255.0;
  return t;
}

void write_dataset(const SynthSpec& spec, int count, const std::string& dir,
                   AnnotationStyle style) {
  fs::create_directories(fs::path(dir) / "images");
  fs::create_directories(fs::path(dir) / "gt");
  fs::create_directories(fs::path(dir) / "chars");
  char name[32];
  for (int i = 0; i < count; ++i) {
    const SynthInstance inst = render(spec, i);
    std::snprintf(name, sizeof name, "%04d", i);
    save_image_gray((fs::path(dir) / "images" / (std::string(name) + ".png"))
                        .string(),
                    inst.image);
    std::ofstream gt(fs::path(dir) / "gt" / (std::string(name) + ".txt"));
    std::ofstream ch(fs::path(dir) / "chars" / (std::string(name) + ".txt"));
    char buf[32];
    for (size_t wi = 0; wi < inst.words.size(); ++wi) {
      const TextPolygon& poly = inst.words[wi].geometry.word_polygon;
      gt << format_polygon_line(style == AnnotationStyle::kCtw14
                                    ? polygon_to_ctw14(poly)
                                    : poly)
         << "\n";
      for (const CharQuad& q : inst.words[wi].geometry.char_quads) {
        ch << wi;
        for (const Point& p : q) {
          std::snprintf(buf, sizeof buf, "%.17g", p.x);
          ch << ',' << buf;
          std::snprintf(buf, sizeof buf, "%.17g", p.y);
          ch << ',' << buf;
        }
        ch << "\n";
      }
    }
  }
}

std::vector<DatasetSample> read_dataset(const std::string& dir) {
  std::vector<fs::path> gt_files;
  const fs::path gt_dir = fs::path(dir) / "gt";
  if (!fs::is_directory(gt_dir))
    throw std::runtime_error("read_dataset: missing " + gt_dir.string());
  for (const auto& e : fs::directory_iterator(gt_dir))
    if (e.path().extension() == ".txt") gt_files.push_back(e.path());
  std::sort(gt_files.begin(), gt_files.end());

  std::vector<DatasetSample> out;
  for (const fs::path& gt_path : gt_files) {
    DatasetSample sample;
    const std::string stem = gt_path.stem().string();
    sample.image =
        load_image_gray((fs::path(dir) / "images" / (stem + ".png")).string());

    std::ifstream gt(gt_path);
    std::string line;
    int lineno = 0;
    while (std::getline(gt, line)) {
      ++lineno;
      if (line.empty()) continue;
      try {
        InstanceGeometry g;
        g.word_polygon = parse_polygon_line(line);
        sample.instances.push_back(std::move(g));
      } catch (const std::exception& e) {
        throw std::runtime_error(gt_path.string() + ":" +
                                 std::to_string(lineno) + ": " + e.what());
      }
    }

    const fs::path ch_path = fs::path(dir) / "chars" / (stem + ".txt");
    if (fs::exists(ch_path)) {
      std::ifstream ch(ch_path);
      lineno = 0;
      while (std::getline(ch, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string tok;
        std::vector<double> vals;
        while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
        if (vals.size() != 9)
          throw std::runtime_error(ch_path.string() + ":" +
                                   std::to_string(lineno) +
                                   ": expected index + 8 coordinates");
        const size_t wi = static_cast<size_t>(vals[0]);
        if (wi >= sample.instances.size())
          throw std::runtime_error(ch_path.string() + ":" +
                                   std::to_string(lineno) +
                                   ": instance index out of range");
        sample.instances[wi].char_quads.push_back(
            {Point{vals[1], vals[2]}, Point{vals[3], vals[4]},
             Point{vals[5], vals[6]}, Point{vals[7], vals[8]}});
      }
    }
    // approximate characters when the sidecar is absent
    for (InstanceGeometry& g : sample.instances)
      if (g.char_quads.empty())
        g.char_quads = slice_polygon_to_chars(g.word_polygon, 8);

    out.push_back(std::move(sample));
  }
  return out;
}

}  // namespace nask
