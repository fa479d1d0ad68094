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

#include "nask/fox.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <stdexcept>

#include <opencv2/imgproc.hpp>

namespace nask {

void normalize_orientation(const Tensor& a, const Tensor& b, Tensor* cos_out,
                           Tensor* sin_out) {
  a.require_same_shape(b, "normalize_orientation");
  *cos_out = Tensor(a.h, a.w, a.c);
  *sin_out = Tensor(a.h, a.w, a.c);
  for (size_t i = 0; i < a.v.size(); ++i) {
    const double r = std::sqrt(a.v[i] * a.v[i] + b.v[i] * b.v[i]);
    if (r == 0.0) {
      cos_out->v[i] = 1.0;  // degenerate pixel rule
      sin_out->v[i] = 0.0;
    } else {
      cos_out->v[i] = a.v[i] / r;
      sin_out->v[i] = b.v[i] / r;
    }
  }
}

namespace {

std::pair<double, double> normalize_pair(double a, double b) {
  const double r = std::sqrt(a * a + b * b);
  if (r == 0.0) return {1.0, 0.0};
  return {a / r, b / r};
}

// bilinear read of channel `ch` at a continuous position whose units are
// raster pixels with centers at (x+0.5, y+0.5)
double sample_map(const Tensor& m, int ch, Point p) {
  const double x = p.x - 0.5, y = p.y - 0.5;
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const double fx = x - x0, fy = y - y0;
  auto pix = [&](int yy, int xx) -> double {
    yy = std::clamp(yy, 0, m.h - 1);
    xx = std::clamp(xx, 0, m.w - 1);
    return m.at(yy, xx, ch);
  };
  return (1 - fy) * ((1 - fx) * pix(y0, x0) + fx * pix(y0, x0 + 1)) +
         fy * ((1 - fx) * pix(y0 + 1, x0) + fx * pix(y0 + 1, x0 + 1));
}

}  // namespace

std::vector<std::vector<uint8_t>> thin_mask(
    const std::vector<std::vector<uint8_t>>& mask) {
  auto img = mask;
  const int h = static_cast<int>(img.size());
  const int w = h ? static_cast<int>(img[0].size()) : 0;
  auto at = [&](const std::vector<std::vector<uint8_t>>& m, int y,
                int x) -> int {
    if (y < 0 || y >= h || x < 0 || x >= w) return 0;
    return m[y][x] ? 1 : 0;
  };
  bool changed = true;
  while (changed) {
    changed = false;
    for (int pass = 0; pass < 2; ++pass) {
      std::vector<std::pair<int, int>> kill;
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
          if (!img[y][x]) continue;
          const int p2 = at(img, y - 1, x), p3 = at(img, y - 1, x + 1),
                    p4 = at(img, y, x + 1), p5 = at(img, y + 1, x + 1),
                    p6 = at(img, y + 1, x), p7 = at(img, y + 1, x - 1),
                    p8 = at(img, y, x - 1), p9 = at(img, y - 1, x - 1);
          const int bn = p2 + p3 + p4 + p5 + p6 + p7 + p8 + p9;
          if (bn < 2 || bn > 6) continue;
          int an = 0;  // 0->1 transitions around the ring
          const int ring[9] = {p2, p3, p4, p5, p6, p7, p8, p9, p2};
          for (int i = 0; i < 8; ++i)
            if (ring[i] == 0 && ring[i + 1] == 1) ++an;
          if (an != 1) continue;
          if (pass == 0) {
            if (p2 * p4 * p6 != 0 || p4 * p6 * p8 != 0) continue;
          } else {
            if (p2 * p4 * p8 != 0 || p2 * p6 * p8 != 0) continue;
          }
          kill.push_back({y, x});
        }
      for (auto& [y, x] : kill) img[y][x] = 0;
      if (!kill.empty()) changed = true;
    }
  }
  return img;
}

namespace {

// longest shortest-path ordering of a skeleton pixel set (double BFS)
std::vector<std::pair<int, int>> order_skeleton(
    const std::vector<std::pair<int, int>>& pixels) {
  if (pixels.empty()) return {};
  std::map<std::pair<int, int>, int> index;
  for (size_t i = 0; i < pixels.size(); ++i) index[pixels[i]] = (int)i;
  auto neighbours = [&](int i) {
    std::vector<int> out;
    const auto [x, y] = pixels[i];
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        auto it = index.find({x + dx, y + dy});
        if (it != index.end()) out.push_back(it->second);
      }
    return out;
  };
  auto bfs = [&](int start, std::vector<int>* parent) {
    std::vector<int> dist(pixels.size(), -1);
    parent->assign(pixels.size(), -1);
    std::deque<int> q{start};
    dist[start] = 0;
    int far = start;
    while (!q.empty()) {
      const int u = q.front();
      q.pop_front();
      if (dist[u] > dist[far]) far = u;
      for (int v : neighbours(u))
        if (dist[v] < 0) {
          dist[v] = dist[u] + 1;
          (*parent)[v] = u;
          q.push_back(v);
        }
    }
    return far;
  };
  std::vector<int> parent;
  const int a = bfs(0, &parent);
  const int b = bfs(a, &parent);
  std::vector<std::pair<int, int>> path;
  for (int cur = b; cur >= 0; cur = parent[cur]) path.push_back(pixels[cur]);
  // deterministic reading direction: overall +x, ties towards +y
  const auto& s = path.front();
  const auto& e = path.back();
  if (e.first < s.first || (e.first == s.first && e.second < s.second))
    std::reverse(path.begin(), path.end());
  return path;
}

}  // namespace

std::vector<TclComponent> extract_tcl(const Tensor& f2, double t_tcl) {
  if (t_tcl <= 0.0 || t_tcl >= 1.0)
    throw std::invalid_argument("extract_tcl: threshold must be in (0,1)");
  cv::Mat bin(f2.h, f2.w, CV_8U);
  for (int y = 0; y < f2.h; ++y)
    for (int x = 0; x < f2.w; ++x)
      bin.at<uint8_t>(y, x) = f2.at(y, x, 0) > t_tcl ? 255 : 0;
  cv::Mat labels;
  const int count = cv::connectedComponents(bin, labels, 8, CV_32S);

  std::vector<TclComponent> out;
  for (int lab = 1; lab < count; ++lab) {
    TclComponent comp;
    int minx = f2.w, miny = f2.h, maxx = -1, maxy = -1;
    for (int y = 0; y < f2.h; ++y)
      for (int x = 0; x < f2.w; ++x)
        if (labels.at<int>(y, x) == lab) {
          comp.pixels.push_back({x, y});
          minx = std::min(minx, x);
          maxx = std::max(maxx, x);
          miny = std::min(miny, y);
          maxy = std::max(maxy, y);
        }
    std::vector<std::vector<uint8_t>> mask(
        maxy - miny + 1, std::vector<uint8_t>(maxx - minx + 1, 0));
    for (auto& [x, y] : comp.pixels) mask[y - miny][x - minx] = 1;
    auto thinned = thin_mask(mask);
    std::vector<std::pair<int, int>> skel;
    for (int y = 0; y < (int)thinned.size(); ++y)
      for (int x = 0; x < (int)thinned[y].size(); ++x)
        if (thinned[y][x]) skel.push_back({x + minx, y + miny});
    comp.skeleton = order_skeleton(skel);
    if (comp.skeleton.size() < 2) continue;
    comp.polyline.reserve(comp.skeleton.size());
    for (auto& [x, y] : comp.skeleton)
      comp.polyline.push_back({x + 0.5, y + 0.5});
    out.push_back(std::move(comp));
  }
  return out;
}

CenterPointList sample_center_points(const std::vector<Point>& polyline,
                                     int n) {
  if (n < 2) throw std::invalid_argument("sample_center_points: n < 2");
  if (polyline.size() < 2 || polyline_length(polyline) <= 0.0)
    throw std::invalid_argument("sample_center_points: degenerate polyline");
  CenterPointList list;
  list.interior = resample_polyline(polyline, n);
  list.c_start = polyline.front();
  list.c_end = polyline.back();
  return list;
}

std::pair<Point, Point> fiducial_points(Point c, double s, double phi) {
  if (s < 0.0) throw std::invalid_argument("fiducial_points: negative scale");
  const Point off{s * std::cos(phi), -s * std::sin(phi)};
  return {c + off, c - off};
}

TextPolygon polygon_from_fiducials(const FiducialPointSet& fps, double eps) {
  const size_t m = fps.points.size();
  if (m < 4 || m % 2 != 0)
    throw std::invalid_argument("polygon_from_fiducials: needs 2n >= 4 points");
  TextPolygon ring;
  for (size_t i = 0; i < m; i += 2) ring.vertices.push_back(fps.points[i]);
  for (size_t i = m - 1; i < m; i -= 2) {
    ring.vertices.push_back(fps.points[i]);
    if (i == 1) break;
  }
  // drop consecutive duplicates before simplification
  TextPolygon dedup;
  for (const Point& p : ring.vertices)
    if (dedup.vertices.empty() || dist(dedup.vertices.back(), p) > 1e-9)
      dedup.vertices.push_back(p);
  while (dedup.vertices.size() > 1 &&
         dist(dedup.vertices.front(), dedup.vertices.back()) <= 1e-9)
    dedup.vertices.pop_back();
  if (dedup.vertices.size() < 3)
    throw ReconstructionFailure("fiducial ring collapsed");
  if (!is_simple(dedup))
    throw ReconstructionFailure("fiducial ring self-intersects");
  TextPolygon poly = simplify_ring(dedup, eps);
  if (poly.vertices.size() < 3 || polygon_area(poly) <= 0.0 ||
      !is_simple(poly))
    throw ReconstructionFailure("simplified polygon degenerate");
  return poly;
}

CharacterSegment char_attributes(const CharQuad& quad) {
  CharacterSegment seg;
  seg.center = {0.25 * (quad[0].x + quad[1].x + quad[2].x + quad[3].x),
                0.25 * (quad[0].y + quad[1].y + quad[2].y + quad[3].y)};
  const Point top_mid = 0.5 * (quad[0] + quad[1]);
  const Point bot_mid = 0.5 * (quad[3] + quad[2]);
  seg.scale = 0.5 * dist(top_mid, bot_mid);
  const Point d = top_mid - bot_mid;
  seg.char_orientation = (d.x == 0.0 && d.y == 0.0) ? 0.0 : std::atan2(-d.y, d.x);
  return seg;
}

namespace {

struct CenterlineAttr {
  double s = 0.0;
  double cos_t = 1.0, sin_t = 0.0;
  double cos_p = 1.0, sin_p = 0.0;
};

// nearest-point projection onto the polyline; attributes interpolate linearly
// along the segment (trig pairs renormalized)
CenterlineAttr attr_at_nearest(const std::vector<Point>& line,
                               const std::vector<CenterlineAttr>& attrs,
                               Point p) {
  double best_d2 = std::numeric_limits<double>::max();
  size_t best_i = 0;
  double best_t = 0.0;
  for (size_t i = 0; i + 1 < line.size(); ++i) {
    const Point a = line[i], b = line[i + 1];
    const double vx = b.x - a.x, vy = b.y - a.y;
    const double len2 = vx * vx + vy * vy;
    double t = len2 > 0 ? ((p.x - a.x) * vx + (p.y - a.y) * vy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double dx = p.x - (a.x + t * vx), dy = p.y - (a.y + t * vy);
    const double d2 = dx * dx + dy * dy;
    if (d2 < best_d2) {
      best_d2 = d2;
      best_i = i;
      best_t = t;
    }
  }
  const CenterlineAttr& a = attrs[best_i];
  const CenterlineAttr& b = attrs[best_i + 1];
  CenterlineAttr out;
  const double t = best_t;
  out.s = (1 - t) * a.s + t * b.s;
  auto [ct, st] = normalize_pair((1 - t) * a.cos_t + t * b.cos_t,
                                 (1 - t) * a.sin_t + t * b.sin_t);
  auto [cp, sp] = normalize_pair((1 - t) * a.cos_p + t * b.cos_p,
                                 (1 - t) * a.sin_p + t * b.sin_p);
  out.cos_t = ct;
  out.sin_t = st;
  out.cos_p = cp;
  out.sin_p = sp;
  return out;
}

std::vector<Point> cut_polyline_ends(const std::vector<Point>& line,
                                     double cut_start, double cut_end) {
  const double len = polyline_length(line);
  // never remove more than 40% from an end
  cut_start = std::min(cut_start, 0.4 * len);
  cut_end = std::min(cut_end, 0.4 * len);
  std::vector<Point> out;
  out.push_back(point_at_arclength(line, cut_start));
  double acc = 0.0;
  for (size_t i = 1; i < line.size(); ++i) {
    acc += dist(line[i - 1], line[i]);
    if (acc > cut_start && acc < len - cut_end) out.push_back(line[i]);
  }
  out.push_back(point_at_arclength(line, len - cut_end));
  return out;
}

}  // namespace

std::vector<CharacterSegment> derive_segments(const InstanceGeometry& inst) {
  const size_t n = inst.char_quads.size();
  std::vector<CharacterSegment> segs(n);
  for (size_t i = 0; i < n; ++i) segs[i] = char_attributes(inst.char_quads[i]);
  const Point c_end =
      0.5 * (inst.char_quads.back()[1] + inst.char_quads.back()[2]);
  for (size_t i = 0; i < n; ++i) {
    const Point next = (i + 1 < n) ? segs[i + 1].center : c_end;
    const Point d = next - segs[i].center;
    segs[i].text_orientation = std::atan2(-d.y, d.x);
  }
  return segs;
}

CenterPointList centers_from_chars(const InstanceGeometry& inst) {
  if (inst.char_quads.empty())
    throw std::invalid_argument("centers_from_chars: no characters");
  CenterPointList list;
  list.c_start =
      0.5 * (inst.char_quads.front()[0] + inst.char_quads.front()[3]);
  list.c_end = 0.5 * (inst.char_quads.back()[1] + inst.char_quads.back()[2]);
  for (const CharQuad& q : inst.char_quads)
    list.interior.push_back(char_attributes(q).center);
  return list;
}

GeometryLabels generate_geometry_labels(const InstanceGeometry& inst,
                                        int out_h, int out_w,
                                        const TclParams& tcl) {
  const size_t n = inst.char_quads.size();
  if (n < 2)
    throw std::invalid_argument(
        "generate_geometry_labels: invalid instance, needs >= 2 characters");

  const std::vector<CharacterSegment> segs = derive_segments(inst);
  const CenterPointList centers = centers_from_chars(inst);
  const Point c_start = centers.c_start;
  const Point c_end = centers.c_end;

  std::vector<Point> line;
  std::vector<CenterlineAttr> attrs;
  auto push = [&](Point p, const CharacterSegment& seg) {
    line.push_back(p);
    attrs.push_back({seg.scale, std::cos(seg.text_orientation),
                     std::sin(seg.text_orientation),
                     std::cos(seg.char_orientation),
                     std::sin(seg.char_orientation)});
  };
  push(c_start, segs.front());
  for (size_t i = 0; i < n; ++i) push(segs[i].center, segs[i]);
  push(c_end, segs.back());

  // TextSnake-style shrink, then rasterize the stripe segment by segment
  const std::vector<Point> shrunk = cut_polyline_ends(
      line, tcl.end_shrink * segs.front().scale,
      tcl.end_shrink * segs.back().scale);

  GeometryLabels out;
  out.maps.maps = Tensor(out_h, out_w, 6);
  std::vector<uint8_t> seen(static_cast<size_t>(out_h) * out_w, 0);
  for (size_t i = 0; i + 1 < shrunk.size(); ++i) {
    const Point a = shrunk[i], b = shrunk[i + 1];
    if (dist(a, b) <= 1e-12) continue;
    const double wa = tcl.width_ratio * attr_at_nearest(line, attrs, a).s;
    const double wb = tcl.width_ratio * attr_at_nearest(line, attrs, b).s;
    Point t = b - a;
    const double len = norm(t);
    const Point nrm{-t.y / len, t.x / len};
    TextPolygon quad;
    quad.vertices = {a + wa * nrm, b + wb * nrm, b - wb * nrm, a - wa * nrm};
    for (auto& [px, py] : rasterize_polygon(quad, out_w, out_h)) {
      const size_t idx = static_cast<size_t>(py) * out_w + px;
      if (seen[idx]) continue;
      seen[idx] = 1;
      out.tcl.push_back({px, py});
      const CenterlineAttr at =
          attr_at_nearest(line, attrs, {px + 0.5, py + 0.5});
      out.maps.maps.at(py, px, kGeoScale) = at.s;
      out.maps.maps.at(py, px, kGeoTcl) = 1.0;
      out.maps.maps.at(py, px, kGeoCosT) = at.cos_t;
      out.maps.maps.at(py, px, kGeoSinT) = at.sin_t;
      out.maps.maps.at(py, px, kGeoCosP) = at.cos_p;
      out.maps.maps.at(py, px, kGeoSinP) = at.sin_p;
    }
  }
  std::sort(out.tcl.begin(), out.tcl.end(),
            [](auto& a, auto& b) {
              return a.second != b.second ? a.second < b.second
                                          : a.first < b.first;
            });
  return out;
}

std::vector<TextPolygon> decode_geometry_maps(const GeometryMaps& maps,
                                              const DecodeParams& params,
                                              int* dropped) {
  const Tensor& m = maps.maps;
  Tensor f2(m.h, m.w, 1);
  for (int y = 0; y < m.h; ++y)
    for (int x = 0; x < m.w; ++x) f2.at(y, x, 0) = m.at(y, x, kGeoTcl);

  std::vector<TextPolygon> out;
  int drops = 0;
  for (const TclComponent& comp : extract_tcl(f2, params.t_tcl)) {
    try {
      const CenterPointList centers =
          sample_center_points(comp.polyline, params.n_center_points);
      FiducialPointSet fps;
      for (const Point& c : centers.interior) {
        const double s =
            std::max(sample_map(m, kGeoScale, c), params.min_scale);
        auto [cp, sp] = normalize_pair(sample_map(m, kGeoCosP, c),
                                       sample_map(m, kGeoSinP, c));
        const double phi = std::atan2(sp, cp);
        auto [top, bottom] = fiducial_points(c, s, phi);
        fps.points.push_back(top);
        fps.points.push_back(bottom);
      }
      out.push_back(polygon_from_fiducials(fps, params.dp_epsilon));
    } catch (const std::exception&) {
      ++drops;  // degenerate skeleton or self-intersecting reconstruction
    }
  }
  if (dropped) *dropped = drops;
  return out;
}

Point image_to_roi(const RoIBox& box, Point p, int roi_h, int roi_w) {
  const Point local = image_to_box_local(box, p);
  return {local.x * roi_w, local.y * roi_h};
}

Point roi_to_image(const RoIBox& box, Point p, int roi_h, int roi_w) {
  return box_local_to_image(box, p.x / roi_w, p.y / roi_h);
}

InstanceGeometry map_instance_to_roi(const InstanceGeometry& inst,
                                     const RoIBox& box, int roi_h, int roi_w) {
  InstanceGeometry out;
  for (const Point& p : inst.word_polygon.vertices)
    out.word_polygon.vertices.push_back(image_to_roi(box, p, roi_h, roi_w));
  for (const CharQuad& q : inst.char_quads) {
    CharQuad m;
    for (int i = 0; i < 4; ++i) m[i] = image_to_roi(box, q[i], roi_h, roi_w);
    out.char_quads.push_back(m);
  }
  return out;
}

TextPolygon map_polygon_to_image(const TextPolygon& poly, const RoIBox& box,
                                 int roi_h, int roi_w) {
  TextPolygon out;
  for (const Point& p : poly.vertices)
    out.vertices.push_back(roi_to_image(box, p, roi_h, roi_w));
  return out;
}

std::vector<CharQuad> slice_polygon_to_chars(const TextPolygon& polygon,
                                             int count) {
  const size_t nv = polygon.vertices.size();
  if (nv < 4 || nv % 2 != 0 || count < 1)
    throw std::invalid_argument("slice_polygon_to_chars: invalid input");
  const size_t half = nv / 2;
  std::vector<Point> top(polygon.vertices.begin(),
                         polygon.vertices.begin() + half);
  std::vector<Point> bottom(polygon.vertices.rbegin(),
                            polygon.vertices.rbegin() + half);
  const double lt = polyline_length(top), lb = polyline_length(bottom);
  std::vector<CharQuad> quads;
  quads.reserve(count);
  for (int i = 0; i < count; ++i) {
    const double t0 = static_cast<double>(i) / count;
    const double t1 = static_cast<double>(i + 1) / count;
    quads.push_back({point_at_arclength(top, t0 * lt),
                     point_at_arclength(top, t1 * lt),
                     point_at_arclength(bottom, t1 * lb),
                     point_at_arclength(bottom, t0 * lb)});
  }
  return quads;
}

}  // namespace nask
