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

#include "nask/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <opencv2/imgproc.hpp>

namespace nask {

double norm(Point p) { return std::sqrt(p.x * p.x + p.y * p.y); }
double dist(Point a, Point b) { return norm(a - b); }

Point box_local_to_image(const RoIBox& box, double a, double b) {
  const double dx = (a - 0.5) * box.w;
  const double dy = (b - 0.5) * box.h;
  const double c = std::cos(box.angle), s = std::sin(box.angle);
  return {box.center.x + c * dx - s * dy, box.center.y + s * dx + c * dy};
}

Point image_to_box_local(const RoIBox& box, Point p) {
  const double c = std::cos(box.angle), s = std::sin(box.angle);
  const double dx = p.x - box.center.x, dy = p.y - box.center.y;
  return {(c * dx + s * dy) / box.w + 0.5, (-s * dx + c * dy) / box.h + 0.5};
}

double signed_area(const TextPolygon& poly) {
  const auto& v = poly.vertices;
  double a = 0.0;
  for (size_t i = 0, n = v.size(); i < n; ++i) {
    const Point& p = v[i];
    const Point& q = v[(i + 1) % n];
    a += p.x * q.y - q.x * p.y;
  }
  return 0.5 * a;
}

double polygon_area(const TextPolygon& poly) {
  return std::abs(signed_area(poly));
}

namespace {

// proper or touching intersection of segments ab and cd
bool segments_intersect(Point a, Point b, Point c, Point d) {
  auto cross = [](Point o, Point p, Point q) {
    return (p.x - o.x) * (q.y - o.y) - (q.x - o.x) * (p.y - o.y);
  };
  auto on_seg = [](Point p, Point q, Point r) {
    return std::min(p.x, q.x) - 1e-12 <= r.x &&
           r.x <= std::max(p.x, q.x) + 1e-12 &&
           std::min(p.y, q.y) - 1e-12 <= r.y &&
           r.y <= std::max(p.y, q.y) + 1e-12;
  };
  const double d1 = cross(a, b, c), d2 = cross(a, b, d);
  const double d3 = cross(c, d, a), d4 = cross(c, d, b);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
      ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
    return true;
  if (d1 == 0 && on_seg(a, b, c)) return true;
  if (d2 == 0 && on_seg(a, b, d)) return true;
  if (d3 == 0 && on_seg(c, d, a)) return true;
  if (d4 == 0 && on_seg(c, d, b)) return true;
  return false;
}

}  // namespace

bool is_simple(const TextPolygon& poly) {
  const auto& v = poly.vertices;
  const size_t n = v.size();
  if (n < 3) return false;
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) {
      // adjacent edges share an endpoint
      if ((j + 1) % n == i || (i + 1) % n == j) continue;
      if (segments_intersect(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n]))
        return false;
    }
  }
  return true;
}

double distance_to_boundary(const TextPolygon& poly, Point p) {
  const auto& v = poly.vertices;
  double best = std::numeric_limits<double>::max();
  for (size_t i = 0, n = v.size(); i < n; ++i) {
    Point a = v[i], b = v[(i + 1) % n];
    const double vx = b.x - a.x, vy = b.y - a.y;
    const double len2 = vx * vx + vy * vy;
    double t = len2 > 0 ? ((p.x - a.x) * vx + (p.y - a.y) * vy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    best = std::min(best, dist(p, {a.x + t * vx, a.y + t * vy}));
  }
  return best;
}

bool point_in_polygon(const TextPolygon& poly, Point p, double eps) {
  if (eps > 0 && distance_to_boundary(poly, p) <= eps) return true;
  const auto& v = poly.vertices;
  bool inside = false;
  for (size_t i = 0, j = v.size() - 1, n = v.size(); i < n; j = i++) {
    if ((v[i].y > p.y) != (v[j].y > p.y)) {
      const double xint =
          v[j].x + (p.y - v[j].y) / (v[i].y - v[j].y) * (v[i].x - v[j].x);
      if (p.x < xint) inside = !inside;
    }
  }
  return inside;
}

std::vector<std::pair<int, int>> rasterize_polygon(const TextPolygon& poly,
                                                   int raster_w,
                                                   int raster_h) {
  std::vector<std::pair<int, int>> out;
  const auto& v = poly.vertices;
  if (v.size() < 3) return out;
  double ymin = v[0].y, ymax = v[0].y;
  for (const Point& p : v) {
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  const int y0 = std::max(0, static_cast<int>(std::floor(ymin - 0.5)));
  const int y1 = std::min(raster_h - 1, static_cast<int>(std::ceil(ymax)));
  std::vector<double> xs;
  for (int y = y0; y <= y1; ++y) {
    const double cy = y + 0.5;  // pixel-center scanline
    xs.clear();
    for (size_t i = 0, n = v.size(); i < n; ++i) {
      const Point a = v[i], b = v[(i + 1) % n];
      if ((a.y > cy) == (b.y > cy)) continue;
      xs.push_back(a.x + (cy - a.y) / (b.y - a.y) * (b.x - a.x));
    }
    std::sort(xs.begin(), xs.end());
    for (size_t i = 0; i + 1 < xs.size(); i += 2) {
      int xa = static_cast<int>(std::ceil(xs[i] - 0.5));
      int xb = static_cast<int>(std::floor(xs[i + 1] - 0.5));
      xa = std::max(xa, 0);
      xb = std::min(xb, raster_w - 1);
      for (int x = xa; x <= xb; ++x) out.push_back({x, y});
    }
  }
  return out;
}

RoIBox min_area_rect(const std::vector<Point>& pts) {
  if (pts.size() < 2)
    throw std::invalid_argument("min_area_rect: needs at least 2 points");
  std::vector<cv::Point2f> cvpts;
  cvpts.reserve(pts.size());
  for (const Point& p : pts)
    cvpts.emplace_back(static_cast<float>(p.x), static_cast<float>(p.y));
  const cv::RotatedRect r = cv::minAreaRect(cvpts);
  RoIBox box;
  box.center = {r.center.x, r.center.y};
  box.w = r.size.width;
  box.h = r.size.height;
  box.angle = r.angle * CV_PI / 180.0;
  return box;
}

TextPolygon simplify_ring(const TextPolygon& poly, double eps) {
  std::vector<cv::Point2f> in, out;
  in.reserve(poly.vertices.size());
  for (const Point& p : poly.vertices)
    in.emplace_back(static_cast<float>(p.x), static_cast<float>(p.y));
  cv::approxPolyDP(in, out, eps, /*closed=*/true);
  TextPolygon res;
  res.vertices.reserve(out.size());
  for (const auto& p : out) res.vertices.push_back({p.x, p.y});
  return res;
}

double polyline_length(const std::vector<Point>& line) {
  double len = 0.0;
  for (size_t i = 1; i < line.size(); ++i) len += dist(line[i - 1], line[i]);
  return len;
}

Point point_at_arclength(const std::vector<Point>& line, double t) {
  if (line.empty()) throw std::invalid_argument("point_at_arclength: empty");
  if (t <= 0.0) return line.front();
  for (size_t i = 1; i < line.size(); ++i) {
    const double seg = dist(line[i - 1], line[i]);
    if (t <= seg) {
      const double u = seg > 0 ? t / seg : 0.0;
      return {line[i - 1].x + u * (line[i].x - line[i - 1].x),
              line[i - 1].y + u * (line[i].y - line[i - 1].y)};
    }
    t -= seg;
  }
  return line.back();
}

std::vector<Point> resample_polyline(const std::vector<Point>& line,
                                     int count) {
  if (line.size() < 2 || count < 2)
    throw std::invalid_argument("resample_polyline: degenerate input");
  const double len = polyline_length(line);
  std::vector<Point> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i)
    out.push_back(point_at_arclength(line, len * i / (count - 1)));
  return out;
}

}  // namespace nask
