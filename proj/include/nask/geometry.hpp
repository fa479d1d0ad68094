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

#ifndef NASK_GEOMETRY_HPP_
#define NASK_GEOMETRY_HPP_

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

namespace nask {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double s, Point p) { return {s * p.x, s * p.y}; }
double norm(Point p);
double dist(Point a, Point b);

/// Ordered 2D vertex list in image coordinates (y axis pointing down).
/// Annotation and output format; expected simple with positive area.
struct TextPolygon {
  std::vector<Point> vertices;
};

/// Quadrilateral character unit, corners ordered [tl, tr, br, bl]:
/// top edge v0->v1, bottom edge v3->v2.
using CharQuad = std::array<Point, 4>;

/// Rotated rectangle proposal: center/size in pixels, angle in radians.
struct RoIBox {
  Point center;
  double w = 0.0;
  double h = 0.0;
  double angle = 0.0;  // rotation of the minimum-area rectangle

  bool valid() const { return w > 0.0 && h > 0.0; }
  RoIBox expanded(double factor) const {
    return {center, w * factor, h * factor, angle};
  }
};

/// Maps between image space and the box-local normalized frame
/// (a, b) in [0,1]^2, a along the box width, b along its height.
Point box_local_to_image(const RoIBox& box, double a, double b);
Point image_to_box_local(const RoIBox& box, Point p);

/// Signed polygon area (positive for counter-clockwise in a y-down frame is
/// negative; callers use std::abs for magnitude).
double signed_area(const TextPolygon& poly);
double polygon_area(const TextPolygon& poly);

/// True if no two non-adjacent edges intersect and there are >= 3 vertices.
bool is_simple(const TextPolygon& poly);

/// Even-odd containment; boundary points count as inside within `eps`.
bool point_in_polygon(const TextPolygon& poly, Point p, double eps = 1e-9);

/// Unsigned distance from p to the polygon boundary.
double distance_to_boundary(const TextPolygon& poly, Point p);

/// Pixels (x, y) whose centers (x+0.5, y+0.5) fall inside the polygon,
/// restricted to the raster [0,w) x [0,h). Even-odd scanline fill.
std::vector<std::pair<int, int>> rasterize_polygon(const TextPolygon& poly,
                                                   int raster_w, int raster_h);

/// Minimum-area rotated rectangle of a point set (cv::minAreaRect behind it).
RoIBox min_area_rect(const std::vector<Point>& pts);

/// Douglas–Peucker simplification of a closed ring with tolerance eps
/// (cv::approxPolyDP behind it).
TextPolygon simplify_ring(const TextPolygon& poly, double eps);

/// Arc-length resampling of an open polyline to `count` points including both
/// endpoints.
std::vector<Point> resample_polyline(const std::vector<Point>& line, int count);

double polyline_length(const std::vector<Point>& line);

/// Point at arc length `t` along the polyline (clamped to [0, length]).
Point point_at_arclength(const std::vector<Point>& line, double t);

}  // namespace nask

#endif  // NASK_GEOMETRY_HPP_
