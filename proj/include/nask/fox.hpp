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

#ifndef NASK_FOX_HPP_
#define NASK_FOX_HPP_

#include <optional>
#include <vector>

#include "nask/geometry.hpp"
#include "nask/tensor.hpp"

namespace nask {

/// Channel indices of the 6-channel geometry output F = {f1..f6}.
enum GeoChannel {
  kGeoScale = 0,   // f1: character scale s (half height), map pixels
  kGeoTcl = 1,     // f2: TCL probability (or 0/1 mask on the label side)
  kGeoCosT = 2,    // f3: cos(theta), text orientation
  kGeoSinT = 3,    // f4: sin(theta)
  kGeoCosP = 4,    // f5: cos(phi), character orientation
  kGeoSinP = 5,    // f6: sin(phi)
};

/// 6-channel geometry maps, shape (H, W, 6); labels store a hard 0/1 TCL in
/// channel f2, predictions a probability.
struct GeometryMaps {
  Tensor maps;

  int height() const { return maps.h; }
  int width() const { return maps.w; }
};

/// One disk/character unit (c_i, s_i, phi_i, theta_i). Angles follow the
/// y-down image convention: phi = pi/2 is an upright character, theta = 0 a
/// left-to-right text line.
struct CharacterSegment {
  Point center;
  double scale = 0.0;        // half character height, >= 0
  double char_orientation = 0.0;   // phi
  double text_orientation = 0.0;   // theta
};

/// Ordered (c_start, c_1, ..., c_n, c_end) along the reading direction.
struct CenterPointList {
  Point c_start;
  std::vector<Point> interior;  // c_1..c_n
  Point c_end;
};

/// 2n points alternating top/bottom per center point: [t1, b1, t2, b2, ...].
struct FiducialPointSet {
  std::vector<Point> points;
};

/// Geometry of one text instance: word polygon + character quads, all in one
/// common 2D frame.
struct InstanceGeometry {
  TextPolygon word_polygon;
  std::vector<CharQuad> char_quads;
};

/// Elementwise (a,b) -> (a,b)/sqrt(a^2+b^2); the degenerate a=b=0 pixel maps
/// to (1, 0). In/out tensors are single-channel maps.
void normalize_orientation(const Tensor& a, const Tensor& b, Tensor* cos_out,
                           Tensor* sin_out);

/// One thresholded TCL connected component thinned to an ordered centerline.
struct TclComponent {
  std::vector<std::pair<int, int>> pixels;      // (x, y) of the component
  std::vector<std::pair<int, int>> skeleton;    // ordered 1-px path, (x, y)
  std::vector<Point> polyline;                  // skeleton pixel centers
};

/// 8-connected components of f2 > t_tcl, each reduced to an ordered skeleton
/// polyline (morphological thinning + longest-path ordering). Components whose
/// skeleton degenerates to fewer than 2 pixels are dropped.
std::vector<TclComponent> extract_tcl(const Tensor& f2, double t_tcl);

/// Zhang–Suen morphological thinning of a binary mask (1 = on).
std::vector<std::vector<uint8_t>> thin_mask(
    const std::vector<std::vector<uint8_t>>& mask);

/// n points at equal arc-length spacing (extremes included), plus the
/// endpoints as c_start/c_end.
CenterPointList sample_center_points(const std::vector<Point>& polyline, int n);

/// Eq-style fiducial pair: p_top = c + (s cos(phi), -s sin(phi)),
/// p_bottom = c + (-s cos(phi), s sin(phi)).
std::pair<Point, Point> fiducial_points(Point c, double s, double phi);

/// Orders top points along the line then bottom points reversed, closes the
/// ring and Douglas–Peucker-simplifies it with tolerance eps. Throws
/// ReconstructionFailure if the ordered ring self-intersects or collapses.
TextPolygon polygon_from_fiducials(const FiducialPointSet& fps,
                                   double eps = 1.0);

struct ReconstructionFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// TextSnake-style TCL shrink parameters; the paper defers to the citation.
struct TclParams {
  double end_shrink = 0.5;   // x local half-height pulled in at each end
  double width_ratio = 0.3;  // stripe width as a fraction of local height
};

struct GeometryLabels {
  GeometryMaps maps;                      // f1..f6 ground truth
  std::vector<std::pair<int, int>> tcl;   // TCL pixels (x, y)
};

/// Per-character attributes from a quad by the fiducial definitions:
/// center = corner mean, scale = |top_mid - bottom_mid| / 2, phi from
/// bottom_mid -> top_mid. theta is filled by the caller (chord to the next
/// center).
CharacterSegment char_attributes(const CharQuad& quad);

/// Character attributes of a whole instance: theta_i is the chord direction
/// from c_i to the next center (c_end for the last character).
std::vector<CharacterSegment> derive_segments(const InstanceGeometry& inst);

/// Center point list from character quads: c_start is the midpoint of the
/// first quad's left edge, c_end the midpoint of the last quad's right edge.
CenterPointList centers_from_chars(const InstanceGeometry& inst);

/// Rasterizes the shrunk TCL and writes (s, cos/sin theta, cos/sin phi) on
/// TCL pixels, zero elsewhere. Requires >= 2 character quads.
GeometryLabels generate_geometry_labels(const InstanceGeometry& inst,
                                        int out_h, int out_w,
                                        const TclParams& tcl = {});

struct DecodeParams {
  double t_tcl = 0.6;
  int n_center_points = 8;
  double dp_epsilon = 1.0;
  double min_scale = 0.5;  // floor for predicted s, map pixels
};

/// Full decode: TCL components -> center points -> fiducials -> polygons.
/// Instances whose reconstruction fails are dropped; `dropped` (if given)
/// counts them.
std::vector<TextPolygon> decode_geometry_maps(const GeometryMaps& maps,
                                              const DecodeParams& params,
                                              int* dropped = nullptr);

/// Equidistant slicing of a word polygon (top polyline + reversed bottom) into
/// pseudo-character quads, for datasets without character annotations.
std::vector<CharQuad> slice_polygon_to_chars(const TextPolygon& polygon,
                                             int count);

/// The RoI-output frame covers the box with pixel centers at (x+0.5, y+0.5);
/// decoding runs there and maps results back through the inverse transform.
Point image_to_roi(const RoIBox& box, Point p, int roi_h, int roi_w);
Point roi_to_image(const RoIBox& box, Point p, int roi_h, int roi_w);
InstanceGeometry map_instance_to_roi(const InstanceGeometry& inst,
                                     const RoIBox& box, int roi_h, int roi_w);
TextPolygon map_polygon_to_image(const TextPolygon& poly, const RoIBox& box,
                                 int roi_h, int roi_w);

}  // namespace nask

#endif  // NASK_FOX_HPP_
