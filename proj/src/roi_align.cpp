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

#include "nask/roi_align.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nask {

AffineField AffineField::identity(int grid_h, int grid_w) {
  AffineField f;
  f.params = Tensor(grid_h, grid_w, 6);
  for (int y = 0; y < grid_h; ++y)
    for (int x = 0; x < grid_w; ++x) {
      f.params.at(y, x, 0) = 1.0;
      f.params.at(y, x, 4) = 1.0;
    }
  return f;
}

SamplingGrid box_sampling_grid(const RoIBox& box, int out_h, int out_w,
                               int k) {
  if (!box.valid()) throw std::invalid_argument("box_sampling_grid: degenerate box");
  if (k < 1 || out_h < 1 || out_w < 1)
    throw std::invalid_argument("box_sampling_grid: bad output shape");
  const int gh = out_h * k, gw = out_w * k;
  SamplingGrid grid;
  grid.points = Tensor(gh, gw, 2);
  for (int gy = 0; gy < gh; ++gy)
    for (int gx = 0; gx < gw; ++gx) {
      const double a = (gx + 0.5) / gw;
      const double b = (gy + 0.5) / gh;
      const Point p = box_local_to_image(box, a, b);
      grid.points.at(gy, gx, 0) = p.x;
      grid.points.at(gy, gx, 1) = p.y;
    }
  return grid;
}

SamplingGrid warp_grid(const SamplingGrid& grid, const AffineField& field) {
  if (!field.is_valid_for(grid.points.h, grid.points.w))
    throw std::invalid_argument("warp_grid: field shape mismatch");
  SamplingGrid out;
  out.points = Tensor(grid.points.h, grid.points.w, 2);
  for (int gy = 0; gy < grid.points.h; ++gy)
    for (int gx = 0; gx < grid.points.w; ++gx) {
      const double px = grid.points.at(gy, gx, 0);
      const double py = grid.points.at(gy, gx, 1);
      const Tensor& t = field.params;
      out.points.at(gy, gx, 0) =
          t.at(gy, gx, 0) * px + t.at(gy, gx, 1) * py + t.at(gy, gx, 2);
      out.points.at(gy, gx, 1) =
          t.at(gy, gx, 3) * px + t.at(gy, gx, 4) * py + t.at(gy, gx, 5);
    }
  return out;
}

Tensor warp_grid_backward(const SamplingGrid& base, const Tensor& dwarped) {
  Tensor dfield(base.points.h, base.points.w, 6);
  for (int gy = 0; gy < base.points.h; ++gy)
    for (int gx = 0; gx < base.points.w; ++gx) {
      const double px = base.points.at(gy, gx, 0);
      const double py = base.points.at(gy, gx, 1);
      const double dx = dwarped.at(gy, gx, 0);
      const double dy = dwarped.at(gy, gx, 1);
      dfield.at(gy, gx, 0) = dx * px;
      dfield.at(gy, gx, 1) = dx * py;
      dfield.at(gy, gx, 2) = dx;
      dfield.at(gy, gx, 3) = dy * px;
      dfield.at(gy, gx, 4) = dy * py;
      dfield.at(gy, gx, 5) = dy;
    }
  return dfield;
}

void bilinear_sample(const Tensor& m, double x, double y, double* out,
                     double* dout_dx, double* dout_dy) {
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const double fx = x - x0;
  const double fy = y - y0;
  const bool in_x0 = x0 >= 0 && x0 < m.w, in_x1 = x0 + 1 >= 0 && x0 + 1 < m.w;
  const bool in_y0 = y0 >= 0 && y0 < m.h, in_y1 = y0 + 1 >= 0 && y0 + 1 < m.h;
  for (int c = 0; c < m.c; ++c) {
    const double v00 = (in_y0 && in_x0) ? m.at(y0, x0, c) : 0.0;
    const double v01 = (in_y0 && in_x1) ? m.at(y0, x0 + 1, c) : 0.0;
    const double v10 = (in_y1 && in_x0) ? m.at(y0 + 1, x0, c) : 0.0;
    const double v11 = (in_y1 && in_x1) ? m.at(y0 + 1, x0 + 1, c) : 0.0;
    out[c] = (1 - fy) * ((1 - fx) * v00 + fx * v01) +
             fy * ((1 - fx) * v10 + fx * v11);
    if (dout_dx)
      dout_dx[c] = (1 - fy) * (v01 - v00) + fy * (v11 - v10);
    if (dout_dy)
      dout_dy[c] = (1 - fx) * (v10 - v00) + fx * (v11 - v01);
  }
}

namespace {

// scatters g into the 4 bilinear neighbours of (x, y), channel c
void bilinear_scatter(Tensor* dm, double x, double y, int c, double g) {
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const double fx = x - x0;
  const double fy = y - y0;
  auto add = [&](int yy, int xx, double w) {
    if (yy >= 0 && yy < dm->h && xx >= 0 && xx < dm->w)
      dm->at(yy, xx, c) += w * g;
  };
  add(y0, x0, (1 - fy) * (1 - fx));
  add(y0, x0 + 1, (1 - fy) * fx);
  add(y0 + 1, x0, fy * (1 - fx));
  add(y0 + 1, x0 + 1, fy * fx);
}

Tensor pool_from_grid(const Tensor& m, const SamplingGrid& grid, int out_h,
                      int out_w, int k) {
  Tensor out(out_h, out_w, m.c);
  std::vector<double> sample(m.c);
  const double inv = 1.0 / (k * k);
  for (int i = 0; i < out_h; ++i)
    for (int j = 0; j < out_w; ++j)
      for (int sy = 0; sy < k; ++sy)
        for (int sx = 0; sx < k; ++sx) {
          const int gy = i * k + sy, gx = j * k + sx;
          bilinear_sample(m, grid.points.at(gy, gx, 0),
                          grid.points.at(gy, gx, 1), sample.data());
          for (int c = 0; c < m.c; ++c) out.at(i, j, c) += inv * sample[c];
        }
  return out;
}

}  // namespace

Tensor roi_align(const Tensor& m, const RoIBox& box, int out_h, int out_w,
                 int k) {
  if (!box.valid()) throw std::invalid_argument("roi_align: degenerate box");
  return pool_from_grid(m, box_sampling_grid(box, out_h, out_w, k), out_h,
                        out_w, k);
}

Tensor roi_align_backward(const Tensor& m, const RoIBox& box, int out_h,
                          int out_w, int k, const Tensor& dout) {
  const SamplingGrid grid = box_sampling_grid(box, out_h, out_w, k);
  Tensor dm(m.h, m.w, m.c);
  const double inv = 1.0 / (k * k);
  for (int i = 0; i < out_h; ++i)
    for (int j = 0; j < out_w; ++j)
      for (int sy = 0; sy < k; ++sy)
        for (int sx = 0; sx < k; ++sx) {
          const int gy = i * k + sy, gx = j * k + sx;
          for (int c = 0; c < m.c; ++c)
            bilinear_scatter(&dm, grid.points.at(gy, gx, 0),
                             grid.points.at(gy, gx, 1), c,
                             inv * dout.at(i, j, c));
        }
  return dm;
}

Tensor geo_align(const Tensor& m, const RoIBox& box, const AffineField& field,
                 int out_h, int out_w, int k) {
  if (!box.valid()) throw std::invalid_argument("geo_align: degenerate box");
  if (!field.is_valid_for(out_h * k, out_w * k))
    throw std::invalid_argument("geo_align: field shape mismatch, expected (" +
                                std::to_string(out_h * k) + "," +
                                std::to_string(out_w * k) + ",6)");
  const SamplingGrid grid =
      warp_grid(box_sampling_grid(box, out_h, out_w, k), field);
  return pool_from_grid(m, grid, out_h, out_w, k);
}

Tensor geo_align_backward(const Tensor& m, const RoIBox& box,
                          const AffineField& field, int out_h, int out_w,
                          int k, const Tensor& dout, Tensor* dfield) {
  if (!field.is_valid_for(out_h * k, out_w * k))
    throw std::invalid_argument("geo_align_backward: field shape mismatch");
  const SamplingGrid base = box_sampling_grid(box, out_h, out_w, k);
  const SamplingGrid grid = warp_grid(base, field);
  Tensor dm(m.h, m.w, m.c);
  std::vector<double> val(m.c), gx_c(m.c), gy_c(m.c);
  const double inv = 1.0 / (k * k);
  for (int i = 0; i < out_h; ++i)
    for (int j = 0; j < out_w; ++j)
      for (int sy = 0; sy < k; ++sy)
        for (int sx = 0; sx < k; ++sx) {
          const int gy = i * k + sy, gx = j * k + sx;
          const double qx = grid.points.at(gy, gx, 0);
          const double qy = grid.points.at(gy, gx, 1);
          bilinear_sample(m, qx, qy, val.data(), gx_c.data(), gy_c.data());
          double dqx = 0.0, dqy = 0.0;
          for (int c = 0; c < m.c; ++c) {
            const double g = inv * dout.at(i, j, c);
            bilinear_scatter(&dm, qx, qy, c, g);
            dqx += g * gx_c[c];
            dqy += g * gy_c[c];
          }
          if (dfield) {
            const double px = base.points.at(gy, gx, 0);
            const double py = base.points.at(gy, gx, 1);
            dfield->at(gy, gx, 0) += dqx * px;
            dfield->at(gy, gx, 1) += dqx * py;
            dfield->at(gy, gx, 2) += dqx;
            dfield->at(gy, gx, 3) += dqy * px;
            dfield->at(gy, gx, 4) += dqy * py;
            dfield->at(gy, gx, 5) += dqy;
          }
        }
  return dm;
}

Tensor roi_pool(const Tensor& m, const RoIBox& box, int out_h, int out_w) {
  if (!box.valid()) throw std::invalid_argument("roi_pool: degenerate box");
  const int k = 2;
  const SamplingGrid grid = box_sampling_grid(box, out_h, out_w, k);
  Tensor out(out_h, out_w, m.c);
  for (int i = 0; i < out_h; ++i)
    for (int j = 0; j < out_w; ++j)
      for (int c = 0; c < m.c; ++c) {
        double best = -std::numeric_limits<double>::max();
        for (int sy = 0; sy < k; ++sy)
          for (int sx = 0; sx < k; ++sx) {
            // quantized read: nearest integer pixel
            const int gy = i * k + sy, gx = j * k + sx;
            const int px = static_cast<int>(std::lround(grid.points.at(gy, gx, 0)));
            const int py = static_cast<int>(std::lround(grid.points.at(gy, gx, 1)));
            const double v = (px >= 0 && px < m.w && py >= 0 && py < m.h)
                                 ? m.at(py, px, c)
                                 : 0.0;
            best = std::max(best, v);
          }
        out.at(i, j, c) = best;
      }
  return out;
}

Tensor roi_pool_backward(const Tensor& m, const RoIBox& box, int out_h,
                         int out_w, const Tensor& dout) {
  const int k = 2;
  const SamplingGrid grid = box_sampling_grid(box, out_h, out_w, k);
  Tensor dm(m.h, m.w, m.c);
  for (int i = 0; i < out_h; ++i)
    for (int j = 0; j < out_w; ++j)
      for (int c = 0; c < m.c; ++c) {
        double best = -std::numeric_limits<double>::max();
        int bx = -1, by = -1;
        for (int sy = 0; sy < k; ++sy)
          for (int sx = 0; sx < k; ++sx) {
            const int gy = i * k + sy, gx = j * k + sx;
            const int px = static_cast<int>(std::lround(grid.points.at(gy, gx, 0)));
            const int py = static_cast<int>(std::lround(grid.points.at(gy, gx, 1)));
            const bool in = px >= 0 && px < m.w && py >= 0 && py < m.h;
            const double v = in ? m.at(py, px, c) : 0.0;
            if (v > best) {
              best = v;
              bx = in ? px : -1;
              by = in ? py : -1;
            }
          }
        if (bx >= 0) dm.at(by, bx, c) += dout.at(i, j, c);
      }
  return dm;
}

SamplingGrid warp_targets(const TextPolygon& polygon, int out_h, int out_w,
                          int k) {
  const size_t n = polygon.vertices.size();
  if (n < 4 || n % 2 != 0)
    throw std::invalid_argument(
        "warp_targets: invalid annotation, needs an even vertex count >= 4 "
        "(top polyline + reversed bottom)");
  if (!is_simple(polygon))
    throw std::invalid_argument("warp_targets: invalid annotation, "
                                "self-intersecting polygon");
  const size_t half = n / 2;
  std::vector<Point> top(polygon.vertices.begin(),
                         polygon.vertices.begin() + half);
  std::vector<Point> bottom(polygon.vertices.rbegin(),
                            polygon.vertices.rbegin() + half);
  // both run left to right now
  const double top_len = polyline_length(top);
  const double bot_len = polyline_length(bottom);
  if (top_len <= 0.0 || bot_len <= 0.0)
    throw std::invalid_argument("warp_targets: degenerate boundary polyline");

  const int gh = out_h * k, gw = out_w * k;
  SamplingGrid grid;
  grid.points = Tensor(gh, gw, 2);
  for (int gx = 0; gx < gw; ++gx) {
    const double t = (gx + 0.5) / gw;
    const Point pt = point_at_arclength(top, t * top_len);
    const Point pb = point_at_arclength(bottom, t * bot_len);
    for (int gy = 0; gy < gh; ++gy) {
      const double v = (gy + 0.5) / gh;
      grid.points.at(gy, gx, 0) = (1 - v) * pt.x + v * pb.x;
      grid.points.at(gy, gx, 1) = (1 - v) * pt.y + v * pb.y;
    }
  }
  return grid;
}

AffineHead::AffineHead(int in_c, int k, Rng& rng) : k_(k) {
  conv1 = Conv2d("affine.conv1", in_c, in_c, 3, 1, 1, true, rng);
  conv2 = Conv2d("affine.conv2", in_c, in_c, 3, 1, 1, true, rng);
  head = Conv2d("affine.head", in_c, 6, 1, 1, 1, true, rng);
  head.set_zero();
  // identity affine at every point until trained
  head.bias_p.value.at(0, 0, 0) = 1.0;
  head.bias_p.value.at(4, 0, 0) = 1.0;
}

AffineField AffineHead::forward(const Tensor& roi_feature) {
  cached_x_ = roi_feature;
  cached_a1_ = conv1.forward(roi_feature);
  cached_r1_ = relu(cached_a1_);
  cached_a2_ = conv2.forward(cached_r1_);
  cached_r2_ = relu(cached_a2_);
  cached_up_ = k_ > 1 ? upsample_nearest(cached_r2_, k_) : cached_r2_;
  AffineField field;
  field.params = head.forward(cached_up_);
  return field;
}

Tensor AffineHead::backward(const Tensor& dfield) {
  Tensor dup = head.backward(dfield);
  Tensor dr2 = k_ > 1 ? upsample_nearest_backward(dup, k_) : dup;
  Tensor da2 = relu_backward(cached_a2_, dr2);
  Tensor dr1 = conv2.backward(da2);
  Tensor da1 = relu_backward(cached_a1_, dr1);
  return conv1.backward(da1);
}

std::vector<Param*> AffineHead::params() {
  std::vector<Param*> out;
  for (Conv2d* c : {&conv1, &conv2, &head})
    for (Param* p : c->params()) out.push_back(p);
  return out;
}

}  // namespace nask
