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

#ifndef NASK_ROI_ALIGN_HPP_
#define NASK_ROI_ALIGN_HPP_

#include <vector>

#include "nask/geometry.hpp"
#include "nask/layers.hpp"
#include "nask/tensor.hpp"

namespace nask {

/// Per-sampling-point 6-parameter affine warps, shape (k*H_p, k*W_p, 6),
/// channel order [a11, a12, tx, a21, a22, ty]: T(p) = A p + t in the
/// coordinates of the pooled feature map. Identity is [1,0,0,0,1,0].
struct AffineField {
  Tensor params;

  static AffineField identity(int grid_h, int grid_w);
  bool is_valid_for(int grid_h, int grid_w) const {
    return params.h == grid_h && params.w == grid_w && params.c == 6;
  }
};

/// Image-space positions p(x, y) of all k*H_p x k*W_p sampling points,
/// shape (k*H_p, k*W_p, 2), channels [x, y].
struct SamplingGrid {
  Tensor points;
};

/// Uniform (unwarped) sampling grid of a rotated box: sample (gy, gx) sits at
/// box-local ((gx+0.5)/(k*out_w), (gy+0.5)/(k*out_h)).
SamplingGrid box_sampling_grid(const RoIBox& box, int out_h, int out_w, int k);

/// Apply the affine field to a grid: out(gy,gx) = A(gy,gx) p + t(gy,gx).
SamplingGrid warp_grid(const SamplingGrid& grid, const AffineField& field);

/// dL/dfield from the gradient at the warped positions (dwarped has channels
/// [dx, dy]).
Tensor warp_grid_backward(const SamplingGrid& base, const Tensor& dwarped);

/// Bilinear sample of m at (x, y); pixel centers at integer coordinates,
/// samples outside [0,w-1] x [0,h-1] read missing neighbours as zero.
/// Optionally writes the spatial gradient of each channel.
void bilinear_sample(const Tensor& m, double x, double y, double* out,
                     double* dout_dx = nullptr, double* dout_dy = nullptr);

/// RoI Align (mean of k^2 bilinear samples per bin).
Tensor roi_align(const Tensor& m, const RoIBox& box, int out_h, int out_w,
                 int k);

/// Backward of roi_align into the feature map.
Tensor roi_align_backward(const Tensor& m, const RoIBox& box, int out_h,
                          int out_w, int k, const Tensor& dout);

/// Geometry-aware variant: every sampling point is first mapped by its own
/// affine transform.
Tensor geo_align(const Tensor& m, const RoIBox& box, const AffineField& field,
                 int out_h, int out_w, int k);

/// Backward of geo_align; returns dL/dm and accumulates dL/dfield into
/// dfield (same shape as field.params).
Tensor geo_align_backward(const Tensor& m, const RoIBox& box,
                          const AffineField& field, int out_h, int out_w,
                          int k, const Tensor& dout, Tensor* dfield);

/// Quantized RoI Pooling reference (max over integer bins); kept only for the
/// pooling ablation axis. Backward routes gradients to the argmax pixels.
Tensor roi_pool(const Tensor& m, const RoIBox& box, int out_h, int out_w);
Tensor roi_pool_backward(const Tensor& m, const RoIBox& box, int out_h,
                         int out_w, const Tensor& dout);

/// Ground-truth sampling positions for the warp loss: the uniform RoI grid
/// mapped into the polygon by arc-length interpolation between the top and
/// bottom boundary polylines (columns) and linear row blending. The polygon
/// stores the top polyline followed by the reversed bottom polyline.
SamplingGrid warp_targets(const TextPolygon& polygon, int out_h, int out_w,
                          int k);

/// Learnable head predicting a 6-parameter affine per sampling point from the
/// pooled RoI feature; emits the identity field at initialization.
class AffineHead {
 public:
  AffineHead() = default;
  AffineHead(int in_c, int k, Rng& rng);

  AffineField forward(const Tensor& roi_feature);
  /// dL/droi_feature given dL/dfield.
  Tensor backward(const Tensor& dfield);

  std::vector<Param*> params();
  int upsample() const { return k_; }

  Conv2d conv1, conv2, head;

 private:
  int k_ = 2;
  Tensor cached_x_, cached_a1_, cached_r1_, cached_a2_, cached_r2_,
      cached_up_;
};

}  // namespace nask

#endif  // NASK_ROI_ALIGN_HPP_
