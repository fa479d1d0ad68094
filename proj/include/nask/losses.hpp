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

#ifndef NASK_LOSSES_HPP_
#define NASK_LOSSES_HPP_

#include <cstddef>
#include <vector>

#include "nask/fox.hpp"
#include "nask/roi_align.hpp"
#include "nask/tensor.hpp"

namespace nask {

struct LossWeights {
  double alpha = 1.0;
  double beta = 1.0;
  double lambda[6] = {1.0, 1.0, 1.0, 1.0, 1.0, 1.0};  // lambda1..lambda6
};

struct OhemConfig {
  bool enabled = true;       // plain all-pixel average when false
  double neg_pos_ratio = 3.0;
  int min_kept = 16;
};

/// Pixel indices selected by online hard example mining: all positives plus
/// the hardest negatives up to ratio * |positives| (at least min_kept).
/// Deterministic: ties broken by pixel index.
std::vector<size_t> ohem_select(const Tensor& pred_logits,
                                const Tensor& gt_mask, const OhemConfig& cfg);

/// Softmax cross-entropy over the OHEM-selected pixels. pred_logits is
/// (H, W, 2) (non-text, text), gt_mask (H, W, 1) binary.
double loss_tis(const Tensor& pred_logits, const Tensor& gt_mask,
                const OhemConfig& cfg, Tensor* dlogits = nullptr);

/// Mean absolute coordinate difference over all sampling points, averaged per
/// coordinate (a constant (1,0) offset scores 0.5).
double loss_align(const SamplingGrid& warped, const SamplingGrid& targets,
                  Tensor* dwarped = nullptr);

double smoothed_l1(double x);
double smoothed_l1_grad(double x);

/// Six-term FOX loss: lambda1 * BCE(tcl) over all pixels + smoothed-L1 terms
/// on TCL pixels, the scale term on relative error (s_hat - s)/s. `pred` holds
/// the raw head output (f2 as a logit); `gt` holds labels with a 0/1 TCL.
double loss_fox(const Tensor& pred_raw, const GeometryLabels& gt,
                const LossWeights& w, Tensor* dpred = nullptr,
                double scale_eps = 1e-3);

/// L = l_tis + alpha * l_align + beta * l_fox.
double loss_total(double l_tis, double l_align, double l_fox,
                  const LossWeights& w);

}  // namespace nask

#endif  // NASK_LOSSES_HPP_
