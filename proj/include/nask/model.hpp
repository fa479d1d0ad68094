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

#ifndef NASK_MODEL_HPP_
#define NASK_MODEL_HPP_

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nask/attention.hpp"
#include "nask/config.hpp"
#include "nask/eval.hpp"
#include "nask/fox.hpp"
#include "nask/layers.hpp"
#include "nask/losses.hpp"
#include "nask/roi_align.hpp"
#include "nask/synth.hpp"

namespace nask {

struct TisOutput {
  Tensor feat;    // refined feature map M, image/downsample resolution
  Tensor logits;  // (h', w', 2) text/non-text
  Tensor prob;    // (h', w', 1) text probability
  int pad_x = 0, pad_y = 0;  // right/bottom padding applied to the input
};

/// Thresholds prob > t_tr, drops 8-connected components below min_area and
/// returns each component's minimum-area rectangle plus its pixel support.
struct Proposal {
  RoIBox box;
  std::vector<std::pair<int, int>> pixels;  // (x, y) at map resolution
  double score = 0.0;                       // mean text probability
};
std::vector<Proposal> extract_proposals(const Tensor& prob, double t_tr,
                                        int min_area);

struct DetectStats {
  int proposals = 0;
  int dropped = 0;  // decoding failures
};

/// FOX head: two (upsample x2 + 3x3 conv + relu) blocks and a 1x1 conv with 6
/// outputs; (H, W, C) -> (4H, 4W, 6).
class FoxHead {
 public:
  FoxHead() = default;
  FoxHead(int in_c, Rng& rng);
  Tensor forward(const Tensor& v);
  Tensor backward(const Tensor& draw);
  std::vector<Param*> params();

  Conv2d conv1, conv2, out;

 private:
  Tensor cached_up1_, cached_a1_, cached_r1_, cached_up2_, cached_a2_,
      cached_r2_;
};

/// End-to-end detector: toy backbone + GSCA -> text map -> proposals ->
/// GeoAlign -> FOX -> polygons.
class NaskModel {
 public:
  explicit NaskModel(const RunConfig& cfg);

  TisOutput tis_forward(const Tensor& image);
  Tensor fox_head_forward(const Tensor& pooled);  // raw (fox_h, fox_w, 6)

  /// Raw 6-channel output -> GeometryMaps (sigmoid on the TCL channel).
  static GeometryMaps activate_geometry(const Tensor& raw);

  std::vector<Detection> detect(const Tensor& image,
                                DetectStats* stats = nullptr);

  std::vector<Param*> params();
  const RunConfig& config() const { return cfg_; }

  // Submodules are public: the trainer drives forward/backward directly.
  std::vector<Conv2d> backbone;
  std::optional<Gsca> gsca;
  Conv2d text_head;
  std::optional<AffineHead> affine_head;
  std::optional<FoxHead> fox_head;

  Tensor backbone_forward(const Tensor& image, int* pad_x = nullptr,
                          int* pad_y = nullptr);
  Tensor backbone_backward(const Tensor& dfeat);

  /// Pools an RoI by the configured mode; field is predicted internally for
  /// GeoAlign (and exposed for supervision).
  struct PooledRoi {
    Tensor first_pass;  // roi_align output feeding the affine head
    AffineField field;
    Tensor pooled;
  };
  PooledRoi pool_roi(const Tensor& feat, const RoIBox& box);

 private:
  RunConfig cfg_;
  std::vector<Tensor> backbone_inputs_;  // forward caches (pre-conv inputs)
  std::vector<Tensor> backbone_preact_;
};

/// Maps between image coordinates and feature-map coordinates (pixel-center
/// aligned): p_map = (p_image - (f-1)/2) / f.
Point image_to_map(Point p, int factor);
Point map_to_image(Point p, int factor);

// --- checkpointing ---------------------------------------------------------

void save_checkpoint(NaskModel& model, const std::string& path);
std::unique_ptr<NaskModel> load_checkpoint(const std::string& path);

// --- training ---------------------------------------------------------------

struct StepLosses {
  double tis = 0.0, align = 0.0, fox = 0.0, total = 0.0;
};

struct TrainResult {
  std::vector<double> step_totals;
  double final_hmean = -1.0;  // train-set H-mean if evaluated, else -1
  int steps = 0;
};

/// Two-phase schedule: warm-up trains TIS alone at lr_warmup, then all modules
/// jointly at lr_joint decayed by lr_decay per epoch. Writes per-step loss
/// lines to <out_dir>/train.log and checkpoints to <out_dir>/checkpoint.bin.
/// Aborts (throws) on non-finite loss after dumping the offending sample.
TrainResult train_model(NaskModel& model,
                        const std::vector<DatasetSample>& dataset,
                        const RunConfig& cfg, const std::string& out_dir);

/// One optimization step on one sample (exposed for tests).
StepLosses train_step(NaskModel& model, const DatasetSample& sample,
                      const RunConfig& cfg, bool joint, Adam& opt, double lr);

/// Evaluates a model on a dataset at the configured IoU threshold.
MatchResult evaluate_model(NaskModel& model,
                           const std::vector<DatasetSample>& dataset,
                           double iou_thresh);

}  // namespace nask

#endif  // NASK_MODEL_HPP_
