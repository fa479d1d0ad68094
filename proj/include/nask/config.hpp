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

#ifndef NASK_CONFIG_HPP_
#define NASK_CONFIG_HPP_

#include <cstdint>
#include <string>
#include <vector>

namespace nask {

enum class PoolingMode { kGeoAlign, kRoiAlign, kRoiPool };
enum class StageMode { kBoth, kFirstOnly, kSecondOnly };
enum class AttentionMode { kGsca, kNone };

/// Full run configuration: model shape constants, thresholds, loss weights,
/// schedule, and paths. Serialized as a flat key/value text file; a copy is
/// written next to every checkpoint and results table.
struct RunConfig {
  // model
  std::vector<int> backbone_channels = {8, 16, 16, 8};
  int downsample_factor = 4;
  int groups = 4;
  double kappa = 2.0;
  AttentionMode attention = AttentionMode::kGsca;
  int pooled_h = 8, pooled_w = 64;
  int fox_h = 32, fox_w = 256;
  int k = 2;
  PoolingMode pooling = PoolingMode::kGeoAlign;
  StageMode stage = StageMode::kBoth;

  // detection / decoding
  double t_tr = 0.7, t_tcl = 0.6;  // per-dataset profile defaults
  int n_center_points = 8;
  int min_area = 16;
  double roi_expand = 1.2;
  double dp_epsilon = 1.0;
  double min_scale = 0.5;

  // losses
  double alpha = 1.0, beta = 1.0;
  double lambda[6] = {1.0, 1.0, 1.0, 1.0, 1.0, 1.0};
  bool ohem = true;
  double ohem_ratio = 3.0;
  int ohem_min_kept = 16;

  // schedule
  uint64_t seed = 7;
  int warmup_epochs = 10;
  int epochs = 10;
  double lr_warmup = 2e-4;
  double lr_joint = 1e-4;
  double lr_decay = 0.9;
  double target_hmean = 0.0;  // early stop when reached (0 = off)
  int eval_every = 0;         // epochs between train-set evals (0 = off)

  // run
  std::string data_dir;
  std::string out_dir = "out";
  std::string device = "cpu";
  double iou_thresh = 0.5;

  void validate() const;  // throws std::invalid_argument
};

/// Dataset threshold profiles: totaltext (0.7, 0.6, n=8), ctw (0.8, 0.4, n=8),
/// ic15 (0.6, 0.5, n=4). Unknown name throws.
void apply_profile(RunConfig* cfg, const std::string& profile);

RunConfig load_config(const std::string& path);
void save_config(const RunConfig& cfg, const std::string& path);

/// key=value application (the CLI uses it for flag overrides).
void set_config_key(RunConfig* cfg, const std::string& key,
                    const std::string& value);
std::string config_to_text(const RunConfig& cfg);

}  // namespace nask

#endif  // NASK_CONFIG_HPP_
