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

#include "nask/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace nask {

namespace {

std::string trim(const std::string& s) {
  const size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stoi(trim(tok)));
  return out;
}

std::string join_int_list(const std::vector<int>& v) {
  std::string s;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(v[i]);
  }
  return s;
}

}  // namespace

void RunConfig::validate() const {
  if (backbone_channels.empty())
    throw std::invalid_argument("config: empty backbone_channels");
  if (downsample_factor < 1 || (downsample_factor & (downsample_factor - 1)))
    throw std::invalid_argument("config: downsample_factor must be 2^k");
  if (groups < 1 || backbone_channels.back() % groups != 0)
    throw std::invalid_argument(
        "config: groups must divide the attention channel count");
  if (fox_h != 4 * pooled_h || fox_w != 4 * pooled_w)
    throw std::invalid_argument(
        "config: fox output shape must be 4x the pooled shape "
        "(two 2x upsamplings)");
  if (k < 1) throw std::invalid_argument("config: k must be >= 1");
  if (t_tr <= 0 || t_tr >= 1 || t_tcl <= 0 || t_tcl >= 1)
    throw std::invalid_argument("config: thresholds must be in (0,1)");
  if (n_center_points < 2)
    throw std::invalid_argument("config: n_center_points must be >= 2");
  if (iou_thresh <= 0 || iou_thresh >= 1)
    throw std::invalid_argument("config: iou_thresh must be in (0,1)");
  if (device != "cpu")
    throw std::invalid_argument("config: only device=cpu is supported");
}

void apply_profile(RunConfig* cfg, const std::string& profile) {
  if (profile == "totaltext") {
    cfg->t_tr = 0.7;
    cfg->t_tcl = 0.6;
    cfg->n_center_points = 8;
  } else if (profile == "ctw") {
    cfg->t_tr = 0.8;
    cfg->t_tcl = 0.4;
    cfg->n_center_points = 8;
  } else if (profile == "ic15") {
    cfg->t_tr = 0.6;
    cfg->t_tcl = 0.5;
    cfg->n_center_points = 4;
  } else {
    throw std::invalid_argument("unknown profile: " + profile);
  }
}

void set_config_key(RunConfig* cfg, const std::string& key,
                    const std::string& value) {
  auto as_d = [&] { return std::stod(value); };
  auto as_i = [&] { return std::stoi(value); };
  if (key == "profile") apply_profile(cfg, value);
  else if (key == "backbone_channels") cfg->backbone_channels = parse_int_list(value);
  else if (key == "downsample_factor") cfg->downsample_factor = as_i();
  else if (key == "groups") cfg->groups = as_i();
  else if (key == "kappa") cfg->kappa = as_d();
  else if (key == "attention") {
    if (value == "gsca") cfg->attention = AttentionMode::kGsca;
    else if (value == "none") cfg->attention = AttentionMode::kNone;
    else throw std::invalid_argument("config: attention must be gsca|none");
  } else if (key == "pooled_h") cfg->pooled_h = as_i();
  else if (key == "pooled_w") cfg->pooled_w = as_i();
  else if (key == "fox_h") cfg->fox_h = as_i();
  else if (key == "fox_w") cfg->fox_w = as_i();
  else if (key == "k") cfg->k = as_i();
  else if (key == "pooling") {
    if (value == "geoalign") cfg->pooling = PoolingMode::kGeoAlign;
    else if (value == "roialign") cfg->pooling = PoolingMode::kRoiAlign;
    else if (value == "roipool") cfg->pooling = PoolingMode::kRoiPool;
    else throw std::invalid_argument("config: pooling must be geoalign|roialign|roipool");
  } else if (key == "stage") {
    if (value == "both") cfg->stage = StageMode::kBoth;
    else if (value == "first-only") cfg->stage = StageMode::kFirstOnly;
    else if (value == "second-only") cfg->stage = StageMode::kSecondOnly;
    else throw std::invalid_argument("config: stage must be both|first-only|second-only");
  } else if (key == "t_tr") cfg->t_tr = as_d();
  else if (key == "t_tcl") cfg->t_tcl = as_d();
  else if (key == "n_center_points") cfg->n_center_points = as_i();
  else if (key == "min_area") cfg->min_area = as_i();
  else if (key == "roi_expand") cfg->roi_expand = as_d();
  else if (key == "dp_epsilon") cfg->dp_epsilon = as_d();
  else if (key == "min_scale") cfg->min_scale = as_d();
  else if (key == "alpha") cfg->alpha = as_d();
  else if (key == "beta") cfg->beta = as_d();
  else if (key == "lambda1") cfg->lambda[0] = as_d();
  else if (key == "lambda2") cfg->lambda[1] = as_d();
  else if (key == "lambda3") cfg->lambda[2] = as_d();
  else if (key == "lambda4") cfg->lambda[3] = as_d();
  else if (key == "lambda5") cfg->lambda[4] = as_d();
  else if (key == "lambda6") cfg->lambda[5] = as_d();
  else if (key == "ohem") cfg->ohem = value == "true" || value == "1";
  else if (key == "ohem_ratio") cfg->ohem_ratio = as_d();
  else if (key == "ohem_min_kept") cfg->ohem_min_kept = as_i();
  else if (key == "seed") cfg->seed = std::stoull(value);
  else if (key == "warmup_epochs") cfg->warmup_epochs = as_i();
  else if (key == "epochs") cfg->epochs = as_i();
  else if (key == "lr_warmup") cfg->lr_warmup = as_d();
  else if (key == "lr_joint") cfg->lr_joint = as_d();
  else if (key == "lr_decay") cfg->lr_decay = as_d();
  else if (key == "target_hmean") cfg->target_hmean = as_d();
  else if (key == "eval_every") cfg->eval_every = as_i();
  else if (key == "data_dir") cfg->data_dir = value;
  else if (key == "out_dir") cfg->out_dir = value;
  else if (key == "device") cfg->device = value;
  else if (key == "iou_thresh") cfg->iou_thresh = as_d();
  else throw std::invalid_argument("config: unknown key '" + key + "'");
}

std::string config_to_text(const RunConfig& cfg) {
  std::ostringstream os;
  os << "backbone_channels = " << join_int_list(cfg.backbone_channels) << "\n";
  os << "downsample_factor = " << cfg.downsample_factor << "\n";
  os << "groups = " << cfg.groups << "\n";
  os << "kappa = " << cfg.kappa << "\n";
  os << "attention = "
     << (cfg.attention == AttentionMode::kGsca ? "gsca" : "none") << "\n";
  os << "pooled_h = " << cfg.pooled_h << "\n";
  os << "pooled_w = " << cfg.pooled_w << "\n";
  os << "fox_h = " << cfg.fox_h << "\n";
  os << "fox_w = " << cfg.fox_w << "\n";
  os << "k = " << cfg.k << "\n";
  os << "pooling = "
     << (cfg.pooling == PoolingMode::kGeoAlign
             ? "geoalign"
             : cfg.pooling == PoolingMode::kRoiAlign ? "roialign" : "roipool")
     << "\n";
  os << "stage = "
     << (cfg.stage == StageMode::kBoth
             ? "both"
             : cfg.stage == StageMode::kFirstOnly ? "first-only"
                                                  : "second-only")
     << "\n";
  os << "t_tr = " << cfg.t_tr << "\n";
  os << "t_tcl = " << cfg.t_tcl << "\n";
  os << "n_center_points = " << cfg.n_center_points << "\n";
  os << "min_area = " << cfg.min_area << "\n";
  os << "roi_expand = " << cfg.roi_expand << "\n";
  os << "dp_epsilon = " << cfg.dp_epsilon << "\n";
  os << "min_scale = " << cfg.min_scale << "\n";
  os << "alpha = " << cfg.alpha << "\n";
  os << "beta = " << cfg.beta << "\n";
  for (int i = 0; i < 6; ++i)
    os << "lambda" << (i + 1) << " = " << cfg.lambda[i] << "\n";
  os << "ohem = " << (cfg.ohem ? "true" : "false") << "\n";
  os << "ohem_ratio = " << cfg.ohem_ratio << "\n";
  os << "ohem_min_kept = " << cfg.ohem_min_kept << "\n";
  os << "seed = " << cfg.seed << "\n";
  os << "warmup_epochs = " << cfg.warmup_epochs << "\n";
  os << "epochs = " << cfg.epochs << "\n";
  os << "lr_warmup = " << cfg.lr_warmup << "\n";
  os << "lr_joint = " << cfg.lr_joint << "\n";
  os << "lr_decay = " << cfg.lr_decay << "\n";
  os << "target_hmean = " << cfg.target_hmean << "\n";
  os << "eval_every = " << cfg.eval_every << "\n";
  os << "data_dir = " << cfg.data_dir << "\n";
  os << "out_dir = " << cfg.out_dir << "\n";
  os << "device = " << cfg.device << "\n";
  os << "iou_thresh = " << cfg.iou_thresh << "\n";
  return os.str();
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("load_config: cannot open " + path);
  RunConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected key = value");
    try {
      set_config_key(&cfg, trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " +
                               e.what());
    }
  }
  return cfg;
}

void save_config(const RunConfig& cfg, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("save_config: cannot open " + path);
  f << config_to_text(cfg);
}

}  // namespace nask
