#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace otvm {

struct ModelConfig {
  std::string preset = "toy";
  int ck = 16;  // key channels at stride 16
  int cv = 32;  // value channels at stride 16
  bool ws = false;
  int gn_groups = 4;

  // trimap propagation encoders: stem + three stages ending at stride 16
  std::vector<int> tri_stages = {12, 16, 24, 32};
  std::vector<int> tri_blocks = {1, 1, 1};
  bool tri_bottleneck = false;
  int tri_stem_k = 3;
  bool tri_stem_pool = false;
  int tri_dec_ch = 32;

  // alpha encoder: stem + four stages; the last two keep stride 8 dilated
  std::vector<int> alpha_stages = {16, 24, 32, 40, 48};
  std::vector<int> alpha_blocks = {1, 1, 1, 1};
  bool alpha_bottleneck = false;
  int alpha_stem_k = 3;
  bool alpha_stem_pool = false;
  std::vector<int> ppm_bins = {1, 2, 3, 6};
  int ppm_ch = 12;
  std::vector<int> alpha_dec = {32, 16, 12};  // widths at s8->s4, s4->s2, s2->s1
  int hidden64_ch = 64;

  int refine_ch = 12;
  int hidden16_ch = 16;
};

enum class StageId { k1a = 0, k1b = 1, k2 = 2, k3 = 3, k4 = 4 };
const char* stage_name(StageId s);
bool parse_stage(const std::string& s, StageId& out);

struct TrainConfig {
  double lr = 1e-5;
  double lr_drop = 0.1;  // applied from 90% of the schedule onward
  double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
  double clip_norm = 5.0;  // 0 disables
  bool freeze_norm = true;
  uint64_t seed = 1;
  std::string precision = "f32";  // f32 | f64
  std::array<int, 5> stage_iters = {100000, 400000, 50000, 50000, 80000};
  std::array<int, 5> stage_batch = {4, 4, 4, 4, 4};
  int log_every = 1;
};

struct SimConfig {
  int frames = 3;
  int train_size = 320;
  std::vector<int> crop_sizes = {320, 480, 640};
  double max_rot = 30.0;
  double zoom_lo = 0.8, zoom_hi = 1.25;
  double max_shear = 10.0;
  double max_trans = 0.10;  // fraction of the source extent
  double step_rot = 6.0, step_zoom = 0.06, step_shear = 3.0, step_trans = 0.03;
  bool allow_flip = true;
  int trimap_kmin = 1, trimap_kmax = 25;  // odd kernel sampled within
  bool motion = true;
  bool augment = true;
  double p_hist = 0.3, p_blur = 0.3, p_noise = 0.5, p_jpeg = 0.3;
  int max_blur = 11;
  double max_noise_sigma = 0.02;
  int jpeg_qlo = 70, jpeg_qhi = 95;
};

struct MetricScales {
  double ssda = 1e2, mse = 1e3, mad = 1e3, sad = 1e-3;
  double grad = 1e-3, conn = 1e-3, dtssd = 1e2, messddt = 1e3;
};

struct EvalConfig {
  int narrow = 11, medium = 25, wide = 41;  // trimap dilation per setting
  int precision_dilate = 41;
  MetricScales scales;
};

struct InferConfig {
  int mem_interval = 10;      // intermediate memory cadence
  int mem_intermediate = 3;   // newest intermediates kept
  bool save_fgbg = false;
  bool png16 = false;
};

struct Config {
  ModelConfig model;
  TrainConfig train;
  SimConfig sim;
  EvalConfig eval;
  InferConfig infer;

  static Config preset(const std::string& name);  // "toy" | "paper"
  // parses the file's [preset] section first, then applies overrides
  static Config load(const std::string& path);
};

}  // namespace otvm
