#include "otvm/clipsim.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

#include "otvm/errors.hpp"
#include "otvm/image_io.hpp"
#include "otvm/image_ops.hpp"

namespace fs = std::filesystem;

namespace otvm::clipsim {

using core::Affine;
using core::Border;
using core::Rng;
using core::splitmix64;

ArrayD make_trimap(const ArrayD& alpha, int kernel) {
  if (kernel < 1 || kernel > 41 || kernel % 2 == 0)
    throw std::invalid_argument("trimap kernel must be odd and within [1,41]");
  assert(alpha.ndim() == 3 && alpha.dim(0) == 1);
  int h = alpha.dim(1), w = alpha.dim(2);
  ArrayT<uint8_t> unk({h, w});
  for (int i = 0; i < h * w; ++i) {
    double a = alpha.data[i];
    unk.data[i] = (a > 0.0 && a < 1.0) ? 1 : 0;
  }
  if (kernel > 1) unk = core::dilate_square(unk, kernel);
  ArrayD tri = ArrayD::zeros({3, h, w});
  for (int i = 0; i < h * w; ++i) {
    int cls = unk.data[i] ? 1 : (alpha.data[i] >= 1.0 ? 2 : 0);
    tri.data[(int64_t)cls * h * w + i] = 1.0;
  }
  return tri;
}

ArrayD composite(const ArrayD& fg, const ArrayD& alpha, const ArrayD& bg) {
  assert(fg.same_shape(bg) && fg.dim(0) == 3 && alpha.dim(0) == 1);
  int hw = fg.dim(1) * fg.dim(2);
  ArrayD out(fg.shape);
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < hw; ++i) {
      double a = alpha.data[i];
      out.data[c * hw + i] = a * fg.data[c * hw + i] + (1.0 - a) * bg.data[c * hw + i];
    }
  return out;
}

ArrayD trimap_to_gray(const ArrayD& trimap) {
  int h = trimap.dim(1), w = trimap.dim(2), hw = h * w;
  ArrayD g({1, h, w});
  for (int i = 0; i < hw; ++i) {
    double bg = trimap.data[i], un = trimap.data[hw + i], fg = trimap.data[2 * hw + i];
    g.data[i] = (fg >= bg && fg >= un) ? 1.0 : (un >= bg ? 128.0 / 255.0 : 0.0);
  }
  return g;
}

ArrayD gray_to_trimap(const ArrayD& gray) {
  int h = gray.dim(1), w = gray.dim(2), hw = h * w;
  ArrayD tri = ArrayD::zeros({3, h, w});
  for (int i = 0; i < hw; ++i) {
    double v = gray.data[i] * 255.0;
    int cls = v < 64.0 ? 0 : (v < 192.0 ? 1 : 2);
    tri.data[(int64_t)cls * hw + i] = 1.0;
  }
  return tri;
}

ArrayT<uint8_t> trimap_labels(const ArrayD& trimap) {
  int h = trimap.dim(1), w = trimap.dim(2), hw = h * w;
  ArrayT<uint8_t> lab({h, w});
  for (int i = 0; i < hw; ++i) {
    int best = 0;
    double bv = trimap.data[i];
    for (int c = 1; c < 3; ++c) {
      double v = trimap.data[c * hw + i];
      if (v > bv) bv = v, best = c;
    }
    lab.data[i] = (uint8_t)best;
  }
  return lab;
}

ArrayD labels_to_trimap(const ArrayT<uint8_t>& labels) {
  int h = labels.dim(0), w = labels.dim(1), hw = h * w;
  ArrayD tri = ArrayD::zeros({3, h, w});
  for (int i = 0; i < hw; ++i) tri.data[(int64_t)labels.data[i] * hw + i] = 1.0;
  return tri;
}

namespace {

struct Pose {
  double rot = 0, zoom = 1, shear = 0, tx = 0, ty = 0;
  bool flip = false;
};

Pose sample_base(Rng& r, const SimConfig& c, double extent) {
  Pose p;
  p.rot = r.uniform(-c.max_rot, c.max_rot);
  p.zoom = r.uniform(c.zoom_lo, c.zoom_hi);
  p.shear = r.uniform(-c.max_shear, c.max_shear);
  p.tx = r.uniform(-c.max_trans, c.max_trans) * extent;
  p.ty = r.uniform(-c.max_trans, c.max_trans) * extent;
  p.flip = c.allow_flip && r.bernoulli(0.5);
  return p;
}

Pose sample_step(Rng& r, const SimConfig& c, double extent) {
  Pose d;
  d.rot = r.uniform(-c.step_rot, c.step_rot);
  d.zoom = r.uniform(-c.step_zoom, c.step_zoom);
  d.shear = r.uniform(-c.step_shear, c.step_shear);
  d.tx = r.uniform(-c.step_trans, c.step_trans) * extent;
  d.ty = r.uniform(-c.step_trans, c.step_trans) * extent;
  return d;
}

// base pose advanced t steps; zoom kept inside its sampling range
Pose pose_at(const Pose& base, const Pose& step, int t, const SimConfig& c) {
  Pose p = base;
  p.rot += t * step.rot;
  p.zoom = std::clamp(base.zoom + t * step.zoom, c.zoom_lo, c.zoom_hi);
  p.shear += t * step.shear;
  p.tx += t * step.tx;
  p.ty += t * step.ty;
  return p;
}

Affine pose_map(const Pose& p, int h, int w) {
  return Affine::from_params(0.5 * (w - 1), 0.5 * (h - 1), p.rot, p.zoom, p.shear, p.tx,
                             p.ty, p.flip);
}

// output->crop-window map for an S-sized view of a (cx,cy)-centered cs square
Affine crop_map(double cx, double cy, int cs, int out) {
  Affine a;
  double s = (double)cs / out;
  a.m[0] = s;
  a.m[1] = 0;
  a.m[2] = cx - 0.5 * cs + 0.5 * s - 0.5;
  a.m[3] = 0;
  a.m[4] = s;
  a.m[5] = cy - 0.5 * cs + 0.5 * s - 0.5;
  return a;
}

int sample_odd(Rng& r, int lo, int hi) {
  int lo_odd = (lo % 2 == 0) ? lo + 1 : lo;
  int n = (hi - lo_odd) / 2 + 1;
  return lo_odd + 2 * r.uniform_int(0, n - 1);
}

ArrayD blur_planes(const ArrayD& img, const ArrayD& kernel) {
  return core::conv2d_reflect_d(img, kernel);
}

}  // namespace

ClipSample simulate_clip(const SourcePair& src, const ArrayD& bg, const SimConfig& cfg,
                         uint64_t seed) {
  assert(src.fg.dim(0) == 3 && src.alpha.dim(0) == 1 && bg.dim(0) == 3);
  int T = cfg.frames, S = cfg.train_size;
  int fh = src.fg.dim(1), fw = src.fg.dim(2);
  int bh = bg.dim(1), bw = bg.dim(2);
  Rng r(splitmix64(seed ^ 0x636c6970ull));

  int cs = cfg.crop_sizes[r.uniform_int(0, (int)cfg.crop_sizes.size() - 1)];

  Pose fg_base, fg_step, bg_base, bg_step;
  if (cfg.motion) {
    double fext = std::min(fh, fw), bext = std::min(bh, bw);
    fg_base = sample_base(r, cfg, fext);
    fg_step = sample_step(r, cfg, fext);
    bg_base = sample_base(r, cfg, bext);
    bg_step = sample_step(r, cfg, bext);
  }

  int tri_k = sample_odd(r, cfg.trimap_kmin, cfg.trimap_kmax);

  bool do_hist = false, do_blur = false, do_noise = false, do_jpeg = false;
  ArrayD blur_k;
  double noise_sigma = 0.0;
  int jpeg_q = 90;
  if (cfg.augment) {
    do_hist = r.bernoulli(cfg.p_hist);
    do_blur = r.bernoulli(cfg.p_blur);
    if (do_blur) {
      int len = sample_odd(r, 3, std::max(3, cfg.max_blur));
      blur_k = core::motion_blur_kernel(len, r.uniform(0.0, 180.0));
    }
    do_noise = r.bernoulli(cfg.p_noise);
    if (do_noise) noise_sigma = r.uniform(0.2, 1.0) * cfg.max_noise_sigma;
    do_jpeg = r.bernoulli(cfg.p_jpeg);
    if (do_jpeg) jpeg_q = r.uniform_int(cfg.jpeg_qlo, cfg.jpeg_qhi);
  }

  // Crop centers. The fg window tracks a random unknown pixel of the
  // frame-0 warped alpha so the matting boundary stays in view; the bg
  // window lands anywhere that mostly fits.
  double fcx, fcy;
  {
    ArrayD a0 = warp_affine(src.alpha, pose_map(pose_at(fg_base, fg_step, 0, cfg), fh, fw),
                            fh, fw, Border::kZero);
    std::vector<int> unk;
    unk.reserve(1024);
    for (int i = 0; i < fh * fw; ++i)
      if (a0.data[i] > 0.0 && a0.data[i] < 1.0) unk.push_back(i);
    if (unk.empty())
      for (int i = 0; i < fh * fw; ++i)
        if (a0.data[i] > 0.0) unk.push_back(i);
    if (unk.empty()) {
      fcx = 0.5 * (fw - 1);
      fcy = 0.5 * (fh - 1);
      r.uniform_int(0, 1);  // keep the draw count independent of content
    } else {
      int pick = unk[r.uniform_int(0, (int)unk.size() - 1)];
      fcx = pick % fw;
      fcy = pick / fw;
    }
  }
  double bcx = bw > cs ? r.uniform(0.5 * cs, bw - 0.5 * cs) : 0.5 * (bw - 1);
  double bcy = bh > cs ? r.uniform(0.5 * cs, bh - 0.5 * cs) : 0.5 * (bh - 1);
  Affine fg_crop = crop_map(fcx, fcy, cs, S);
  Affine bg_crop = crop_map(bcx, bcy, cs, S);

  ClipSample clip;
  clip.frames.reserve(T);
  for (int t = 0; t < T; ++t) {
    Affine fmap = pose_map(pose_at(fg_base, fg_step, t, cfg), fh, fw).compose(fg_crop);
    Affine bmap = pose_map(pose_at(bg_base, bg_step, t, cfg), bh, bw).compose(bg_crop);
    ArrayD fgt = warp_affine(src.fg, fmap, S, S, Border::kZero);
    ArrayD at = warp_affine(src.alpha, fmap, S, S, Border::kZero);
    ArrayD bgt = warp_affine(bg, bmap, S, S, Border::kReflect);

    if (do_hist) fgt = core::histogram_match(fgt, bgt, at, ArrayD{});
    if (do_blur) {
      fgt = blur_planes(fgt, blur_k);
      at = blur_planes(at, blur_k);
      bgt = blur_planes(bgt, blur_k);
    }
    for (double& v : at.data) v = std::clamp(v, 0.0, 1.0);

    ArrayD frame = composite(fgt, at, bgt);
    if (do_noise) {
      for (double& v : frame.data) v = std::clamp(v + r.normal(0.0, noise_sigma), 0.0, 1.0);
    }
    if (do_jpeg) frame = core::jpeg_roundtrip(frame, jpeg_q);

    clip.trimaps.push_back(make_trimap(at, tri_k));
    clip.frames.push_back(std::move(frame));
    clip.alphas.push_back(std::move(at));
    clip.fgs.push_back(std::move(fgt));
    clip.bgs.push_back(std::move(bgt));
  }
  return clip;
}

namespace {

std::string frame_name(const char* base, int t) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%03d.png", base, t);
  return buf;
}

}  // namespace

void save_clip(const std::string& dir, const ClipSample& clip, uint64_t seed) {
  fs::create_directories(dir);
  for (int t = 0; t < clip.length(); ++t) {
    core::write_png8(dir + "/" + frame_name("frame", t), clip.frames[t]);
    core::write_png16(dir + "/" + frame_name("alpha", t), clip.alphas[t]);
    core::write_png8(dir + "/" + frame_name("trimap", t), trimap_to_gray(clip.trimaps[t]));
    core::write_png8(dir + "/" + frame_name("fg", t), clip.fgs[t]);
    core::write_png8(dir + "/" + frame_name("bg", t), clip.bgs[t]);
  }
  nlohmann::json j;
  j["frames"] = clip.length();
  j["size"] = clip.size();
  j["seed"] = seed;
  std::ofstream out(dir + "/clip.json");
  out << j.dump(2) << "\n";
}

ClipSample load_clip(const std::string& dir) {
  std::ifstream in(dir + "/clip.json");
  if (!in) throw UsageError("not a clip directory (missing clip.json): " + dir);
  nlohmann::json j;
  in >> j;
  int T = j.at("frames").get<int>();
  ClipSample clip;
  for (int t = 0; t < T; ++t) {
    clip.frames.push_back(core::read_png(dir + "/" + frame_name("frame", t)));
    clip.alphas.push_back(core::read_png(dir + "/" + frame_name("alpha", t)));
    clip.trimaps.push_back(gray_to_trimap(core::read_png(dir + "/" + frame_name("trimap", t))));
    std::string fgp = dir + "/" + frame_name("fg", t);
    if (fs::exists(fgp)) {
      clip.fgs.push_back(core::read_png(fgp));
      clip.bgs.push_back(core::read_png(dir + "/" + frame_name("bg", t)));
    }
  }
  return clip;
}

SourcePair demo_foreground(int size, uint64_t seed) {
  Rng r(splitmix64(seed ^ 0x66676400ull));
  int h = size, w = size;
  double cx = 0.5 * w + r.uniform(-0.08, 0.08) * w;
  double cy = 0.5 * h + r.uniform(-0.08, 0.08) * h;
  double rad = r.uniform(0.20, 0.30) * size;
  double ex = r.uniform(0.75, 1.3);  // ellipse stretch along x
  double feather = r.uniform(1.5, 4.0);
  double lcx = cx + r.uniform(-0.9, 0.9) * rad;
  double lcy = cy + r.uniform(-0.9, 0.9) * rad;
  double lrad = r.uniform(0.35, 0.6) * rad;

  SourcePair sp;
  sp.alpha = ArrayD::zeros({1, h, w});
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double dx = (x - cx) / ex, dy = y - cy;
      double d1 = std::sqrt(dx * dx + dy * dy);
      double d2 = std::hypot(x - lcx, y - lcy);
      double a = std::max((rad - d1) / feather + 0.5, (lrad - d2) / feather + 0.5);
      sp.alpha.data[y * w + x] = std::clamp(a, 0.0, 1.0);
    }

  double base[3], fx[3], fy[3], ph[3];
  for (int c = 0; c < 3; ++c) {
    base[c] = r.uniform(0.25, 0.85);
    fx[c] = r.uniform(0.5, 3.0);
    fy[c] = r.uniform(0.5, 3.0);
    ph[c] = r.uniform(0.0, 6.28318530717958648);
  }
  sp.fg = ArrayD::zeros({3, h, w});
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        double v = base[c] +
                   0.22 * std::sin(6.28318530717958648 * (fx[c] * x + fy[c] * y) / size +
                                   ph[c]);
        sp.fg.data[((int64_t)c * h + y) * w + x] = std::clamp(v, 0.0, 1.0);
      }
  return sp;
}

ArrayD demo_background(int size, uint64_t seed) {
  Rng r(splitmix64(seed ^ 0x62676400ull));
  int h = size, w = size;
  double base[3], gx[3], gy[3], fr[3], ph[3];
  for (int c = 0; c < 3; ++c) {
    base[c] = r.uniform(0.15, 0.8);
    gx[c] = r.uniform(-0.3, 0.3);
    gy[c] = r.uniform(-0.3, 0.3);
    fr[c] = r.uniform(2.0, 6.0);
    ph[c] = r.uniform(0.0, 6.28318530717958648);
  }
  int checker = 1 << r.uniform_int(3, 5);  // 8..32 px cells
  double camp = r.uniform(0.05, 0.18);
  ArrayD bg = ArrayD::zeros({3, h, w});
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        double v = base[c] + gx[c] * ((double)x / w - 0.5) + gy[c] * ((double)y / h - 0.5);
        v += 0.1 * std::sin(6.28318530717958648 * fr[c] * (x + y) / (2.0 * size) + ph[c]);
        v += (((x / checker) ^ (y / checker)) & 1) ? camp : -camp;
        bg.data[((int64_t)c * h + y) * w + x] = std::clamp(v, 0.0, 1.0);
      }
  return bg;
}

}  // namespace otvm::clipsim
