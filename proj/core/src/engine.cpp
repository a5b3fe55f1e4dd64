#include "otvm/engine.hpp"

#include <cassert>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "json.hpp"

#include "otvm/clipsim.hpp"
#include "otvm/image_io.hpp"

namespace otvm::engine {

using core::ArrayT;
using core::Tensor;

namespace {

// reflect-101 padding on the bottom/right up to a multiple of m
ArrayD pad_to_multiple(const ArrayD& x, int m, int& ph, int& pw) {
  int c = x.dim(0), h = x.dim(1), w = x.dim(2);
  ph = (m - h % m) % m;
  pw = (m - w % m) % m;
  if (!ph && !pw) return x;
  int H = h + ph, W = w + pw;
  ArrayD out({c, H, W});
  auto refl = [](int i, int n) { return i < n ? i : 2 * n - 2 - i; };
  for (int ci = 0; ci < c; ++ci)
    for (int y = 0; y < H; ++y) {
      const double* src = x.data.data() + ((int64_t)ci * h + refl(y, h)) * w;
      double* dst = out.data.data() + ((int64_t)ci * H + y) * W;
      for (int xx = 0; xx < W; ++xx) dst[xx] = src[refl(xx, w)];
    }
  return out;
}

ArrayD crop(const ArrayD& x, int h, int w) {
  if (x.dim(1) == h && x.dim(2) == w) return x;
  int c = x.dim(0), W = x.dim(2);
  ArrayD out({c, h, w});
  for (int ci = 0; ci < c; ++ci)
    for (int y = 0; y < h; ++y)
      std::copy_n(x.data.data() + ((int64_t)ci * x.dim(1) + y) * W, w,
                  out.data.data() + ((int64_t)ci * h + y) * w);
  return out;
}

template <typename T>
ArrayD to_double(const ArrayT<T>& a) {
  return core::cast_array<double>(a);
}

}  // namespace

int64_t peak_rss_kb() {
  std::ifstream in("/proc/self/status");
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("VmHWM:", 0) == 0) {
      int64_t kb = 0;
      std::sscanf(line.c_str(), "VmHWM: %ld", &kb);
      return kb;
    }
  }
  return 0;
}

template <typename T>
SequenceResult run_sequence(const Model<T>& model, const std::vector<ArrayD>& frames,
                            const ArrayD& trimap0, const InferConfig& icfg,
                            bool want_fgbg) {
  assert(!frames.empty() && trimap0.dim(0) == 3);
  core::NoGradGuard ng;
  SequenceResult res;
  auto t_start = std::chrono::steady_clock::now();

  int H = frames[0].dim(1), W = frames[0].dim(2);
  prop::MemoryBank<T> bank(icfg.mem_intermediate);

  for (int t = 0; t < (int)frames.size(); ++t) {
    auto f_start = std::chrono::steady_clock::now();
    int ph = 0, pw = 0;
    Tensor<T> fr =
        Tensor<T>::constant(core::cast_array<T>(pad_to_multiple(frames[t], 16, ph, pw)));

    Tensor<T> tri;
    if (t == 0) {
      tri = Tensor<T>::constant(core::cast_array<T>(pad_to_multiple(trimap0, 16, ph, pw)));
    } else {
      tri = model.trimap.propagate(bank, fr);
    }
    auto a = model.alpha_net.forward(fr, tri);
    auto r = model.refine_net.forward(fr, tri, a.alpha, a.hidden64);

    // the first frame's given trimap stays authoritative in memory
    Tensor<T> mem_tri = t == 0 ? tri : r.trimap;
    auto entry = model.trimap.encode_memory(t, fr, mem_tri, r.alpha, r.hidden16, true, true);
    if (t == 0) {
      bank.set_reference(std::move(entry));
    } else {
      if (t % icfg.mem_interval == 0) bank.push_intermediate(entry);
      bank.set_previous(std::move(entry));
    }

    FrameResult out;
    out.alpha = crop(to_double(r.alpha.val()), H, W);
    out.trimap = crop(to_double(r.trimap.val()), H, W);
    if (want_fgbg) {
      out.fg = crop(to_double(r.fg.val()), H, W);
      out.bg = crop(to_double(r.bg.val()), H, W);
    }
    out.memory_frames = bank.frame_indices();
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - f_start)
                      .count();
    res.frames.push_back(std::move(out));
  }

  res.total_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  res.peak_rss_kb = peak_rss_kb();
  return res;
}

void write_outputs(const std::string& dir, const SequenceResult& res,
                   const InferConfig& icfg, const std::string& preset) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  char buf[64];
  for (int t = 0; t < (int)res.frames.size(); ++t) {
    const FrameResult& f = res.frames[t];
    std::snprintf(buf, sizeof(buf), "%s/alpha_%03d.png", dir.c_str(), t);
    if (icfg.png16)
      core::write_png16(buf, f.alpha);
    else
      core::write_png8(buf, f.alpha);
    std::snprintf(buf, sizeof(buf), "%s/trimap_%03d.png", dir.c_str(), t);
    core::write_png8(buf, clipsim::trimap_to_gray(f.trimap));
    if (f.fg.numel()) {
      std::snprintf(buf, sizeof(buf), "%s/fg_%03d.png", dir.c_str(), t);
      core::write_png8(buf, f.fg);
      std::snprintf(buf, sizeof(buf), "%s/bg_%03d.png", dir.c_str(), t);
      core::write_png8(buf, f.bg);
    }
  }

  std::ofstream csv(dir + "/timing.csv");
  csv << "frame,seconds,memory_frames\n";
  for (int t = 0; t < (int)res.frames.size(); ++t) {
    csv << t << "," << res.frames[t].seconds << ",\"";
    for (size_t i = 0; i < res.frames[t].memory_frames.size(); ++i)
      csv << (i ? " " : "") << res.frames[t].memory_frames[i];
    csv << "\"\n";
  }

  nlohmann::json j;
  j["frames"] = res.frames.size();
  if (!res.frames.empty()) {
    j["height"] = res.frames[0].alpha.dim(1);
    j["width"] = res.frames[0].alpha.dim(2);
  }
  j["total_seconds"] = res.total_seconds;
  j["peak_rss_kb"] = res.peak_rss_kb;
  j["preset"] = preset;
  j["memory_interval"] = icfg.mem_interval;
  j["memory_intermediates"] = icfg.mem_intermediate;
  std::ofstream mf(dir + "/manifest.json");
  mf << j.dump(2) << "\n";
}

template SequenceResult run_sequence<float>(const Model<float>&,
                                            const std::vector<ArrayD>&, const ArrayD&,
                                            const InferConfig&, bool);
template SequenceResult run_sequence<double>(const Model<double>&,
                                             const std::vector<ArrayD>&, const ArrayD&,
                                             const InferConfig&, bool);

}  // namespace otvm::engine
