#include "common.hpp"

#include <filesystem>

#include "otvm/clipsim.hpp"

using namespace otvm;
using clipsim::ClipSample;
using clipsim::SourcePair;
using otvm::core::ArrayD;
using otvm::core::Rng;
using testutil::rand_array;

TEST_SUITE_BEGIN("clipsim");

namespace {

// alpha with exact 0/1 regions plus a fractional ring, so all three trimap
// classes are populated
ArrayD banded_alpha(int h, int w) {
  ArrayD a({1, h, w});
  double cx = (w - 1) / 2.0, cy = (h - 1) / 2.0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double r = std::hypot(x - cx, y - cy);
      double v = (h / 3.0 + 1.5 - r) / 3.0;
      a[y * w + x] = std::clamp(v, 0.0, 1.0);
    }
  return a;
}

SimConfig tiny_cfg() {
  SimConfig cfg;
  cfg.frames = 3;
  cfg.train_size = 32;
  cfg.crop_sizes = {40, 48};
  return cfg;
}

}  // namespace

TEST_CASE("make_trimap matches a brute-force dilation") {
  int h = 24, w = 20;
  ArrayD a = banded_alpha(h, w);
  for (int k : {1, 5, 11}) {
    ArrayD tri = clipsim::make_trimap(a, k);
    REQUIRE(tri.shape == std::vector<int>({3, h, w}));
    int r = k / 2;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        bool unk = false;
        for (int dy = -r; dy <= r && !unk; ++dy)
          for (int dx = -r; dx <= r && !unk; ++dx) {
            int yy = y + dy, xx = x + dx;
            if (yy < 0 || yy >= h || xx < 0 || xx >= w) continue;
            double v = a[yy * w + xx];
            unk = v > 0.0 && v < 1.0;
          }
        double want_bg = 0, want_unk = 0, want_fg = 0;
        if (unk)
          want_unk = 1;
        else if (a[y * w + x] == 1.0)
          want_fg = 1;
        else
          want_bg = 1;
        REQUIRE(tri.at(0, y, x) == want_bg);
        REQUIRE(tri.at(1, y, x) == want_unk);
        REQUIRE(tri.at(2, y, x) == want_fg);
      }
  }
}

TEST_CASE("make_trimap widens monotonically with the kernel") {
  ArrayD a = banded_alpha(26, 26);
  ArrayD prev = clipsim::make_trimap(a, 1);
  for (int k = 3; k <= 41; k += 2) {
    ArrayD tri = clipsim::make_trimap(a, k);
    for (int i = 0; i < 26 * 26; ++i)
      REQUIRE(tri[26 * 26 + i] >= prev[26 * 26 + i]);  // unknown only grows
    prev = tri;
  }
}

TEST_CASE("make_trimap rejects bad kernels") {
  ArrayD a = banded_alpha(8, 8);
  CHECK_THROWS_AS(clipsim::make_trimap(a, 2), std::invalid_argument);
  CHECK_THROWS_AS(clipsim::make_trimap(a, 0), std::invalid_argument);
  CHECK_THROWS_AS(clipsim::make_trimap(a, -3), std::invalid_argument);
  CHECK_THROWS_AS(clipsim::make_trimap(a, 43), std::invalid_argument);
}

TEST_CASE("trimap encodings round trip") {
  ArrayD a = banded_alpha(16, 16);
  ArrayD tri = clipsim::make_trimap(a, 5);

  ArrayD gray = clipsim::trimap_to_gray(tri);
  REQUIRE(gray.shape == std::vector<int>({1, 16, 16}));
  ArrayD back = clipsim::gray_to_trimap(gray);
  for (int64_t i = 0; i < tri.numel(); ++i) CHECK(back[i] == tri[i]);

  auto labels = clipsim::trimap_labels(tri);
  ArrayD from_labels = clipsim::labels_to_trimap(labels);
  for (int64_t i = 0; i < tri.numel(); ++i) CHECK(from_labels[i] == tri[i]);

  // the three gray levels are the only values present
  for (int64_t i = 0; i < gray.numel(); ++i) {
    double v = gray[i];
    CHECK((v == 0.0 || v == 128.0 / 255.0 || v == 1.0));
  }
}

TEST_CASE("simulated clips have consistent geometry") {
  SourcePair src = clipsim::demo_foreground(72, 7);
  ArrayD bg = clipsim::demo_background(72, 7);
  SimConfig cfg = tiny_cfg();
  ClipSample s = clipsim::simulate_clip(src, bg, cfg, 11);

  REQUIRE(s.length() == cfg.frames);
  REQUIRE(s.size() == cfg.train_size);
  for (int t = 0; t < s.length(); ++t) {
    REQUIRE(s.frames[t].shape == std::vector<int>({3, 32, 32}));
    REQUIRE(s.alphas[t].shape == std::vector<int>({1, 32, 32}));
    REQUIRE(s.trimaps[t].shape == std::vector<int>({3, 32, 32}));
    for (int64_t i = 0; i < s.alphas[t].numel(); ++i) {
      CHECK(s.alphas[t][i] >= 0.0);
      CHECK(s.alphas[t][i] <= 1.0);
    }
    // one-hot trimap planes
    for (int i = 0; i < 32 * 32; ++i) {
      double sum = s.trimaps[t][i] + s.trimaps[t][32 * 32 + i] + s.trimaps[t][2 * 32 * 32 + i];
      CHECK(sum == 1.0);
    }
  }
}

TEST_CASE("clean clips composite exactly from their layers") {
  SourcePair src = clipsim::demo_foreground(72, 3);
  ArrayD bg = clipsim::demo_background(72, 4);
  SimConfig cfg = tiny_cfg();
  cfg.augment = false;  // no degradations between layers and frame
  ClipSample s = clipsim::simulate_clip(src, bg, cfg, 5);
  for (int t = 0; t < s.length(); ++t) {
    ArrayD comp = clipsim::composite(s.fgs[t], s.alphas[t], s.bgs[t]);
    for (int64_t i = 0; i < comp.numel(); ++i) REQUIRE(s.frames[t][i] == comp[i]);
  }
}

TEST_CASE("simulation is deterministic in the seed") {
  SourcePair src = clipsim::demo_foreground(72, 9);
  ArrayD bg = clipsim::demo_background(72, 9);
  SimConfig cfg = tiny_cfg();
  ClipSample a = clipsim::simulate_clip(src, bg, cfg, 21);
  ClipSample b = clipsim::simulate_clip(src, bg, cfg, 21);
  ClipSample c = clipsim::simulate_clip(src, bg, cfg, 22);

  REQUIRE(a.length() == b.length());
  bool differs = false;
  for (int t = 0; t < a.length(); ++t) {
    for (int64_t i = 0; i < a.frames[t].numel(); ++i) {
      REQUIRE(a.frames[t][i] == b.frames[t][i]);
      differs |= a.frames[t][i] != c.frames[t][i];
    }
    for (int64_t i = 0; i < a.alphas[t].numel(); ++i)
      REQUIRE(a.alphas[t][i] == b.alphas[t][i]);
    for (int64_t i = 0; i < a.trimaps[t].numel(); ++i)
      REQUIRE(a.trimaps[t][i] == b.trimaps[t][i]);
  }
  CHECK(differs);  // a different seed actually changes the clip
}

TEST_CASE("clips survive a save/load round trip") {
  SourcePair src = clipsim::demo_foreground(72, 13);
  ArrayD bg = clipsim::demo_background(72, 13);
  SimConfig cfg = tiny_cfg();
  ClipSample s = clipsim::simulate_clip(src, bg, cfg, 31);

  std::string dir =
      (std::filesystem::temp_directory_path() / "otvm_clip_test").string();
  std::filesystem::remove_all(dir);
  clipsim::save_clip(dir, s, 31);
  ClipSample back = clipsim::load_clip(dir);

  REQUIRE(back.length() == s.length());
  REQUIRE(back.size() == s.size());
  for (int t = 0; t < s.length(); ++t) {
    // frames and layers are 8-bit on disk, alpha 16-bit, trimaps exact
    double worst_f = 0, worst_a = 0;
    for (int64_t i = 0; i < s.frames[t].numel(); ++i)
      worst_f = std::max(worst_f, std::abs(back.frames[t][i] - s.frames[t][i]));
    for (int64_t i = 0; i < s.alphas[t].numel(); ++i)
      worst_a = std::max(worst_a, std::abs(back.alphas[t][i] - s.alphas[t][i]));
    CHECK(worst_f <= 0.5 / 255.0 + 1e-12);
    CHECK(worst_a <= 0.5 / 65535.0 + 1e-12);
    for (int64_t i = 0; i < s.trimaps[t].numel(); ++i)
      REQUIRE(back.trimaps[t][i] == s.trimaps[t][i]);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("demo sources expose all trimap classes") {
  SourcePair src = clipsim::demo_foreground(64, 17);
  REQUIRE(src.fg.shape == std::vector<int>({3, 64, 64}));
  REQUIRE(src.alpha.shape == std::vector<int>({1, 64, 64}));
  int n0 = 0, n1 = 0, nmid = 0;
  for (int64_t i = 0; i < src.alpha.numel(); ++i) {
    double v = src.alpha[i];
    REQUIRE(v >= 0.0);
    REQUIRE(v <= 1.0);
    if (v == 0.0)
      ++n0;
    else if (v == 1.0)
      ++n1;
    else
      ++nmid;
  }
  CHECK(n0 > 0);
  CHECK(n1 > 0);
  CHECK(nmid > 0);

  ArrayD bg = clipsim::demo_background(64, 17);
  REQUIRE(bg.shape == std::vector<int>({3, 64, 64}));
  for (int64_t i = 0; i < bg.numel(); ++i) {
    REQUIRE(bg[i] >= 0.0);
    REQUIRE(bg[i] <= 1.0);
  }
}

TEST_SUITE_END();
