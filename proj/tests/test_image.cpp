#include "common.hpp"

#include <cstdio>
#include <filesystem>

#include "otvm/image_io.hpp"
#include "otvm/image_ops.hpp"

using namespace otvm::core;
using testutil::rand_array;

TEST_SUITE_BEGIN("image");

TEST_CASE("identity affine is a no-op away from borders") {
  Rng rng(31);
  ArrayD img = rand_array(rng, {3, 8, 9}, 0, 1);
  ArrayD out = warp_affine(img, Affine::identity(), 8, 9, Border::kZero);
  for (int64_t i = 0; i < img.numel(); ++i) CHECK(out[i] == doctest::Approx(img[i]));
}

TEST_CASE("pure translation shifts pixels") {
  ArrayD img = ArrayD::zeros({1, 7, 7});
  img.at(0, 3, 3) = 1.0;
  // sampling map moves the output window right/down by (1,2)
  Affine a = Affine::identity();
  a.m[2] = -1;  // in_x = out_x - 1
  a.m[5] = -2;  // in_y = out_y - 2
  ArrayD out = warp_affine(img, a, 7, 7, Border::kZero);
  CHECK(out.at(0, 5, 4) == doctest::Approx(1.0));
  CHECK(out.at(0, 3, 3) == doctest::Approx(0.0));
}

TEST_CASE("from_params inverts the forward pose") {
  // a point rotated by the pose must land back on itself through the map
  double cx = 4, cy = 3;
  Affine inv = Affine::from_params(cx, cy, 30.0, 1.2, 5.0, 2.0, -1.0, false);
  // forward transform of input point p equals output point q  =>  inv(q) = p
  double rad = 30.0 * 3.14159265358979324 / 180.0;
  double sh = std::tan(5.0 * 3.14159265358979324 / 180.0);
  double px = 1.5, py = -0.8;  // relative to center
  // forward: rotate(zoom(shear(p))) + t
  double sx = px + sh * py, sy = py;
  double zx = 1.2 * sx, zy = 1.2 * sy;
  double qx = std::cos(rad) * zx - std::sin(rad) * zy + 2.0 + cx;
  double qy = std::sin(rad) * zx + std::cos(rad) * zy - 1.0 + cy;
  double ox, oy;
  inv.apply(qx, qy, ox, oy);
  CHECK(ox == doctest::Approx(px + cx).epsilon(1e-9));
  CHECK(oy == doctest::Approx(py + cy).epsilon(1e-9));
}

TEST_CASE("hflip mirrors around the center") {
  ArrayD img = ArrayD::zeros({1, 5, 5});
  img.at(0, 2, 0) = 1.0;
  Affine a = Affine::from_params(2, 2, 0, 1, 0, 0, 0, true);
  ArrayD out = warp_affine(img, a, 5, 5, Border::kZero);
  CHECK(out.at(0, 2, 4) == doctest::Approx(1.0));
}

TEST_CASE("square dilation equals brute force") {
  Rng rng(33);
  for (int trial = 0; trial < 20; ++trial) {
    int h = rng.uniform_int(4, 12), w = rng.uniform_int(4, 12);
    int k = 2 * rng.uniform_int(0, 3) + 1;
    ArrayT<uint8_t> m({h, w});
    for (int i = 0; i < h * w; ++i) m.data[i] = rng.bernoulli(0.25) ? 1 : 0;
    ArrayT<uint8_t> d = dilate_square(m, k);
    int r = k / 2;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        uint8_t want = 0;
        for (int dy = -r; dy <= r && !want; ++dy)
          for (int dx = -r; dx <= r && !want; ++dx) {
            int yy = y + dy, xx = x + dx;
            if (yy >= 0 && yy < h && xx >= 0 && xx < w && m.data[yy * w + xx]) want = 1;
          }
        REQUIRE(d.data[y * w + x] == want);
      }
  }
}

TEST_CASE("gaussian kernel is normalized and symmetric") {
  for (double sigma : {0.8, 1.4, 4.0}) {
    std::vector<double> k = gaussian_kernel1d(sigma);
    REQUIRE(k.size() % 2 == 1);
    double s = 0;
    for (double v : k) s += v;
    CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
    for (size_t i = 0; i < k.size() / 2; ++i)
      CHECK(k[i] == doctest::Approx(k[k.size() - 1 - i]));
  }
}

TEST_CASE("separable blur preserves constants") {
  ArrayD img = ArrayD::full({2, 6, 7}, 0.37);
  ArrayD out = blur_separable_d(img, gaussian_kernel1d(1.7));
  for (int64_t i = 0; i < out.numel(); ++i) CHECK(out[i] == doctest::Approx(0.37));
}

TEST_CASE("motion blur kernel sums to one") {
  for (int len : {1, 3, 7, 11}) {
    ArrayD k = motion_blur_kernel(len, 37.0);
    double s = 0;
    for (double v : k.data) s += v;
    CHECK(s == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("histogram match reaches the reference distribution") {
  Rng rng(34);
  ArrayD src({1, 16, 16}), ref({1, 16, 16});
  for (int64_t i = 0; i < src.numel(); ++i) {
    src[i] = rng.uniform(0.0, 0.4);
    ref[i] = rng.uniform(0.5, 1.0);
  }
  ArrayD out = histogram_match(src, ref, ArrayD{}, ArrayD{});
  double mean = 0;
  for (double v : out.data) mean += v;
  mean /= out.numel();
  CHECK(mean > 0.45);  // pulled into the reference range
  CHECK(mean < 1.0);
}

TEST_CASE("png round trips exactly at 8 and 16 bit") {
  Rng rng(35);
  std::string dir = (std::filesystem::temp_directory_path() / "otvm_img_test").string();
  std::filesystem::create_directories(dir);

  ArrayD rgb({3, 5, 6});
  for (int64_t i = 0; i < rgb.numel(); ++i)
    rgb[i] = (double)rng.uniform_int(0, 255) / 255.0;
  write_png8(dir + "/c.png", rgb);
  ArrayD back = read_png(dir + "/c.png");
  REQUIRE(back.shape == rgb.shape);
  for (int64_t i = 0; i < rgb.numel(); ++i) CHECK(back[i] == rgb[i]);

  ArrayD gray({1, 4, 4});
  for (int64_t i = 0; i < gray.numel(); ++i)
    gray[i] = (double)rng.uniform_int(0, 65535) / 65535.0;
  write_png16(dir + "/g.png", gray);
  ArrayD gback = read_png(dir + "/g.png");
  REQUIRE(gback.shape == gray.shape);
  for (int64_t i = 0; i < gray.numel(); ++i) CHECK(gback[i] == gray[i]);
}

TEST_CASE("jpeg round trip stays close at high quality") {
  Rng rng(36);
  ArrayD img({3, 16, 16});
  // smooth content compresses well
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < 16; ++y)
      for (int x = 0; x < 16; ++x)
        img[(c * 16 + y) * 16 + x] = 0.5 + 0.3 * std::sin(0.3 * x + 0.2 * y + c);
  ArrayD out = jpeg_roundtrip(img, 95);
  REQUIRE(out.shape == img.shape);
  double worst = 0;
  for (int64_t i = 0; i < img.numel(); ++i)
    worst = std::max(worst, std::abs(out[i] - img[i]));
  CHECK(worst < 0.1);
}

TEST_SUITE_END();
