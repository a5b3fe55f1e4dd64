#include "common.hpp"

using namespace otvm::core;
using testutil::gradcheck;
using testutil::margin_array;
using testutil::project;
using testutil::rand_array;

TEST_SUITE_BEGIN("ops");

TEST_CASE("elementwise forward values") {
  Rng rng(11);
  ArrayD av = rand_array(rng, {2, 3, 4});
  ArrayD bv = rand_array(rng, {2, 3, 4}, 0.5, 2.0);
  TensorD a = TensorD::constant(av), b = TensorD::constant(bv);
  TensorD s = add(a, b), d = otvm::core::div_t(a, b), m = mul(a, b);
  for (int64_t i = 0; i < av.numel(); ++i) {
    CHECK(s.val()[i] == doctest::Approx(av[i] + bv[i]));
    CHECK(d.val()[i] == doctest::Approx(av[i] / bv[i]));
    CHECK(m.val()[i] == doctest::Approx(av[i] * bv[i]));
  }
}

TEST_CASE("elementwise gradients") {
  Rng rng(12);
  TensorD a = TensorD::leaf(rand_array(rng, {2, 3, 3}));
  TensorD b = TensorD::leaf(margin_array(rng, {2, 3, 3}, 0.4));
  ArrayD r = rand_array(rng, {2, 3, 3});

  gradcheck([&] { return project(add(a, b), r); }, {a, b});
  gradcheck([&] { return project(sub(a, b), r); }, {a, b});
  gradcheck([&] { return project(mul(a, b), r); }, {a, b});
  gradcheck([&] { return project(otvm::core::div_t(a, b), r); }, {a, b});
  gradcheck([&] { return project(neg(a), r); }, {a});
  gradcheck([&] { return project(add_scalar(a, 0.7), r); }, {a});
  gradcheck([&] { return project(mul_scalar(a, -1.3), r); }, {a});
  gradcheck([&] { return project(sigmoid_t(a), r); }, {a});
}

TEST_CASE("kinked ops away from their kinks") {
  Rng rng(13);
  TensorD a = TensorD::leaf(margin_array(rng, {2, 4, 4}, 0.35));
  ArrayD r = rand_array(rng, {2, 4, 4});
  gradcheck([&] { return project(abs_t(a), r); }, {a});
  gradcheck([&] { return project(relu(a), r); }, {a});
  gradcheck([&] { return project(lrelu(a, 0.01), r); }, {a});

  // clamp bounds chosen so every value sits strictly inside or outside
  TensorD c = TensorD::leaf(margin_array(rng, {1, 5, 5}, 0.35));
  ArrayD rc = rand_array(rng, {1, 5, 5});
  gradcheck([&] { return project(clamp(c, -0.2, 0.2), rc); }, {c});

  TensorD p = TensorD::leaf(rand_array(rng, {1, 4, 4}, 0.3, 2.0));
  ArrayD rp = rand_array(rng, {1, 4, 4});
  gradcheck([&] { return project(log_t(p), rp); }, {p});
}

TEST_CASE("reductions and reshapes") {
  Rng rng(14);
  TensorD a = TensorD::leaf(rand_array(rng, {3, 4, 2}));
  gradcheck([&] { return sum_all(a); }, {a});
  gradcheck([&] { return mean_all(a); }, {a});

  ArrayD r = rand_array(rng, {3, 4, 2});
  gradcheck([&] { return project(mul_const(a, r), r); }, {a});

  TensorD b = TensorD::leaf(rand_array(rng, {2, 4, 2}));
  ArrayD rcat = rand_array(rng, {5, 4, 2});
  gradcheck([&] { return project(concat_c<double>({a, b}), rcat); }, {a, b});

  ArrayD rs = rand_array(rng, {2, 4, 2});
  gradcheck([&] { return project(slice_c(a, 1, 3), rs); }, {a});

  ArrayD rnc = rand_array(rng, {8, 3});
  gradcheck([&] { return project(chw_to_nc(a), rnc); }, {a});
  TensorD nc = TensorD::leaf(rand_array(rng, {6, 4}));
  ArrayD rchw = rand_array(rng, {4, 2, 3});
  gradcheck([&] { return project(nc_to_chw(nc, 2, 3), rchw); }, {nc});

  TensorD r1 = TensorD::leaf(rand_array(rng, {3, 4}));
  TensorD r2 = TensorD::leaf(rand_array(rng, {2, 4}));
  ArrayD rr = rand_array(rng, {5, 4});
  gradcheck([&] { return project(concat_rows<double>({r1, r2}), rr); }, {r1, r2});
}

TEST_CASE("matmul and softmax") {
  Rng rng(15);
  TensorD a = TensorD::leaf(rand_array(rng, {3, 4}));
  TensorD b = TensorD::leaf(rand_array(rng, {4, 5}));
  TensorD bt = TensorD::leaf(rand_array(rng, {5, 4}));
  ArrayD r = rand_array(rng, {3, 5});
  gradcheck([&] { return project(matmul_nn(a, b), r); }, {a, b});
  gradcheck([&] { return project(matmul_nt(a, bt), r); }, {a, bt});

  TensorD x = TensorD::leaf(rand_array(rng, {3, 4, 4}, -2, 2));
  ArrayD rx = rand_array(rng, {3, 4, 4});
  gradcheck([&] { return project(softmax_c(x), rx); }, {x});
  TensorD m = TensorD::leaf(rand_array(rng, {4, 6}, -2, 2));
  ArrayD rm = rand_array(rng, {4, 6});
  gradcheck([&] { return project(softmax_rows(m), rm); }, {m});

  // rows sum to one
  TensorD sm = softmax_rows(m);
  for (int i = 0; i < 4; ++i) {
    double s = 0;
    for (int j = 0; j < 6; ++j) s += sm.val()[i * 6 + j];
    CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("conv2d against direct summation") {
  Rng rng(16);
  ArrayD xv = rand_array(rng, {2, 5, 6});
  ArrayD wv = rand_array(rng, {3, 2, 3, 3});
  ArrayD bv = rand_array(rng, {3});
  TensorD x = TensorD::constant(xv), w = TensorD::constant(wv), b = TensorD::constant(bv);
  int stride = 2, pad = 1;
  TensorD y = conv2d(x, w, b, stride, pad);
  int Ho = (5 + 2 * pad - 3) / stride + 1, Wo = (6 + 2 * pad - 3) / stride + 1;
  REQUIRE(y.shape() == std::vector<int>{3, Ho, Wo});
  for (int co = 0; co < 3; ++co)
    for (int oy = 0; oy < Ho; ++oy)
      for (int ox = 0; ox < Wo; ++ox) {
        double s = bv[co];
        for (int ci = 0; ci < 2; ++ci)
          for (int ky = 0; ky < 3; ++ky)
            for (int kx = 0; kx < 3; ++kx) {
              int iy = oy * stride + ky - pad, ix = ox * stride + kx - pad;
              if (iy < 0 || iy >= 5 || ix < 0 || ix >= 6) continue;
              s += xv[(ci * 5 + iy) * 6 + ix] * wv[((co * 2 + ci) * 3 + ky) * 3 + kx];
            }
        CHECK(y.val()[(co * Ho + oy) * Wo + ox] == doctest::Approx(s).epsilon(1e-10));
      }
}

TEST_CASE("conv2d gradients") {
  Rng rng(17);
  TensorD x = TensorD::leaf(rand_array(rng, {2, 5, 5}));
  TensorD w = TensorD::leaf(rand_array(rng, {3, 2, 3, 3}));
  TensorD b = TensorD::leaf(rand_array(rng, {3}));

  SUBCASE("stride 1") {
    ArrayD r = rand_array(rng, {3, 5, 5});
    gradcheck([&] { return project(conv2d(x, w, b, 1, 1), r); }, {x, w, b});
  }
  SUBCASE("stride 2") {
    ArrayD r = rand_array(rng, {3, 3, 3});
    gradcheck([&] { return project(conv2d(x, w, b, 2, 1), r); }, {x, w, b});
  }
  SUBCASE("dilation 2") {
    ArrayD r = rand_array(rng, {3, 5, 5});
    gradcheck([&] { return project(conv2d(x, w, b, 1, 2, 2), r); }, {x, w, b});
  }
  SUBCASE("no bias") {
    ArrayD r = rand_array(rng, {3, 5, 5});
    gradcheck([&] { return project(conv2d(x, w, TensorD(), 1, 1), r); }, {x, w});
  }
}

TEST_CASE("filter standardization and group norm") {
  Rng rng(18);
  TensorD w = TensorD::leaf(rand_array(rng, {4, 2, 3, 3}));
  ArrayD rw = rand_array(rng, {4, 2, 3, 3});
  gradcheck([&] { return project(standardize_filters(w, 1e-5), rw); }, {w});

  // standardized filters really have zero mean / unit variance
  TensorD sw = standardize_filters(w, 1e-10);
  for (int c = 0; c < 4; ++c) {
    double mu = 0, var = 0;
    for (int i = 0; i < 18; ++i) mu += sw.val()[c * 18 + i];
    mu /= 18;
    for (int i = 0; i < 18; ++i) {
      double d = sw.val()[c * 18 + i] - mu;
      var += d * d;
    }
    CHECK(std::abs(mu) < 1e-9);
    CHECK(var / 18 == doctest::Approx(1.0).epsilon(1e-6));
  }

  TensorD x = TensorD::leaf(rand_array(rng, {4, 3, 3}));
  TensorD gamma = TensorD::leaf(rand_array(rng, {4}, 0.5, 1.5));
  TensorD beta = TensorD::leaf(rand_array(rng, {4}, -0.5, 0.5));
  ArrayD rx = rand_array(rng, {4, 3, 3});
  gradcheck([&] { return project(group_norm(x, gamma, beta, 2, 1e-5), rx); }, {x, gamma, beta});
}

TEST_CASE("pooling and resampling") {
  Rng rng(19);
  // well separated values keep the argmax stable under perturbation
  ArrayD mv({1, 4, 4});
  for (int i = 0; i < 16; ++i) mv[i] = (double)((i * 7) % 16) + 0.3 * rng.unit();
  TensorD m = TensorD::leaf(mv);
  ArrayD rm = rand_array(rng, {1, 2, 2});
  gradcheck([&] { return project(maxpool2d(m, 3, 2, 1), rm); }, {m});

  TensorD x = TensorD::leaf(rand_array(rng, {2, 4, 5}));
  ArrayD ru = rand_array(rng, {2, 7, 9});
  gradcheck([&] { return project(bilinear_resize(x, 7, 9), ru); }, {x});
  ArrayD rd = rand_array(rng, {2, 2, 3});
  gradcheck([&] { return project(bilinear_resize(x, 2, 3), rd); }, {x});

  ArrayD rp = rand_array(rng, {2, 2, 2});
  gradcheck([&] { return project(adaptive_avg_pool(x, 2, 2), rp); }, {x});

  std::vector<double> k = {0.25, 0.5, 0.25};
  ArrayD rb = rand_array(rng, {2, 4, 5});
  gradcheck([&] { return project(blur_sep2d(x, k), rb); }, {x});
  ArrayD rs = rand_array(rng, {2, 2, 3});
  gradcheck([&] { return project(subsample2(x), rs); }, {x});
}

TEST_CASE("finite differences ops") {
  Rng rng(20);
  TensorD x = TensorD::leaf(rand_array(rng, {2, 4, 4}));
  ArrayD r = rand_array(rng, {2, 4, 4});
  gradcheck([&] { return project(forward_diff_x(x), r); }, {x});
  gradcheck([&] { return project(forward_diff_y(x), r); }, {x});

  // last column / row must be exactly zero
  TensorD gx = forward_diff_x(x), gy = forward_diff_y(x);
  for (int c = 0; c < 2; ++c)
    for (int y = 0; y < 4; ++y) CHECK(gx.val()[(c * 4 + y) * 4 + 3] == 0.0);
  for (int c = 0; c < 2; ++c)
    for (int xx = 0; xx < 4; ++xx) CHECK(gy.val()[(c * 4 + 3) * 4 + xx] == 0.0);
}

TEST_CASE("detach stops gradients") {
  Rng rng(21);
  TensorD a = TensorD::leaf(rand_array(rng, {1, 3, 3}));
  a.set_requires_grad(true);
  a.zero_grad();
  TensorD loss = sum_all(mul(detach(a), a));
  otvm::core::backward(loss);
  // only the tracked factor contributes, so the grad equals the values
  for (int64_t i = 0; i < a.numel(); ++i)
    CHECK(a.grad()[i] == doctest::Approx(a.val()[i]));
}

TEST_CASE("no-grad mode builds no graph") {
  Rng rng(22);
  TensorD a = TensorD::leaf(rand_array(rng, {1, 3, 3}));
  a.set_requires_grad(true);
  {
    NoGradGuard ng;
    TensorD y = mul(a, a);
    CHECK_FALSE(y.requires_grad());
    CHECK(y.node()->parents.empty());
  }
}

TEST_SUITE_END();
