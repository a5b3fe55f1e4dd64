#include "common.hpp"

#include "otvm/array.hpp"

using namespace otvm::core;

TEST_SUITE_BEGIN("array");

TEST_CASE("indexing is row major") {
  ArrayD a = ArrayD::zeros({2, 3, 4});
  a.at(1, 2, 3) = 7.0;
  CHECK(a[1 * 12 + 2 * 4 + 3] == 7.0);
  CHECK(a.numel() == 24);
  CHECK(a.dim(0) == 2);
  CHECK(a.dim(2) == 4);
}

TEST_CASE("cast round trip") {
  Rng rng(1);
  ArrayD a = testutil::rand_array(rng, {3, 2, 2});
  ArrayT<float> f = cast_array<float>(a);
  ArrayD back = cast_array<double>(f);
  for (int64_t i = 0; i < a.numel(); ++i)
    CHECK(std::abs(a[i] - back[i]) < 1e-6);
}

TEST_CASE("generator sequences repeat with the seed") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  Rng c(42), d(43);
  int differ = 0;
  for (int i = 0; i < 10; ++i) differ += c.next_u64() != d.next_u64();
  CHECK(differ == 10);
}

TEST_CASE("uniform int covers inclusive bounds") {
  Rng rng(7);
  bool lo = false, hi = false;
  for (int i = 0; i < 2000; ++i) {
    int v = rng.uniform_int(3, 7);
    CHECK(v >= 3);
    CHECK(v <= 7);
    lo = lo || v == 3;
    hi = hi || v == 7;
  }
  CHECK(lo);
  CHECK(hi);
}

TEST_CASE("normal moments are sane") {
  Rng rng(9);
  double s = 0, s2 = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    double v = rng.normal(2.0, 0.5);
    s += v;
    s2 += v * v;
  }
  double mean = s / n, var = s2 / n - mean * mean;
  CHECK(mean == doctest::Approx(2.0).epsilon(0.02));
  CHECK(var == doctest::Approx(0.25).epsilon(0.05));
}

TEST_CASE("forked streams are decorrelated and reproducible") {
  Rng a(5), b(5);
  Rng fa = a.fork(1), fb = b.fork(1);
  for (int i = 0; i < 20; ++i) CHECK(fa.next_u64() == fb.next_u64());
  Rng c(5);
  Rng f1 = c.fork(1), f2 = c.fork(2);
  int differ = 0;
  for (int i = 0; i < 10; ++i) differ += f1.next_u64() != f2.next_u64();
  CHECK(differ == 10);
}

TEST_SUITE_END();
