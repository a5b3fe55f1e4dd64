#include "common.hpp"

#include "otvm/trimap_prop.hpp"

using namespace otvm;
using otvm::core::ArrayD;
using otvm::core::Rng;
using otvm::core::TensorD;
using testutil::rand_array;

TEST_SUITE_BEGIN("attention");

namespace {

// plain-loop reference for the memory read: softmax over raw dot products
// of the query key against every memory location, then a weighted sum of
// the memory values
void oracle_read(const std::vector<ArrayD>& keys, const std::vector<ArrayD>& values,
                 const ArrayD& qkey, int ck, int cv, int hw, ArrayD& weights,
                 ArrayD& read) {
  int M = (int)keys.size() * hw;
  weights = ArrayD::zeros({hw, M});
  read = ArrayD::zeros({hw, cv});
  for (int n = 0; n < hw; ++n) {
    std::vector<double> logits(M);
    int m = 0;
    for (const auto& k : keys)
      for (int p = 0; p < hw; ++p, ++m) {
        double dot = 0;
        for (int c = 0; c < ck; ++c) dot += qkey[c * hw + n] * k[c * hw + p];
        logits[m] = dot;
      }
    double mx = logits[0];
    for (double v : logits) mx = std::max(mx, v);
    double z = 0;
    for (double v : logits) z += std::exp(v - mx);
    for (int i = 0; i < M; ++i) weights[n * M + i] = std::exp(logits[i] - mx) / z;
    m = 0;
    for (const auto& v : values)
      for (int p = 0; p < hw; ++p, ++m)
        for (int c = 0; c < cv; ++c)
          read[n * cv + c] += weights[n * M + m] * v[c * hw + p];
  }
}

}  // namespace

TEST_CASE("attention read matches the loop oracle on random cases") {
  Rng rng(101);
  const int ck = 3, cv = 4, h = 2, w = 2, hw = h * w;
  int cases = 0;
  double worst = 0;
  for (int trial = 0; trial < 220; ++trial) {
    int n_entries = rng.uniform_int(1, 5);
    std::vector<ArrayD> kv, vv;
    std::vector<prop::MemoryEntry<double>> store(n_entries);
    std::vector<const prop::MemoryEntry<double>*> entries;
    for (int e = 0; e < n_entries; ++e) {
      kv.push_back(rand_array(rng, {ck, h, w}, -2, 2));
      vv.push_back(rand_array(rng, {cv, h, w}, -2, 2));
      store[e].frame_index = e;
      store[e].key = TensorD::constant(kv.back());
      store[e].value = TensorD::constant(vv.back());
      entries.push_back(&store[e]);
    }
    ArrayD qk = rand_array(rng, {ck, h, w}, -2, 2);

    TensorD wts = prop::attention_weights(entries, TensorD::constant(qk));
    std::vector<TensorD> vals;
    for (const auto* e : entries) vals.push_back(core::chw_to_nc(e->value));
    TensorD mem_v = vals.size() == 1 ? vals[0] : core::concat_rows(vals);
    TensorD read = core::matmul_nn(wts, mem_v);

    ArrayD ow, orr;
    oracle_read(kv, vv, qk, ck, cv, hw, ow, orr);
    REQUIRE(wts.shape() == ow.shape);
    REQUIRE(read.shape() == orr.shape);
    for (int64_t i = 0; i < ow.numel(); ++i)
      worst = std::max(worst, std::abs(wts.val()[i] - ow[i]));
    for (int64_t i = 0; i < orr.numel(); ++i)
      worst = std::max(worst, std::abs(read.val()[i] - orr[i]));
    ++cases;
  }
  CHECK(cases >= 200);
  CHECK(worst < 1e-5);
}

TEST_CASE("attention rows are a proper distribution") {
  Rng rng(102);
  prop::MemoryEntry<double> e1, e2;
  e1.frame_index = 0;
  e1.key = TensorD::constant(rand_array(rng, {3, 2, 2}, -3, 3));
  e1.value = TensorD::constant(rand_array(rng, {4, 2, 2}));
  e2.frame_index = 1;
  e2.key = TensorD::constant(rand_array(rng, {3, 2, 2}, -3, 3));
  e2.value = TensorD::constant(rand_array(rng, {4, 2, 2}));
  std::vector<const prop::MemoryEntry<double>*> es = {&e1, &e2};
  TensorD w = prop::attention_weights(es, TensorD::constant(rand_array(rng, {3, 2, 2})));
  REQUIRE(w.shape() == std::vector<int>{4, 8});
  for (int n = 0; n < 4; ++n) {
    double s = 0;
    for (int m = 0; m < 8; ++m) {
      CHECK(w.val()[n * 8 + m] >= 0.0);
      s += w.val()[n * 8 + m];
    }
    CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_SUITE_END();
