#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include <doctest.h>

#include "otvm/ops.hpp"
#include "otvm/rng.hpp"
#include "otvm/tensor.hpp"

namespace testutil {

using otvm::core::ArrayD;
using otvm::core::ArrayT;
using otvm::core::Rng;
using otvm::core::TensorD;

inline ArrayD rand_array(Rng& rng, std::vector<int> shape, double lo = -1.0,
                         double hi = 1.0) {
  ArrayD a(std::move(shape));
  for (int64_t i = 0; i < a.numel(); ++i) a[i] = rng.uniform(lo, hi);
  return a;
}

// values bounded away from zero, for ops with a kink there
inline ArrayD margin_array(Rng& rng, std::vector<int> shape, double margin = 0.3) {
  ArrayD a(std::move(shape));
  for (int64_t i = 0; i < a.numel(); ++i) {
    double v = rng.uniform(margin, 1.0);
    a[i] = rng.bernoulli(0.5) ? v : -v;
  }
  return a;
}

template <typename T>
inline double max_abs(const ArrayT<T>& a) {
  double m = 0;
  for (int64_t i = 0; i < a.numel(); ++i) m = std::max(m, std::abs((double)a.data[i]));
  return m;
}

// Central-difference check of every element of every leaf against the tape.
// Passes when |analytic - numeric| <= tol * max(|analytic|, |numeric|) + atol
// holds elementwise.
inline void gradcheck(const std::function<TensorD()>& build, std::vector<TensorD> leaves,
                      double h = 1e-4, double tol = 1e-3, double atol = 1e-8) {
  for (auto& l : leaves) {
    l.set_requires_grad(true);
    l.zero_grad();
  }
  TensorD loss = build();
  REQUIRE(loss.numel() == 1);
  otvm::core::backward(loss);

  int bad = 0;
  double worst = 0;
  std::string where;
  for (size_t li = 0; li < leaves.size(); ++li) {
    TensorD& l = leaves[li];
    REQUIRE(l.has_grad());
    for (int64_t i = 0; i < l.numel(); ++i) {
      double keep = l.val()[i];
      l.val()[i] = keep + h;
      double fp = build().val()[0];
      l.val()[i] = keep - h;
      double fm = build().val()[0];
      l.val()[i] = keep;
      double gf = (fp - fm) / (2 * h);
      double ga = l.grad()[i];
      double err = std::abs(ga - gf);
      double lim = tol * std::max(std::abs(ga), std::abs(gf)) + atol;
      if (err > lim) {
        ++bad;
        if (err - lim > worst) {
          worst = err - lim;
          where = "leaf " + std::to_string(li) + " elem " + std::to_string(i) +
                  " analytic " + std::to_string(ga) + " numeric " + std::to_string(gf);
        }
      }
    }
  }
  INFO("worst violation: ", where);
  CHECK(bad == 0);
}

// random positive projection so the scalar sees every output element
inline TensorD project(const TensorD& y, const ArrayD& r) {
  return otvm::core::sum_all(otvm::core::mul_const(y, r));
}

}  // namespace testutil
