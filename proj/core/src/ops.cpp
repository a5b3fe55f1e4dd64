#include "otvm/ops.hpp"

#include <algorithm>
#include <cmath>

#include "otvm/gemm.hpp"

namespace otvm::core {

namespace {

template <typename T>
std::shared_ptr<Node<T>> fresh(ArrayT<T> value) {
  auto n = std::make_shared<Node<T>>();
  n->value = std::move(value);
  n->is_leaf = false;
  return n;
}

template <typename T>
bool track(const Tensor<T>& a) {
  return GradMode::enabled() && a.requires_grad();
}
template <typename T>
bool track(const Tensor<T>& a, const Tensor<T>& b) {
  return GradMode::enabled() && (a.requires_grad() || b.requires_grad());
}

// reflect-101 index (abcb|a style, no edge repeat); n == 1 maps everything to 0
inline int reflect_idx(int i, int n) {
  if (n == 1) return 0;
  int period = 2 * (n - 1);
  i = std::abs(i) % period;
  return i < n ? i : period - i;
}

}  // namespace

// ---------------------------------------------------------------- elementwise

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  assert(a.val().same_shape(b.val()));
  ArrayT<T> v(a.shape());
  for (int64_t i = 0; i < v.numel(); ++i) v[i] = a.val()[i] + b.val()[i];
  auto n = fresh(std::move(v));
  if (track(a, b)) {
    n->requires_grad = true;
    n->parents = {a.node(), b.node()};
    auto an = a.node(); auto bn = b.node(); Node<T>* on = n.get();
    n->backfn = [an, bn, on]() {
      on->ensure_grad();
      if (an->requires_grad) {
        an->ensure_grad();
        for (int64_t i = 0; i < on->grad.numel(); ++i) an->grad[i] += on->grad[i];
      }
      if (bn->requires_grad) {
        bn->ensure_grad();
        for (int64_t i = 0; i < on->grad.numel(); ++i) bn->grad[i] += on->grad[i];
      }
    };
  }
  return Tensor<T>::from_node(n);
}

template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
  assert(a.val().same_shape(b.val()));
  ArrayT<T> v(a.shape());
  for (int64_t i = 0; i < v.numel(); ++i) v[i] = a.val()[i] - b.val()[i];
  auto n = fresh(std::move(v));
  if (track(a, b)) {
    n->requires_grad = true;
    n->parents = {a.node(), b.node()};
    auto an = a.node(); auto bn = b.node(); Node<T>* on = n.get();
    n->backfn = [an, bn, on]() {
      on->ensure_grad();
      if (an->requires_grad) {
        an->ensure_grad();
        for (int64_t i = 0; i < on->grad.numel(); ++i) an->grad[i] += on->grad[i];
      }
      if (bn->requires_grad) {
        bn->ensure_grad();
        for (int64_t i = 0; i < on->grad.numel(); ++i) bn->grad[i] -= on->grad[i];
      }
    };
  }
  return Tensor<T>::from_node(n);
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  assert(a.val().same_shape(b.val()));
  ArrayT<T> v(a.shape());
  for (int64_t i = 0; i < v.numel(); ++i) v[i] = a.val()[i] * b.val()[i];
  auto n = fresh(std::move(v));
  if (track(a, b)) {
    n->requires_grad = true;
    n->parents = {a.node(), b.node()};
    auto an = a.node(); auto bn = b.node(); Node<T>* on = n.get();
    n->backfn = [an, bn, on]() {
      on->ensure_grad();
      if (an->requires_grad) {
        an->ensure_grad();
        for (int64_t i = 0; i < on->grad.numel(); ++i) an->grad[i] += on->grad[i] * bn->value[i];
      }
      if (bn->requires_grad) {
        bn->ensure_grad();
        for (int64_t i = 0; i < on->grad.numel(); ++i) bn->grad[i] += on->grad[i] * an->value[i];
      }
    };
  }
  return Tensor<T>::from_node(n);
}

template <typename T>
Tensor<T> div_t(const Tensor<T>& a, const Tensor<T>& b) {
  assert(a.val().same_shape(b.val()));
  ArrayT<T> v(a.shape());
  for (int64_t i = 0; i < v.numel(); ++i) v[i] = a.val()[i] / b.val()[i];
  auto n = fresh(std::move(v));
  if (track(a, b)) {
    n->requires_grad = true;
    n->parents = {a.node(), b.node()};
    auto an = a.node(); auto bn = b.node(); Node<T>* on = n.get();
    n->backfn = [an, bn, on]() {
      on->ensure_grad();
      if (an->requires_grad) {
        an->ensure_grad();
        for (int64_t i = 0; i < on->grad.numel(); ++i) an->grad[i] += on->grad[i] / bn->value[i];
      }
      if (bn->requires_grad) {
        bn->ensure_grad();
        for (int64_t i = 0; i < on->grad.numel(); ++i)
          bn->grad[i] -= on->grad[i] * on->value[i] / bn->value[i];
      }
    };
  }
  return Tensor<T>::from_node(n);
}

namespace {

// shared scaffolding for unary ops whose backward is gout * dydx
template <typename T, typename FwdFn, typename DerivFn>
Tensor<T> pointwise_unary(const Tensor<T>& a, FwdFn fwd, DerivFn deriv) {
  ArrayT<T> v(a.shape());
  for (int64_t i = 0; i < v.numel(); ++i) v[i] = fwd(a.val()[i]);
  auto n = fresh(std::move(v));
  if (track(a)) {
    n->requires_grad = true;
    n->parents = {a.node()};
    auto an = a.node(); Node<T>* on = n.get();
    n->backfn = [an, on, deriv]() {
      on->ensure_grad();
      an->ensure_grad();
      for (int64_t i = 0; i < on->grad.numel(); ++i)
        an->grad[i] += on->grad[i] * deriv(an->value[i], on->value[i]);
    };
  }
  return Tensor<T>::from_node(n);
}

}  // namespace

template <typename T>
Tensor<T> add_scalar(const Tensor<T>& a, T s) {
  return pointwise_unary(a, [s](T x) { return x + s; }, [](T, T) { return T(1); });
}
template <typename T>
Tensor<T> mul_scalar(const Tensor<T>& a, T s) {
  return pointwise_unary(a, [s](T x) { return x * s; }, [s](T, T) { return s; });
}
template <typename T>
Tensor<T> neg(const Tensor<T>& a) {
  return pointwise_unary(a, [](T x) { return -x; }, [](T, T) { return T(-1); });
}
template <typename T>
Tensor<T> abs_t(const Tensor<T>& a) {
  return pointwise_unary(
      a, [](T x) { return std::abs(x); },
      [](T x, T) { return x > T(0) ? T(1) : (x < T(0) ? T(-1) : T(0)); });
}
template <typename T>
Tensor<T> relu(const Tensor<T>& a) {
  return pointwise_unary(
      a, [](T x) { return x > T(0) ? x : T(0); },
      [](T x, T) { return x > T(0) ? T(1) : T(0); });
}
template <typename T>
Tensor<T> lrelu(const Tensor<T>& a, T slope) {
  return pointwise_unary(
      a, [slope](T x) { return x > T(0) ? x : slope * x; },
      [slope](T x, T) { return x > T(0) ? T(1) : slope; });
}
template <typename T>
Tensor<T> sigmoid_t(const Tensor<T>& a) {
  return pointwise_unary(
      a, [](T x) { return T(1) / (T(1) + std::exp(-x)); },
      [](T, T y) { return y * (T(1) - y); });
}
template <typename T>
Tensor<T> log_t(const Tensor<T>& a) {
  return pointwise_unary(a, [](T x) { return std::log(x); }, [](T x, T) { return T(1) / x; });
}
template <typename T>
Tensor<T> clamp(const Tensor<T>& a, T lo, T hi) {
  return pointwise_unary(
      a, [lo, hi](T x) { return std::min(std::max(x, lo), hi); },
      [lo, hi](T x, T) { return (x >= lo && x <= hi) ? T(1) : T(0); });
}

template <typename T>
Tensor<T> mul_const(const Tensor<T>& a, const ArrayT<T>& m) {
  assert(a.val().same_shape(m));
  ArrayT<T> v(a.shape());
  for (int64_t i = 0; i < v.numel(); ++i) v[i] = a.val()[i] * m[i];
  auto n = fresh(std::move(v));
  if (track(a)) {
    n->requires_grad = true;
    n->parents = {a.node()};
    auto an = a.node(); Node<T>* on = n.get();
    n->backfn = [an, on, m]() {
      on->ensure_grad();
      an->ensure_grad();
      for (int64_t i = 0; i < on->grad.numel(); ++i) an->grad[i] += on->grad[i] * m[i];
    };
  }
  return Tensor<T>::from_node(n);
}

// ----------------------------------------------------------------- reductions

template <typename T>
Tensor<T> sum_all(const Tensor<T>& a) {
  ArrayT<T> v({1});
  T s = 0;
  for (int64_t i = 0; i < a.numel(); ++i) s += a.val()[i];
  v[0] = s;
  auto n = fresh(std::move(v));
  if (track(a)) {
    n->requires_grad = true;
    n->parents = {a.node()};
    auto an = a.node(); Node<T>* on = n.get();
    n->backfn = [an, on]() {
      on->ensure_grad();
      an->ensure_grad();
      T g = on->grad[0];
      for (int64_t i = 0; i < an->grad.numel(); ++i) an->grad[i] += g;
    };
  }
  return Tensor<T>::from_node(n);
}

template <typename T>
Tensor<T> mean_all(const Tensor<T>& a) {
  return mul_scalar(sum_all(a), T(1) / (T)a.numel());
}

// ------------------------------------------------------------------ shape ops

template <typename T>
Tensor<T> concat_c(const std::vector<Tensor<T>>& xs) {
  assert(!xs.empty());
  int H = xs[0].dim(1), W = xs[0].dim(2), C = 0;
  for (const auto& x : xs) {
    assert(x.dim(1) == H && x.dim(2) == W);
    C += x.dim(0);
  }
  ArrayT<T> v({C, H, W});
  int64_t plane = (int64_t)H * W, off = 0;
  for (const auto& x : xs) {
    std::copy(x.val().ptr(), x.val().ptr() + x.numel(), v.ptr() + off * plane);
    off += x.dim(0);
  }
  auto n = fresh(std::move(v));
  bool need = false;
  for (const auto& x : xs) need = need || x.requires_grad();
  if (GradMode::enabled() && need) {
    n->requires_grad = true;
    std::vector<std::shared_ptr<Node<T>>> ps;
    for (const auto& x : xs) ps.push_back(x.node());
    n->parents = ps;
    Node<T>* on = n.get();
    n->backfn = [ps, on, plane]() {
      on->ensure_grad();
      int64_t off = 0;
      for (auto& p : ps) {
        int64_t cnt = p->value.numel();
        if (p->requires_grad) {
          p->ensure_grad();
          const T* g = on->grad.ptr() + off;
          for (int64_t i = 0; i < cnt; ++i) p->grad[i] += g[i];
        }
        off += cnt;
      }
    };
  }
  return Tensor<T>::from_node(n);
}

template <typename T>
Tensor<T> slice_c(const Tensor<T>& a, int c0, int c1) {
  assert(a.val().ndim() == 3 && c0 >= 0 && c1 <= a.dim(0) && c0 < c1);
  int H = a.dim(1), W = a.dim(2);
  int64_t plane = (int64_t)H * W;
  ArrayT<T> v({c1 - c0, H, W});
  std::copy(a.val().ptr() + c0 * plane, a.val().ptr() + c1 * plane, v.ptr());
  auto n = fresh(std::move(v));
  if (track(a)) {
    n->requires_grad = true;
    n->parents = {a.node()};
    auto an = a.node(); Node<T>* on = n.get();
    n->backfn = [an, on, c0, plane]() {
      on->ensure_grad();
      an->ensure_grad();
      T* g = an->grad.ptr() + c0 * plane;
      for (int64_t i = 0; i < on->grad.numel(); ++i) g[i] += on->grad[i];
    };
  }
  return Tensor<T>::from_node(n);
}

template <typename T>
Tensor<T> chw_to_nc(const Tensor<T>& a) {
  assert(a.val().ndim() == 3);
  int C = a.dim(0), H = a.dim(1), W = a.dim(2);
  int64_t N = (int64_t)H * W;
  ArrayT<T> v({(int)N, C});
  for (int c = 0; c < C; ++c)
    for (int64_t i = 0; i < N; ++i) v[i * C + c] = a.val()[c * N + i];
  auto n = fresh(std::move(v));
  if (track(a)) {
    n->requires_grad = true;
    n->parents = {a.node()};
    auto an = a.node(); Node<T>* on = n.get();
    n->backfn = [an, on, C, N]() {
      on->ensure_grad();
      an->ensure_grad();
      for (int c = 0; c < C; ++c)
        for (int64_t i = 0; i < N; ++i) an->grad[c * N + i] += on->grad[i * C + c];
    };
  }
  return Tensor<T>::from_node(n);
}

template <typename T>
Tensor<T> nc_to_chw(const Tensor<T>& a, int H, int W) {
  assert(a.val().ndim() == 2 && a.dim(0) == H * W);
  int C = a.dim(1);
  int64_t N = (int64_t)H * W;
  ArrayT<T> v({C, H, W});
  for (int c = 0; c < C; ++c)
    for (int64_t i = 0; i < N; ++i) v[c * N + i] = a.val()[i * C + c];
  auto n = fresh(std::move(v));
  if (track(a)) {
    n->requires_grad = true;
    n->parents = {a.node()};
    auto an = a.node(); Node<T>* on = n.get();
    n->backfn = [an, on, C, N]() {
      on->ensure_grad();
      an->ensure_grad();
      for (int c = 0; c < C; ++c)
        for (int64_t i = 0; i < N; ++i) an->grad[i * C + c] += on->grad[c * N + i];
    };
  }
  return Tensor<T>::from_node(n);
}

template <typename T>
Tensor<T> concat_rows(const std::vector<Tensor<T>>& xs) {
  assert(!xs.empty());
  int C = xs[0].dim(1), M = 0;
  for (const auto& x : xs) {
    assert(x.dim(1) == C);
    M += x.dim(0);
  }
  ArrayT<T> v({M, C});
  int64_t off = 0;
  for (const auto& x : xs) {
    std::copy(x.val().ptr(), x.val().ptr() + x.numel(), v.ptr() + off);
    off += x.numel();
  }
  auto n = fresh(std::move(v));
  bool need = false;
  for (const auto& x : xs) need = need || x.requires_grad();
  if (GradMode::enabled() && need) {
    n->requires_grad = true;
    std::vector<std::shared_ptr<Node<T>>> ps;
    for (const auto& x : xs) ps.push_back(x.node());
    n->parents = ps;
    Node<T>* on = n.get();
    n->backfn = [ps, on]() {
      on->ensure_grad();
      int64_t off = 0;
      for (auto& p : ps) {
        int64_t cnt = p->value.numel();
        if (p->requires_grad) {
          p->ensure_grad();
          const T* g = on->grad.ptr() + off;
          for (int64_t i = 0; i < cnt; ++i) p->grad[i] += g[i];
        }
        off += cnt;
      }
    };
  }
  return Tensor<T>::from_node(n);
}

template <typename T>
Tensor<T> detach(const Tensor<T>& a) {
  return Tensor<T>::constant(a.val());
}

// ------------------------------------------------------------ matrix products

template <typename T>
Tensor<T> matmul_nn(const Tensor<T>& a, const Tensor<T>& b) {
  int M = a.dim(0), K = a.dim(1), N = b.dim(1);
  assert(b.dim(0) == K);
  ArrayT<T> v({M, N});
  gemm_nn(M, N, K, a.val().ptr(), b.val().ptr(), v.ptr(), false);
  auto n = fresh(std::move(v));
  if (track(a, b)) {
    n->requires_grad = true;
    n->parents = {a.node(), b.node()};
    auto an = a.node(); auto bn = b.node(); Node<T>* on = n.get();
    n->backfn = [an, bn, on, M, N, K]() {
      on->ensure_grad();
      if (an->requires_grad) {
        an->ensure_grad();
        gemm_nt(M, K, N, on->grad.ptr(), bn->value.ptr(), an->grad.ptr(), true);
      }
      if (bn->requires_grad) {
        bn->ensure_grad();
        gemm_tn(K, N, M, an->value.ptr(), on->grad.ptr(), bn->grad.ptr(), true);
      }
    };
  }
  return Tensor<T>::from_node(n);
}

template <typename T>
Tensor<T> matmul_nt(const Tensor<T>& a, const Tensor<T>& b) {
  int M = a.dim(0), K = a.dim(1), N = b.dim(0);
  assert(b.dim(1) == K);
  ArrayT<T> v({M, N});
  gemm_nt(M, N, K, a.val().ptr(), b.val().ptr(), v.ptr(), false);
  auto n = fresh(std::move(v));
  if (track(a, b)) {
    n->requires_grad = true;
    n->parents = {a.node(), b.node()};
    auto an = a.node(); auto bn = b.node(); Node<T>* on = n.get();
    n->backfn = [an, bn, on, M, N, K]() {
      on->ensure_grad();
      if (an->requires_grad) {
        an->ensure_grad();
        gemm_nn(M, K, N, on->grad.ptr(), bn->value.ptr(), an->grad.ptr(), true);
      }
      if (bn->requires_grad) {
        bn->ensure_grad();
        gemm_tn(N, K, M, on->grad.ptr(), an->value.ptr(), bn->grad.ptr(), true);
      }
    };
  }
  return Tensor<T>::from_node(n);
}

// -------------------------------------------------------------------- softmax

namespace {

template <typename T>
void softmax_span(const T* in, T* out, int64_t n, int64_t stride) {
  T mx = in[0];
  for (int64_t i = 1; i < n; ++i) mx = std::max(mx, in[i * stride]);
  T s = 0;
  for (int64_t i = 0; i < n; ++i) {
    T e = std::exp(in[i * stride] - mx);
    out[i * stride] = e;
    s += e;
  }
  T inv = T(1) / s;
  for (int64_t i = 0; i < n; ++i) out[i * stride] *= inv;
}

template <typename T>
void softmax_span_back(const T* y, const T* gy, T* gx, int64_t n, int64_t stride) {
  T dot = 0;
  for (int64_t i = 0; i < n; ++i) dot += y[i * stride] * gy[i * stride];
  for (int64_t i = 0; i < n; ++i)
    gx[i * stride] += y[i * stride] * (gy[i * stride] - dot);
}

}  // namespace

template <typename T>
Tensor<T> softmax_c(const Tensor<T>& a) {
  assert(a.val().ndim() == 3);
  int C = a.dim(0), H = a.dim(1), W = a.dim(2);
  int64_t plane = (int64_t)H * W;
  ArrayT<T> v(a.shape());
  for (int64_t i = 0; i < plane; ++i)
    softmax_span(a.val().ptr() + i, v.ptr() + i, C, plane);
  auto n = fresh(std::move(v));
  if (track(a)) {
    n->requires_grad = true;
    n->parents = {a.node()};
    auto an = a.node(); Node<T>* on = n.get();
    n->backfn = [an, on, C, plane]() {
      on->ensure_grad();
      an->ensure_grad();
      for (int64_t i = 0; i < plane; ++i)
        softmax_span_back(on->value.ptr() + i, on->grad.ptr() + i, an->grad.ptr() + i, C, plane);
    };
  }
  return Tensor<T>::from_node(n);
}

template <typename T>
Tensor<T> softmax_rows(const Tensor<T>& a) {
  assert(a.val().ndim() == 2);
  int M = a.dim(0), N = a.dim(1);
  ArrayT<T> v(a.shape());
  for (int i = 0; i < M; ++i)
    softmax_span(a.val().ptr() + (int64_t)i * N, v.ptr() + (int64_t)i * N, N, 1);
  auto n = fresh(std::move(v));
  if (track(a)) {
    n->requires_grad = true;
    n->parents = {a.node()};
    auto an = a.node(); Node<T>* on = n.get();
    n->backfn = [an, on, M, N]() {
      on->ensure_grad();
      an->ensure_grad();
      for (int i = 0; i < M; ++i)
        softmax_span_back(on->value.ptr() + (int64_t)i * N, on->grad.ptr() + (int64_t)i * N,
                          an->grad.ptr() + (int64_t)i * N, N, 1);
    };
  }
  return Tensor<T>::from_node(n);
}

// ---------------------------------------------------------------- convolution

namespace {

struct ConvGeom {
  int Cin, H, W, Cout, kh, kw, stride, pad, dil, Ho, Wo;
};

inline ConvGeom conv_geom(const std::vector<int>& xs, const std::vector<int>& ws, int stride,
                          int pad, int dil) {
  ConvGeom g;
  g.Cin = xs[0]; g.H = xs[1]; g.W = xs[2];
  g.Cout = ws[0]; g.kh = ws[2]; g.kw = ws[3];
  g.stride = stride; g.pad = pad; g.dil = dil;
  g.Ho = (g.H + 2 * pad - dil * (g.kh - 1) - 1) / stride + 1;
  g.Wo = (g.W + 2 * pad - dil * (g.kw - 1) - 1) / stride + 1;
  return g;
}

template <typename T>
void im2col(const T* x, const ConvGeom& g, T* cols) {
  // cols is {Cin*kh*kw, Ho*Wo}
  int64_t on = (int64_t)g.Ho * g.Wo;
  for (int c = 0; c < g.Cin; ++c) {
    const T* xc = x + (int64_t)c * g.H * g.W;
    for (int ky = 0; ky < g.kh; ++ky) {
      for (int kx = 0; kx < g.kw; ++kx) {
        T* row = cols + ((int64_t)(c * g.kh + ky) * g.kw + kx) * on;
        for (int oy = 0; oy < g.Ho; ++oy) {
          int iy = oy * g.stride - g.pad + ky * g.dil;
          T* dst = row + (int64_t)oy * g.Wo;
          if (iy < 0 || iy >= g.H) {
            std::fill(dst, dst + g.Wo, T(0));
            continue;
          }
          const T* src = xc + (int64_t)iy * g.W;
          for (int ox = 0; ox < g.Wo; ++ox) {
            int ix = ox * g.stride - g.pad + kx * g.dil;
            dst[ox] = (ix >= 0 && ix < g.W) ? src[ix] : T(0);
          }
        }
      }
    }
  }
}

template <typename T>
void col2im_acc(const T* cols, const ConvGeom& g, T* dx) {
  int64_t on = (int64_t)g.Ho * g.Wo;
  for (int c = 0; c < g.Cin; ++c) {
    T* xc = dx + (int64_t)c * g.H * g.W;
    for (int ky = 0; ky < g.kh; ++ky) {
      for (int kx = 0; kx < g.kw; ++kx) {
        const T* row = cols + ((int64_t)(c * g.kh + ky) * g.kw + kx) * on;
        for (int oy = 0; oy < g.Ho; ++oy) {
          int iy = oy * g.stride - g.pad + ky * g.dil;
          if (iy < 0 || iy >= g.H) continue;
          const T* src = row + (int64_t)oy * g.Wo;
          T* dst = xc + (int64_t)iy * g.W;
          for (int ox = 0; ox < g.Wo; ++ox) {
            int ix = ox * g.stride - g.pad + kx * g.dil;
            if (ix >= 0 && ix < g.W) dst[ix] += src[ox];
          }
        }
      }
    }
  }
}

}  // namespace

template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b, int stride,
                 int pad, int dilation) {
  assert(x.val().ndim() == 3 && w.val().ndim() == 4);
  assert(w.dim(1) == x.dim(0));
  ConvGeom g = conv_geom(x.shape(), w.shape(), stride, pad, dilation);
  int K = g.Cin * g.kh * g.kw;
  int64_t on = (int64_t)g.Ho * g.Wo;

  std::vector<T> cols((size_t)K * on);
  im2col(x.val().ptr(), g, cols.data());
  ArrayT<T> v({g.Cout, g.Ho, g.Wo});
  gemm_nn(g.Cout, (int)on, K, w.val().ptr(), cols.data(), v.ptr(), false);
  if (b.defined()) {
    assert(b.numel() == g.Cout);
    for (int c = 0; c < g.Cout; ++c) {
      T bias = b.val()[c];
      T* row = v.ptr() + (int64_t)c * on;
      for (int64_t i = 0; i < on; ++i) row[i] += bias;
    }
  }
  auto n = fresh(std::move(v));
  bool need = GradMode::enabled() &&
              (x.requires_grad() || w.requires_grad() || (b.defined() && b.requires_grad()));
  if (need) {
    n->requires_grad = true;
    n->parents = {x.node(), w.node()};
    if (b.defined()) n->parents.push_back(b.node());
    auto xn = x.node(); auto wn = w.node();
    auto bn = b.defined() ? b.node() : nullptr;
    Node<T>* on_node = n.get();
    n->backfn = [xn, wn, bn, on_node, g, K, on]() {
      on_node->ensure_grad();
      const T* gy = on_node->grad.ptr();
      if (bn && bn->requires_grad) {
        bn->ensure_grad();
        for (int c = 0; c < g.Cout; ++c) {
          T s = 0;
          const T* row = gy + (int64_t)c * on;
          for (int64_t i = 0; i < on; ++i) s += row[i];
          bn->grad[c] += s;
        }
      }
      if (wn->requires_grad) {
        wn->ensure_grad();
        std::vector<T> cols((size_t)K * on);
        im2col(xn->value.ptr(), g, cols.data());
        gemm_nt(g.Cout, K, (int)on, gy, cols.data(), wn->grad.ptr(), true);
      }
      if (xn->requires_grad) {
        xn->ensure_grad();
        std::vector<T> dcols((size_t)K * on);
        gemm_tn(K, (int)on, g.Cout, wn->value.ptr(), gy, dcols.data(), false);
        col2im_acc(dcols.data(), g, xn->grad.ptr());
      }
    };
  }
  return Tensor<T>::from_node(n);
}

template <typename T>
Tensor<T> standardize_filters(const Tensor<T>& w, T eps) {
  assert(w.val().ndim() == 4);
  int Cout = w.dim(0);
  int64_t K = w.numel() / Cout;
  ArrayT<T> v(w.shape());
  ArrayT<T> inv_std({Cout});
  for (int c = 0; c < Cout; ++c) {
    const T* f = w.val().ptr() + c * K;
    T* o = v.ptr() + c * K;
    T mean = 0;
    for (int64_t i = 0; i < K; ++i) mean += f[i];
    mean /= (T)K;
    T var = 0;
    for (int64_t i = 0; i < K; ++i) {
      T d = f[i] - mean;
      var += d * d;
    }
    var /= (T)K;
    T inv = T(1) / std::sqrt(var + eps);
    inv_std[c] = inv;
    for (int64_t i = 0; i < K; ++i) o[i] = (f[i] - mean) * inv;
  }
  auto n = fresh(std::move(v));
  if (track(w)) {
    n->requires_grad = true;
    n->parents = {w.node()};
    auto wn = w.node(); Node<T>* on = n.get();
    n->backfn = [wn, on, Cout, K, inv_std]() {
      on->ensure_grad();
      wn->ensure_grad();
      for (int c = 0; c < Cout; ++c) {
        const T* y = on->value.ptr() + c * K;
        const T* gy = on->grad.ptr() + c * K;
        T* gw = wn->grad.ptr() + c * K;
        T mg = 0, mgy = 0;
        for (int64_t i = 0; i < K; ++i) {
          mg += gy[i];
          mgy += gy[i] * y[i];
        }
        mg /= (T)K;
        mgy /= (T)K;
        for (int64_t i = 0; i < K; ++i)
          gw[i] += inv_std[c] * (gy[i] - mg - y[i] * mgy);
      }
    };
  }
  return Tensor<T>::from_node(n);
}

template <typename T>
Tensor<T> group_norm(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta,
                     int groups, T eps) {
  assert(x.val().ndim() == 3);
  int C = x.dim(0), H = x.dim(1), W = x.dim(2);
  assert(C % groups == 0 && gamma.numel() == C && beta.numel() == C);
  int cg = C / groups;
  int64_t gsz = (int64_t)cg * H * W, plane = (int64_t)H * W;
  ArrayT<T> xhat(x.shape());
  ArrayT<T> inv_std({groups});
  for (int g = 0; g < groups; ++g) {
    const T* in = x.val().ptr() + g * gsz;
    T* xh = xhat.ptr() + g * gsz;
    T mean = 0;
    for (int64_t i = 0; i < gsz; ++i) mean += in[i];
    mean /= (T)gsz;
    T var = 0;
    for (int64_t i = 0; i < gsz; ++i) {
      T d = in[i] - mean;
      var += d * d;
    }
    var /= (T)gsz;
    T inv = T(1) / std::sqrt(var + eps);
    inv_std[g] = inv;
    for (int64_t i = 0; i < gsz; ++i) xh[i] = (in[i] - mean) * inv;
  }
  ArrayT<T> v(x.shape());
  for (int c = 0; c < C; ++c) {
    T ga = gamma.val()[c], be = beta.val()[c];
    const T* xh = xhat.ptr() + c * plane;
    T* o = v.ptr() + c * plane;
    for (int64_t i = 0; i < plane; ++i) o[i] = ga * xh[i] + be;
  }
  auto n = fresh(std::move(v));
  bool need = GradMode::enabled() &&
              (x.requires_grad() || gamma.requires_grad() || beta.requires_grad());
  if (need) {
    n->requires_grad = true;
    n->parents = {x.node(), gamma.node(), beta.node()};
    auto xn = x.node(); auto gn = gamma.node(); auto bn = beta.node();
    Node<T>* on = n.get();
    n->backfn = [xn, gn, bn, on, groups, cg, plane, gsz, xhat, inv_std]() {
      on->ensure_grad();
      const T* gy = on->grad.ptr();
      if (bn->requires_grad) {
        bn->ensure_grad();
        for (int c = 0; c < cg * groups; ++c) {
          T s = 0;
          const T* row = gy + c * plane;
          for (int64_t i = 0; i < plane; ++i) s += row[i];
          bn->grad[c] += s;
        }
      }
      if (gn->requires_grad) {
        gn->ensure_grad();
        for (int c = 0; c < cg * groups; ++c) {
          T s = 0;
          const T* row = gy + c * plane;
          const T* xh = xhat.ptr() + c * plane;
          for (int64_t i = 0; i < plane; ++i) s += row[i] * xh[i];
          gn->grad[c] += s;
        }
      }
      if (xn->requires_grad) {
        xn->ensure_grad();
        for (int g = 0; g < groups; ++g) {
          const T* xh = xhat.ptr() + g * gsz;
          T* gx = xn->grad.ptr() + g * gsz;
          // dxhat = gy * gamma (per channel)
          T mdx = 0, mdxx = 0;
          for (int c = 0; c < cg; ++c) {
            T ga = gn->value[g * cg + c];
            const T* row = gy + ((int64_t)(g * cg + c)) * plane;
            const T* xr = xh + (int64_t)c * plane;
            for (int64_t i = 0; i < plane; ++i) {
              T d = row[i] * ga;
              mdx += d;
              mdxx += d * xr[i];
            }
          }
          mdx /= (T)gsz;
          mdxx /= (T)gsz;
          for (int c = 0; c < cg; ++c) {
            T ga = gn->value[g * cg + c];
            const T* row = gy + ((int64_t)(g * cg + c)) * plane;
            const T* xr = xh + (int64_t)c * plane;
            T* gr = gx + (int64_t)c * plane;
            for (int64_t i = 0; i < plane; ++i)
              gr[i] += inv_std[g] * (row[i] * ga - mdx - xr[i] * mdxx);
          }
        }
      }
    };
  }
  return Tensor<T>::from_node(n);
}

template <typename T>
Tensor<T> maxpool2d(const Tensor<T>& x, int k, int stride, int pad) {
  assert(x.val().ndim() == 3);
  int C = x.dim(0), H = x.dim(1), W = x.dim(2);
  int Ho = (H + 2 * pad - k) / stride + 1;
  int Wo = (W + 2 * pad - k) / stride + 1;
  ArrayT<T> v({C, Ho, Wo});
  std::vector<int64_t> arg((size_t)C * Ho * Wo);
  for (int c = 0; c < C; ++c) {
    const T* xc = x.val().ptr() + (int64_t)c * H * W;
    for (int oy = 0; oy < Ho; ++oy) {
      for (int ox = 0; ox < Wo; ++ox) {
        T best = -std::numeric_limits<T>::infinity();
        int64_t bi = -1;
        for (int ky = 0; ky < k; ++ky) {
          int iy = oy * stride - pad + ky;
          if (iy < 0 || iy >= H) continue;
          for (int kx = 0; kx < k; ++kx) {
            int ix = ox * stride - pad + kx;
            if (ix < 0 || ix >= W) continue;
            T val = xc[(int64_t)iy * W + ix];
            if (val > best) {
              best = val;
              bi = (int64_t)iy * W + ix;
            }
          }
        }
        int64_t oi = ((int64_t)c * Ho + oy) * Wo + ox;
        v[oi] = best;
        arg[(size_t)oi] = (int64_t)c * H * W + bi;
      }
    }
  }
  auto n = fresh(std::move(v));
  if (track(x)) {
    n->requires_grad = true;
    n->parents = {x.node()};
    auto xn = x.node(); Node<T>* on = n.get();
    n->backfn = [xn, on, arg]() {
      on->ensure_grad();
      xn->ensure_grad();
      for (int64_t i = 0; i < on->grad.numel(); ++i) xn->grad[arg[(size_t)i]] += on->grad[i];
    };
  }
  return Tensor<T>::from_node(n);
}

// --------------------------------------------------------------------- resize

namespace {

struct LinTap {
  int i0, i1;
  double w0, w1;
};

inline std::vector<LinTap> linear_taps(int n_in, int n_out) {
  std::vector<LinTap> taps((size_t)n_out);
  double scale = (double)n_in / n_out;
  for (int o = 0; o < n_out; ++o) {
    double s = (o + 0.5) * scale - 0.5;
    double fl = std::floor(s);
    int i0 = (int)fl;
    double f = s - fl;
    int i1 = i0 + 1;
    i0 = std::clamp(i0, 0, n_in - 1);
    i1 = std::clamp(i1, 0, n_in - 1);
    taps[(size_t)o] = {i0, i1, 1.0 - f, f};
  }
  return taps;
}

}  // namespace

template <typename T>
Tensor<T> bilinear_resize(const Tensor<T>& x, int H2, int W2) {
  assert(x.val().ndim() == 3);
  int C = x.dim(0), H = x.dim(1), W = x.dim(2);
  auto ty = linear_taps(H, H2);
  auto tx = linear_taps(W, W2);
  ArrayT<T> v({C, H2, W2});
  for (int c = 0; c < C; ++c) {
    const T* xc = x.val().ptr() + (int64_t)c * H * W;
    T* oc = v.ptr() + (int64_t)c * H2 * W2;
    for (int oy = 0; oy < H2; ++oy) {
      const LinTap& a = ty[(size_t)oy];
      for (int ox = 0; ox < W2; ++ox) {
        const LinTap& b = tx[(size_t)ox];
        double acc = a.w0 * (b.w0 * xc[(int64_t)a.i0 * W + b.i0] + b.w1 * xc[(int64_t)a.i0 * W + b.i1]) +
                     a.w1 * (b.w0 * xc[(int64_t)a.i1 * W + b.i0] + b.w1 * xc[(int64_t)a.i1 * W + b.i1]);
        oc[(int64_t)oy * W2 + ox] = (T)acc;
      }
    }
  }
  auto n = fresh(std::move(v));
  if (track(x)) {
    n->requires_grad = true;
    n->parents = {x.node()};
    auto xn = x.node(); Node<T>* on = n.get();
    n->backfn = [xn, on, ty, tx, C, H, W, H2, W2]() {
      on->ensure_grad();
      xn->ensure_grad();
      for (int c = 0; c < C; ++c) {
        const T* gc = on->grad.ptr() + (int64_t)c * H2 * W2;
        T* gx = xn->grad.ptr() + (int64_t)c * H * W;
        for (int oy = 0; oy < H2; ++oy) {
          const LinTap& a = ty[(size_t)oy];
          for (int ox = 0; ox < W2; ++ox) {
            const LinTap& b = tx[(size_t)ox];
            T g = gc[(int64_t)oy * W2 + ox];
            gx[(int64_t)a.i0 * W + b.i0] += (T)(a.w0 * b.w0) * g;
            gx[(int64_t)a.i0 * W + b.i1] += (T)(a.w0 * b.w1) * g;
            gx[(int64_t)a.i1 * W + b.i0] += (T)(a.w1 * b.w0) * g;
            gx[(int64_t)a.i1 * W + b.i1] += (T)(a.w1 * b.w1) * g;
          }
        }
      }
    };
  }
  return Tensor<T>::from_node(n);
}

template <typename T>
Tensor<T> adaptive_avg_pool(const Tensor<T>& x, int bh, int bw) {
  assert(x.val().ndim() == 3);
  int C = x.dim(0), H = x.dim(1), W = x.dim(2);
  auto lo = [](int i, int n, int b) { return (int)std::floor((double)i * n / b); };
  auto hi = [](int i, int n, int b) { return (int)std::ceil((double)(i + 1) * n / b); };
  ArrayT<T> v({C, bh, bw});
  for (int c = 0; c < C; ++c) {
    const T* xc = x.val().ptr() + (int64_t)c * H * W;
    for (int by = 0; by < bh; ++by) {
      int y0 = lo(by, H, bh), y1 = hi(by, H, bh);
      for (int bx = 0; bx < bw; ++bx) {
        int x0 = lo(bx, W, bw), x1 = hi(bx, W, bw);
        T s = 0;
        for (int y = y0; y < y1; ++y)
          for (int xx = x0; xx < x1; ++xx) s += xc[(int64_t)y * W + xx];
        v[((int64_t)c * bh + by) * bw + bx] = s / (T)((y1 - y0) * (x1 - x0));
      }
    }
  }
  auto n = fresh(std::move(v));
  if (track(x)) {
    n->requires_grad = true;
    n->parents = {x.node()};
    auto xn = x.node(); Node<T>* on = n.get();
    n->backfn = [xn, on, C, H, W, bh, bw, lo, hi]() {
      on->ensure_grad();
      xn->ensure_grad();
      for (int c = 0; c < C; ++c) {
        T* gx = xn->grad.ptr() + (int64_t)c * H * W;
        for (int by = 0; by < bh; ++by) {
          int y0 = lo(by, H, bh), y1 = hi(by, H, bh);
          for (int bx = 0; bx < bw; ++bx) {
            int x0 = lo(bx, W, bw), x1 = hi(bx, W, bw);
            T g = on->grad[((int64_t)c * bh + by) * bw + bx] / (T)((y1 - y0) * (x1 - x0));
            for (int y = y0; y < y1; ++y)
              for (int xx = x0; xx < x1; ++xx) gx[(int64_t)y * W + xx] += g;
          }
        }
      }
    };
  }
  return Tensor<T>::from_node(n);
}

// ----------------------------------------------------------------------- blur

namespace {

// horizontal gather pass with reflect padding
template <typename T>
void blur_pass_x(const T* in, T* out, int C, int H, int W, const std::vector<T>& k) {
  int r = ((int)k.size() - 1) / 2;
  for (int c = 0; c < C; ++c) {
    for (int y = 0; y < H; ++y) {
      const T* row = in + ((int64_t)c * H + y) * W;
      T* orow = out + ((int64_t)c * H + y) * W;
      for (int x = 0; x < W; ++x) {
        T s = 0;
        for (int i = 0; i < (int)k.size(); ++i) s += k[(size_t)i] * row[reflect_idx(x + i - r, W)];
        orow[x] = s;
      }
    }
  }
}

template <typename T>
void blur_pass_y(const T* in, T* out, int C, int H, int W, const std::vector<T>& k) {
  int r = ((int)k.size() - 1) / 2;
  for (int c = 0; c < C; ++c) {
    const T* pc = in + (int64_t)c * H * W;
    T* oc = out + (int64_t)c * H * W;
    for (int y = 0; y < H; ++y) {
      for (int x = 0; x < W; ++x) {
        T s = 0;
        for (int i = 0; i < (int)k.size(); ++i)
          s += k[(size_t)i] * pc[(int64_t)reflect_idx(y + i - r, H) * W + x];
        oc[(int64_t)y * W + x] = s;
      }
    }
  }
}

// adjoint of the gather passes: scatter, same reflect indexing
template <typename T>
void blur_adj_x(const T* gout, T* gin, int C, int H, int W, const std::vector<T>& k) {
  int r = ((int)k.size() - 1) / 2;
  for (int c = 0; c < C; ++c) {
    for (int y = 0; y < H; ++y) {
      const T* grow = gout + ((int64_t)c * H + y) * W;
      T* irow = gin + ((int64_t)c * H + y) * W;
      for (int x = 0; x < W; ++x) {
        T g = grow[x];
        for (int i = 0; i < (int)k.size(); ++i) irow[reflect_idx(x + i - r, W)] += k[(size_t)i] * g;
      }
    }
  }
}

template <typename T>
void blur_adj_y(const T* gout, T* gin, int C, int H, int W, const std::vector<T>& k) {
  int r = ((int)k.size() - 1) / 2;
  for (int c = 0; c < C; ++c) {
    const T* gc = gout + (int64_t)c * H * W;
    T* ic = gin + (int64_t)c * H * W;
    for (int y = 0; y < H; ++y) {
      for (int x = 0; x < W; ++x) {
        T g = gc[(int64_t)y * W + x];
        for (int i = 0; i < (int)k.size(); ++i)
          ic[(int64_t)reflect_idx(y + i - r, H) * W + x] += k[(size_t)i] * g;
      }
    }
  }
}

}  // namespace

template <typename T>
Tensor<T> blur_sep2d(const Tensor<T>& x, const std::vector<T>& k1d) {
  assert(x.val().ndim() == 3 && k1d.size() % 2 == 1);
  int C = x.dim(0), H = x.dim(1), W = x.dim(2);
  ArrayT<T> tmp(x.shape()), v(x.shape());
  blur_pass_x(x.val().ptr(), tmp.ptr(), C, H, W, k1d);
  blur_pass_y(tmp.ptr(), v.ptr(), C, H, W, k1d);
  auto n = fresh(std::move(v));
  if (track(x)) {
    n->requires_grad = true;
    n->parents = {x.node()};
    auto xn = x.node(); Node<T>* on = n.get();
    n->backfn = [xn, on, C, H, W, k1d]() {
      on->ensure_grad();
      xn->ensure_grad();
      ArrayT<T> gtmp({C, H, W});
      blur_adj_y(on->grad.ptr(), gtmp.ptr(), C, H, W, k1d);
      blur_adj_x(gtmp.ptr(), xn->grad.ptr(), C, H, W, k1d);
    };
  }
  return Tensor<T>::from_node(n);
}

template <typename T>
Tensor<T> subsample2(const Tensor<T>& x) {
  assert(x.val().ndim() == 3);
  int C = x.dim(0), H = x.dim(1), W = x.dim(2);
  int Ho = (H + 1) / 2, Wo = (W + 1) / 2;
  ArrayT<T> v({C, Ho, Wo});
  for (int c = 0; c < C; ++c)
    for (int y = 0; y < Ho; ++y)
      for (int xx = 0; xx < Wo; ++xx)
        v[((int64_t)c * Ho + y) * Wo + xx] = x.val()[((int64_t)c * H + 2 * y) * W + 2 * xx];
  auto n = fresh(std::move(v));
  if (track(x)) {
    n->requires_grad = true;
    n->parents = {x.node()};
    auto xn = x.node(); Node<T>* on = n.get();
    n->backfn = [xn, on, C, H, W, Ho, Wo]() {
      on->ensure_grad();
      xn->ensure_grad();
      for (int c = 0; c < C; ++c)
        for (int y = 0; y < Ho; ++y)
          for (int xx = 0; xx < Wo; ++xx)
            xn->grad[((int64_t)c * H + 2 * y) * W + 2 * xx] +=
                on->grad[((int64_t)c * Ho + y) * Wo + xx];
    };
  }
  return Tensor<T>::from_node(n);
}

// ------------------------------------------------------------ finite diffs

template <typename T>
Tensor<T> forward_diff_x(const Tensor<T>& a) {
  assert(a.val().ndim() == 3);
  int C = a.dim(0), H = a.dim(1), W = a.dim(2);
  ArrayT<T> v(a.shape());
  for (int c = 0; c < C; ++c)
    for (int y = 0; y < H; ++y) {
      const T* row = a.val().ptr() + ((int64_t)c * H + y) * W;
      T* orow = v.ptr() + ((int64_t)c * H + y) * W;
      for (int x = 0; x < W - 1; ++x) orow[x] = row[x + 1] - row[x];
      orow[W - 1] = T(0);
    }
  auto n = fresh(std::move(v));
  if (track(a)) {
    n->requires_grad = true;
    n->parents = {a.node()};
    auto an = a.node(); Node<T>* on = n.get();
    n->backfn = [an, on, C, H, W]() {
      on->ensure_grad();
      an->ensure_grad();
      for (int c = 0; c < C; ++c)
        for (int y = 0; y < H; ++y) {
          const T* g = on->grad.ptr() + ((int64_t)c * H + y) * W;
          T* ga = an->grad.ptr() + ((int64_t)c * H + y) * W;
          for (int x = 0; x < W - 1; ++x) {
            ga[x + 1] += g[x];
            ga[x] -= g[x];
          }
        }
    };
  }
  return Tensor<T>::from_node(n);
}

template <typename T>
Tensor<T> forward_diff_y(const Tensor<T>& a) {
  assert(a.val().ndim() == 3);
  int C = a.dim(0), H = a.dim(1), W = a.dim(2);
  ArrayT<T> v(a.shape());
  for (int c = 0; c < C; ++c) {
    const T* pc = a.val().ptr() + (int64_t)c * H * W;
    T* oc = v.ptr() + (int64_t)c * H * W;
    for (int y = 0; y < H - 1; ++y)
      for (int x = 0; x < W; ++x)
        oc[(int64_t)y * W + x] = pc[(int64_t)(y + 1) * W + x] - pc[(int64_t)y * W + x];
    for (int x = 0; x < W; ++x) oc[(int64_t)(H - 1) * W + x] = T(0);
  }
  auto n = fresh(std::move(v));
  if (track(a)) {
    n->requires_grad = true;
    n->parents = {a.node()};
    auto an = a.node(); Node<T>* on = n.get();
    n->backfn = [an, on, C, H, W]() {
      on->ensure_grad();
      an->ensure_grad();
      for (int c = 0; c < C; ++c) {
        const T* g = on->grad.ptr() + (int64_t)c * H * W;
        T* ga = an->grad.ptr() + (int64_t)c * H * W;
        for (int y = 0; y < H - 1; ++y)
          for (int x = 0; x < W; ++x) {
            ga[(int64_t)(y + 1) * W + x] += g[(int64_t)y * W + x];
            ga[(int64_t)y * W + x] -= g[(int64_t)y * W + x];
          }
      }
    };
  }
  return Tensor<T>::from_node(n);
}

// ---------------------------------------------------------------- instantiate

#define OTVM_INSTANTIATE_OPS(T)                                                         \
  template Tensor<T> add(const Tensor<T>&, const Tensor<T>&);                           \
  template Tensor<T> sub(const Tensor<T>&, const Tensor<T>&);                           \
  template Tensor<T> mul(const Tensor<T>&, const Tensor<T>&);                           \
  template Tensor<T> div_t(const Tensor<T>&, const Tensor<T>&);                         \
  template Tensor<T> add_scalar(const Tensor<T>&, T);                                   \
  template Tensor<T> mul_scalar(const Tensor<T>&, T);                                   \
  template Tensor<T> neg(const Tensor<T>&);                                             \
  template Tensor<T> abs_t(const Tensor<T>&);                                           \
  template Tensor<T> relu(const Tensor<T>&);                                            \
  template Tensor<T> lrelu(const Tensor<T>&, T);                                        \
  template Tensor<T> sigmoid_t(const Tensor<T>&);                                       \
  template Tensor<T> log_t(const Tensor<T>&);                                           \
  template Tensor<T> clamp(const Tensor<T>&, T, T);                                     \
  template Tensor<T> mul_const(const Tensor<T>&, const ArrayT<T>&);                     \
  template Tensor<T> sum_all(const Tensor<T>&);                                         \
  template Tensor<T> mean_all(const Tensor<T>&);                                        \
  template Tensor<T> concat_c(const std::vector<Tensor<T>>&);                           \
  template Tensor<T> slice_c(const Tensor<T>&, int, int);                               \
  template Tensor<T> chw_to_nc(const Tensor<T>&);                                       \
  template Tensor<T> nc_to_chw(const Tensor<T>&, int, int);                             \
  template Tensor<T> concat_rows(const std::vector<Tensor<T>>&);                        \
  template Tensor<T> detach(const Tensor<T>&);                                          \
  template Tensor<T> matmul_nn(const Tensor<T>&, const Tensor<T>&);                     \
  template Tensor<T> matmul_nt(const Tensor<T>&, const Tensor<T>&);                     \
  template Tensor<T> softmax_c(const Tensor<T>&);                                       \
  template Tensor<T> softmax_rows(const Tensor<T>&);                                    \
  template Tensor<T> conv2d(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, int,  \
                            int, int);                                                  \
  template Tensor<T> standardize_filters(const Tensor<T>&, T);                          \
  template Tensor<T> group_norm(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,   \
                                int, T);                                                \
  template Tensor<T> maxpool2d(const Tensor<T>&, int, int, int);                        \
  template Tensor<T> bilinear_resize(const Tensor<T>&, int, int);                       \
  template Tensor<T> adaptive_avg_pool(const Tensor<T>&, int, int);                     \
  template Tensor<T> blur_sep2d(const Tensor<T>&, const std::vector<T>&);               \
  template Tensor<T> subsample2(const Tensor<T>&);                                      \
  template Tensor<T> forward_diff_x(const Tensor<T>&);                                  \
  template Tensor<T> forward_diff_y(const Tensor<T>&);

OTVM_INSTANTIATE_OPS(float)
OTVM_INSTANTIATE_OPS(double)

}  // namespace otvm::core
