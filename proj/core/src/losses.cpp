#include "otvm/losses.hpp"

#include <cassert>
#include <cmath>

namespace otvm::losses {

using core::Tensor;

namespace {

template <typename T>
Tensor<T> constant(const ArrayT<T>& a) {
  return Tensor<T>::constant(a);
}

// x broadcast from {1,H,W} to {C,H,W}
template <typename T>
Tensor<T> repeat_c(const Tensor<T>& x, int c) {
  std::vector<Tensor<T>> v(c, x);
  return core::concat_c<T>(v);
}

template <typename T>
ArrayT<T> repeat_c_arr(const ArrayT<T>& x, int c) {
  int h = x.dim(1), w = x.dim(2);
  ArrayT<T> out({c, h, w});
  for (int i = 0; i < c; ++i)
    std::copy(x.data.begin(), x.data.end(), out.data.begin() + (int64_t)i * h * w);
  return out;
}

template <typename T>
ArrayT<T> mul_arr(const ArrayT<T>& a, const ArrayT<T>& b) {
  assert(a.same_shape(b));
  ArrayT<T> out(a.shape);
  for (int64_t i = 0; i < a.numel(); ++i) out.data[i] = a.data[i] * b.data[i];
  return out;
}

template <typename T>
Tensor<T> l1_mean(const Tensor<T>& a, const ArrayT<T>& b) {
  return core::mean_all(core::abs_t(core::sub(a, constant(b))));
}

// sum |a - b| / denom
template <typename T>
Tensor<T> l1_sum_scaled(const Tensor<T>& a, const ArrayT<T>& b, T inv_denom) {
  return core::mul_scalar(core::sum_all(core::abs_t(core::sub(a, constant(b)))), inv_denom);
}

}  // namespace

template <typename T>
Tensor<T> ce_trimap(const Tensor<T>& pred, const ArrayT<T>& gt) {
  assert(pred.shape() == gt.shape && pred.dim(0) == 3);
  int hw = pred.dim(1) * pred.dim(2);
  Tensor<T> lp = core::log_t(core::clamp(pred, (T)1e-8, (T)1));
  Tensor<T> picked = core::mul_const(lp, gt);
  return core::mul_scalar(core::neg(core::sum_all(picked)), (T)1 / (T)hw);
}

template <typename T>
Tensor<T> trimap_ce_sum(const std::vector<Tensor<T>>& pred,
                        const std::vector<ArrayT<T>>& gt) {
  assert(pred.size() == gt.size());
  Tensor<T> acc = scalar_zero<T>();
  for (size_t i = 0; i < pred.size(); ++i) acc = core::add(acc, ce_trimap(pred[i], gt[i]));
  return acc;
}

template <typename T>
std::vector<Tensor<T>> laplacian_pyramid(const Tensor<T>& x, int levels) {
  static const std::vector<T> kBinomial = {(T)(1.0 / 16), (T)(4.0 / 16), (T)(6.0 / 16),
                                           (T)(4.0 / 16), (T)(1.0 / 16)};
  std::vector<Tensor<T>> bands;
  Tensor<T> g = x;
  for (int s = 0; s < levels - 1; ++s) {
    Tensor<T> low = core::subsample2(core::blur_sep2d(g, kBinomial));
    Tensor<T> up = core::bilinear_resize(low, g.dim(1), g.dim(2));
    bands.push_back(core::sub(g, up));
    g = low;
  }
  bands.push_back(g);
  return bands;
}

template <typename T>
Tensor<T> pyramid_l1(const Tensor<T>& a, const Tensor<T>& b, int levels) {
  std::vector<Tensor<T>> pa = laplacian_pyramid(a, levels);
  std::vector<Tensor<T>> pb = laplacian_pyramid(b, levels);
  Tensor<T> acc = scalar_zero<T>();
  T w = 1;
  for (int s = 0; s < levels; ++s, w *= 2) {
    Tensor<T> band = core::mean_all(core::abs_t(core::sub(pa[s], pb[s])));
    acc = core::add(acc, core::mul_scalar(band, w));
  }
  return acc;
}

template <typename T>
Tensor<T> scalar_zero() {
  return Tensor<T>::constant(ArrayT<T>::zeros({1}));
}

template <typename T>
AlphaLossTerms<T> alpha_losses(const std::vector<Tensor<T>>& pred,
                               const std::vector<ArrayT<T>>& gt,
                               const std::vector<ArrayT<T>>& frames,
                               const std::vector<ArrayT<T>>& fg,
                               const std::vector<ArrayT<T>>& bg) {
  int n = (int)pred.size();
  assert(n > 0 && (int)gt.size() == n && (int)frames.size() == n);
  AlphaLossTerms<T> out;
  out.l1 = scalar_zero<T>();
  out.comp = scalar_zero<T>();
  out.lap = scalar_zero<T>();
  out.grad = scalar_zero<T>();
  out.tc = scalar_zero<T>();

  for (int t = 0; t < n; ++t) {
    const Tensor<T>& a = pred[t];
    assert(a.dim(0) == 1 && a.shape() == gt[t].shape);
    out.l1 = core::add(out.l1, l1_mean(a, gt[t]));

    // recomposition: a*F + (1-a)*B = B + a*(F-B), plates held fixed
    ArrayT<T> fb(fg[t].shape);
    for (int64_t i = 0; i < fb.numel(); ++i) fb.data[i] = fg[t].data[i] - bg[t].data[i];
    Tensor<T> comp = core::add(core::mul_const(repeat_c(a, 3), fb), constant(bg[t]));
    out.comp = core::add(out.comp, l1_mean(comp, frames[t]));

    out.lap = core::add(out.lap, pyramid_l1(a, constant(gt[t])));

    Tensor<T> diff = core::sub(a, constant(gt[t]));
    Tensor<T> gx = core::mean_all(core::abs_t(core::forward_diff_x(diff)));
    Tensor<T> gy = core::mean_all(core::abs_t(core::forward_diff_y(diff)));
    out.grad = core::add(out.grad, core::add(gx, gy));

    if (t > 0) {
      // penalize prediction flicker beyond the true change
      ArrayT<T> dgt(gt[t].shape);
      for (int64_t i = 0; i < dgt.numel(); ++i)
        dgt.data[i] = gt[t].data[i] - gt[t - 1].data[i];
      Tensor<T> dpred = core::sub(pred[t], pred[t - 1]);
      out.tc = core::add(out.tc, l1_mean(dpred, dgt));
    }
  }

  T inv_n = (T)1 / (T)n;
  out.l1 = core::mul_scalar(out.l1, inv_n);
  out.comp = core::mul_scalar(out.comp, inv_n);
  out.lap = core::mul_scalar(out.lap, inv_n);
  out.grad = core::mul_scalar(out.grad, inv_n);
  if (n > 1) out.tc = core::mul_scalar(out.tc, (T)1 / (T)(n - 1));

  out.total = core::add(core::add(core::add(out.l1, out.comp), core::add(out.lap, out.grad)),
                        out.tc);
  return out;
}

template <typename T>
FbLossTerms<T> fb_losses(const std::vector<Tensor<T>>& pred_f,
                         const std::vector<Tensor<T>>& pred_b,
                         const std::vector<ArrayT<T>>& gt_alpha,
                         const std::vector<ArrayT<T>>& fg,
                         const std::vector<ArrayT<T>>& bg,
                         const std::vector<ArrayT<T>>& frames,
                         const std::vector<ArrayT<T>>& unk) {
  int n = (int)pred_f.size();
  assert(n > 0 && (int)pred_b.size() == n && (int)unk.size() == n);
  FbLossTerms<T> out;
  out.l1 = scalar_zero<T>();
  out.comp = scalar_zero<T>();
  out.lap = scalar_zero<T>();
  out.excl = scalar_zero<T>();
  out.tc = scalar_zero<T>();

  // per-frame masked maps, kept for the temporal term
  std::vector<Tensor<T>> xf(n), xb(n);
  std::vector<ArrayT<T>> yf(n), yb(n);
  std::vector<T> inv(n, (T)0);

  for (int t = 0; t < n; ++t) {
    int h = unk[t].dim(1), w = unk[t].dim(2), hw = h * w;
    int64_t cnt = 0;
    ArrayT<T> mf({1, h, w});  // unknown pixels where fg is observable
    for (int i = 0; i < hw; ++i) {
      T u = unk[t].data[i];
      cnt += u > (T)0.5;
      mf.data[i] = (u > (T)0.5 && gt_alpha[t].data[i] > (T)0) ? (T)1 : (T)0;
    }
    ArrayT<T> mf3 = repeat_c_arr(mf, 3);
    ArrayT<T> u3 = repeat_c_arr(unk[t], 3);
    xf[t] = core::mul_const(pred_f[t], mf3);
    xb[t] = core::mul_const(pred_b[t], u3);
    yf[t] = mul_arr(mf3, fg[t]);
    yb[t] = mul_arr(u3, bg[t]);
    if (cnt == 0) continue;
    inv[t] = (T)1 / (T)(3 * cnt);

    out.l1 = core::add(out.l1, core::add(l1_sum_scaled(xf[t], yf[t], inv[t]),
                                         l1_sum_scaled(xb[t], yb[t], inv[t])));

    // recomposition with the true alpha; coefficients vanish off-mask
    ArrayT<T> cf({3, h, w}), cb({3, h, w}), ci({3, h, w});
    for (int c = 0; c < 3; ++c)
      for (int i = 0; i < hw; ++i) {
        T u = unk[t].data[i], y = gt_alpha[t].data[i];
        int64_t k = (int64_t)c * hw + i;
        cf.data[k] = u * y;
        cb.data[k] = u * ((T)1 - y);
        ci.data[k] = u * frames[t].data[k];
      }
    Tensor<T> comp =
        core::add(core::mul_const(pred_f[t], cf), core::mul_const(pred_b[t], cb));
    out.comp = core::add(out.comp, l1_sum_scaled(comp, ci, inv[t]));

    // pyramid distance of the masked maps, every band normalized by the
    // full-resolution unknown count
    {
      std::vector<Tensor<T>> pa = laplacian_pyramid(xf[t]);
      std::vector<Tensor<T>> pg = laplacian_pyramid(constant(yf[t]));
      std::vector<Tensor<T>> qa = laplacian_pyramid(xb[t]);
      std::vector<Tensor<T>> qg = laplacian_pyramid(constant(yb[t]));
      T wgt = 1;
      for (size_t s = 0; s < pa.size(); ++s, wgt *= 2) {
        Tensor<T> bf = core::sum_all(core::abs_t(core::sub(pa[s], pg[s])));
        Tensor<T> bb = core::sum_all(core::abs_t(core::sub(qa[s], qg[s])));
        out.lap = core::add(
            out.lap, core::mul_scalar(core::add(bf, bb), wgt * inv[t]));
      }
    }

    // gradients of fg and bg should not fire at the same place
    Tensor<T> ex = core::mul(core::abs_t(core::forward_diff_x(xf[t])),
                             core::abs_t(core::forward_diff_x(xb[t])));
    Tensor<T> ey = core::mul(core::abs_t(core::forward_diff_y(xf[t])),
                             core::abs_t(core::forward_diff_y(xb[t])));
    out.excl = core::add(
        out.excl, core::mul_scalar(core::add(core::sum_all(ex), core::sum_all(ey)), inv[t]));
  }

  for (int t = 1; t < n; ++t) {
    if (inv[t] == (T)0) continue;
    ArrayT<T> dyf(yf[t].shape), dyb(yb[t].shape);
    for (int64_t i = 0; i < dyf.numel(); ++i) {
      dyf.data[i] = yf[t].data[i] - yf[t - 1].data[i];
      dyb.data[i] = yb[t].data[i] - yb[t - 1].data[i];
    }
    Tensor<T> df = core::sub(xf[t], xf[t - 1]);
    Tensor<T> db = core::sub(xb[t], xb[t - 1]);
    out.tc = core::add(out.tc, core::add(l1_sum_scaled(df, dyf, inv[t]),
                                         l1_sum_scaled(db, dyb, inv[t])));
  }

  T inv_n = (T)1 / (T)n;
  out.l1 = core::mul_scalar(out.l1, inv_n);
  out.comp = core::mul_scalar(out.comp, inv_n);
  out.lap = core::mul_scalar(out.lap, inv_n);
  out.excl = core::mul_scalar(out.excl, inv_n);
  if (n > 1) out.tc = core::mul_scalar(out.tc, (T)1 / (T)(n - 1));

  out.total = core::add(
      core::add(core::add(out.l1, out.comp), core::add(out.lap, out.excl)), out.tc);
  return out;
}

template <typename T>
ArrayT<T> unknown_mask(const ArrayT<T>& trimap) {
  assert(trimap.dim(0) == 3);
  int h = trimap.dim(1), w = trimap.dim(2), hw = h * w;
  ArrayT<T> m({1, h, w});
  for (int i = 0; i < hw; ++i) m.data[i] = trimap.data[hw + i] > (T)0.5 ? (T)1 : (T)0;
  return m;
}

#define OTVM_INSTANTIATE_LOSSES(T)                                                        \
  template Tensor<T> ce_trimap<T>(const Tensor<T>&, const ArrayT<T>&);                    \
  template Tensor<T> trimap_ce_sum<T>(const std::vector<Tensor<T>>&,                      \
                                      const std::vector<ArrayT<T>>&);                     \
  template std::vector<Tensor<T>> laplacian_pyramid<T>(const Tensor<T>&, int);            \
  template Tensor<T> pyramid_l1<T>(const Tensor<T>&, const Tensor<T>&, int);              \
  template Tensor<T> scalar_zero<T>();                                                    \
  template AlphaLossTerms<T> alpha_losses<T>(                                             \
      const std::vector<Tensor<T>>&, const std::vector<ArrayT<T>>&,                       \
      const std::vector<ArrayT<T>>&, const std::vector<ArrayT<T>>&,                       \
      const std::vector<ArrayT<T>>&);                                                     \
  template FbLossTerms<T> fb_losses<T>(                                                   \
      const std::vector<Tensor<T>>&, const std::vector<Tensor<T>>&,                       \
      const std::vector<ArrayT<T>>&, const std::vector<ArrayT<T>>&,                       \
      const std::vector<ArrayT<T>>&, const std::vector<ArrayT<T>>&,                       \
      const std::vector<ArrayT<T>>&);                                                     \
  template ArrayT<T> unknown_mask<T>(const ArrayT<T>&);

OTVM_INSTANTIATE_LOSSES(float)
OTVM_INSTANTIATE_LOSSES(double)

}  // namespace otvm::losses
