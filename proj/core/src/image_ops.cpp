#include "otvm/image_ops.hpp"

#include <algorithm>
#include <cmath>

namespace otvm::core {

namespace {

constexpr double kPi = 3.14159265358979323846;

inline int reflect_idx(int i, int n) {
  if (n == 1) return 0;
  int period = 2 * (n - 1);
  i = std::abs(i) % period;
  return i < n ? i : period - i;
}

inline double sample_border(const ArrayD& img, int c, int y, int x, Border b) {
  int H = img.dim(1), W = img.dim(2);
  if (y >= 0 && y < H && x >= 0 && x < W) return img.at(c, y, x);
  if (b == Border::kZero) return 0.0;
  return img.at(c, reflect_idx(y, H), reflect_idx(x, W));
}

}  // namespace

Affine Affine::from_params(double cx, double cy, double angle_deg, double zoom,
                           double shear_deg, double tx, double ty, bool hflip) {
  // forward map: translate(center) * rot * shear * zoom * flip * translate(-center)
  // plus (tx, ty); we return its inverse for output->input sampling
  double a = angle_deg * kPi / 180.0;
  double sh = std::tan(shear_deg * kPi / 180.0);
  double ca = std::cos(a), sa = std::sin(a);
  double fx = hflip ? -1.0 : 1.0;
  // linear part L = R * Sh * Z * F with
  // R = [ca -sa; sa ca], Sh = [1 sh; 0 1], Z = zoom*I, F = diag(fx, 1)
  double r00 = ca, r01 = -sa, r10 = sa, r11 = ca;
  double s00 = 1, s01 = sh, s10 = 0, s11 = 1;
  double m00 = (r00 * s00 + r01 * s10) * zoom * fx;
  double m01 = (r00 * s01 + r01 * s11) * zoom;
  double m10 = (r10 * s00 + r11 * s10) * zoom * fx;
  double m11 = (r10 * s01 + r11 * s11) * zoom;
  // forward: p' = L*(p - c) + c + t  =>  inverse: p = Linv*(p' - c - t) + c
  double det = m00 * m11 - m01 * m10;
  double i00 = m11 / det, i01 = -m01 / det, i10 = -m10 / det, i11 = m00 / det;
  Affine out;
  out.m[0] = i00;
  out.m[1] = i01;
  out.m[3] = i10;
  out.m[4] = i11;
  double ox = cx + tx, oy = cy + ty;
  out.m[2] = cx - (i00 * ox + i01 * oy);
  out.m[5] = cy - (i10 * ox + i11 * oy);
  return out;
}

Affine Affine::compose(const Affine& inner) const {
  Affine r;
  r.m[0] = m[0] * inner.m[0] + m[1] * inner.m[3];
  r.m[1] = m[0] * inner.m[1] + m[1] * inner.m[4];
  r.m[2] = m[0] * inner.m[2] + m[1] * inner.m[5] + m[2];
  r.m[3] = m[3] * inner.m[0] + m[4] * inner.m[3];
  r.m[4] = m[3] * inner.m[1] + m[4] * inner.m[4];
  r.m[5] = m[3] * inner.m[2] + m[4] * inner.m[5] + m[5];
  return r;
}

void Affine::apply(double x, double y, double& ox, double& oy) const {
  ox = m[0] * x + m[1] * y + m[2];
  oy = m[3] * x + m[4] * y + m[5];
}

ArrayD warp_affine(const ArrayD& src, const Affine& inv_map, int out_h, int out_w,
                   Border border) {
  int C = src.dim(0);
  ArrayD out({C, out_h, out_w});
  for (int y = 0; y < out_h; ++y) {
    for (int x = 0; x < out_w; ++x) {
      double sx = 0.0, sy = 0.0;
      inv_map.apply((double)x, (double)y, sx, sy);
      double fy = std::floor(sy), fx = std::floor(sx);
      int y0 = (int)fy, x0 = (int)fx;
      double wy = sy - fy, wx = sx - fx;
      for (int c = 0; c < C; ++c) {
        double v00 = sample_border(src, c, y0, x0, border);
        double v01 = sample_border(src, c, y0, x0 + 1, border);
        double v10 = sample_border(src, c, y0 + 1, x0, border);
        double v11 = sample_border(src, c, y0 + 1, x0 + 1, border);
        out.at(c, y, x) =
            (1 - wy) * ((1 - wx) * v00 + wx * v01) + wy * ((1 - wx) * v10 + wx * v11);
      }
    }
  }
  return out;
}

ArrayD resize_bilinear_d(const ArrayD& src, int out_h, int out_w) {
  int C = src.dim(0), H = src.dim(1), W = src.dim(2);
  ArrayD out({C, out_h, out_w});
  double sy = (double)H / out_h, sx = (double)W / out_w;
  for (int y = 0; y < out_h; ++y) {
    double fy = (y + 0.5) * sy - 0.5;
    int y0 = (int)std::floor(fy);
    double wy = fy - y0;
    int ya = std::clamp(y0, 0, H - 1), yb = std::clamp(y0 + 1, 0, H - 1);
    for (int x = 0; x < out_w; ++x) {
      double fx = (x + 0.5) * sx - 0.5;
      int x0 = (int)std::floor(fx);
      double wx = fx - x0;
      int xa = std::clamp(x0, 0, W - 1), xb = std::clamp(x0 + 1, 0, W - 1);
      for (int c = 0; c < C; ++c) {
        out.at(c, y, x) = (1 - wy) * ((1 - wx) * src.at(c, ya, xa) + wx * src.at(c, ya, xb)) +
                          wy * ((1 - wx) * src.at(c, yb, xa) + wx * src.at(c, yb, xb));
      }
    }
  }
  return out;
}

std::vector<double> gaussian_kernel1d(double sigma) {
  int r = (int)std::ceil(3.0 * sigma);
  std::vector<double> k((size_t)(2 * r + 1));
  double s = 0;
  for (int i = -r; i <= r; ++i) {
    double v = std::exp(-(double)(i * i) / (2.0 * sigma * sigma));
    k[(size_t)(i + r)] = v;
    s += v;
  }
  for (auto& v : k) v /= s;
  return k;
}

ArrayD blur_separable_d(const ArrayD& src, const std::vector<double>& k) {
  int C = src.dim(0), H = src.dim(1), W = src.dim(2);
  int r = ((int)k.size() - 1) / 2;
  ArrayD tmp(src.shape), out(src.shape);
  for (int c = 0; c < C; ++c)
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x) {
        double s = 0;
        for (int i = 0; i < (int)k.size(); ++i)
          s += k[(size_t)i] * src.at(c, y, reflect_idx(x + i - r, W));
        tmp.at(c, y, x) = s;
      }
  for (int c = 0; c < C; ++c)
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x) {
        double s = 0;
        for (int i = 0; i < (int)k.size(); ++i)
          s += k[(size_t)i] * tmp.at(c, reflect_idx(y + i - r, H), x);
        out.at(c, y, x) = s;
      }
  return out;
}

ArrayD conv2d_reflect_d(const ArrayD& src, const ArrayD& kernel) {
  int C = src.dim(0), H = src.dim(1), W = src.dim(2);
  int kh = kernel.dim(0), kw = kernel.dim(1);
  int ry = (kh - 1) / 2, rx = (kw - 1) / 2;
  ArrayD out(src.shape);
  for (int c = 0; c < C; ++c)
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x) {
        double s = 0;
        for (int ky = 0; ky < kh; ++ky)
          for (int kx = 0; kx < kw; ++kx)
            s += kernel.at(ky, kx) *
                 src.at(c, reflect_idx(y + ky - ry, H), reflect_idx(x + kx - rx, W));
        out.at(c, y, x) = s;
      }
  return out;
}

ArrayD motion_blur_kernel(int length, double angle_deg) {
  int k = length | 1;  // odd extent covering the segment
  ArrayD ker({k, k});
  if (length <= 1) {
    ker.at(k / 2, k / 2) = 1.0;
    return ker;
  }
  double a = angle_deg * kPi / 180.0;
  double dx = std::cos(a), dy = std::sin(a);
  int c = k / 2;
  // rasterize the segment with bilinear splats at unit steps
  int steps = 4 * length;
  for (int i = 0; i <= steps; ++i) {
    double t = ((double)i / steps - 0.5) * (length - 1);
    double x = c + t * dx, y = c + t * dy;
    int x0 = (int)std::floor(x), y0 = (int)std::floor(y);
    double wx = x - x0, wy = y - y0;
    auto splat = [&](int yy, int xx, double w) {
      if (yy >= 0 && yy < k && xx >= 0 && xx < k) ker.at(yy, xx) += w;
    };
    splat(y0, x0, (1 - wy) * (1 - wx));
    splat(y0, x0 + 1, (1 - wy) * wx);
    splat(y0 + 1, x0, wy * (1 - wx));
    splat(y0 + 1, x0 + 1, wy * wx);
  }
  double s = 0;
  for (int64_t i = 0; i < ker.numel(); ++i) s += ker[i];
  for (int64_t i = 0; i < ker.numel(); ++i) ker[i] /= s;
  return ker;
}

ArrayT<uint8_t> dilate_square(const ArrayT<uint8_t>& mask, int k) {
  assert(k >= 1 && k % 2 == 1 && mask.ndim() == 2);
  int H = mask.dim(0), W = mask.dim(1), r = (k - 1) / 2;
  // two-pass separable max filter
  ArrayT<uint8_t> tmp(mask.shape), out(mask.shape);
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) {
      uint8_t m = 0;
      for (int i = std::max(0, x - r); i <= std::min(W - 1, x + r) && !m; ++i)
        m = mask.at(y, i);
      tmp.at(y, x) = m;
    }
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) {
      uint8_t m = 0;
      for (int i = std::max(0, y - r); i <= std::min(H - 1, y + r) && !m; ++i)
        m = tmp.at(i, x);
      out.at(y, x) = m;
    }
  return out;
}

ArrayD histogram_match(const ArrayD& src, const ArrayD& ref, const ArrayD& src_weight,
                       const ArrayD& ref_weight) {
  constexpr int kBins = 256;
  int C = src.dim(0);
  ArrayD out(src.shape);
  auto weight_at = [](const ArrayD& w, int64_t i) { return w.empty() ? 1.0 : w[i]; };
  for (int c = 0; c < C; ++c) {
    int64_t ns = (int64_t)src.dim(1) * src.dim(2);
    int64_t nr = (int64_t)ref.dim(1) * ref.dim(2);
    const double* ps = src.ptr() + c * ns;
    const double* pr = ref.ptr() + c * nr;

    std::vector<double> hs(kBins, 0.0), hr(kBins, 0.0);
    double ws = 0, wr = 0;
    for (int64_t i = 0; i < ns; ++i) {
      int b = std::clamp((int)(ps[i] * (kBins - 1) + 0.5), 0, kBins - 1);
      double w = weight_at(src_weight, i);
      hs[(size_t)b] += w;
      ws += w;
    }
    for (int64_t i = 0; i < nr; ++i) {
      int b = std::clamp((int)(pr[i] * (kBins - 1) + 0.5), 0, kBins - 1);
      double w = weight_at(ref_weight, i);
      hr[(size_t)b] += w;
      wr += w;
    }
    if (ws <= 0 || wr <= 0) {
      std::copy(ps, ps + ns, out.ptr() + c * ns);
      continue;
    }
    std::vector<double> cs(kBins), cr(kBins);
    double accs = 0, accr = 0;
    for (int b = 0; b < kBins; ++b) {
      accs += hs[(size_t)b] / ws;
      accr += hr[(size_t)b] / wr;
      cs[(size_t)b] = accs;
      cr[(size_t)b] = accr;
    }
    // lut[b] = smallest value v with ref_cdf(v) >= src_cdf(b)
    std::vector<double> lut(kBins);
    int j = 0;
    for (int b = 0; b < kBins; ++b) {
      while (j < kBins - 1 && cr[(size_t)j] < cs[(size_t)b] - 1e-12) ++j;
      lut[(size_t)b] = (double)j / (kBins - 1);
    }
    for (int64_t i = 0; i < ns; ++i) {
      double v = std::clamp(ps[i], 0.0, 1.0) * (kBins - 1);
      int b0 = (int)v;
      int b1 = std::min(b0 + 1, kBins - 1);
      double f = v - b0;
      out.ptr()[c * ns + i] = (1 - f) * lut[(size_t)b0] + f * lut[(size_t)b1];
    }
  }
  return out;
}

}  // namespace otvm::core
