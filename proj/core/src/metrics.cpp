#include "otvm/metrics.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>

#include "otvm/image_ops.hpp"

namespace otvm::metrics {

namespace {

int64_t mask_count(const ArrayD& m) {
  int64_t c = 0;
  for (double v : m.data) c += v > 0.5;
  return c;
}

// l_map[i] = highest threshold at which pixel i is still attached to the
// body of the matte; distance below it is penalized once it exceeds 0.15
double connectivity_error(const ArrayD& pred, const ArrayD& gt, const ArrayD& mask) {
  int h = pred.dim(1), w = pred.dim(2), hw = h * w;
  std::vector<double> l_map(hw, -1.0);
  ArrayT<uint8_t> joint({h, w});
  for (int step = 1; step <= 9; ++step) {
    double th = 0.1 * (step + 1);
    for (int i = 0; i < hw; ++i)
      joint.data[i] = (pred.data[i] >= th && gt.data[i] >= th) ? 1 : 0;
    ArrayT<uint8_t> omega = largest_component(joint);
    double below = 0.1 * step;
    for (int i = 0; i < hw; ++i)
      if (l_map[i] < 0.0 && !omega.data[i]) l_map[i] = below;
  }
  double err = 0;
  for (int i = 0; i < hw; ++i) {
    if (mask.data[i] <= 0.5) continue;
    double l = l_map[i] < 0.0 ? 1.0 : l_map[i];
    double dp = pred.data[i] - l, dg = gt.data[i] - l;
    double phi_p = 1.0 - (dp >= 0.15 ? dp : 0.0);
    double phi_g = 1.0 - (dg >= 0.15 ? dg : 0.0);
    err += std::abs(phi_p - phi_g);
  }
  return err;
}

// best +-4 whole-pixel shift of each 8x8 block, judged on the reference
// alpha, used to follow content between consecutive frames
void block_motion(const ArrayD& cur, const ArrayD& prev, std::vector<int>& vx,
                  std::vector<int>& vy) {
  const int B = 8, R = 4;
  int h = cur.dim(1), w = cur.dim(2);
  int bw = (w + B - 1) / B, bh = (h + B - 1) / B;
  vx.assign((size_t)bw * bh, 0);
  vy.assign((size_t)bw * bh, 0);
  for (int by = 0; by < bh; ++by)
    for (int bx = 0; bx < bw; ++bx) {
      int y0 = by * B, x0 = bx * B;
      int y1 = std::min(y0 + B, h), x1 = std::min(x0 + B, w);
      double best = std::numeric_limits<double>::infinity();
      int bvx = 0, bvy = 0;
      for (int dy = -R; dy <= R; ++dy)
        for (int dx = -R; dx <= R; ++dx) {
          double ssd = 0;
          int64_t n = 0;
          for (int y = y0; y < y1; ++y) {
            int py = y + dy;
            if (py < 0 || py >= h) continue;
            for (int x = x0; x < x1; ++x) {
              int px = x + dx;
              if (px < 0 || px >= w) continue;
              double d = cur.data[y * w + x] - prev.data[py * w + px];
              ssd += d * d;
              ++n;
            }
          }
          if (!n) continue;
          ssd /= (double)n;
          bool zero_first = dy == 0 && dx == 0;
          if (ssd < best || (zero_first && ssd <= best)) {
            best = ssd;
            bvx = dx;
            bvy = dy;
          }
        }
      vx[by * bw + bx] = bvx;
      vy[by * bw + bx] = bvy;
    }
}

}  // namespace

ArrayT<uint8_t> largest_component(const ArrayT<uint8_t>& mask) {
  int h = mask.dim(0), w = mask.dim(1), hw = h * w;
  ArrayT<uint8_t> out = ArrayT<uint8_t>::zeros({h, w});
  std::vector<int32_t> label(hw, -1);
  std::vector<int> stack;
  int best_label = -1;
  int64_t best_size = 0;
  int next = 0;
  for (int s = 0; s < hw; ++s) {
    if (!mask.data[s] || label[s] >= 0) continue;
    int64_t size = 0;
    stack.push_back(s);
    label[s] = next;
    while (!stack.empty()) {
      int i = stack.back();
      stack.pop_back();
      ++size;
      int y = i / w, x = i % w;
      const int ny[4] = {y - 1, y + 1, y, y};
      const int nx[4] = {x, x, x - 1, x + 1};
      for (int k = 0; k < 4; ++k) {
        if (ny[k] < 0 || ny[k] >= h || nx[k] < 0 || nx[k] >= w) continue;
        int j = ny[k] * w + nx[k];
        if (mask.data[j] && label[j] < 0) {
          label[j] = next;
          stack.push_back(j);
        }
      }
    }
    if (size > best_size) {
      best_size = size;
      best_label = next;
    }
    ++next;
  }
  if (best_label >= 0)
    for (int i = 0; i < hw; ++i) out.data[i] = label[i] == best_label ? 1 : 0;
  return out;
}

ArrayD gauss_deriv_mag(const ArrayD& a, double sigma) {
  assert(a.dim(0) == 1);
  std::vector<double> g = core::gaussian_kernel1d(sigma);
  int r = ((int)g.size() - 1) / 2;
  std::vector<double> dg(g.size());
  for (size_t i = 0; i < g.size(); ++i) {
    double x = (double)((int)i - r);
    dg[i] = -x / (sigma * sigma) * g[i];
  }
  int h = a.dim(1), w = a.dim(2);
  auto reflect = [](int i, int n) {
    if (n == 1) return 0;
    int p = 2 * (n - 1);
    i = ((i % p) + p) % p;
    return i < n ? i : p - i;
  };
  // horizontal pass with each kernel, then vertical with the other
  auto pass_x = [&](const std::vector<double>& k) {
    ArrayD out({1, h, w});
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        double s = 0;
        for (int i = -r; i <= r; ++i) s += k[i + r] * a.data[y * w + reflect(x + i, w)];
        out.data[y * w + x] = s;
      }
    return out;
  };
  auto pass_y = [&](const ArrayD& src, const std::vector<double>& k) {
    ArrayD out({1, h, w});
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        double s = 0;
        for (int i = -r; i <= r; ++i) s += k[i + r] * src.data[reflect(y + i, h) * w + x];
        out.data[y * w + x] = s;
      }
    return out;
  };
  ArrayD gx = pass_y(pass_x(dg), g);
  ArrayD gy = pass_y(pass_x(g), dg);
  ArrayD mag({1, h, w});
  for (int i = 0; i < h * w; ++i) mag.data[i] = std::hypot(gx.data[i], gy.data[i]);
  return mag;
}

SeqEval evaluate_sequence(const std::vector<ArrayD>& pred, const std::vector<ArrayD>& gt,
                          const std::vector<ArrayD>& mask, const MetricScales& sc) {
  int n = (int)pred.size();
  assert(n > 0 && (int)gt.size() == n && (int)mask.size() == n);
  SeqEval ev;
  for (int t = 0; t < n; ++t) {
    assert(pred[t].same_shape(gt[t]) && pred[t].dim(0) == 1);
    int64_t cnt = mask_count(mask[t]);
    if (cnt == 0) continue;
    double se = 0, ae = 0;
    for (int64_t i = 0; i < pred[t].numel(); ++i) {
      if (mask[t].data[i] <= 0.5) continue;
      double d = pred[t].data[i] - gt[t].data[i];
      se += d * d;
      ae += std::abs(d);
    }
    ev.ssda += std::sqrt(se / (double)cnt);
    ev.mse += se / (double)cnt;
    ev.mad += ae / (double)cnt;
    ev.sad += ae;

    ArrayD mp = gauss_deriv_mag(pred[t], 1.4);
    ArrayD mg = gauss_deriv_mag(gt[t], 1.4);
    double ge = 0;
    for (int64_t i = 0; i < mp.numel(); ++i) {
      if (mask[t].data[i] <= 0.5) continue;
      double d = mp.data[i] - mg.data[i];
      ge += d * d;
    }
    ev.grad += ge;
    ev.conn += connectivity_error(pred[t], gt[t], mask[t]);
  }

  for (int t = 1; t < n; ++t) {
    int64_t cnt = mask_count(mask[t]);
    if (cnt == 0) continue;
    int h = pred[t].dim(1), w = pred[t].dim(2);
    double sd = 0;
    for (int i = 0; i < h * w; ++i) {
      if (mask[t].data[i] <= 0.5) continue;
      double d = (pred[t].data[i] - pred[t - 1].data[i]) -
                 (gt[t].data[i] - gt[t - 1].data[i]);
      sd += d * d;
    }
    ev.dtssd += std::sqrt(sd / (double)cnt);

    std::vector<int> vx, vy;
    block_motion(gt[t], gt[t - 1], vx, vy);
    const int B = 8;
    int bw = (w + B - 1) / B;
    double me = 0;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        int i = y * w + x;
        if (mask[t].data[i] <= 0.5) continue;
        int b = (y / B) * bw + (x / B);
        int py = std::clamp(y + vy[b], 0, h - 1);
        int px = std::clamp(x + vx[b], 0, w - 1);
        double cur_err = pred[t].data[i] - gt[t].data[i];
        double prev_err = pred[t - 1].data[py * w + px] - gt[t - 1].data[py * w + px];
        double d = cur_err - prev_err;
        me += d * d;
      }
    ev.messddt += me / (double)cnt;
  }

  double inv_n = 1.0 / n;
  ev.ssda *= sc.ssda * inv_n;
  ev.mse *= sc.mse * inv_n;
  ev.mad *= sc.mad * inv_n;
  ev.sad *= sc.sad * inv_n;
  ev.grad *= sc.grad * inv_n;
  ev.conn *= sc.conn * inv_n;
  if (n > 1) {
    double inv_d = 1.0 / (n - 1);
    ev.dtssd *= sc.dtssd * inv_d;
    ev.messddt *= sc.messddt * inv_d;
  }
  return ev;
}

TrimapQuality trimap_quality(const std::vector<ArrayT<uint8_t>>& pred_unk,
                             const std::vector<ArrayT<uint8_t>>& gt_unk, int dilate_k) {
  assert(pred_unk.size() == gt_unk.size());
  int64_t pred_total = 0, gt_total = 0, hit_precise = 0, hit_exact = 0;
  for (size_t t = 0; t < pred_unk.size(); ++t) {
    ArrayT<uint8_t> widened =
        dilate_k > 1 ? core::dilate_square(gt_unk[t], dilate_k) : gt_unk[t];
    for (int64_t i = 0; i < pred_unk[t].numel(); ++i) {
      bool p = pred_unk[t].data[i] != 0;
      bool g = gt_unk[t].data[i] != 0;
      pred_total += p;
      gt_total += g;
      hit_precise += p && widened.data[i] != 0;
      hit_exact += p && g;
    }
  }
  TrimapQuality q;
  q.precision = pred_total ? 100.0 * (double)hit_precise / (double)pred_total : 100.0;
  q.recall = gt_total ? 100.0 * (double)hit_exact / (double)gt_total : 100.0;
  return q;
}

}  // namespace otvm::metrics
