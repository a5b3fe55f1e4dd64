#pragma once

#include <vector>

#include "otvm/tensor.hpp"

namespace otvm::core {

// elementwise; shapes must match
template <typename T> Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> div_t(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> add_scalar(const Tensor<T>& a, T s);
template <typename T> Tensor<T> mul_scalar(const Tensor<T>& a, T s);
template <typename T> Tensor<T> neg(const Tensor<T>& a);
template <typename T> Tensor<T> abs_t(const Tensor<T>& a);  // subgradient 0 at 0
template <typename T> Tensor<T> relu(const Tensor<T>& a);
template <typename T> Tensor<T> lrelu(const Tensor<T>& a, T slope);
template <typename T> Tensor<T> sigmoid_t(const Tensor<T>& a);
template <typename T> Tensor<T> log_t(const Tensor<T>& a);
// gradient passes where lo <= x <= hi (inclusive)
template <typename T> Tensor<T> clamp(const Tensor<T>& a, T lo, T hi);
// elementwise product with a non-differentiable constant
template <typename T> Tensor<T> mul_const(const Tensor<T>& a, const ArrayT<T>& m);

// reductions -> shape {1}
template <typename T> Tensor<T> sum_all(const Tensor<T>& a);
template <typename T> Tensor<T> mean_all(const Tensor<T>& a);

// shape ops
template <typename T> Tensor<T> concat_c(const std::vector<Tensor<T>>& xs);  // {C,H,W}
template <typename T> Tensor<T> slice_c(const Tensor<T>& a, int c0, int c1);
template <typename T> Tensor<T> chw_to_nc(const Tensor<T>& a);  // {C,H,W} -> {H*W,C}
template <typename T> Tensor<T> nc_to_chw(const Tensor<T>& a, int H, int W);
template <typename T> Tensor<T> concat_rows(const std::vector<Tensor<T>>& xs);  // {Mi,C}
template <typename T> Tensor<T> detach(const Tensor<T>& a);

// matrix products
template <typename T> Tensor<T> matmul_nn(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> matmul_nt(const Tensor<T>& a, const Tensor<T>& b);

// softmax
template <typename T> Tensor<T> softmax_c(const Tensor<T>& a);     // {C,H,W} over C
template <typename T> Tensor<T> softmax_rows(const Tensor<T>& a);  // {M,N} over N

// x {Cin,H,W}, w {Cout,Cin,kh,kw}, b {Cout} or undefined; zero padding
template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b, int stride,
                 int pad, int dilation = 1);
// per-output-channel zero-mean / unit-variance reparameterization of filters
template <typename T> Tensor<T> standardize_filters(const Tensor<T>& w, T eps);
template <typename T>
Tensor<T> group_norm(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta,
                     int groups, T eps);
template <typename T> Tensor<T> maxpool2d(const Tensor<T>& x, int k, int stride, int pad);

// half-pixel sampling (no corner alignment)
template <typename T> Tensor<T> bilinear_resize(const Tensor<T>& x, int H2, int W2);
template <typename T> Tensor<T> adaptive_avg_pool(const Tensor<T>& x, int bh, int bw);

// separable blur with reflect padding; kernel length must be odd
template <typename T> Tensor<T> blur_sep2d(const Tensor<T>& x, const std::vector<T>& k1d);
template <typename T> Tensor<T> subsample2(const Tensor<T>& x);  // keep even rows/cols

// forward differences; final column / row is zero
template <typename T> Tensor<T> forward_diff_x(const Tensor<T>& a);
template <typename T> Tensor<T> forward_diff_y(const Tensor<T>& a);

}  // namespace otvm::core
