#pragma once

#include <vector>

#include "otvm/ops.hpp"
#include "otvm/tensor.hpp"

namespace otvm::losses {

using core::ArrayT;
using core::Tensor;

// Cross entropy against one-hot targets, averaged over pixels. Predictions
// are clamped to [1e-8, 1] before the log so exact zeros stay finite.
template <typename T>
Tensor<T> ce_trimap(const Tensor<T>& pred, const ArrayT<T>& gt);

// Sum of per-frame cross entropies (frames contribute equally, no mean).
template <typename T>
Tensor<T> trimap_ce_sum(const std::vector<Tensor<T>>& pred,
                        const std::vector<ArrayT<T>>& gt);

// Five-band pyramid built with the [1,4,6,4,1]/16 binomial filter. Bands
// 1..4 are detail residuals, band 5 is the coarsest smoothed level, so
// summing band_s through repeated upsampling reconstructs the input exactly.
template <typename T>
std::vector<Tensor<T>> laplacian_pyramid(const Tensor<T>& x, int levels = 5);

// sum_s 2^(s-1) * mean |band_s(a) - band_s(b)|
template <typename T>
Tensor<T> pyramid_l1(const Tensor<T>& a, const Tensor<T>& b, int levels = 5);

template <typename T>
Tensor<T> scalar_zero();

template <typename T>
struct AlphaLossTerms {
  Tensor<T> l1, comp, lap, grad, tc, total;
};

// Full-frame alpha supervision for a clip. Per frame: absolute error,
// recomposition against the clean plates, weighted pyramid distance, and
// forward-difference gradient distance; across frames the temporal term
// penalizes prediction flicker that the ground truth does not show. Every
// term is a mean over the frames (diffs for tc) that contribute.
template <typename T>
AlphaLossTerms<T> alpha_losses(const std::vector<Tensor<T>>& pred,
                               const std::vector<ArrayT<T>>& gt,
                               const std::vector<ArrayT<T>>& frames,
                               const std::vector<ArrayT<T>>& fg,
                               const std::vector<ArrayT<T>>& bg);

template <typename T>
struct FbLossTerms {
  Tensor<T> l1, comp, lap, excl, tc, total;
};

// Foreground / background supervision restricted to the unknown band of the
// reference trimap. Foreground terms are further restricted to pixels with
// positive ground-truth alpha (the fg color is unobservable elsewhere).
// Masks are applied to the maps BEFORE any spatial or temporal operator, so
// predictions outside their mask never influence a term, bit for bit. Each
// frame normalizes by its unknown-pixel count; frames with an empty band
// contribute zero.
template <typename T>
FbLossTerms<T> fb_losses(const std::vector<Tensor<T>>& pred_f,
                         const std::vector<Tensor<T>>& pred_b,
                         const std::vector<ArrayT<T>>& gt_alpha,
                         const std::vector<ArrayT<T>>& fg,
                         const std::vector<ArrayT<T>>& bg,
                         const std::vector<ArrayT<T>>& frames,
                         const std::vector<ArrayT<T>>& unk);

// the unknown plane of a one-hot trimap as a {1,H,W} 0/1 mask
template <typename T>
ArrayT<T> unknown_mask(const ArrayT<T>& trimap);

}  // namespace otvm::losses
