#pragma once

#include "otvm/config.hpp"
#include "otvm/nn.hpp"

namespace otvm::refine {

using core::Tensor;

template <typename T>
struct RefineOut {
  Tensor<T> alpha;     // {1,H,W} in [0,1]
  Tensor<T> trimap;    // {3,H,W} probabilities
  Tensor<T> fg, bg;    // {3,H,W}
  Tensor<T> hidden16;  // {16,H,W}
};

// Light-weight correction module. The alpha and trimap heads are additive
// residuals with zero-initialized weights, so a fresh module reproduces its
// alpha and trimap inputs exactly.
template <typename T>
struct RefineNet {
  core::ConvBlock<T> stem;
  core::BasicBlock<T> r1, r2;
  core::Conv2dLayer<T> d_alpha, d_trimap, head_fg, head_bg, head_hidden;

  RefineNet() = default;
  RefineNet(core::ParamStore<T>& ps, const ModelConfig& cfg, core::Rng& rng);

  RefineOut<T> forward(const Tensor<T>& frame, const Tensor<T>& trimap,
                       const Tensor<T>& alpha, const Tensor<T>& hidden64) const;
};

}  // namespace otvm::refine
