#pragma once

#include "otvm/config.hpp"
#include "otvm/nn.hpp"

namespace otvm::alpha {

using core::Tensor;

// fg/bg/unknown probabilities plus Gaussian blurs of the fg and bg planes
// at sigma 1, 2 and 4: [fg, bg, G1(fg), G2(fg), G4(fg), G1(bg), G2(bg), G4(bg)]
template <typename T>
Tensor<T> encode_trimap_channels(const Tensor<T>& trimap);

template <typename T>
struct AlphaOut {
  Tensor<T> alpha;     // {1,H,W}, hard-clamped to [0,1]
  Tensor<T> fg, bg;    // {3,H,W}, sigmoid
  Tensor<T> hidden64;  // {64,H,W}, unconstrained
};

template <typename T>
struct AlphaNet {
  core::Backbone<T> enc;
  std::vector<core::Conv2dLayer<T>> ppm_convs;
  core::ConvBlock<T> ppm_fuse;
  core::ConvBlock<T> dec4, dec2, dec1;
  core::Conv2dLayer<T> head_alpha, head_fg, head_bg, head_hidden;

  AlphaNet() = default;
  AlphaNet(core::ParamStore<T>& ps, const ModelConfig& cfg, core::Rng& rng);

  // frame {3,H,W}, trimap probabilities {3,H,W}
  AlphaOut<T> forward(const Tensor<T>& frame, const Tensor<T>& trimap) const;

  std::vector<int> bins;
};

}  // namespace otvm::alpha
