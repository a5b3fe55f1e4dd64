#include "otvm/refine.hpp"

#include <limits>

namespace otvm::refine {

using namespace otvm::core;

template <typename T>
RefineNet<T>::RefineNet(ParamStore<T>& ps, const ModelConfig& cfg, Rng& rng) {
  LayerOpts o;
  o.ws = cfg.ws;
  o.gn_groups = cfg.gn_groups;
  o.act = Act::kLRelu;
  int ch = cfg.refine_ch;
  int in_ch = 3 + 3 + 1 + cfg.hidden64_ch;  // frame | trimap | alpha | hidden
  stem = ConvBlock<T>(ps, "refine.stem", in_ch, ch, 1, 1, 1, o, rng);
  r1 = BasicBlock<T>(ps, "refine.r1", ch, ch, 1, 1, o, rng);
  r2 = BasicBlock<T>(ps, "refine.r2", ch, ch, 1, 1, o, rng);
  d_alpha = Conv2dLayer<T>(ps, "refine.d_alpha", ch, 1, 3, 1, 1, false, true, rng);
  d_trimap = Conv2dLayer<T>(ps, "refine.d_trimap", ch, 3, 3, 1, 1, false, true, rng);
  head_fg = Conv2dLayer<T>(ps, "refine.head_f", ch, 3, 3, 1, 1, false, true, rng);
  head_bg = Conv2dLayer<T>(ps, "refine.head_b", ch, 3, 3, 1, 1, false, true, rng);
  head_hidden = Conv2dLayer<T>(ps, "refine.head_h", ch, cfg.hidden16_ch, 3, 1, 1, false,
                               true, rng);
  // corrections start at exactly zero
  d_alpha.w.val().fill(T(0));
  d_trimap.w.val().fill(T(0));
}

template <typename T>
RefineOut<T> RefineNet<T>::forward(const Tensor<T>& frame, const Tensor<T>& trimap,
                                   const Tensor<T>& alpha, const Tensor<T>& hidden64) const {
  int H = frame.dim(1), W = frame.dim(2);
  auto fit = [&](const Tensor<T>& t) {
    return (t.dim(1) == H && t.dim(2) == W) ? t : bilinear_resize(t, H, W);
  };
  Tensor<T> in = concat_c<T>({frame, trimap, fit(alpha), fit(hidden64)});
  Tensor<T> h = r2.forward(r1.forward(stem.forward(in)));

  RefineOut<T> out;
  out.alpha = clamp(add(alpha, d_alpha.forward(h)), (T)0, (T)1);

  // additive correction on probabilities, clipped and renormalized; with a
  // zero correction the sum stays exactly 1 and the division is exact
  constexpr T kInf = std::numeric_limits<T>::max();
  Tensor<T> q = clamp(add(trimap, d_trimap.forward(h)), (T)0, kInf);
  Tensor<T> s = add(add(slice_c(q, 0, 1), slice_c(q, 1, 2)), slice_c(q, 2, 3));
  s = clamp(s, (T)1e-8, kInf);
  out.trimap = div_t(q, concat_c<T>({s, s, s}));

  out.fg = sigmoid_t(head_fg.forward(h));
  out.bg = sigmoid_t(head_bg.forward(h));
  out.hidden16 = head_hidden.forward(h);
  return out;
}

template struct RefineNet<float>;
template struct RefineNet<double>;

}  // namespace otvm::refine
