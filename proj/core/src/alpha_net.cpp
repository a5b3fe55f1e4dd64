#include "otvm/alpha_net.hpp"

#include "otvm/image_ops.hpp"

namespace otvm::alpha {

using namespace otvm::core;

template <typename T>
Tensor<T> encode_trimap_channels(const Tensor<T>& trimap) {
  assert(trimap.dim(0) == 3);
  // class planes are ordered [bg, unk, fg]
  Tensor<T> fg = slice_c(trimap, 2, 3);
  Tensor<T> bg = slice_c(trimap, 0, 1);
  std::vector<Tensor<T>> ch = {fg, bg};
  for (double sigma : {1.0, 2.0, 4.0}) {
    auto kd = gaussian_kernel1d(sigma);
    std::vector<T> k(kd.begin(), kd.end());
    ch.push_back(blur_sep2d(fg, k));
  }
  for (double sigma : {1.0, 2.0, 4.0}) {
    auto kd = gaussian_kernel1d(sigma);
    std::vector<T> k(kd.begin(), kd.end());
    ch.push_back(blur_sep2d(bg, k));
  }
  return concat_c(ch);
}

namespace {

BackboneSpec alpha_backbone_spec(const ModelConfig& cfg) {
  BackboneSpec sp;
  sp.in_ch = 11;  // frame + 8-channel trimap encoding
  sp.stem_ch = cfg.alpha_stages.at(0);
  sp.stem_k = cfg.alpha_stem_k;
  sp.stem_pool = cfg.alpha_stem_pool;
  sp.bottleneck = cfg.alpha_bottleneck;
  sp.opts.ws = cfg.ws;
  sp.opts.gn_groups = cfg.gn_groups;
  sp.opts.act = Act::kRelu;
  // last two stages trade stride for dilation, keeping the output at stride 8
  for (size_t i = 1; i < cfg.alpha_stages.size(); ++i) {
    StageSpec st;
    st.ch = cfg.alpha_stages[i];
    st.blocks = cfg.alpha_blocks.at(i - 1);
    size_t n = cfg.alpha_stages.size();
    if (i == n - 2) {
      st.stride = 1;
      st.dil = 2;
    } else if (i == n - 1) {
      st.stride = 1;
      st.dil = 4;
    } else {
      st.stride = (i == 1 && sp.stem_pool) ? 1 : 2;
    }
    sp.stages.push_back(st);
  }
  return sp;
}

}  // namespace

template <typename T>
AlphaNet<T>::AlphaNet(ParamStore<T>& ps, const ModelConfig& cfg, Rng& rng) {
  LayerOpts o;
  o.ws = cfg.ws;
  o.gn_groups = cfg.gn_groups;
  o.act = Act::kLRelu;
  bins = cfg.ppm_bins;

  enc = Backbone<T>(ps, "alpha.enc", alpha_backbone_spec(cfg), rng);
  int ec = enc.out_ch();
  for (size_t i = 0; i < bins.size(); ++i)
    ppm_convs.emplace_back(ps, "alpha.ppm" + std::to_string(i), ec, cfg.ppm_ch, 1, 1, 1,
                           false, true, rng);
  int fused_in = ec + (int)bins.size() * cfg.ppm_ch;
  int d8 = cfg.alpha_dec.at(0), d4 = cfg.alpha_dec.at(1), d2 = cfg.alpha_dec.at(2);
  ppm_fuse = ConvBlock<T>(ps, "alpha.ppm_fuse", fused_in, d8, 3, 1, 1, o, rng);
  dec4 = ConvBlock<T>(ps, "alpha.dec4", d8 + cfg.alpha_stages.at(1), d4, 3, 1, 1, o, rng);
  dec2 = ConvBlock<T>(ps, "alpha.dec2", d4 + cfg.alpha_stages.at(0), d2, 3, 1, 1, o, rng);
  dec1 = ConvBlock<T>(ps, "alpha.dec1", d2 + 11, d2, 3, 1, 1, o, rng);

  head_alpha = Conv2dLayer<T>(ps, "alpha.head_a", d2, 1, 1, 1, 1, false, true, rng);
  head_fg = Conv2dLayer<T>(ps, "alpha.head_f", d2, 3, 1, 1, 1, false, true, rng);
  head_bg = Conv2dLayer<T>(ps, "alpha.head_b", d2, 3, 1, 1, 1, false, true, rng);
  head_hidden = Conv2dLayer<T>(ps, "alpha.head_h", d2, cfg.hidden64_ch, 1, 1, 1, false, true,
                               rng);
  // start the clamped head mid-range instead of saturated
  head_alpha.b.val()[0] = (T)0.5;
  // zero correction: the color heads begin as an exact copy of the frame
  for (auto* hd : {&head_fg, &head_bg}) {
    for (int64_t i = 0; i < hd->w.numel(); ++i) hd->w.val()[i] = (T)0;
    for (int64_t i = 0; i < hd->b.numel(); ++i) hd->b.val()[i] = (T)0;
  }
}

template <typename T>
AlphaOut<T> AlphaNet<T>::forward(const Tensor<T>& frame, const Tensor<T>& trimap) const {
  Tensor<T> enc8 = encode_trimap_channels(trimap);
  Tensor<T> in = concat_c<T>({frame, enc8});
  auto feats = enc.forward(in);
  Tensor<T> top = feats.back();  // stride 8
  int h8 = top.dim(1), w8 = top.dim(2);

  std::vector<Tensor<T>> pool = {top};
  for (size_t i = 0; i < bins.size(); ++i) {
    Tensor<T> p = adaptive_avg_pool(top, bins[i], bins[i]);
    p = lrelu(ppm_convs[i].forward(p), (T)0.01);
    pool.push_back(bilinear_resize(p, h8, w8));
  }
  Tensor<T> x = ppm_fuse.forward(concat_c(pool));

  Tensor<T> s4 = feats.at(1);
  x = bilinear_resize(x, s4.dim(1), s4.dim(2));
  x = dec4.forward(concat_c<T>({x, s4}));
  Tensor<T> s2 = feats.at(0);
  x = bilinear_resize(x, s2.dim(1), s2.dim(2));
  x = dec2.forward(concat_c<T>({x, s2}));
  x = bilinear_resize(x, frame.dim(1), frame.dim(2));
  x = dec1.forward(concat_c<T>({x, frame, enc8}));

  AlphaOut<T> out;
  out.alpha = clamp(head_alpha.forward(x), (T)0, (T)1);
  // The compositing identity gives fg - frame = (1-a)(fg-bg) and
  // bg - frame = -a(fg-bg), so the color heads only predict the smooth
  // inter-layer contrast field and the predicted alpha routes it. With the
  // zero-initialized heads both layers begin as an exact copy of the frame.
  Tensor<T> a3 = concat_c<T>({out.alpha, out.alpha, out.alpha});
  Tensor<T> inv3 = add_scalar(neg(a3), (T)1);
  out.fg = clamp(add(frame, mul(inv3, head_fg.forward(x))), (T)0, (T)1);
  out.bg = clamp(sub(frame, mul(a3, head_bg.forward(x))), (T)0, (T)1);
  out.hidden64 = head_hidden.forward(x);
  return out;
}

#define OTVM_INSTANTIATE_ALPHA(T)                          \
  template Tensor<T> encode_trimap_channels(const Tensor<T>&); \
  template struct AlphaNet<T>;

OTVM_INSTANTIATE_ALPHA(float)
OTVM_INSTANTIATE_ALPHA(double)

}  // namespace otvm::alpha
