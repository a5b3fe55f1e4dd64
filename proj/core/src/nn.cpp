#include "otvm/nn.hpp"

#include <numeric>

namespace otvm::core {

template <typename T>
Tensor<T> activate(const Tensor<T>& x, Act a) {
  return a == Act::kRelu ? relu(x) : lrelu(x, (T)0.01);
}

namespace {

int norm_groups(int ch, int want) { return std::gcd(ch, want); }

}  // namespace

template <typename T>
Conv2dLayer<T>::Conv2dLayer(ParamStore<T>& ps, const std::string& name, int cin, int cout,
                            int k, int stride_, int dil_, bool ws_, bool bias, Rng& rng)
    : stride(stride_), pad(dil_ * (k - 1) / 2), dil(dil_), ws(ws_) {
  w = ps.create(name + ".w", he_normal<T>(rng, {cout, cin, k, k}, cin * k * k));
  if (bias) b = ps.create(name + ".b", ArrayT<T>::zeros({cout}));
}

template <typename T>
Tensor<T> Conv2dLayer<T>::forward(const Tensor<T>& x) const {
  Tensor<T> wt = ws ? standardize_filters(w, (T)1e-5) : w;
  return conv2d(x, wt, b, stride, pad, dil);
}

template <typename T>
GroupNormLayer<T>::GroupNormLayer(ParamStore<T>& ps, const std::string& name, int ch,
                                  int groups_)
    : groups(norm_groups(ch, groups_)) {
  gamma = ps.create(name + ".gamma", ArrayT<T>::full({ch}, (T)1));
  beta = ps.create(name + ".beta", ArrayT<T>::zeros({ch}));
}

template <typename T>
Tensor<T> GroupNormLayer<T>::forward(const Tensor<T>& x) const {
  return group_norm(x, gamma, beta, groups, eps);
}

template <typename T>
ConvBlock<T>::ConvBlock(ParamStore<T>& ps, const std::string& name, int cin, int cout, int k,
                        int stride, int dil, const LayerOpts& o, Rng& rng)
    : conv(ps, name + ".conv", cin, cout, k, stride, dil, o.ws, false, rng),
      norm(ps, name + ".norm", cout, o.gn_groups),
      act(o.act) {}

template <typename T>
Tensor<T> ConvBlock<T>::forward(const Tensor<T>& x) const {
  return activate(norm.forward(conv.forward(x)), act);
}

template <typename T>
BasicBlock<T>::BasicBlock(ParamStore<T>& ps, const std::string& name, int cin, int cout,
                          int stride, int dil, const LayerOpts& o, Rng& rng)
    : c1(ps, name + ".c1", cin, cout, 3, stride, dil, o.ws, false, rng),
      c2(ps, name + ".c2", cout, cout, 3, 1, dil, o.ws, false, rng),
      n1(ps, name + ".n1", cout, o.gn_groups),
      n2(ps, name + ".n2", cout, o.gn_groups),
      act(o.act) {
  has_proj = cin != cout || stride != 1;
  if (has_proj) {
    proj = Conv2dLayer<T>(ps, name + ".proj", cin, cout, 1, stride, 1, o.ws, false, rng);
    nproj = GroupNormLayer<T>(ps, name + ".nproj", cout, o.gn_groups);
  }
}

template <typename T>
Tensor<T> BasicBlock<T>::forward(const Tensor<T>& x) const {
  Tensor<T> h = activate(n1.forward(c1.forward(x)), act);
  h = n2.forward(c2.forward(h));
  Tensor<T> s = has_proj ? nproj.forward(proj.forward(x)) : x;
  return activate(add(h, s), act);
}

template <typename T>
BottleneckBlock<T>::BottleneckBlock(ParamStore<T>& ps, const std::string& name, int cin,
                                    int cout, int stride, int dil, const LayerOpts& o,
                                    Rng& rng)
    : act(o.act) {
  int planes = cout / 4;
  c1 = Conv2dLayer<T>(ps, name + ".c1", cin, planes, 1, 1, 1, o.ws, false, rng);
  c2 = Conv2dLayer<T>(ps, name + ".c2", planes, planes, 3, stride, dil, o.ws, false, rng);
  c3 = Conv2dLayer<T>(ps, name + ".c3", planes, cout, 1, 1, 1, o.ws, false, rng);
  n1 = GroupNormLayer<T>(ps, name + ".n1", planes, o.gn_groups);
  n2 = GroupNormLayer<T>(ps, name + ".n2", planes, o.gn_groups);
  n3 = GroupNormLayer<T>(ps, name + ".n3", cout, o.gn_groups);
  has_proj = cin != cout || stride != 1;
  if (has_proj) {
    proj = Conv2dLayer<T>(ps, name + ".proj", cin, cout, 1, stride, 1, o.ws, false, rng);
    nproj = GroupNormLayer<T>(ps, name + ".nproj", cout, o.gn_groups);
  }
}

template <typename T>
Tensor<T> BottleneckBlock<T>::forward(const Tensor<T>& x) const {
  Tensor<T> h = activate(n1.forward(c1.forward(x)), act);
  h = activate(n2.forward(c2.forward(h)), act);
  h = n3.forward(c3.forward(h));
  Tensor<T> s = has_proj ? nproj.forward(proj.forward(x)) : x;
  return activate(add(h, s), act);
}

template <typename T>
Backbone<T>::Backbone(ParamStore<T>& ps, const std::string& name, const BackboneSpec& sp,
                      Rng& rng)
    : spec(sp) {
  stem = Conv2dLayer<T>(ps, name + ".stem", sp.in_ch, sp.stem_ch, sp.stem_k, 2, 1, sp.opts.ws,
                        false, rng);
  stem_norm = GroupNormLayer<T>(ps, name + ".stem_n", sp.stem_ch, sp.opts.gn_groups);
  int cin = sp.stem_ch;
  for (size_t s = 0; s < sp.stages.size(); ++s) {
    const StageSpec& st = sp.stages[s];
    std::string sname = name + ".s" + std::to_string(s);
    if (sp.bottleneck) {
      std::vector<BottleneckBlock<T>> blocks;
      for (int i = 0; i < st.blocks; ++i)
        blocks.emplace_back(ps, sname + ".b" + std::to_string(i), i == 0 ? cin : st.ch, st.ch,
                            i == 0 ? st.stride : 1, st.dil, sp.opts, rng);
      bneck_stages.push_back(std::move(blocks));
    } else {
      std::vector<BasicBlock<T>> blocks;
      for (int i = 0; i < st.blocks; ++i)
        blocks.emplace_back(ps, sname + ".b" + std::to_string(i), i == 0 ? cin : st.ch, st.ch,
                            i == 0 ? st.stride : 1, st.dil, sp.opts, rng);
      basic_stages.push_back(std::move(blocks));
    }
    cin = st.ch;
  }
}

template <typename T>
std::vector<Tensor<T>> Backbone<T>::forward(const Tensor<T>& x) const {
  std::vector<Tensor<T>> feats;
  Tensor<T> h = activate(stem_norm.forward(stem.forward(x)), spec.opts.act);
  feats.push_back(h);
  if (spec.stem_pool) h = maxpool2d(h, 3, 2, 1);
  for (size_t s = 0; s < spec.stages.size(); ++s) {
    if (spec.bottleneck)
      for (const auto& b : bneck_stages[s]) h = b.forward(h);
    else
      for (const auto& b : basic_stages[s]) h = b.forward(h);
    feats.push_back(h);
  }
  return feats;
}

template <typename T>
int Backbone<T>::out_ch() const {
  return spec.stages.empty() ? spec.stem_ch : spec.stages.back().ch;
}

#define OTVM_INSTANTIATE_NN(T)                 \
  template Tensor<T> activate(const Tensor<T>&, Act); \
  template struct Conv2dLayer<T>;              \
  template struct GroupNormLayer<T>;           \
  template struct ConvBlock<T>;                \
  template struct BasicBlock<T>;               \
  template struct BottleneckBlock<T>;          \
  template struct Backbone<T>;

OTVM_INSTANTIATE_NN(float)
OTVM_INSTANTIATE_NN(double)

}  // namespace otvm::core
