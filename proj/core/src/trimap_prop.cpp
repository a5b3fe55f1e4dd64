#include "otvm/trimap_prop.hpp"

namespace otvm::prop {

using namespace otvm::core;

template <typename T>
Tensor<T> attention_weights(const std::vector<const MemoryEntry<T>*>& entries,
                            const Tensor<T>& query_key) {
  assert(!entries.empty());
  std::vector<Tensor<T>> keys;
  for (const auto* e : entries) keys.push_back(chw_to_nc(e->key));
  Tensor<T> mem_k = keys.size() == 1 ? keys[0] : concat_rows(keys);  // {M, Ck}
  Tensor<T> q = chw_to_nc(query_key);                                // {Nq, Ck}
  return softmax_rows(matmul_nt(q, mem_k));                          // {Nq, M}
}

namespace {

BackboneSpec tri_backbone_spec(const ModelConfig& cfg, int in_ch) {
  BackboneSpec sp;
  sp.in_ch = in_ch;
  sp.stem_ch = cfg.tri_stages.at(0);
  sp.stem_k = cfg.tri_stem_k;
  sp.stem_pool = cfg.tri_stem_pool;
  sp.bottleneck = cfg.tri_bottleneck;
  sp.opts.ws = false;  // propagation path uses plain normalization
  sp.opts.gn_groups = cfg.gn_groups;
  sp.opts.act = Act::kRelu;
  for (size_t i = 1; i < cfg.tri_stages.size(); ++i) {
    StageSpec st;
    st.ch = cfg.tri_stages[i];
    st.blocks = cfg.tri_blocks.at(i - 1);
    // with a pooled stem the first stage keeps its stride
    st.stride = (i == 1 && sp.stem_pool) ? 1 : 2;
    sp.stages.push_back(st);
  }
  return sp;
}

}  // namespace

template <typename T>
TrimapPropNet<T>::TrimapPropNet(ParamStore<T>& ps, const ModelConfig& cfg, Rng& rng) {
  LayerOpts o;
  o.gn_groups = cfg.gn_groups;
  o.act = Act::kRelu;

  // memory stem reads [frame 3 | trimap 3 | alpha 1 | hidden 16]
  query_enc = Backbone<T>(ps, "trimap.qenc", tri_backbone_spec(cfg, 3), rng);
  mem_enc = Backbone<T>(ps, "trimap.menc", tri_backbone_spec(cfg, 23), rng);

  int enc_ch = query_enc.out_ch();
  q_key = Conv2dLayer<T>(ps, "trimap.q_key", enc_ch, cfg.ck, 3, 1, 1, false, true, rng);
  q_val = Conv2dLayer<T>(ps, "trimap.q_val", enc_ch, cfg.cv, 3, 1, 1, false, true, rng);
  m_key = Conv2dLayer<T>(ps, "trimap.m_key", enc_ch, cfg.ck, 3, 1, 1, false, true, rng);
  m_val = Conv2dLayer<T>(ps, "trimap.m_val", enc_ch, cfg.cv, 3, 1, 1, false, true, rng);

  int dc = cfg.tri_dec_ch;
  read_conv = ConvBlock<T>(ps, "trimap.read", 2 * cfg.cv, dc, 3, 1, 1, o, rng);
  res16 = BasicBlock<T>(ps, "trimap.res16", dc, dc, 1, 1, o, rng);
  lat8 = Conv2dLayer<T>(ps, "trimap.lat8", cfg.tri_stages.at(2), dc, 1, 1, 1, false, true, rng);
  res8 = BasicBlock<T>(ps, "trimap.res8", dc, dc, 1, 1, o, rng);
  lat4 = Conv2dLayer<T>(ps, "trimap.lat4", cfg.tri_stages.at(1), dc, 1, 1, 1, false, true, rng);
  res4 = BasicBlock<T>(ps, "trimap.res4", dc, dc, 1, 1, o, rng);
  head = Conv2dLayer<T>(ps, "trimap.head", dc, 3, 3, 1, 1, false, true, rng);

  // the alpha and hidden input planes start inert so earlier stages that feed
  // zeros there match later stages at the moment these inputs switch on
  {
    Tensor<T> w = mem_enc.stem.w;
    int cout = w.dim(0), k = w.dim(2);
    for (int c = 0; c < cout; ++c)
      for (int ci = 6; ci < 23; ++ci)
        for (int i = 0; i < k * k; ++i)
          w.val()[(int64_t)(c * 23 + ci) * k * k + i] = T(0);
  }
}

template <typename T>
QueryFeats<T> TrimapPropNet<T>::encode_query(const Tensor<T>& frame) const {
  auto feats = query_enc.forward(frame);
  QueryFeats<T> q;
  q.H = frame.dim(1);
  q.W = frame.dim(2);
  q.skip4 = feats.at(1);
  q.skip8 = feats.at(2);
  Tensor<T> top = feats.back();
  q.key = q_key.forward(top);
  q.value = q_val.forward(top);
  return q;
}

template <typename T>
MemoryEntry<T> TrimapPropNet<T>::encode_memory(int frame_index, const Tensor<T>& frame,
                                               const Tensor<T>& trimap,
                                               const Tensor<T>& alpha,
                                               const Tensor<T>& hidden16, bool use_alpha,
                                               bool use_hidden) const {
  int H = frame.dim(1), W = frame.dim(2);
  auto fit = [&](const Tensor<T>& t) {
    return (t.dim(1) == H && t.dim(2) == W) ? t : bilinear_resize(t, H, W);
  };
  Tensor<T> a = (use_alpha && alpha.defined())
                    ? fit(alpha)
                    : Tensor<T>::constant(ArrayT<T>::zeros({1, H, W}));
  Tensor<T> h = (use_hidden && hidden16.defined())
                    ? fit(hidden16)
                    : Tensor<T>::constant(ArrayT<T>::zeros({16, H, W}));
  Tensor<T> in = concat_c<T>({frame, trimap, a, h});
  auto feats = mem_enc.forward(in);
  Tensor<T> top = feats.back();
  MemoryEntry<T> e;
  e.frame_index = frame_index;
  e.key = m_key.forward(top);
  e.value = m_val.forward(top);
  return e;
}

template <typename T>
Tensor<T> TrimapPropNet<T>::memory_read(const MemoryBank<T>& bank,
                                        const QueryFeats<T>& q) const {
  auto es = bank.entries();
  assert(!es.empty());
  Tensor<T> w = attention_weights(es, q.key);  // {Nq, M}
  std::vector<Tensor<T>> vals;
  for (const auto* e : es) vals.push_back(chw_to_nc(e->value));
  Tensor<T> mem_v = vals.size() == 1 ? vals[0] : concat_rows(vals);  // {M, Cv}
  Tensor<T> read = matmul_nn(w, mem_v);                              // {Nq, Cv}
  int h = q.key.dim(1), wd = q.key.dim(2);
  return concat_c<T>({nc_to_chw(read, h, wd), q.value});
}

template <typename T>
Tensor<T> TrimapPropNet<T>::decode(const Tensor<T>& read_out, const QueryFeats<T>& q) const {
  Tensor<T> x = res16.forward(read_conv.forward(read_out));
  x = bilinear_resize(x, q.skip8.dim(1), q.skip8.dim(2));
  x = res8.forward(add(x, lat8.forward(q.skip8)));
  x = bilinear_resize(x, q.skip4.dim(1), q.skip4.dim(2));
  x = res4.forward(add(x, lat4.forward(q.skip4)));
  Tensor<T> logits = bilinear_resize(head.forward(x), q.H, q.W);
  return softmax_c(logits);
}

template <typename T>
Tensor<T> TrimapPropNet<T>::propagate(const MemoryBank<T>& bank, const Tensor<T>& frame) const {
  QueryFeats<T> q = encode_query(frame);
  return decode(memory_read(bank, q), q);
}

#define OTVM_INSTANTIATE_PROP(T)                                                     \
  template Tensor<T> attention_weights(const std::vector<const MemoryEntry<T>*>&,    \
                                       const Tensor<T>&);                            \
  template struct TrimapPropNet<T>;

OTVM_INSTANTIATE_PROP(float)
OTVM_INSTANTIATE_PROP(double)

}  // namespace otvm::prop
