#include "otvm/trainer.hpp"

#include <cassert>
#include <cmath>

namespace otvm::train {

double lr_at(const TrainConfig& cfg, int it, int total) {
  int drop_from = (int)((int64_t)total * 9 / 10);
  return it >= drop_from ? cfg.lr * cfg.lr_drop : cfg.lr;
}

namespace {

bool starts_with(const std::string& s, const char* p) { return s.rfind(p, 0) == 0; }
bool ends_with(const std::string& s, const char* p) {
  std::string q(p);
  return s.size() >= q.size() && s.compare(s.size() - q.size(), q.size(), q) == 0;
}

}  // namespace

std::set<std::string> stage_trainable(const std::vector<std::string>& names, StageId s,
                                      bool freeze_norm) {
  std::vector<const char*> prefixes;
  switch (s) {
    case StageId::k1a: prefixes = {"alpha."}; break;
    case StageId::k1b: prefixes = {"trimap."}; break;
    case StageId::k2: prefixes = {"alpha.", "refine."}; break;
    case StageId::k3: prefixes = {"trimap."}; break;
    case StageId::k4: prefixes = {"trimap.", "alpha.", "refine."}; break;
  }
  std::set<std::string> out;
  for (const auto& n : names) {
    bool keep = false;
    for (const char* p : prefixes) keep = keep || starts_with(n, p);
    if (keep && freeze_norm && (ends_with(n, ".gamma") || ends_with(n, ".beta")))
      keep = false;
    if (keep) out.insert(n);
  }
  return out;
}

template <typename T>
void RAdam<T>::step(core::ParamStore<T>& ps, const std::set<std::string>& trainable,
                    double lr) {
  ++t_;
  double b1 = cfg_.beta1, b2 = cfg_.beta2;
  double b1t = std::pow(b1, (double)t_), b2t = std::pow(b2, (double)t_);
  double rho_inf = 2.0 / (1.0 - b2) - 1.0;
  double rho = rho_inf - 2.0 * (double)t_ * b2t / (1.0 - b2t);
  bool rectify = rho > 4.0;
  double rect = 1.0;
  if (rectify)
    rect = std::sqrt(((rho - 4.0) * (rho - 2.0) * rho_inf) /
                     ((rho_inf - 4.0) * (rho_inf - 2.0) * rho));

  for (const auto& name : trainable) {
    Tensor<T> p = ps.get(name);
    if (!p.has_grad()) continue;
    auto it = slots_.find(name);
    if (it == slots_.end()) {
      Slot s;
      s.m = ArrayT<T>::zeros(p.shape());
      s.v = ArrayT<T>::zeros(p.shape());
      it = slots_.emplace(name, std::move(s)).first;
    }
    Slot& s = it->second;
    const ArrayT<T>& g = p.grad();
    ArrayT<T>& w = p.val();
    for (int64_t i = 0; i < w.numel(); ++i) {
      double gi = (double)g.data[i];
      double m = b1 * (double)s.m.data[i] + (1.0 - b1) * gi;
      double v = b2 * (double)s.v.data[i] + (1.0 - b2) * gi * gi;
      s.m.data[i] = (T)m;
      s.v.data[i] = (T)v;
      double mhat = m / (1.0 - b1t);
      double upd;
      if (rectify) {
        double vhat = std::sqrt(v / (1.0 - b2t));
        upd = rect * mhat / (vhat + cfg_.adam_eps);
      } else {
        upd = mhat;
      }
      w.data[i] = (T)((double)w.data[i] - lr * upd);
    }
  }
}

template <typename T>
TrainClip<T> prepare_clip(const clipsim::ClipSample& clip) {
  TrainClip<T> tc;
  for (int t = 0; t < clip.length(); ++t) {
    tc.frames.push_back(core::cast_array<T>(clip.frames[t]));
    tc.trimaps.push_back(core::cast_array<T>(clip.trimaps[t]));
    tc.alphas.push_back(core::cast_array<T>(clip.alphas[t]));
    tc.fgs.push_back(core::cast_array<T>(clip.fgs[t]));
    tc.bgs.push_back(core::cast_array<T>(clip.bgs[t]));
    tc.unks.push_back(losses::unknown_mask<T>(tc.trimaps.back()));
  }
  return tc;
}

template <typename T>
Trainer<T>::Trainer(Model<T>& model, const Config& cfg)
    : m_(model), cfg_(cfg), rng_(core::splitmix64(cfg.train.seed ^ 0x7472616eull)) {
  begin_stage(StageId::k1a);
}

template <typename T>
void Trainer<T>::begin_stage(StageId s) {
  stage_ = s;
  it_ = 0;
  std::vector<std::string> names;
  for (const auto& [k, v] : m_.params.map()) names.push_back(k);
  trainable_ = stage_trainable(names, s, cfg_.train.freeze_norm);
  for (const auto& [k, v] : m_.params.map()) {
    Tensor<T> p = v;
    p.set_requires_grad(trainable_.count(k) > 0);
  }
  opt_ = std::make_unique<RAdam<T>>(cfg_.train);
  rng_ = core::Rng(core::splitmix64(cfg_.train.seed ^ (0x7472616eull + (uint64_t)s)));
}

template <typename T>
Rollout<T> Trainer<T>::rollout_clip(const TrainClip<T>& clip, int frame_1a) const {
  Rollout<T> ro;
  auto cst = [](const ArrayT<T>& a) { return Tensor<T>::constant(a); };

  if (stage_ == StageId::k1a) {
    int f = frame_1a < 0 ? 0 : frame_1a;
    auto out = m_.alpha_net.forward(cst(clip.frames[f]), cst(clip.trimaps[f]));
    ro.alphas = {out.alpha};
    ro.fgs = {out.fg};
    ro.bgs = {out.bg};
    ro.first_frame = f;
    return ro;
  }

  bool with_alpha = stage_ != StageId::k1b;
  bool mem_full = stage_ == StageId::k3 || stage_ == StageId::k4;
  int n = clip.length();

  prop::MemoryBank<T> bank;
  Tensor<T> fr0 = cst(clip.frames[0]);
  Tensor<T> gt0 = cst(clip.trimaps[0]);
  Tensor<T> mem_a, mem_h;
  if (with_alpha) {
    auto a0 = m_.alpha_net.forward(fr0, gt0);
    auto r0 = m_.refine_net.forward(fr0, gt0, a0.alpha, a0.hidden64);
    ro.ref_trimaps.push_back(r0.trimap);
    ro.alphas.push_back(r0.alpha);
    ro.fgs.push_back(r0.fg);
    ro.bgs.push_back(r0.bg);
    mem_a = r0.alpha;
    mem_h = r0.hidden16;
  }
  bank.set_reference(
      m_.trimap.encode_memory(0, fr0, gt0, mem_a, mem_h, mem_full, mem_full));

  for (int t = 1; t < n; ++t) {
    Tensor<T> fr = cst(clip.frames[t]);
    Tensor<T> tri = m_.trimap.propagate(bank, fr);
    ro.prop_trimaps.push_back(tri);
    Tensor<T> mem_tri = tri, a, h;
    if (with_alpha) {
      auto at = m_.alpha_net.forward(fr, tri);
      auto rt = m_.refine_net.forward(fr, tri, at.alpha, at.hidden64);
      ro.ref_trimaps.push_back(rt.trimap);
      ro.alphas.push_back(rt.alpha);
      ro.fgs.push_back(rt.fg);
      ro.bgs.push_back(rt.bg);
      mem_tri = rt.trimap;
      a = rt.alpha;
      h = rt.hidden16;
    }
    if (t < n - 1) {
      auto e = m_.trimap.encode_memory(t, fr, mem_tri, a, h, mem_full, mem_full);
      if (t % cfg_.infer.mem_interval == 0) bank.push_intermediate(e);
      bank.set_previous(std::move(e));
    }
  }
  return ro;
}

template <typename T>
Tensor<T> Trainer<T>::clip_loss(const Rollout<T>& ro, const TrainClip<T>& clip,
                                LossParts* parts) const {
  auto sub = [](const std::vector<ArrayT<T>>& v, int from, int count) {
    return std::vector<ArrayT<T>>(v.begin() + from, v.begin() + from + count);
  };
  Tensor<T> total = losses::scalar_zero<T>();
  LossParts lp;

  if (!ro.prop_trimaps.empty() && stage_ != StageId::k2) {
    Tensor<T> ce = losses::trimap_ce_sum(
        ro.prop_trimaps, sub(clip.trimaps, 1, (int)ro.prop_trimaps.size()));
    total = core::add(total, ce);
    lp.tri += (double)ce.val()[0];
  }
  if (!ro.ref_trimaps.empty() && stage_ != StageId::k1a) {
    Tensor<T> ce = losses::trimap_ce_sum(ro.ref_trimaps,
                                         sub(clip.trimaps, 0, (int)ro.ref_trimaps.size()));
    total = core::add(total, ce);
    lp.tri += (double)ce.val()[0];
  }

  bool alpha_supervised = stage_ == StageId::k1a || stage_ == StageId::k2 ||
                          stage_ == StageId::k4;
  if (alpha_supervised && !ro.alphas.empty()) {
    int f0 = ro.first_frame, n = (int)ro.alphas.size();
    auto al = losses::alpha_losses(ro.alphas, sub(clip.alphas, f0, n),
                                   sub(clip.frames, f0, n), sub(clip.fgs, f0, n),
                                   sub(clip.bgs, f0, n));
    auto fb = losses::fb_losses(ro.fgs, ro.bgs, sub(clip.alphas, f0, n),
                                sub(clip.fgs, f0, n), sub(clip.bgs, f0, n),
                                sub(clip.frames, f0, n), sub(clip.unks, f0, n));
    total = core::add(total, core::add(al.total, core::mul_scalar(fb.total, (T)0.25)));
    lp.alpha = (double)al.total.val()[0];
    lp.fb = (double)fb.total.val()[0];
  }
  if (parts) *parts = lp;
  return total;
}

template <typename T>
StepStats Trainer<T>::step(const std::vector<const TrainClip<T>*>& batch,
                           const std::vector<int>& frames_1a) {
  assert(!batch.empty());
  m_.params.zero_grad();
  Tensor<T> total = losses::scalar_zero<T>();
  StepStats st;
  for (size_t i = 0; i < batch.size(); ++i) {
    int f = i < frames_1a.size() ? frames_1a[i] : -1;
    Rollout<T> ro = rollout_clip(*batch[i], f);
    LossParts lp;
    total = core::add(total, clip_loss(ro, *batch[i], &lp));
    st.parts.tri += lp.tri;
    st.parts.alpha += lp.alpha;
    st.parts.fb += lp.fb;
  }
  T inv = (T)1 / (T)batch.size();
  total = core::mul_scalar(total, inv);
  st.loss = (double)total.val()[0];
  st.parts.tri *= inv;
  st.parts.alpha *= inv;
  st.parts.fb *= inv;

  core::backward(total);
  st.grad_norm = clip_gradients();
  st.lr = lr_at(cfg_.train, it_, stage_total());
  opt_->step(m_.params, trainable_, st.lr);
  ++it_;
  return st;
}

template <typename T>
StepStats Trainer<T>::step_dataset(const std::vector<TrainClip<T>>& dataset) {
  assert(!dataset.empty());
  int b = stage_batch();
  std::vector<const TrainClip<T>*> batch;
  std::vector<int> frames;
  for (int i = 0; i < b; ++i) {
    const TrainClip<T>& c = dataset[rng_.uniform_int(0, (int)dataset.size() - 1)];
    batch.push_back(&c);
    if (stage_ == StageId::k1a) frames.push_back(rng_.uniform_int(0, c.length() - 1));
  }
  return step(batch, frames);
}

template <typename T>
double Trainer<T>::clip_gradients() {
  double sq = 0;
  for (const auto& name : trainable_) {
    Tensor<T> p = m_.params.get(name);
    if (!p.has_grad()) continue;
    for (int64_t i = 0; i < p.numel(); ++i) {
      double g = (double)p.grad().data[i];
      sq += g * g;
    }
  }
  double norm = std::sqrt(sq);
  double limit = cfg_.train.clip_norm;
  if (limit > 0 && norm > limit) {
    T scale = (T)(limit / norm);
    for (const auto& name : trainable_) {
      Tensor<T> p = m_.params.get(name);
      if (!p.has_grad()) continue;
      ArrayT<T>& g = p.node()->grad;
      for (int64_t i = 0; i < g.numel(); ++i) g.data[i] *= scale;
    }
  }
  return norm;
}

template <typename T>
void run_stage(Trainer<T>& tr, const std::vector<TrainClip<T>>& dataset, StageId s,
               int iters_override, std::ostream* log) {
  tr.begin_stage(s);
  int total = iters_override > 0 ? iters_override : tr.stage_total();
  for (int i = 0; i < total; ++i) {
    StepStats st = tr.step_dataset(dataset);
    if (log) {
      *log << "{\"stage\":\"" << stage_name(s) << "\",\"iter\":" << i
           << ",\"loss\":" << st.loss << ",\"tri\":" << st.parts.tri
           << ",\"alpha\":" << st.parts.alpha << ",\"fb\":" << st.parts.fb
           << ",\"lr\":" << st.lr << ",\"gnorm\":" << st.grad_norm << "}\n";
    }
  }
}

#define OTVM_INSTANTIATE_TRAINER(T)                                                      \
  template class RAdam<T>;                                                               \
  template TrainClip<T> prepare_clip<T>(const clipsim::ClipSample&);                     \
  template class Trainer<T>;                                                             \
  template void run_stage<T>(Trainer<T>&, const std::vector<TrainClip<T>>&, StageId,     \
                             int, std::ostream*);

OTVM_INSTANTIATE_TRAINER(float)
OTVM_INSTANTIATE_TRAINER(double)

}  // namespace otvm::train
