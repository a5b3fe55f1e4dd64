#include "common.hpp"

#include <map>

#include "otvm/trainer.hpp"

using namespace otvm;
using otvm::core::ArrayD;
using otvm::core::Rng;

TEST_SUITE_BEGIN("trainer");

namespace {

// small clips that still exercise every stride of the model: 48 = 6 * 8, so
// the alpha encoder bottoms out at 6x6 and every pyramid pooling bin fits
std::vector<train::TrainClip<double>> tiny_dataset(int clips) {
  SimConfig sc;
  sc.frames = 3;
  sc.train_size = 48;
  sc.crop_sizes = {56, 64};
  std::vector<train::TrainClip<double>> out;
  for (int i = 0; i < clips; ++i) {
    auto src = clipsim::demo_foreground(72, 100 + i);
    auto bg = clipsim::demo_background(72, 200 + i);
    out.push_back(
        train::prepare_clip<double>(clipsim::simulate_clip(src, bg, sc, 300 + i)));
  }
  return out;
}

Config tiny_config() {
  Config cfg;
  cfg.train.stage_batch = {1, 1, 1, 1, 1};
  cfg.sim.train_size = 48;
  return cfg;
}

std::vector<std::string> param_names(const Model<double>& m) {
  std::vector<std::string> out;
  for (const auto& [k, v] : m.params.map()) out.push_back(k);
  return out;
}

}  // namespace

TEST_CASE("learning rate drops at ninety percent of the schedule") {
  TrainConfig tc;
  // drop index is the exact integer floor(9 * total / 10)
  CHECK(train::lr_at(tc, 0, 100) == tc.lr);
  CHECK(train::lr_at(tc, 89, 100) == tc.lr);
  CHECK(train::lr_at(tc, 90, 100) == tc.lr * tc.lr_drop);
  CHECK(train::lr_at(tc, 99, 100) == tc.lr * tc.lr_drop);
  CHECK(train::lr_at(tc, 44999, 50000) == tc.lr);
  CHECK(train::lr_at(tc, 45000, 50000) == tc.lr * tc.lr_drop);
  // odd total truncates: 9*7/10 = 6
  CHECK(train::lr_at(tc, 5, 7) == tc.lr);
  CHECK(train::lr_at(tc, 6, 7) == tc.lr * tc.lr_drop);
}

TEST_CASE("stage trainable sets pick the right module prefixes") {
  std::vector<std::string> names = {
      "alpha.enc.s0.conv.w",  "alpha.enc.gn0.gamma", "alpha.enc.gn0.beta",
      "trimap.dec.up1.w",     "trimap.mem.gn.beta",  "trimap.q.w",
      "refine.head_alpha.w",  "refine.gn1.gamma",
  };
  using S = std::set<std::string>;

  CHECK(train::stage_trainable(names, StageId::k1a, true) == S{"alpha.enc.s0.conv.w"});
  CHECK(train::stage_trainable(names, StageId::k1a, false) ==
        S{"alpha.enc.s0.conv.w", "alpha.enc.gn0.gamma", "alpha.enc.gn0.beta"});
  CHECK(train::stage_trainable(names, StageId::k1b, true) ==
        S{"trimap.dec.up1.w", "trimap.q.w"});
  CHECK(train::stage_trainable(names, StageId::k2, true) ==
        S{"alpha.enc.s0.conv.w", "refine.head_alpha.w"});
  CHECK(train::stage_trainable(names, StageId::k3, true) ==
        train::stage_trainable(names, StageId::k1b, true));
  CHECK(train::stage_trainable(names, StageId::k4, true) ==
        S{"alpha.enc.s0.conv.w", "trimap.dec.up1.w", "trimap.q.w",
          "refine.head_alpha.w"});
  CHECK(train::stage_trainable(names, StageId::k4, false).size() == names.size());
}

TEST_CASE("every real parameter belongs to exactly one stage family") {
  ModelConfig mc;
  Model<double> m(mc, 1);
  auto names = param_names(m);
  // the joint stage with norms unfrozen touches everything
  CHECK(train::stage_trainable(names, StageId::k4, false).size() == names.size());
  // the single-module stages partition it
  auto tri = train::stage_trainable(names, StageId::k1b, false);
  auto ar = train::stage_trainable(names, StageId::k2, false);
  CHECK(tri.size() + ar.size() == names.size());
  for (const auto& n : tri) CHECK(ar.count(n) == 0);
  // freezing norms removes every .gamma/.beta and nothing else
  auto frozen = train::stage_trainable(names, StageId::k4, true);
  for (const auto& n : names) {
    bool is_norm = n.size() > 6 && (n.compare(n.size() - 6, 6, ".gamma") == 0 ||
                                    n.compare(n.size() - 5, 5, ".beta") == 0);
    CHECK(frozen.count(n) == (is_norm ? 0u : 1u));
  }
}

TEST_CASE("the optimizer follows the rectified-moment recurrence") {
  TrainConfig tc;
  tc.lr = 1e-3;
  core::ParamStore<double> ps;
  const int n = 6;
  ArrayD init({n});
  Rng r0(42);
  for (int i = 0; i < n; ++i) init[i] = r0.uniform(-1.0, 1.0);
  auto w = ps.create("w", init);
  auto frozen = ps.create("frozen", init);
  auto nograd = ps.create("nograd", init);
  w.node()->ensure_grad();
  frozen.node()->ensure_grad();

  // independent scalar recurrence, written from the update rule rather than
  // the implementation: rectification kicks in once rho_t exceeds 4, which
  // for beta2 = 0.999 happens at t = 5
  std::vector<double> ow(init.data.begin(), init.data.end()), om(n, 0.0), ov(n, 0.0);
  double rho_inf = 2.0 / (1.0 - tc.beta2) - 1.0;

  train::RAdam<double> opt(tc);
  Rng rg(7);
  for (int t = 1; t <= 8; ++t) {
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i) {
      g[i] = rg.uniform(-2.0, 2.0);
      w.node()->grad.data[i] = g[i];
      frozen.node()->grad.data[i] = g[i];
    }
    opt.step(ps, {"w", "nograd"}, tc.lr);

    double b1t = std::pow(tc.beta1, t), b2t = std::pow(tc.beta2, t);
    double rho = rho_inf - 2.0 * t * b2t / (1.0 - b2t);
    if (t <= 4) CHECK(rho <= 4.0);
    if (t >= 5) CHECK(rho > 4.0);
    for (int i = 0; i < n; ++i) {
      om[i] = tc.beta1 * om[i] + (1.0 - tc.beta1) * g[i];
      ov[i] = tc.beta2 * ov[i] + (1.0 - tc.beta2) * g[i] * g[i];
      double mhat = om[i] / (1.0 - b1t);
      double upd;
      if (rho > 4.0) {
        double rect = std::sqrt((rho - 4.0) / (rho_inf - 4.0)) *
                      std::sqrt((rho - 2.0) / (rho_inf - 2.0)) *
                      std::sqrt(rho_inf / rho);
        upd = rect * mhat / (std::sqrt(ov[i] / (1.0 - b2t)) + tc.adam_eps);
      } else {
        upd = mhat;  // plain bias-corrected momentum while variance is young
      }
      ow[i] -= tc.lr * upd;
      CHECK(w.val()[i] == doctest::Approx(ow[i]).epsilon(1e-12));
    }
    // first step reduces to w -= lr * g exactly: mhat == g
    if (t == 1)
      for (int i = 0; i < n; ++i)
        CHECK(w.val()[i] == doctest::Approx(init[i] - tc.lr * g[i]).epsilon(1e-12));
  }
  CHECK(opt.t() == 8);

  // untouched: not in the trainable set / never given a gradient
  for (int i = 0; i < n; ++i) {
    CHECK(frozen.val()[i] == init[i]);
    CHECK(nograd.val()[i] == init[i]);
  }
}

TEST_CASE("each stage updates only its trainable set") {
  auto dataset = tiny_dataset(2);
  Config cfg = tiny_config();
  Model<double> m(cfg.model, 5);
  train::Trainer<double> tr(m, cfg);

  for (StageId s : {StageId::k1a, StageId::k1b, StageId::k2, StageId::k3, StageId::k4}) {
    tr.begin_stage(s);
    std::map<std::string, ArrayD> before;
    for (const auto& [k, v] : m.params.map()) before.emplace(k, v.val());

    for (int i = 0; i < 2; ++i) {
      auto st = tr.step_dataset(dataset);
      CHECK(std::isfinite(st.loss));
      CHECK(st.grad_norm >= 0.0);
    }

    int changed = 0;
    for (const auto& [k, v] : m.params.map()) {
      const ArrayD& old = before.at(k);
      bool same = true;
      for (int64_t i = 0; i < old.numel() && same; ++i)
        same = old.data[i] == v.val().data[i];
      if (tr.trainable().count(k)) {
        changed += !same;
      } else {
        INFO("frozen parameter moved: " << k << " in stage " << stage_name(s));
        CHECK(same);
      }
    }
    CHECK(changed > 0);  // the stage actually learns something
  }
}

TEST_CASE("stage rollouts expose the right graphs") {
  auto dataset = tiny_dataset(1);
  Config cfg = tiny_config();
  Model<double> m(cfg.model, 6);
  train::Trainer<double> tr(m, cfg);
  const auto& clip = dataset[0];

  tr.begin_stage(StageId::k1a);
  auto ro = tr.rollout_clip(clip, 2);
  CHECK(ro.alphas.size() == 1);
  CHECK(ro.prop_trimaps.empty());
  CHECK(ro.ref_trimaps.empty());
  CHECK(ro.first_frame == 2);

  tr.begin_stage(StageId::k1b);
  ro = tr.rollout_clip(clip, -1);
  CHECK(ro.prop_trimaps.size() == 2);  // frames 1..2
  CHECK(ro.ref_trimaps.empty());
  CHECK(ro.alphas.empty());
  train::LossParts lp;
  auto loss = tr.clip_loss(ro, clip, &lp);
  CHECK(lp.alpha == 0.0);
  CHECK(lp.fb == 0.0);
  CHECK((double)loss.val()[0] == doctest::Approx(lp.tri));

  tr.begin_stage(StageId::k4);
  ro = tr.rollout_clip(clip, -1);
  CHECK(ro.prop_trimaps.size() == 2);
  CHECK(ro.ref_trimaps.size() == 3);  // frame 0 included
  CHECK(ro.alphas.size() == 3);
  CHECK(ro.fgs.size() == 3);
  loss = tr.clip_loss(ro, clip, &lp);
  CHECK(lp.tri > 0.0);
  CHECK(lp.alpha > 0.0);
  CHECK((double)loss.val()[0] ==
        doctest::Approx(lp.tri + lp.alpha + 0.25 * lp.fb).epsilon(1e-9));
}

TEST_CASE("equal seeds give identical trajectories") {
  auto dataset = tiny_dataset(2);
  Config cfg = tiny_config();

  auto run = [&](uint64_t model_seed, uint64_t train_seed, int steps) {
    Config c = cfg;
    c.train.seed = train_seed;
    Model<double> m(c.model, model_seed);
    train::Trainer<double> tr(m, c);
    tr.begin_stage(StageId::k1b);
    std::vector<double> losses;
    for (int i = 0; i < steps; ++i) losses.push_back(tr.step_dataset(dataset).loss);
    std::map<std::string, ArrayD> weights;
    for (const auto& [k, v] : m.params.map()) weights.emplace(k, v.val());
    return std::make_pair(losses, weights);
  };

  auto a = run(9, 3, 3);
  auto b = run(9, 3, 3);
  for (size_t i = 0; i < a.first.size(); ++i) REQUIRE(a.first[i] == b.first[i]);
  for (const auto& [k, v] : a.second) {
    const ArrayD& o = b.second.at(k);
    for (int64_t i = 0; i < v.numel(); ++i) REQUIRE(v.data[i] == o.data[i]);
  }

  auto c = run(9, 4, 3);  // different data order must move the loss
  bool any_diff = false;
  for (size_t i = 0; i < a.first.size(); ++i) any_diff = any_diff || a.first[i] != c.first[i];
  CHECK(any_diff);
}

TEST_SUITE_END();
