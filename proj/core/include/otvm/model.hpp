#pragma once

#include "otvm/alpha_net.hpp"
#include "otvm/config.hpp"
#include "otvm/refine.hpp"
#include "otvm/trimap_prop.hpp"

namespace otvm {

template <typename T>
struct Model {
  ModelConfig cfg;
  core::ParamStore<T> params;
  prop::TrimapPropNet<T> trimap;
  alpha::AlphaNet<T> alpha_net;
  refine::RefineNet<T> refine_net;

  Model(const ModelConfig& c, uint64_t seed) : cfg(c) {
    core::Rng rng(core::splitmix64(seed ^ 0x6f74766dull));
    trimap = prop::TrimapPropNet<T>(params, cfg, rng);
    alpha_net = alpha::AlphaNet<T>(params, cfg, rng);
    refine_net = refine::RefineNet<T>(params, cfg, rng);
  }
};

}  // namespace otvm
