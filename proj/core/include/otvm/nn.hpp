#pragma once

#include <map>
#include <string>
#include <vector>

#include "otvm/ops.hpp"
#include "otvm/rng.hpp"
#include "otvm/tensor.hpp"

namespace otvm::core {

// Named registry of trainable leaves. Map order (lexicographic) fixes
// serialization and optimizer iteration order.
template <typename T>
class ParamStore {
 public:
  Tensor<T> create(const std::string& name, ArrayT<T> init) {
    assert(!params_.count(name));
    auto t = Tensor<T>::leaf(std::move(init), true);
    params_.emplace(name, t);
    return t;
  }
  Tensor<T> get(const std::string& name) const {
    auto it = params_.find(name);
    assert(it != params_.end());
    return it->second;
  }
  bool has(const std::string& name) const { return params_.count(name) > 0; }
  std::map<std::string, Tensor<T>>& map() { return params_; }
  const std::map<std::string, Tensor<T>>& map() const { return params_; }
  void zero_grad() {
    for (auto& [k, v] : params_) v.zero_grad();
  }

 private:
  std::map<std::string, Tensor<T>> params_;
};

template <typename T>
ArrayT<T> he_normal(Rng& rng, std::vector<int> shape, int fan_in) {
  ArrayT<T> a(std::move(shape));
  double sd = std::sqrt(2.0 / fan_in);
  for (int64_t i = 0; i < a.numel(); ++i) a[i] = (T)rng.normal(0.0, sd);
  return a;
}

enum class Act { kRelu, kLRelu };

template <typename T>
Tensor<T> activate(const Tensor<T>& x, Act a);

struct LayerOpts {
  bool ws = false;     // standardized filters
  int gn_groups = 4;   // clamped per layer to a divisor of C
  Act act = Act::kRelu;
};

template <typename T>
struct Conv2dLayer {
  Tensor<T> w, b;
  int stride = 1, pad = 0, dil = 1;
  bool ws = false;

  Conv2dLayer() = default;
  Conv2dLayer(ParamStore<T>& ps, const std::string& name, int cin, int cout, int k,
              int stride, int dil, bool ws, bool bias, Rng& rng);
  Tensor<T> forward(const Tensor<T>& x) const;
};

template <typename T>
struct GroupNormLayer {
  Tensor<T> gamma, beta;
  int groups = 1;
  T eps = (T)1e-5;

  GroupNormLayer() = default;
  GroupNormLayer(ParamStore<T>& ps, const std::string& name, int ch, int groups);
  Tensor<T> forward(const Tensor<T>& x) const;
};

// conv + groupnorm + activation
template <typename T>
struct ConvBlock {
  Conv2dLayer<T> conv;
  GroupNormLayer<T> norm;
  Act act = Act::kRelu;

  ConvBlock() = default;
  ConvBlock(ParamStore<T>& ps, const std::string& name, int cin, int cout, int k, int stride,
            int dil, const LayerOpts& o, Rng& rng);
  Tensor<T> forward(const Tensor<T>& x) const;
};

// standard two-conv residual block with projection shortcut when needed
template <typename T>
struct BasicBlock {
  Conv2dLayer<T> c1, c2, proj;
  GroupNormLayer<T> n1, n2, nproj;
  bool has_proj = false;
  Act act = Act::kRelu;

  BasicBlock() = default;
  BasicBlock(ParamStore<T>& ps, const std::string& name, int cin, int cout, int stride,
             int dil, const LayerOpts& o, Rng& rng);
  Tensor<T> forward(const Tensor<T>& x) const;
};

// 1x1 -> 3x3 -> 1x1 residual block, expansion 4
template <typename T>
struct BottleneckBlock {
  Conv2dLayer<T> c1, c2, c3, proj;
  GroupNormLayer<T> n1, n2, n3, nproj;
  bool has_proj = false;
  Act act = Act::kRelu;

  BottleneckBlock() = default;
  BottleneckBlock(ParamStore<T>& ps, const std::string& name, int cin, int cout, int stride,
                  int dil, const LayerOpts& o, Rng& rng);
  Tensor<T> forward(const Tensor<T>& x) const;
};

struct StageSpec {
  int ch = 0;
  int blocks = 1;
  int stride = 2;
  int dil = 1;
};

struct BackboneSpec {
  int in_ch = 3;
  int stem_ch = 16;
  int stem_k = 3;
  bool stem_pool = false;  // 3x3/2 maxpool after the stem (deep preset)
  bool bottleneck = false;
  std::vector<StageSpec> stages;
  LayerOpts opts;
};

// Residual encoder. forward() returns the stem output followed by each
// stage output, finest to coarsest.
template <typename T>
struct Backbone {
  BackboneSpec spec;
  Conv2dLayer<T> stem;
  GroupNormLayer<T> stem_norm;
  std::vector<std::vector<BasicBlock<T>>> basic_stages;
  std::vector<std::vector<BottleneckBlock<T>>> bneck_stages;

  Backbone() = default;
  Backbone(ParamStore<T>& ps, const std::string& name, const BackboneSpec& spec, Rng& rng);
  std::vector<Tensor<T>> forward(const Tensor<T>& x) const;
  int out_ch() const;
};

}  // namespace otvm::core
