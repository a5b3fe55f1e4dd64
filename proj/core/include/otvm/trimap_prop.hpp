#pragma once

#include <optional>

#include "otvm/config.hpp"
#include "otvm/nn.hpp"

namespace otvm::prop {

using core::ArrayT;
using core::Tensor;

template <typename T>
struct MemoryEntry {
  int frame_index = -1;
  Tensor<T> key;    // {Ck, h, w} at stride 16
  Tensor<T> value;  // {Cv, h, w}
};

// Bounded frame memory: one reference (frame 0), one previous frame, and a
// short tail of intermediate frames. Never exceeds kMaxEntries.
template <typename T>
class MemoryBank {
 public:
  static constexpr int kMaxEntries = 5;
  static constexpr int kMaxIntermediates = 3;

  MemoryBank() = default;
  explicit MemoryBank(int max_intermediates) : max_intermediates_(max_intermediates) {
    assert(max_intermediates_ >= 0 && max_intermediates_ <= kMaxIntermediates);
  }

  void set_reference(MemoryEntry<T> e) {
    assert(e.frame_index == 0);
    reference_ = std::move(e);
  }
  void set_previous(MemoryEntry<T> e) { previous_ = std::move(e); }
  void push_intermediate(MemoryEntry<T> e) {
    intermediates_.push_back(std::move(e));
    while ((int)intermediates_.size() > max_intermediates_)
      intermediates_.erase(intermediates_.begin());
  }
  bool has_reference() const { return reference_.has_value(); }

  // distinct entries ordered by frame index (the previous frame may coincide
  // with the newest intermediate)
  std::vector<const MemoryEntry<T>*> entries() const {
    std::vector<const MemoryEntry<T>*> out;
    auto push = [&](const MemoryEntry<T>* e) {
      for (const auto* p : out)
        if (p->frame_index == e->frame_index) return;
      out.push_back(e);
    };
    if (reference_) push(&*reference_);
    for (const auto& e : intermediates_) push(&e);
    if (previous_) push(&*previous_);
    std::sort(out.begin(), out.end(),
              [](const MemoryEntry<T>* a, const MemoryEntry<T>* b) {
                return a->frame_index < b->frame_index;
              });
    assert((int)out.size() <= kMaxEntries);
    return out;
  }
  int size() const { return (int)entries().size(); }
  std::vector<int> frame_indices() const {
    std::vector<int> v;
    for (const auto* e : entries()) v.push_back(e->frame_index);
    return v;
  }

 private:
  std::optional<MemoryEntry<T>> reference_, previous_;
  std::vector<MemoryEntry<T>> intermediates_;
  int max_intermediates_ = kMaxIntermediates;
};

// raw dot-product attention over every memory location; rows sum to 1
template <typename T>
Tensor<T> attention_weights(const std::vector<const MemoryEntry<T>*>& entries,
                            const Tensor<T>& query_key);

template <typename T>
struct QueryFeats {
  Tensor<T> key, value;    // stride 16
  Tensor<T> skip8, skip4;  // encoder features for the decoder
  int H = 0, W = 0;        // input frame size
};

template <typename T>
struct TrimapPropNet {
  core::Backbone<T> query_enc, mem_enc;
  core::Conv2dLayer<T> q_key, q_val, m_key, m_val;
  core::ConvBlock<T> read_conv;
  core::BasicBlock<T> res16, res8, res4;
  core::Conv2dLayer<T> lat8, lat4, head;

  TrimapPropNet() = default;
  TrimapPropNet(core::ParamStore<T>& ps, const ModelConfig& cfg, core::Rng& rng);

  QueryFeats<T> encode_query(const Tensor<T>& frame) const;

  // Inputs beyond frame+trimap are optional; disabled ones enter as zeros so
  // the 23-channel stem never changes shape.
  MemoryEntry<T> encode_memory(int frame_index, const Tensor<T>& frame,
                               const Tensor<T>& trimap, const Tensor<T>& alpha,
                               const Tensor<T>& hidden16, bool use_alpha,
                               bool use_hidden) const;

  // retrieved memory value concatenated with the query value: {2*Cv, h, w}
  Tensor<T> memory_read(const MemoryBank<T>& bank, const QueryFeats<T>& q) const;

  // read output -> full-resolution per-pixel class probabilities {3,H,W}
  Tensor<T> decode(const Tensor<T>& read_out, const QueryFeats<T>& q) const;

  Tensor<T> propagate(const MemoryBank<T>& bank, const Tensor<T>& frame) const;
};

}  // namespace otvm::prop
