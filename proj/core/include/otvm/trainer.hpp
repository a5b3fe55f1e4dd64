#pragma once

#include <memory>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "otvm/clipsim.hpp"
#include "otvm/config.hpp"
#include "otvm/losses.hpp"
#include "otvm/model.hpp"

namespace otvm::train {

using core::ArrayT;
using core::Tensor;

// learning rate with the late-schedule decay; it is 0-based, the drop takes
// effect from floor(0.9 * total) onward
double lr_at(const TrainConfig& cfg, int it, int total);

// Parameters a stage updates: the module being trained minus (optionally)
// all normalization affines. Everything else stays frozen bit for bit.
std::set<std::string> stage_trainable(const std::vector<std::string>& names, StageId s,
                                      bool freeze_norm);

// Rectified Adam. Falls back to an unadapted momentum step while the
// variance estimate is still too young to rectify.
template <typename T>
class RAdam {
 public:
  explicit RAdam(const TrainConfig& cfg) : cfg_(cfg) {}

  // returns the applied update count; grads must already be clipped
  void step(core::ParamStore<T>& ps, const std::set<std::string>& trainable, double lr);
  int64_t t() const { return t_; }

 private:
  struct Slot {
    ArrayT<T> m, v;
  };
  TrainConfig cfg_;
  std::map<std::string, Slot> slots_;
  int64_t t_ = 0;
};

// clip's arrays cast to the training precision, masks precomputed
template <typename T>
struct TrainClip {
  std::vector<ArrayT<T>> frames, trimaps, alphas, fgs, bgs, unks;
  int length() const { return (int)frames.size(); }
};

template <typename T>
TrainClip<T> prepare_clip(const clipsim::ClipSample& clip);

// per-frame graph outputs a stage supervises
template <typename T>
struct Rollout {
  std::vector<Tensor<T>> prop_trimaps;  // propagated, frames 1..T-1
  std::vector<Tensor<T>> ref_trimaps;   // refined, frames 0..T-1
  std::vector<Tensor<T>> alphas, fgs, bgs;
  int first_frame = 0;  // offset of alphas[0] within the clip
};

struct LossParts {
  double tri = 0, alpha = 0, fb = 0;
};

struct StepStats {
  double loss = 0;
  LossParts parts;
  double grad_norm = 0;  // before clipping
  double lr = 0;
};

// Drives one model through the staged schedule. Each stage starts with a
// fresh optimizer and its own trainable set; data order is drawn from an
// internal generator so runs with equal seeds produce identical weights.
template <typename T>
class Trainer {
 public:
  Trainer(Model<T>& model, const Config& cfg);

  void begin_stage(StageId s);
  StageId stage() const { return stage_; }
  int iters_done() const { return it_; }
  int stage_total() const { return cfg_.train.stage_iters[(int)stage_]; }
  int stage_batch() const { return cfg_.train.stage_batch[(int)stage_]; }
  const std::set<std::string>& trainable() const { return trainable_; }

  // forward pass of the stage's graph over one clip (or one frame of it in
  // the single-frame stage); exposed for tests
  Rollout<T> rollout_clip(const TrainClip<T>& clip, int frame_1a) const;
  Tensor<T> clip_loss(const Rollout<T>& ro, const TrainClip<T>& clip,
                      LossParts* parts) const;

  StepStats step(const std::vector<const TrainClip<T>*>& batch,
                 const std::vector<int>& frames_1a);
  StepStats step_dataset(const std::vector<TrainClip<T>>& dataset);

 private:
  double clip_gradients();

  Model<T>& m_;
  Config cfg_;
  StageId stage_ = StageId::k1a;
  int it_ = 0;
  std::set<std::string> trainable_;
  std::unique_ptr<RAdam<T>> opt_;
  core::Rng rng_;
};

// iters_override <= 0 runs the configured count; one JSON line per step
template <typename T>
void run_stage(Trainer<T>& tr, const std::vector<TrainClip<T>>& dataset, StageId s,
               int iters_override, std::ostream* log);

}  // namespace otvm::train
