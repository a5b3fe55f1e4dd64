#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "otvm/config.hpp"
#include "otvm/model.hpp"

namespace otvm::engine {

using core::ArrayD;

struct FrameResult {
  ArrayD alpha;   // {1,H,W}
  ArrayD trimap;  // {3,H,W} probabilities
  ArrayD fg, bg;  // populated on request
  double seconds = 0;
  std::vector<int> memory_frames;  // bank contents after this frame
};

struct SequenceResult {
  std::vector<FrameResult> frames;
  double total_seconds = 0;
  int64_t peak_rss_kb = 0;
};

// Auto-regressive pass over a clip from a single first-frame trimap. Each
// frame is propagated from the frame memory, matted, refined, and written
// back as the newest memory entry; every mem_interval-th frame is also kept
// as an intermediate. Inputs are padded by reflection to a multiple of 16
// and outputs cropped back.
template <typename T>
SequenceResult run_sequence(const Model<T>& model, const std::vector<ArrayD>& frames,
                            const ArrayD& trimap0, const InferConfig& icfg,
                            bool want_fgbg);

// frame PNGs, per-frame timing CSV and a run manifest under dir
void write_outputs(const std::string& dir, const SequenceResult& res,
                   const InferConfig& icfg, const std::string& preset);

int64_t peak_rss_kb();

}  // namespace otvm::engine
