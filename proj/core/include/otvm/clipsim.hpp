#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "otvm/array.hpp"
#include "otvm/config.hpp"
#include "otvm/rng.hpp"

namespace otvm::clipsim {

using core::ArrayD;
using core::ArrayT;

// Trimap planes are ordered [bg, unk, fg]; grayscale encoding is
// bg=0, unk=128, fg=255.

// Labels alpha==0 bg, alpha==1 fg, anything between unknown, then widens the
// unknown band with a square dilation. kernel must be odd and within [1,41].
ArrayD make_trimap(const ArrayD& alpha, int kernel);

ArrayD composite(const ArrayD& fg, const ArrayD& alpha, const ArrayD& bg);

ArrayD trimap_to_gray(const ArrayD& trimap);
ArrayD gray_to_trimap(const ArrayD& gray);               // nearest of the three levels
ArrayT<uint8_t> trimap_labels(const ArrayD& trimap);     // argmax -> 0 bg, 1 unk, 2 fg
ArrayD labels_to_trimap(const ArrayT<uint8_t>& labels);  // one-hot planes

struct SourcePair {
  ArrayD fg;     // {3,h,w}
  ArrayD alpha;  // {1,h,w}
};

struct ClipSample {
  std::vector<ArrayD> frames;   // {3,S,S} composited, possibly degraded
  std::vector<ArrayD> alphas;   // {1,S,S}
  std::vector<ArrayD> trimaps;  // {3,S,S} one-hot
  std::vector<ArrayD> fgs;      // {3,S,S} clean layers (pre-degradation)
  std::vector<ArrayD> bgs;      // {3,S,S}
  int size() const { return frames.empty() ? 0 : frames[0].dim(1); }
  int length() const { return (int)frames.size(); }
};

// Temporally ordered affine motion for fg and bg independently, one crop
// tracked across the clip, color/degradation augmentations, trimaps from the
// final alphas. Fully determined by (sources, cfg, seed).
ClipSample simulate_clip(const SourcePair& src, const ArrayD& bg, const SimConfig& cfg,
                         uint64_t seed);

void save_clip(const std::string& dir, const ClipSample& clip, uint64_t seed);
ClipSample load_clip(const std::string& dir);

// procedural sources used by the demo generator and the test suite
SourcePair demo_foreground(int size, uint64_t seed);
ArrayD demo_background(int size, uint64_t seed);

}  // namespace otvm::clipsim
