#pragma once

#include <cstdint>
#include <string>

#include "otvm/errors.hpp"
#include "otvm/model.hpp"

namespace otvm {

struct CheckpointMeta {
  int format_version = 1;
  std::string preset;
  std::string stage;  // last completed training stage, "" for fresh weights
  int64_t step = 0;
  ModelConfig model;
};

// Single-file archive: text header (preset, channel sizes, array directory)
// followed by raw little-endian float64 data.
template <typename T>
void save_checkpoint(const std::string& path, const Model<T>& m, const std::string& stage,
                     int64_t step);

// Throws UsageError when the stored configuration does not match m.cfg.
template <typename T>
CheckpointMeta load_checkpoint(const std::string& path, Model<T>& m);

CheckpointMeta peek_checkpoint(const std::string& path);

}  // namespace otvm
