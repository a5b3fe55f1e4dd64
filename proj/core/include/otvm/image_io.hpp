#pragma once

#include <string>

#include "otvm/array.hpp"

namespace otvm::core {

// PNG pixels map to [0,1] doubles; {1,H,W} for grayscale, {3,H,W} for color.
// Palette images are expanded, alpha channels dropped, 16-bit depth kept.
ArrayD read_png(const std::string& path);

void write_png8(const std::string& path, const ArrayD& img);   // 1 or 3 channels
void write_png16(const std::string& path, const ArrayD& img);  // 1 channel

// In-memory JPEG compress/decompress of an RGB image with 4:4:4 sampling.
ArrayD jpeg_roundtrip(const ArrayD& rgb, int quality);

}  // namespace otvm::core
