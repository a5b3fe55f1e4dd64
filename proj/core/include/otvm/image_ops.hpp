#pragma once

#include <vector>

#include "otvm/array.hpp"

namespace otvm::core {

enum class Border { kZero, kReflect };

// 2x3 affine matrix mapping OUTPUT pixel coordinates to input coordinates:
// in = A * out + t. Row-major [a00,a01,t0; a10,a11,t1] acting on (x, y).
struct Affine {
  double m[6] = {1, 0, 0, 0, 1, 0};

  static Affine identity() { return {}; }
  // forward-parameter transform about a center point, inverted for sampling
  static Affine from_params(double cx, double cy, double angle_deg, double zoom,
                            double shear_deg, double tx, double ty, bool hflip);
  Affine compose(const Affine& inner) const;  // this ∘ inner
  void apply(double x, double y, double& ox, double& oy) const;
};

ArrayD warp_affine(const ArrayD& src, const Affine& inv_map, int out_h, int out_w,
                   Border border);

ArrayD resize_bilinear_d(const ArrayD& src, int out_h, int out_w);

// normalized 1-d Gaussian, radius = ceil(3*sigma)
std::vector<double> gaussian_kernel1d(double sigma);

// separable blur with reflect padding
ArrayD blur_separable_d(const ArrayD& src, const std::vector<double>& k);

// dense 2-d convolution with reflect padding (square kernel)
ArrayD conv2d_reflect_d(const ArrayD& src, const ArrayD& kernel);

// line kernel for linear motion blur; length in pixels, angle in degrees
ArrayD motion_blur_kernel(int length, double angle_deg);

// Chebyshev (square window) dilation of a binary mask; k odd
ArrayT<uint8_t> dilate_square(const ArrayT<uint8_t>& mask, int k);

// per-channel CDF matching of src towards ref; weights may be empty ({} = 1)
ArrayD histogram_match(const ArrayD& src, const ArrayD& ref, const ArrayD& src_weight,
                       const ArrayD& ref_weight);

}  // namespace otvm::core
