#pragma once

#include <string>
#include <vector>

#include "otvm/array.hpp"
#include "otvm/config.hpp"

namespace otvm::metrics {

using core::ArrayD;
using core::ArrayT;

// Alpha error metrics for a clip, evaluated inside a per-frame pixel mask.
// Frame scores are averaged over frames, temporal scores over frame pairs;
// frames whose mask is empty contribute zero. Reported values carry the
// conventional scale factors so magnitudes land in familiar ranges.
struct SeqEval {
  double ssda = 0;     // per-frame masked RMSE, x100
  double mse = 0;      // masked mean squared error, x1000
  double mad = 0;      // masked mean absolute error, x1000
  double sad = 0;      // per-frame masked absolute sum, /1000
  double grad = 0;     // squared difference of Gaussian-derivative magnitudes, /1000
  double conn = 0;     // connectivity degradation, /1000
  double dtssd = 0;    // RMSE of temporal change mismatch, x100
  double messddt = 0;  // motion-compensated squared temporal error, x1000
};

SeqEval evaluate_sequence(const std::vector<ArrayD>& pred, const std::vector<ArrayD>& gt,
                          const std::vector<ArrayD>& mask, const MetricScales& sc);

// Unknown-band agreement between predicted and reference trimaps, counted
// over the whole clip. Precision forgives near misses by dilating the
// reference band; both are percentages. An empty prediction band scores
// 100 precision by convention.
struct TrimapQuality {
  double precision = 100.0;
  double recall = 100.0;
};

TrimapQuality trimap_quality(const std::vector<ArrayT<uint8_t>>& pred_unk,
                             const std::vector<ArrayT<uint8_t>>& gt_unk, int dilate_k);

// gradient magnitude from separable Gaussian derivative filters
ArrayD gauss_deriv_mag(const ArrayD& a, double sigma);

// largest 4-connected component of a binary map (empty in -> empty out)
ArrayT<uint8_t> largest_component(const ArrayT<uint8_t>& mask);

}  // namespace otvm::metrics
