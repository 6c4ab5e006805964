#pragma once

#include <string>
#include <vector>

#include "fuseval/components.hpp"
#include "fuseval/volume.hpp"

namespace fuseval {

// Lesion-matching and penalty settings. The dice/HD95 penalties for
// unmatched lesions default to 0 and 374 mm, the BraTS lesion-wise scoring
// constants.
struct LesionwiseConfig {
  int match_dilation_iters = 3;
  Connectivity match_connectivity = Connectivity::Vertex26;
  double fp_dice_penalty = 0.0;
  double fn_dice_penalty = 0.0;
  double hd95_penalty = 374.0;
  std::size_t min_lesion_voxels = 50;
};

void validate_lesionwise_config(const LesionwiseConfig& cfg);

struct LesionwiseResult {
  double lesion_wise_dice = 0.0;
  double lesion_wise_hd95 = 0.0;
  int tp = 0;
  int fp = 0;
  int fn = 0;
};

// One row of the per-case report: the four headline metrics plus lesion
// counts for one tumor region.
struct MetricReport {
  std::string case_id;
  std::string region;
  double lesion_wise_dice = 0.0;
  double dice = 0.0;
  double lesion_wise_hd95 = 0.0;
  double hd95 = 0.0;
  int tp = 0;
  int fp = 0;
  int fn = 0;
};

// How hd95 finds nearest boundary distances. Auto uses brute force for small
// boundary sets and the separable distance transform above 1e4 boundary
// voxels.
enum class DistanceMethod { Auto, BruteForce, Transform };

// 2|P&G| / (|P|+|G|); two empty masks score 1 by convention.
double dice_score(const Mask& pred, const Mask& gt);

// Foreground voxels with at least one face-6 background or out-of-volume
// neighbor.
Mask boundary_voxels(const Mask& m);

// Max of the two directed 95th-percentile boundary distances, in mm, using
// linear-interpolation percentiles. Both masks empty -> 0; exactly one empty
// -> +infinity (callers map that to their penalty).
double hd95(const Mask& pred, const Mask& gt, DistanceMethod method = DistanceMethod::Auto);

// Exact squared Euclidean distance (mm^2) from every voxel to the nearest
// set voxel of `features`, via separable lower-envelope passes with
// anisotropic spacing. Unreachable (no features) -> +infinity everywhere.
std::vector<double> squared_distance_field(const Mask& features);

// Per-lesion matching and scoring: ground-truth components are matched by
// dilation overlap, matched lesions score dice/hd95 against the union of
// their matched prediction components, and every false positive and false
// negative contributes the configured penalties to the means.
LesionwiseResult lesion_wise(const Mask& pred, const Mask& gt, const LesionwiseConfig& cfg);

// One MetricReport per region: plain dice/hd95 on the whole region masks
// plus the lesion-wise metrics. A one-sided empty region reports
// cfg.hd95_penalty instead of infinity so reports stay finite.
std::vector<MetricReport> evaluate_case(const LabelVolume& pred, const LabelVolume& gt,
                                        const std::vector<RegionSpec>& regions,
                                        const LesionwiseConfig& cfg);

}  // namespace fuseval
