#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "fuseval/components.hpp"
#include "fuseval/losses.hpp"
#include "fuseval/metrics.hpp"
#include "fuseval/volume.hpp"

// Independent reimplementations used to cross-check the library. Each one
// takes the most literal algorithm available (BFS, all-pairs scans, dense
// windows) instead of the optimized library routine, sharing only the data
// types.
namespace oracle {

struct Labeling {
  std::vector<std::int32_t> ids;
  std::int32_t count = 0;
};

// Flood-fill labeling; ids are assigned in first-encounter scan order
// (x fastest), the same numbering contract the library promises.
Labeling bfs_components(const fuseval::Mask& mask, fuseval::Connectivity conn);

// Linear-interpolation percentile of an unsorted sample.
double percentile(std::vector<double> values, double q);

// hd95 by brute-force all-pairs distances between boundary voxel sets.
// Both masks empty -> 0, exactly one empty -> +infinity.
double hd95_allpairs(const fuseval::Mask& pred, const fuseval::Mask& gt);

// Straight-line transcription of the lesion-wise definition on top of
// bfs_components and hd95_allpairs.
fuseval::LesionwiseResult lesion_wise_straightline(const fuseval::Mask& pred,
                                                   const fuseval::Mask& gt,
                                                   const fuseval::LesionwiseConfig& cfg);

// MS-SSIM via dense (non-separable) windows evaluated directly from the
// definition: truncated-and-renormalized 3D Gaussian window at every voxel.
double ms_ssim_dense(const std::vector<double>& a, const std::vector<double>& b,
                     std::array<std::int64_t, 3> dims, const fuseval::MsSsimConfig& cfg);

}  // namespace oracle
