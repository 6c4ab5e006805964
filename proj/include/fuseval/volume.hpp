#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "fuseval/errors.hpp"

namespace fuseval {

// Grid geometry shared by every dense volume type. Spacing is millimeters
// per voxel. Two volumes are combinable only if dims and spacing match.
struct VolumeMeta {
  std::array<std::int64_t, 3> dims{0, 0, 0};     // (nx, ny, nz)
  std::array<double, 3> spacing{1.0, 1.0, 1.0};  // (sx, sy, sz) in mm
  std::string case_id;

  std::size_t voxel_count() const {
    return static_cast<std::size_t>(dims[0]) * static_cast<std::size_t>(dims[1]) *
           static_cast<std::size_t>(dims[2]);
  }
  double voxel_volume_mm3() const { return spacing[0] * spacing[1] * spacing[2]; }

  bool same_grid(const VolumeMeta& other) const {
    return dims == other.dims && spacing == other.spacing;
  }
};

// Throws SpecError if dims or spacing are out of range.
void validate_meta(const VolumeMeta& meta);

// Throws ShapeError unless both metas describe the same grid.
void require_same_grid(const VolumeMeta& a, const VolumeMeta& b, const char* what);

// Linear index with x fastest (NIfTI native order).
inline std::size_t linear_index(const VolumeMeta& m, std::int64_t x, std::int64_t y,
                                std::int64_t z) {
  return static_cast<std::size_t>(x) +
         static_cast<std::size_t>(m.dims[0]) *
             (static_cast<std::size_t>(y) + static_cast<std::size_t>(m.dims[1]) *
                                                static_cast<std::size_t>(z));
}

// Discrete per-voxel class labels in {0, ..., num_classes-1}, 0 = background.
struct LabelVolume {
  VolumeMeta meta;
  int num_classes = 4;
  std::vector<std::uint8_t> voxels;  // x-fastest

  std::uint8_t at(std::int64_t x, std::int64_t y, std::int64_t z) const {
    return voxels[linear_index(meta, x, y, z)];
  }
};

// Per-voxel class probabilities, channel-planar storage: channel c occupies
// probs[c*nvox .. (c+1)*nvox), matching NIfTI 4D file order.
struct ProbVolume {
  VolumeMeta meta;
  int channels = 4;
  std::vector<float> probs;

  const float* channel(int c) const { return probs.data() + static_cast<std::size_t>(c) * meta.voxel_count(); }
  float* channel(int c) { return probs.data() + static_cast<std::size_t>(c) * meta.voxel_count(); }
};

// Dense binary mask; nonzero = set.
struct Mask {
  VolumeMeta meta;
  std::vector<std::uint8_t> v;

  std::size_t count_set() const;
  bool get(std::int64_t x, std::int64_t y, std::int64_t z) const {
    return v[linear_index(meta, x, y, z)] != 0;
  }
};

// Composite tumor region: a named non-empty set of foreground class labels.
struct RegionSpec {
  std::string name;
  std::vector<int> labels;  // subset of {1, ..., C-1}
};

// BraTS 2023 convention: 1 = necrotic core, 2 = edema, 3 = enhancing.
RegionSpec region_enhancing_tumor();  // ET = {3}
RegionSpec region_tumor_core();       // TC = {1, 3}
RegionSpec region_whole_tumor();      // WT = {1, 2, 3}
std::vector<RegionSpec> default_regions();  // order: ET, TC, WT

// Throws DataError if any voxel value >= num_classes.
void validate_labels(const LabelVolume& l);

// Throws DataError on non-finite or out-of-[0,1] values.
void validate_probs(const ProbVolume& p);

// Rescales every voxel so its channels sum to 1; relative proportions are
// preserved. A voxel whose channels sum to zero raises DegenerateVoxelError.
ProbVolume normalize(const ProbVolume& p);

// Per-voxel argmax; ties break toward the lowest class index.
LabelVolume argmax_labels(const ProbVolume& p);

// One-hot encoding of a label volume (inverse of argmax_labels).
ProbVolume one_hot(const LabelVolume& l);

// Binary mask of voxels whose label belongs to the region.
Mask region_mask(const LabelVolume& l, const RegionSpec& region);

}  // namespace fuseval
