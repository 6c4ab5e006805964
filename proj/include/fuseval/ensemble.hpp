#pragma once

#include <span>

#include "fuseval/volume.hpp"

namespace fuseval {

// Streaming mean of member probability volumes. Members are added one at a
// time so a fuse over many models never holds more than the accumulator plus
// the current member in memory. Sums are kept in double regardless of the
// member storage precision.
class EnsembleAccumulator {
 public:
  void add(const ProbVolume& member);
  int member_count() const { return members_; }

  // Per-voxel arithmetic mean over all added members. Throws on an empty
  // accumulator.
  ProbVolume fuse() const;

 private:
  VolumeMeta meta_;
  int channels_ = 0;
  int members_ = 0;
  std::vector<double> sums_;
};

// Mean of the member probabilities per (voxel, class).
ProbVolume fuse(std::span<const ProbVolume> members);

// argmax_labels(fuse(members)); ties break toward the lowest class index.
LabelVolume fuse_to_labels(std::span<const ProbVolume> members);

}  // namespace fuseval
