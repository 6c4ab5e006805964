#include "fuseval/ensemble.hpp"

#include "fuseval/errors.hpp"

namespace fuseval {

void EnsembleAccumulator::add(const ProbVolume& member) {
  validate_meta(member.meta);
  if (member.probs.size() !=
      member.meta.voxel_count() * static_cast<std::size_t>(member.channels)) {
    throw ShapeError("ensemble member buffer size does not match dims * channels");
  }
  if (members_ == 0) {
    meta_ = member.meta;
    channels_ = member.channels;
    sums_.assign(member.probs.size(), 0.0);
  } else {
    require_same_grid(meta_, member.meta, "ensemble");
    if (channels_ != member.channels) {
      throw ShapeError("ensemble member has " + std::to_string(member.channels) +
                       " channels, expected " + std::to_string(channels_));
    }
  }
  for (std::size_t i = 0; i < sums_.size(); ++i) sums_[i] += member.probs[i];
  ++members_;
}

ProbVolume EnsembleAccumulator::fuse() const {
  if (members_ == 0) throw PreconditionError("cannot fuse an empty ensemble");
  ProbVolume out;
  out.meta = meta_;
  out.channels = channels_;
  out.probs.resize(sums_.size());
  const double count = double(members_);
  for (std::size_t i = 0; i < sums_.size(); ++i) {
    out.probs[i] = static_cast<float>(sums_[i] / count);
  }
  return out;
}

ProbVolume fuse(std::span<const ProbVolume> members) {
  EnsembleAccumulator acc;
  for (const ProbVolume& m : members) acc.add(m);
  return acc.fuse();
}

LabelVolume fuse_to_labels(std::span<const ProbVolume> members) {
  return argmax_labels(fuse(members));
}

}  // namespace fuseval
