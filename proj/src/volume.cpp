#include "fuseval/volume.hpp"

#include <algorithm>
#include <cmath>

namespace fuseval {

void validate_meta(const VolumeMeta& meta) {
  for (int a = 0; a < 3; ++a) {
    if (meta.dims[a] < 1) {
      throw SpecError("volume dims must be >= 1, got " + std::to_string(meta.dims[a]) +
                      " on axis " + std::to_string(a));
    }
    if (!(meta.spacing[a] > 0.0) || !std::isfinite(meta.spacing[a])) {
      throw SpecError("voxel spacing must be > 0, got " + std::to_string(meta.spacing[a]) +
                      " on axis " + std::to_string(a));
    }
  }
}

void require_same_grid(const VolumeMeta& a, const VolumeMeta& b, const char* what) {
  if (!a.same_grid(b)) {
    throw ShapeError(std::string(what) + ": dims/spacing mismatch between '" + a.case_id +
                     "' and '" + b.case_id + "'");
  }
}

std::size_t Mask::count_set() const {
  return static_cast<std::size_t>(std::count_if(v.begin(), v.end(), [](std::uint8_t b) { return b != 0; }));
}

RegionSpec region_enhancing_tumor() { return {"enhancing_tumor", {3}}; }
RegionSpec region_tumor_core() { return {"tumor_core", {1, 3}}; }
RegionSpec region_whole_tumor() { return {"whole_tumor", {1, 2, 3}}; }

std::vector<RegionSpec> default_regions() {
  return {region_enhancing_tumor(), region_tumor_core(), region_whole_tumor()};
}

void validate_labels(const LabelVolume& l) {
  validate_meta(l.meta);
  if (l.num_classes < 1) throw SpecError("label volume needs at least one class");
  if (l.voxels.size() != l.meta.voxel_count()) {
    throw ShapeError("label voxel buffer size does not match dims");
  }
  for (std::uint8_t v : l.voxels) {
    if (v >= l.num_classes) {
      throw DataError("label value " + std::to_string(int(v)) + " >= num_classes " +
                      std::to_string(l.num_classes));
    }
  }
}

void validate_probs(const ProbVolume& p) {
  validate_meta(p.meta);
  if (p.channels < 1) throw SpecError("probability volume needs at least one channel");
  if (p.probs.size() != p.meta.voxel_count() * static_cast<std::size_t>(p.channels)) {
    throw ShapeError("probability buffer size does not match dims * channels");
  }
  for (float v : p.probs) {
    if (!std::isfinite(v)) throw DataError("non-finite probability value");
    if (v < 0.0f || v > 1.0f) {
      throw DataError("probability value " + std::to_string(v) + " outside [0, 1]");
    }
  }
}

ProbVolume normalize(const ProbVolume& p) {
  const std::size_t nvox = p.meta.voxel_count();
  ProbVolume out = p;
  for (std::size_t i = 0; i < nvox; ++i) {
    double sum = 0.0;
    for (int c = 0; c < p.channels; ++c) sum += p.probs[static_cast<std::size_t>(c) * nvox + i];
    if (sum <= 0.0) {
      throw DegenerateVoxelError("voxel " + std::to_string(i) +
                                 " has all-zero probability channels");
    }
    for (int c = 0; c < p.channels; ++c) {
      const std::size_t idx = static_cast<std::size_t>(c) * nvox + i;
      out.probs[idx] = static_cast<float>(p.probs[idx] / sum);
    }
  }
  return out;
}

LabelVolume argmax_labels(const ProbVolume& p) {
  const std::size_t nvox = p.meta.voxel_count();
  LabelVolume out;
  out.meta = p.meta;
  out.num_classes = p.channels;
  out.voxels.resize(nvox);
  for (std::size_t i = 0; i < nvox; ++i) {
    int best = 0;
    float best_val = p.probs[i];
    for (int c = 1; c < p.channels; ++c) {
      const float v = p.probs[static_cast<std::size_t>(c) * nvox + i];
      if (v > best_val) {  // strict: ties stay at the lower index
        best_val = v;
        best = c;
      }
    }
    out.voxels[i] = static_cast<std::uint8_t>(best);
  }
  return out;
}

ProbVolume one_hot(const LabelVolume& l) {
  const std::size_t nvox = l.meta.voxel_count();
  ProbVolume out;
  out.meta = l.meta;
  out.channels = l.num_classes;
  out.probs.assign(nvox * static_cast<std::size_t>(l.num_classes), 0.0f);
  for (std::size_t i = 0; i < nvox; ++i) {
    out.probs[static_cast<std::size_t>(l.voxels[i]) * nvox + i] = 1.0f;
  }
  return out;
}

Mask region_mask(const LabelVolume& l, const RegionSpec& region) {
  if (region.labels.empty()) throw SpecError("region '" + region.name + "' has no labels");
  std::array<bool, 256> member{};
  for (int lab : region.labels) {
    if (lab < 1 || lab >= l.num_classes) {
      throw SpecError("region '" + region.name + "' label " + std::to_string(lab) +
                      " outside {1, ..., " + std::to_string(l.num_classes - 1) + "}");
    }
    member[static_cast<std::size_t>(lab)] = true;
  }
  Mask m;
  m.meta = l.meta;
  m.v.resize(l.voxels.size());
  for (std::size_t i = 0; i < l.voxels.size(); ++i) {
    m.v[i] = member[l.voxels[i]] ? 1 : 0;
  }
  return m;
}

}  // namespace fuseval
