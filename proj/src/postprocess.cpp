#include "fuseval/postprocess.hpp"

#include <algorithm>

#include "fuseval/errors.hpp"

namespace fuseval {

void validate_postprocess_config(const PostprocessConfig& cfg, int num_classes) {
  if (cfg.smooth_iterations < 0) {
    throw ConfigError("postprocess.smooth_iterations must be >= 0");
  }
  std::vector<int> sorted = cfg.class_priority;
  std::sort(sorted.begin(), sorted.end());
  std::vector<int> expected;
  for (int c = 1; c < num_classes; ++c) expected.push_back(c);
  if (sorted != expected) {
    throw ConfigError("postprocess.class_priority must be a permutation of the foreground classes");
  }
}

namespace {

Mask class_mask(const LabelVolume& labels, int cls) {
  Mask m;
  m.meta = labels.meta;
  m.v.resize(labels.voxels.size());
  for (std::size_t i = 0; i < labels.voxels.size(); ++i) {
    m.v[i] = labels.voxels[i] == cls ? 1 : 0;
  }
  return m;
}

}  // namespace

LabelVolume size_filter(const LabelVolume& labels, const PostprocessConfig& cfg) {
  validate_postprocess_config(cfg, labels.num_classes);
  LabelVolume out = labels;
  if (cfg.min_component_voxels == 0) return out;
  for (int cls = 1; cls < labels.num_classes; ++cls) {
    const ComponentMap cm = connected_components(class_mask(labels, cls), cfg.connectivity);
    if (cm.count == 0) continue;
    const std::vector<ComponentSize> sizes = component_sizes(cm);
    std::vector<char> drop(static_cast<std::size_t>(cm.count) + 1, 0);
    for (const ComponentSize& s : sizes) {
      if (s.voxel_count < cfg.min_component_voxels) drop[static_cast<std::size_t>(s.id)] = 1;
    }
    for (std::size_t i = 0; i < out.voxels.size(); ++i) {
      if (cm.ids[i] > 0 && drop[static_cast<std::size_t>(cm.ids[i])]) out.voxels[i] = 0;
    }
  }
  return out;
}

LabelVolume morph_smooth(const LabelVolume& labels, const PostprocessConfig& cfg) {
  validate_postprocess_config(cfg, labels.num_classes);
  if (cfg.smooth_iterations == 0) return labels;

  LabelVolume out;
  out.meta = labels.meta;
  out.num_classes = labels.num_classes;
  out.voxels.assign(labels.voxels.size(), 0);
  std::vector<std::uint8_t> claimed(labels.voxels.size(), 0);

  for (int cls : cfg.class_priority) {
    const Mask original = class_mask(labels, cls);
    const Mask closed = erode(dilate(original, cfg.smooth_iterations, cfg.connectivity),
                              cfg.smooth_iterations, cfg.connectivity);
    // Closing is extensive except at the volume border, where out-of-bounds
    // counts as background; clip the marker so it stays inside the limit.
    Mask marker = erode(original, 1, cfg.connectivity);
    for (std::size_t i = 0; i < marker.v.size(); ++i) {
      if (marker.v[i] && !closed.v[i]) marker.v[i] = 0;
    }
    const Mask rebuilt = morph_reconstruct(marker, closed, cfg.connectivity);
    for (std::size_t i = 0; i < rebuilt.v.size(); ++i) {
      if (rebuilt.v[i] && !claimed[i]) {
        out.voxels[i] = static_cast<std::uint8_t>(cls);
        claimed[i] = 1;
      }
    }
  }
  return out;
}

LabelVolume postprocess(const LabelVolume& labels, const PostprocessConfig& cfg) {
  return morph_smooth(size_filter(labels, cfg), cfg);
}

}  // namespace fuseval
