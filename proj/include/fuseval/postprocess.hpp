#pragma once

#include <vector>

#include "fuseval/components.hpp"
#include "fuseval/volume.hpp"

namespace fuseval {

// Label-volume refinement settings. class_priority resolves voxels claimed by
// several classes after smoothing; earlier entries win. The default keeps the
// enhancing tumor, then necrotic core, then edema.
struct PostprocessConfig {
  std::size_t min_component_voxels = 50;
  Connectivity connectivity = Connectivity::Vertex26;
  int smooth_iterations = 0;
  std::vector<int> class_priority = {3, 1, 2};
};

// Throws ConfigError unless class_priority is a permutation of {1,...,C-1}.
void validate_postprocess_config(const PostprocessConfig& cfg, int num_classes);

// Relabels to background, per foreground class independently, every connected
// component smaller than min_component_voxels. Larger components and the
// background are untouched.
LabelVolume size_filter(const LabelVolume& labels, const PostprocessConfig& cfg);

// Per-class binary closing (dilate then erode, smooth_iterations each)
// followed by morphological reconstruction with the once-eroded original
// class mask as marker and the closed mask as limit. Conflicts resolve by
// class_priority; unclaimed voxels become background. smooth_iterations = 0
// is the identity.
LabelVolume morph_smooth(const LabelVolume& labels, const PostprocessConfig& cfg);

// size_filter then morph_smooth.
LabelVolume postprocess(const LabelVolume& labels, const PostprocessConfig& cfg);

}  // namespace fuseval
