#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "fuseval/volume.hpp"

namespace fuseval {

// Voxel adjacency used for component labeling and morphology.
enum class Connectivity { Face6, Edge18, Vertex26 };

const char* to_string(Connectivity c);
Connectivity connectivity_from_string(const std::string& s);  // "face6" | "edge18" | "vertex26"

struct NeighborOffset {
  std::int8_t dx, dy, dz;
};

// Neighbor offsets for a connectivity, in fixed deterministic order.
const std::vector<NeighborOffset>& neighbor_offsets(Connectivity c);

// Dense component labeling: 0 = background, components numbered 1..count
// contiguously in first-encounter scan order (x fastest).
struct ComponentMap {
  VolumeMeta meta;
  std::vector<std::int32_t> ids;
  std::int32_t count = 0;
};

struct ComponentSize {
  std::int32_t id;
  std::size_t voxel_count;
  double volume_mm3;
};

// Two-pass union-find labeling. Two set voxels share an id iff a path of set
// voxels connects them under `conn`.
ComponentMap connected_components(const Mask& mask, Connectivity conn);

// Voxel counts and physical volumes per component, ordered by id.
std::vector<ComponentSize> component_sizes(const ComponentMap& cm);

// Binary mask of a single component.
Mask component_mask(const ComponentMap& cm, std::int32_t id);

// Iterated binary dilation; out-of-volume neighbors are treated as unset.
// iterations = 0 is the identity.
Mask dilate(const Mask& mask, int iterations, Connectivity conn);

// Iterated binary erosion, the dual of dilate with out-of-volume treated as
// background (so the volume border erodes).
Mask erode(const Mask& mask, int iterations, Connectivity conn);

// Morphological reconstruction by dilation: the union of connected components
// of `limit` that intersect `marker`. Requires marker to be a subset of limit.
Mask morph_reconstruct(const Mask& marker, const Mask& limit, Connectivity conn);

}  // namespace fuseval
