#include "fuseval/components.hpp"

#include <algorithm>
#include <deque>
#include <numeric>

#include "fuseval/errors.hpp"

namespace fuseval {

const char* to_string(Connectivity c) {
  switch (c) {
    case Connectivity::Face6: return "face6";
    case Connectivity::Edge18: return "edge18";
    case Connectivity::Vertex26: return "vertex26";
  }
  return "?";
}

Connectivity connectivity_from_string(const std::string& s) {
  if (s == "face6" || s == "6") return Connectivity::Face6;
  if (s == "edge18" || s == "18") return Connectivity::Edge18;
  if (s == "vertex26" || s == "26") return Connectivity::Vertex26;
  throw ConfigError("unknown connectivity '" + s + "' (expected face6, edge18 or vertex26)");
}

namespace {

std::vector<NeighborOffset> build_offsets(Connectivity c) {
  std::vector<NeighborOffset> out;
  for (std::int8_t dz = -1; dz <= 1; ++dz) {
    for (std::int8_t dy = -1; dy <= 1; ++dy) {
      for (std::int8_t dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0 && dz == 0) continue;
        const int manhattan = std::abs(dx) + std::abs(dy) + std::abs(dz);
        if (c == Connectivity::Face6 && manhattan > 1) continue;
        if (c == Connectivity::Edge18 && manhattan > 2) continue;
        out.push_back({dx, dy, dz});
      }
    }
  }
  return out;
}

}  // namespace

const std::vector<NeighborOffset>& neighbor_offsets(Connectivity c) {
  static const std::vector<NeighborOffset> face6 = build_offsets(Connectivity::Face6);
  static const std::vector<NeighborOffset> edge18 = build_offsets(Connectivity::Edge18);
  static const std::vector<NeighborOffset> vertex26 = build_offsets(Connectivity::Vertex26);
  switch (c) {
    case Connectivity::Face6: return face6;
    case Connectivity::Edge18: return edge18;
    case Connectivity::Vertex26: return vertex26;
  }
  return vertex26;
}

namespace {

// Union-find over provisional labels with path halving.
struct DisjointSet {
  std::vector<std::int32_t> parent;

  std::int32_t make() {
    parent.push_back(static_cast<std::int32_t>(parent.size()));
    return parent.back();
  }

  std::int32_t find(std::int32_t a) {
    while (parent[a] != a) {
      parent[a] = parent[parent[a]];
      a = parent[a];
    }
    return a;
  }

  void unite(std::int32_t a, std::int32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a < b) parent[b] = a; else parent[a] = b;
  }
};

}  // namespace

ComponentMap connected_components(const Mask& mask, Connectivity conn) {
  validate_meta(mask.meta);
  if (mask.v.size() != mask.meta.voxel_count()) {
    throw ShapeError("mask buffer size does not match dims");
  }
  const auto [nx, ny, nz] = mask.meta.dims;

  // Causal half of the neighborhood: neighbors already visited in scan order.
  std::vector<NeighborOffset> causal;
  for (const auto& o : neighbor_offsets(conn)) {
    if (o.dz < 0 || (o.dz == 0 && o.dy < 0) || (o.dz == 0 && o.dy == 0 && o.dx < 0)) {
      causal.push_back(o);
    }
  }

  ComponentMap cm;
  cm.meta = mask.meta;
  cm.ids.assign(mask.v.size(), 0);

  DisjointSet ds;
  ds.make();  // reserve 0 for background

  std::vector<std::int32_t> provisional(mask.v.size(), 0);
  std::size_t idx = 0;
  for (std::int64_t z = 0; z < nz; ++z) {
    for (std::int64_t y = 0; y < ny; ++y) {
      for (std::int64_t x = 0; x < nx; ++x, ++idx) {
        if (!mask.v[idx]) continue;
        std::int32_t label = 0;
        for (const auto& o : causal) {
          const std::int64_t px = x + o.dx, py = y + o.dy, pz = z + o.dz;
          if (px < 0 || py < 0 || pz < 0 || px >= nx || py >= ny || pz >= nz) continue;
          const std::int32_t nb = provisional[linear_index(mask.meta, px, py, pz)];
          if (nb == 0) continue;
          if (label == 0) {
            label = nb;
          } else {
            ds.unite(label, nb);
          }
        }
        if (label == 0) label = ds.make();
        provisional[idx] = label;
      }
    }
  }

  // Second pass: map roots to contiguous ids in first-encounter scan order.
  std::vector<std::int32_t> root_to_id(ds.parent.size(), 0);
  std::int32_t next_id = 0;
  for (std::size_t i = 0; i < mask.v.size(); ++i) {
    if (!provisional[i]) continue;
    const std::int32_t root = ds.find(provisional[i]);
    if (root_to_id[root] == 0) root_to_id[root] = ++next_id;
    cm.ids[i] = root_to_id[root];
  }
  cm.count = next_id;
  return cm;
}

std::vector<ComponentSize> component_sizes(const ComponentMap& cm) {
  std::vector<std::size_t> counts(static_cast<std::size_t>(cm.count) + 1, 0);
  for (std::int32_t id : cm.ids) {
    if (id > 0) ++counts[static_cast<std::size_t>(id)];
  }
  const double vox_mm3 = cm.meta.voxel_volume_mm3();
  std::vector<ComponentSize> out;
  out.reserve(static_cast<std::size_t>(cm.count));
  for (std::int32_t id = 1; id <= cm.count; ++id) {
    const std::size_t n = counts[static_cast<std::size_t>(id)];
    out.push_back({id, n, static_cast<double>(n) * vox_mm3});
  }
  return out;
}

Mask component_mask(const ComponentMap& cm, std::int32_t id) {
  Mask m;
  m.meta = cm.meta;
  m.v.resize(cm.ids.size());
  for (std::size_t i = 0; i < cm.ids.size(); ++i) m.v[i] = cm.ids[i] == id ? 1 : 0;
  return m;
}

Mask dilate(const Mask& mask, int iterations, Connectivity conn) {
  if (iterations < 0) throw PreconditionError("dilate: iterations must be >= 0");
  const auto [nx, ny, nz] = mask.meta.dims;
  const auto& offsets = neighbor_offsets(conn);

  Mask cur = mask;
  for (int it = 0; it < iterations; ++it) {
    Mask next = cur;
    std::size_t idx = 0;
    for (std::int64_t z = 0; z < nz; ++z) {
      for (std::int64_t y = 0; y < ny; ++y) {
        for (std::int64_t x = 0; x < nx; ++x, ++idx) {
          if (!cur.v[idx]) continue;
          for (const auto& o : offsets) {
            const std::int64_t px = x + o.dx, py = y + o.dy, pz = z + o.dz;
            if (px < 0 || py < 0 || pz < 0 || px >= nx || py >= ny || pz >= nz) continue;
            next.v[linear_index(mask.meta, px, py, pz)] = 1;
          }
        }
      }
    }
    cur = std::move(next);
  }
  return cur;
}

Mask erode(const Mask& mask, int iterations, Connectivity conn) {
  if (iterations < 0) throw PreconditionError("erode: iterations must be >= 0");
  const auto [nx, ny, nz] = mask.meta.dims;
  const auto& offsets = neighbor_offsets(conn);

  Mask cur = mask;
  for (int it = 0; it < iterations; ++it) {
    Mask next = cur;
    std::size_t idx = 0;
    for (std::int64_t z = 0; z < nz; ++z) {
      for (std::int64_t y = 0; y < ny; ++y) {
        for (std::int64_t x = 0; x < nx; ++x, ++idx) {
          if (!cur.v[idx]) continue;
          bool keep = true;
          for (const auto& o : offsets) {
            const std::int64_t px = x + o.dx, py = y + o.dy, pz = z + o.dz;
            // Out-of-volume counts as background, so the border erodes.
            if (px < 0 || py < 0 || pz < 0 || px >= nx || py >= ny || pz >= nz ||
                !cur.v[linear_index(mask.meta, px, py, pz)]) {
              keep = false;
              break;
            }
          }
          if (!keep) next.v[idx] = 0;
        }
      }
    }
    cur = std::move(next);
  }
  return cur;
}

Mask morph_reconstruct(const Mask& marker, const Mask& limit, Connectivity conn) {
  require_same_grid(marker.meta, limit.meta, "morph_reconstruct");
  for (std::size_t i = 0; i < marker.v.size(); ++i) {
    if (marker.v[i] && !limit.v[i]) {
      throw PreconditionError("morph_reconstruct: marker is not a subset of limit");
    }
  }
  const auto [nx, ny, nz] = marker.meta.dims;
  const auto& offsets = neighbor_offsets(conn);

  // Flood from the marker within the limit; reaches exactly the limit
  // components that intersect the marker.
  Mask out;
  out.meta = marker.meta;
  out.v = marker.v;
  std::deque<std::array<std::int64_t, 3>> queue;
  std::size_t idx = 0;
  for (std::int64_t z = 0; z < nz; ++z) {
    for (std::int64_t y = 0; y < ny; ++y) {
      for (std::int64_t x = 0; x < nx; ++x, ++idx) {
        if (marker.v[idx]) queue.push_back({x, y, z});
      }
    }
  }
  while (!queue.empty()) {
    const auto [x, y, z] = queue.front();
    queue.pop_front();
    for (const auto& o : offsets) {
      const std::int64_t px = x + o.dx, py = y + o.dy, pz = z + o.dz;
      if (px < 0 || py < 0 || pz < 0 || px >= nx || py >= ny || pz >= nz) continue;
      const std::size_t p = linear_index(marker.meta, px, py, pz);
      if (limit.v[p] && !out.v[p]) {
        out.v[p] = 1;
        queue.push_back({px, py, pz});
      }
    }
  }
  return out;
}

}  // namespace fuseval
