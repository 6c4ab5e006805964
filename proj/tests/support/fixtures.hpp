#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "fuseval/synth.hpp"
#include "fuseval/volume.hpp"

// Small builders shared by the test binaries. Randomness always goes through
// an explicit engine seeded by the caller, so every test is replayable.
namespace fixtures {

inline fuseval::VolumeMeta meta(std::int64_t nx, std::int64_t ny, std::int64_t nz,
                                double sx = 1.0, double sy = 1.0, double sz = 1.0) {
  fuseval::VolumeMeta m;
  m.dims = {nx, ny, nz};
  m.spacing = {sx, sy, sz};
  return m;
}

inline fuseval::Mask empty_mask(const fuseval::VolumeMeta& m) {
  return {m, std::vector<std::uint8_t>(m.voxel_count(), 0)};
}

inline fuseval::Mask full_mask(const fuseval::VolumeMeta& m) {
  return {m, std::vector<std::uint8_t>(m.voxel_count(), 1)};
}

inline void set(fuseval::Mask& m, std::int64_t x, std::int64_t y, std::int64_t z) {
  m.v[fuseval::linear_index(m.meta, x, y, z)] = 1;
}

// Half-open box [lo, hi) per axis.
inline void fill_box(fuseval::Mask& m, std::array<std::int64_t, 3> lo,
                     std::array<std::int64_t, 3> hi) {
  for (std::int64_t z = lo[2]; z < hi[2]; ++z)
    for (std::int64_t y = lo[1]; y < hi[1]; ++y)
      for (std::int64_t x = lo[0]; x < hi[0]; ++x) set(m, x, y, z);
}

inline void fill_box(fuseval::LabelVolume& l, std::array<std::int64_t, 3> lo,
                     std::array<std::int64_t, 3> hi, std::uint8_t label) {
  for (std::int64_t z = lo[2]; z < hi[2]; ++z)
    for (std::int64_t y = lo[1]; y < hi[1]; ++y)
      for (std::int64_t x = lo[0]; x < hi[0]; ++x)
        l.voxels[fuseval::linear_index(l.meta, x, y, z)] = label;
}

inline fuseval::Mask complement(const fuseval::Mask& m) {
  fuseval::Mask out = m;
  for (auto& v : out.v) v = v ? 0 : 1;
  return out;
}

// Clears the one-voxel shell at the volume border.
inline void clear_border(fuseval::Mask& m) {
  const auto& d = m.meta.dims;
  for (std::int64_t z = 0; z < d[2]; ++z)
    for (std::int64_t y = 0; y < d[1]; ++y)
      for (std::int64_t x = 0; x < d[0]; ++x)
        if (x == 0 || y == 0 || z == 0 || x == d[0] - 1 || y == d[1] - 1 || z == d[2] - 1)
          m.v[fuseval::linear_index(m.meta, x, y, z)] = 0;
}

inline fuseval::Mask random_mask(const fuseval::VolumeMeta& m, std::mt19937_64& rng,
                                 double fill = 0.5) {
  fuseval::Mask out = empty_mask(m);
  std::bernoulli_distribution bit(fill);
  for (auto& v : out.v) v = bit(rng) ? 1 : 0;
  return out;
}

inline fuseval::LabelVolume random_labels(const fuseval::VolumeMeta& m, int num_classes,
                                          std::mt19937_64& rng) {
  fuseval::LabelVolume l{m, num_classes, std::vector<std::uint8_t>(m.voxel_count(), 0)};
  std::uniform_int_distribution<int> cls(0, num_classes - 1);
  for (auto& v : l.voxels) v = static_cast<std::uint8_t>(cls(rng));
  return l;
}

inline fuseval::LabelVolume zero_labels(const fuseval::VolumeMeta& m, int num_classes = 4) {
  return {m, num_classes, std::vector<std::uint8_t>(m.voxel_count(), 0)};
}

// Random valid probability volume: positive channels normalized per voxel.
inline fuseval::ProbVolume random_probs(const fuseval::VolumeMeta& m, int channels,
                                        std::mt19937_64& rng) {
  fuseval::ProbVolume p{m, channels,
                        std::vector<float>(m.voxel_count() * static_cast<std::size_t>(channels),
                                           0.0f)};
  std::uniform_real_distribution<double> u(0.05, 1.0);
  const std::size_t n = m.voxel_count();
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    std::vector<double> raw(static_cast<std::size_t>(channels));
    for (int c = 0; c < channels; ++c) {
      raw[static_cast<std::size_t>(c)] = u(rng);
      sum += raw[static_cast<std::size_t>(c)];
    }
    for (int c = 0; c < channels; ++c) {
      p.channel(c)[i] = static_cast<float>(raw[static_cast<std::size_t>(c)] / sum);
    }
  }
  return p;
}

// Unique scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    auto base = std::filesystem::temp_directory_path();
    std::random_device rd;
    for (int attempt = 0; attempt < 64; ++attempt) {
      auto candidate = base / (tag + "-" + std::to_string(rd()));
      std::error_code ec;
      if (std::filesystem::create_directory(candidate, ec)) {
        path_ = candidate;
        return;
      }
    }
    throw std::runtime_error("could not create temp dir for tag " + tag);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace fixtures
