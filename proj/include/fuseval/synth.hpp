#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fuseval/volume.hpp"

namespace fuseval {

// SplitMix64: a fixed 64-bit mixing generator, bit-stable across platforms.
// Used for every synthetic fixture so identical seeds give identical bytes.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return double(next() >> 11) * 0x1.0p-53; }

  std::uint64_t below(std::uint64_t bound) { return next() % bound; }

 private:
  std::uint64_t state_;
};

enum class ShapeKind { Sphere, Box };

// One rasterized shape: a sphere (size[0] = radius, voxels) or an axis-aligned
// box (size = half-extents, voxels), centered at `center` in voxel
// coordinates.
struct SynthShape {
  int class_index = 1;
  ShapeKind kind = ShapeKind::Sphere;
  std::array<double, 3> center{0, 0, 0};
  std::array<double, 3> size{1, 1, 1};
};

struct SynthSpec {
  std::uint64_t seed = 0;
  std::array<std::int64_t, 3> dims{16, 16, 16};
  std::array<double, 3> spacing{1.0, 1.0, 1.0};
  int num_classes = 4;
  std::vector<SynthShape> shapes;
  double noise = 0.0;  // in [0, 0.5)
  int n_models = 1;
  std::string case_id;  // optional; defaults to "case_<seed>"
};

struct SynthCase {
  LabelVolume gt;
  std::vector<ProbVolume> members;
};

// Rasterizes the shapes into a ground truth (later shapes overwrite earlier)
// and derives n_models probability members: the one-hot ground truth with a
// fraction `noise` of voxels replaced by a soft vote for a random class plus
// a small jitter elsewhere. Fully determined by (seed, spec).
SynthCase make_case(const SynthSpec& spec);

}  // namespace fuseval
