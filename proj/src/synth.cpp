#include "fuseval/synth.hpp"

#include <cmath>

#include "fuseval/errors.hpp"

namespace fuseval {

namespace {

void validate_spec(const SynthSpec& spec) {
  VolumeMeta meta{spec.dims, spec.spacing, ""};
  validate_meta(meta);
  if (spec.num_classes < 2 || spec.num_classes > 255) {
    throw SpecError("synth num_classes must be in [2, 255]");
  }
  if (!(spec.noise >= 0.0 && spec.noise < 0.5)) {
    throw SpecError("synth noise must be in [0, 0.5)");
  }
  if (spec.n_models < 1) throw SpecError("synth n_models must be >= 1");
  for (const SynthShape& s : spec.shapes) {
    if (s.class_index < 1 || s.class_index >= spec.num_classes) {
      throw SpecError("shape class " + std::to_string(s.class_index) +
                      " outside {1, ..., " + std::to_string(spec.num_classes - 1) + "}");
    }
    for (int a = 0; a < 3; ++a) {
      const double ext = s.kind == ShapeKind::Sphere ? s.size[0] : s.size[a];
      if (!(ext > 0.0)) throw SpecError("shape size must be > 0");
      if (s.center[a] - ext < -0.5 || s.center[a] + ext > double(spec.dims[a]) - 0.5) {
        throw SpecError("shape extends outside the volume on axis " + std::to_string(a));
      }
    }
  }
}

bool inside(const SynthShape& s, std::int64_t x, std::int64_t y, std::int64_t z) {
  const double dx = double(x) - s.center[0];
  const double dy = double(y) - s.center[1];
  const double dz = double(z) - s.center[2];
  if (s.kind == ShapeKind::Sphere) {
    const double r = s.size[0];
    return dx * dx + dy * dy + dz * dz <= r * r;
  }
  return std::abs(dx) <= s.size[0] && std::abs(dy) <= s.size[1] && std::abs(dz) <= s.size[2];
}

}  // namespace

SynthCase make_case(const SynthSpec& spec) {
  validate_spec(spec);
  const std::string case_id =
      spec.case_id.empty() ? "case_" + std::to_string(spec.seed) : spec.case_id;

  SynthCase out;
  out.gt.meta = {spec.dims, spec.spacing, case_id};
  out.gt.num_classes = spec.num_classes;
  out.gt.voxels.assign(out.gt.meta.voxel_count(), 0);

  std::size_t idx = 0;
  for (std::int64_t z = 0; z < spec.dims[2]; ++z) {
    for (std::int64_t y = 0; y < spec.dims[1]; ++y) {
      for (std::int64_t x = 0; x < spec.dims[0]; ++x, ++idx) {
        for (const SynthShape& s : spec.shapes) {  // later shapes overwrite
          if (inside(s, x, y, z)) out.gt.voxels[idx] = static_cast<std::uint8_t>(s.class_index);
        }
      }
    }
  }

  const std::size_t nvox = out.gt.meta.voxel_count();
  const int classes = spec.num_classes;
  out.members.reserve(static_cast<std::size_t>(spec.n_models));
  for (int m = 0; m < spec.n_models; ++m) {
    // Per-member derived seed so members can be generated independently.
    SplitMix64 rng(SplitMix64(spec.seed + 0x51ed270b * std::uint64_t(m + 1)).next());

    ProbVolume member;
    member.meta = out.gt.meta;
    member.channels = classes;
    member.probs.assign(nvox * static_cast<std::size_t>(classes), 0.0f);

    for (std::size_t i = 0; i < nvox; ++i) {
      const int truth = out.gt.voxels[i];
      if (spec.noise > 0.0 && rng.uniform() < spec.noise) {
        // Soft vote for a random class; weak enough that two corrupted
        // members cannot outvote one clean member.
        const int vote = static_cast<int>(rng.below(std::uint64_t(classes)));
        const float rest = 0.45f / float(classes - 1);
        for (int c = 0; c < classes; ++c) {
          member.probs[static_cast<std::size_t>(c) * nvox + i] = c == vote ? 0.55f : rest;
        }
      } else {
        double sum = 0.0;
        for (int c = 0; c < classes; ++c) {
          const double jitter = spec.noise > 0.0 ? spec.noise * 0.1 * rng.uniform() : 0.0;
          const double v = (c == truth ? 1.0 : 0.0) + jitter;
          member.probs[static_cast<std::size_t>(c) * nvox + i] = static_cast<float>(v);
          sum += v;
        }
        for (int c = 0; c < classes; ++c) {
          const std::size_t j = static_cast<std::size_t>(c) * nvox + i;
          member.probs[j] = static_cast<float>(member.probs[j] / sum);
        }
      }
    }
    out.members.push_back(std::move(member));
  }
  return out;
}

}  // namespace fuseval
