#include "fuseval/losses.hpp"

#include <algorithm>
#include <cmath>

#include "fuseval/errors.hpp"

namespace fuseval {

namespace {

void check_pair(const ProbVolume& p, const LabelVolume& g) {
  require_same_grid(p.meta, g.meta, "loss");
  if (p.channels != g.num_classes) {
    throw ShapeError("loss: prediction has " + std::to_string(p.channels) +
                     " channels but ground truth has " + std::to_string(g.num_classes) +
                     " classes");
  }
  for (std::uint8_t v : g.voxels) {
    if (v >= g.num_classes) throw DataError("ground-truth label out of range");
  }
}

// include == nullptr means every voxel participates.
double cross_entropy_impl(const ProbVolume& p, const LabelVolume& g, double clamp,
                          const std::uint8_t* include) {
  const std::size_t nvox = p.meta.voxel_count();
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < nvox; ++i) {
    if (include && !include[i]) continue;
    const double prob = p.probs[static_cast<std::size_t>(g.voxels[i]) * nvox + i];
    sum += -std::log(std::max(prob, clamp));
    ++n;
  }
  return n == 0 ? 0.0 : sum / double(n);
}

struct OverlapSums {
  double inter = 0.0;  // sum p_i * g_i
  double pred = 0.0;   // sum p_i
  double truth = 0.0;  // sum g_i
};

OverlapSums overlap_sums(const ProbVolume& p, const LabelVolume& g, int class_i,
                         const std::uint8_t* include) {
  const std::size_t nvox = p.meta.voxel_count();
  const float* chan = p.channel(class_i);
  OverlapSums s;
  for (std::size_t i = 0; i < nvox; ++i) {
    if (include && !include[i]) continue;
    const double pv = chan[i];
    s.pred += pv;
    if (g.voxels[i] == class_i) {
      s.truth += 1.0;
      s.inter += pv;
    }
  }
  return s;
}

double dice_from_sums(const OverlapSums& s, double smooth) {
  return 1.0 - (2.0 * s.inter + smooth) / (s.pred + s.truth + smooth);
}

double jaccard_from_sums(const OverlapSums& s, double smooth) {
  return 1.0 - (s.inter + smooth) / (s.pred + s.truth - s.inter + smooth);
}

double ms_ssim_loss_impl(const ProbVolume& p, const LabelVolume& g, int class_i,
                         const MsSsimConfig& cfg, const std::uint8_t* include) {
  const std::size_t nvox = p.meta.voxel_count();
  const float* chan = p.channel(class_i);
  std::vector<float> pred(nvox), truth(nvox);
  for (std::size_t i = 0; i < nvox; ++i) {
    const bool in = !include || include[i];
    pred[i] = in ? chan[i] : 0.0f;
    truth[i] = (in && g.voxels[i] == class_i) ? 1.0f : 0.0f;
  }
  return 1.0 - ms_ssim_index(pred.data(), truth.data(), p.meta.dims, cfg);
}

LossBreakdown hybrid_impl(const ProbVolume& p, const LabelVolume& g, const MsSsimConfig& cfg,
                          const std::uint8_t* include) {
  check_pair(p, g);
  const int classes = p.channels;
  LossBreakdown out;
  out.cross_entropy = cross_entropy_impl(p, g, kCrossEntropyClamp, include);
  out.per_class_dice.resize(static_cast<std::size_t>(classes));
  out.per_class_jaccard.emplace(static_cast<std::size_t>(classes), 0.0);
  out.per_class_msssim.emplace(static_cast<std::size_t>(classes), 0.0);
  double acc = 0.0;
  for (int c = 0; c < classes; ++c) {
    const OverlapSums s = overlap_sums(p, g, c, include);
    out.per_class_dice[static_cast<std::size_t>(c)] = dice_from_sums(s, kOverlapSmooth);
    const double jac = jaccard_from_sums(s, kOverlapSmooth);
    const double ms = ms_ssim_loss_impl(p, g, c, cfg, include);
    (*out.per_class_jaccard)[static_cast<std::size_t>(c)] = jac;
    (*out.per_class_msssim)[static_cast<std::size_t>(c)] = ms;
    acc += ms + jac;
  }
  out.total = out.cross_entropy + acc / double(classes);
  return out;
}

}  // namespace

double cross_entropy(const ProbVolume& p, const LabelVolume& g, double clamp) {
  check_pair(p, g);
  return cross_entropy_impl(p, g, clamp, nullptr);
}

double dice_loss(const ProbVolume& p, const LabelVolume& g, int class_i, double smooth) {
  check_pair(p, g);
  return dice_from_sums(overlap_sums(p, g, class_i, nullptr), smooth);
}

double jaccard_loss(const ProbVolume& p, const LabelVolume& g, int class_i, double smooth) {
  check_pair(p, g);
  return jaccard_from_sums(overlap_sums(p, g, class_i, nullptr), smooth);
}

double ms_ssim_loss(const ProbVolume& p, const LabelVolume& g, int class_i,
                    const MsSsimConfig& cfg) {
  check_pair(p, g);
  return ms_ssim_loss_impl(p, g, class_i, cfg, nullptr);
}

LossBreakdown ce_dice_loss(const ProbVolume& p, const LabelVolume& g) {
  check_pair(p, g);
  const int classes = p.channels;
  LossBreakdown out;
  out.cross_entropy = cross_entropy_impl(p, g, kCrossEntropyClamp, nullptr);
  out.per_class_dice.resize(static_cast<std::size_t>(classes));
  double acc = 0.0;
  for (int c = 0; c < classes; ++c) {
    const double d = dice_from_sums(overlap_sums(p, g, c, nullptr), kOverlapSmooth);
    out.per_class_dice[static_cast<std::size_t>(c)] = d;
    acc += d;
  }
  out.total = out.cross_entropy + acc / double(classes);
  return out;
}

LossBreakdown basnet_hybrid_loss(const ProbVolume& p, const LabelVolume& g,
                                 const MsSsimConfig& cfg) {
  return hybrid_impl(p, g, cfg, nullptr);
}

LossBreakdown basnet_hybrid_loss_masked(const ProbVolume& p, const LabelVolume& g,
                                        const MsSsimConfig& cfg, const Mask& include) {
  require_same_grid(p.meta, include.meta, "masked loss");
  return hybrid_impl(p, g, cfg, include.v.data());
}

LossBreakdown blob_loss(const ProbVolume& p, const LabelVolume& g, const BlobLossConfig& cfg,
                        const MsSsimConfig& ms) {
  check_pair(p, g);
  if (!(cfg.alpha >= 0.0) || !(cfg.beta >= 0.0) || cfg.alpha + cfg.beta <= 0.0) {
    throw ConfigError("blob loss weights must be >= 0 with alpha + beta > 0");
  }
  const std::size_t nvox = p.meta.voxel_count();

  LossBreakdown global = hybrid_impl(p, g, ms, nullptr);

  // Per-class component average, then mean over classes that have components.
  double class_sum = 0.0;
  int classes_with_components = 0;
  const int first_class = cfg.include_background ? 0 : 1;
  for (int c = first_class; c < p.channels; ++c) {
    Mask class_mask;
    class_mask.meta = g.meta;
    class_mask.v.resize(nvox);
    for (std::size_t i = 0; i < nvox; ++i) class_mask.v[i] = g.voxels[i] == c ? 1 : 0;
    const ComponentMap cm = connected_components(class_mask, cfg.connectivity);
    if (cm.count == 0) continue;

    double comp_sum = 0.0;
    if (cfg.restrict_components) {
      Mask include;
      include.meta = g.meta;
      include.v.resize(nvox);
      for (std::int32_t id = 1; id <= cm.count; ++id) {
        // Keep this component plus everything outside the class's components.
        for (std::size_t i = 0; i < nvox; ++i) {
          include.v[i] = (cm.ids[i] == 0 || cm.ids[i] == id) ? 1 : 0;
        }
        comp_sum += hybrid_impl(p, g, ms, include.v.data()).total;
      }
    } else {
      for (std::int32_t id = 1; id <= cm.count; ++id) {
        comp_sum += global.total;
      }
    }
    class_sum += comp_sum / double(cm.count);
    ++classes_with_components;
  }

  LossBreakdown out = global;
  out.global_term = global.total;
  out.blob_term = classes_with_components > 0 ? class_sum / double(classes_with_components) : 0.0;
  out.blob_class_count = classes_with_components;
  out.total = cfg.alpha * *out.global_term + cfg.beta * *out.blob_term;
  return out;
}

}  // namespace fuseval
