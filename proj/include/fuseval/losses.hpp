#pragma once

#include <optional>
#include <vector>

#include "fuseval/components.hpp"
#include "fuseval/volume.hpp"

namespace fuseval {

// Clamp inside the cross-entropy log; keeps the loss finite on zero
// probabilities.
inline constexpr double kCrossEntropyClamp = 1e-7;

// Smoothing term in the soft dice / jaccard denominators.
inline constexpr double kOverlapSmooth = 1e-6;

// Parameters of the multi-scale structural similarity term. The defaults
// (7-voxel window, sigma 1.5, 3 dyadic scales, equal per-scale exponents)
// suit desk-scale volumes; scales are reduced automatically when the volume
// is too small for the requested pyramid.
struct MsSsimConfig {
  int window = 7;      // odd, >= 3
  double sigma = 1.5;  // gaussian window stddev, voxels
  int scales = 3;      // >= 1
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 1.0;
};

// Weights and component labeling for the blob loss. The component restriction
// (mask out other ground-truth components of the same class) is what makes
// the loss instance aware; it can be disabled for diagnostics.
struct BlobLossConfig {
  double alpha = 1.0;
  double beta = 1.0;
  Connectivity connectivity = Connectivity::Vertex26;
  bool include_background = false;  // treat class 0 blobs as lesions
  bool restrict_components = true;
};

// Per-term report of one loss evaluation. Optional members are filled only by
// the loss variants that compute them.
struct LossBreakdown {
  double total = 0.0;
  double cross_entropy = 0.0;
  std::vector<double> per_class_dice;
  std::optional<std::vector<double>> per_class_jaccard;
  std::optional<std::vector<double>> per_class_msssim;
  std::optional<double> blob_term;
  std::optional<double> global_term;
  // Foreground classes that contributed blob components; 0 flags a ground
  // truth with no lesions at all.
  std::optional<int> blob_class_count;
};

// Mean over voxels of -ln(p[voxel, g[voxel]]), clamped below.
double cross_entropy(const ProbVolume& p, const LabelVolume& g,
                     double clamp = kCrossEntropyClamp);

// Soft dice loss of one class: 1 - (2*sum(p_i*g_i)+s) / (sum(p_i)+sum(g_i)+s).
double dice_loss(const ProbVolume& p, const LabelVolume& g, int class_i,
                 double smooth = kOverlapSmooth);

// Soft jaccard loss: 1 - (sum(p_i*g_i)+s) / (sum(p_i)+sum(g_i)-sum(p_i*g_i)+s).
double jaccard_loss(const ProbVolume& p, const LabelVolume& g, int class_i,
                    double smooth = kOverlapSmooth);

// 1 - MS-SSIM between the class-i probability channel and its one-hot ground
// truth channel.
double ms_ssim_loss(const ProbVolume& p, const LabelVolume& g, int class_i,
                    const MsSsimConfig& cfg);

// Cross-entropy plus the per-class dice losses averaged over all classes,
// background included.
LossBreakdown ce_dice_loss(const ProbVolume& p, const LabelVolume& g);

// Cross-entropy plus the per-class (ms-ssim + jaccard) losses averaged over
// all classes, background included.
LossBreakdown basnet_hybrid_loss(const ProbVolume& p, const LabelVolume& g,
                                 const MsSsimConfig& cfg);

// Hybrid loss restricted to an inclusion mask; excluded voxels drop out of
// the cross-entropy mean and the overlap sums, and are zeroed in both
// ms-ssim inputs. This is the per-component evaluation behind the blob term.
LossBreakdown basnet_hybrid_loss_masked(const ProbVolume& p, const LabelVolume& g,
                                        const MsSsimConfig& cfg, const Mask& include);

// alpha * hybrid(p, g) + beta * mean over foreground classes of the mean
// per-ground-truth-component hybrid loss on component-restricted pairs.
// Classes without components are excluded from the class average; a ground
// truth with no components at all yields blob_term = 0.
LossBreakdown blob_loss(const ProbVolume& p, const LabelVolume& g,
                        const BlobLossConfig& cfg, const MsSsimConfig& ms);

// MS-SSIM index between two scalar fields over the same grid, in [0, 1] up
// to the stability constants. Exposed for direct use and for the loss above.
double ms_ssim_index(const float* a, const float* b, const std::array<std::int64_t, 3>& dims,
                     const MsSsimConfig& cfg);

// Number of pyramid scales actually usable for the given dims (>= 1, or a
// ConfigError when even the first scale does not fit the window).
int ms_ssim_effective_scales(const std::array<std::int64_t, 3>& dims, const MsSsimConfig& cfg);

}  // namespace fuseval
