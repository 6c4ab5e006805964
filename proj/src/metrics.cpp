#include "fuseval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fuseval/errors.hpp"

namespace fuseval {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kBruteForceLimit = 10000;  // boundary voxels

struct Point {
  std::int64_t x, y, z;
};

std::vector<Point> set_points(const Mask& m) {
  std::vector<Point> pts;
  std::size_t idx = 0;
  for (std::int64_t z = 0; z < m.meta.dims[2]; ++z) {
    for (std::int64_t y = 0; y < m.meta.dims[1]; ++y) {
      for (std::int64_t x = 0; x < m.meta.dims[0]; ++x, ++idx) {
        if (m.v[idx]) pts.push_back({x, y, z});
      }
    }
  }
  return pts;
}

// Sorted-input linear-interpolation percentile (numpy default convention).
double percentile_sorted(const std::vector<double>& sorted, double q) {
  const std::size_t n = sorted.size();
  if (n == 1) return sorted[0];
  const double rank = q / 100.0 * double(n - 1);
  const std::size_t lo = static_cast<std::size_t>(rank);
  const double frac = rank - double(lo);
  if (lo + 1 >= n) return sorted[n - 1];
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

std::vector<double> directed_distances_brute(const std::vector<Point>& from,
                                             const std::vector<Point>& to,
                                             const std::array<double, 3>& spacing) {
  std::vector<double> out;
  out.reserve(from.size());
  for (const Point& p : from) {
    double best = kInf;
    for (const Point& q : to) {
      const double dx = double(p.x - q.x) * spacing[0];
      const double dy = double(p.y - q.y) * spacing[1];
      const double dz = double(p.z - q.z) * spacing[2];
      best = std::min(best, dx * dx + dy * dy + dz * dz);
    }
    out.push_back(std::sqrt(best));
  }
  return out;
}

// 1D lower envelope of parabolas f(j) + ((i-j)*s)^2 along one axis.
void edt_pass(std::vector<double>& field, const std::array<std::int64_t, 3>& dims, int axis,
              double spacing) {
  const std::int64_t n[3] = {dims[0], dims[1], dims[2]};
  const std::int64_t stride[3] = {1, dims[0], dims[0] * dims[1]};
  const std::int64_t len = n[axis];
  const std::int64_t s = stride[axis];
  const int oa = axis == 0 ? 1 : 0;
  const int ob = axis == 2 ? 1 : 2;

  std::vector<double> f(static_cast<std::size_t>(len));
  std::vector<std::int64_t> v(static_cast<std::size_t>(len));
  std::vector<double> z(static_cast<std::size_t>(len) + 1);
  const double s2 = spacing * spacing;

  for (std::int64_t b = 0; b < n[ob]; ++b) {
    for (std::int64_t a = 0; a < n[oa]; ++a) {
      const std::int64_t base = a * stride[oa] + b * stride[ob];
      for (std::int64_t i = 0; i < len; ++i) f[static_cast<std::size_t>(i)] = field[static_cast<std::size_t>(base + i * s)];

      int k = 0;
      v[0] = 0;
      z[0] = -kInf;
      z[1] = kInf;
      for (std::int64_t q = 1; q < len; ++q) {
        if (f[static_cast<std::size_t>(q)] == kInf) continue;
        double inter;
        while (true) {
          const std::int64_t p = v[static_cast<std::size_t>(k)];
          if (f[static_cast<std::size_t>(p)] == kInf) {
            // Parabola at p is unreachable; replace it outright.
            if (k == 0) {
              inter = -kInf;
              break;
            }
            --k;
            continue;
          }
          inter = (f[static_cast<std::size_t>(q)] - f[static_cast<std::size_t>(p)] +
                   s2 * double(q * q - p * p)) /
                  (2.0 * spacing * double(q - p));
          if (inter <= z[static_cast<std::size_t>(k)] && k > 0) {
            --k;
          } else {
            break;
          }
        }
        if (f[static_cast<std::size_t>(v[static_cast<std::size_t>(k)])] == kInf) {
          v[static_cast<std::size_t>(k)] = q;
          z[static_cast<std::size_t>(k)] = -kInf;
          z[static_cast<std::size_t>(k) + 1] = kInf;
        } else {
          ++k;
          v[static_cast<std::size_t>(k)] = q;
          z[static_cast<std::size_t>(k)] = inter;
          z[static_cast<std::size_t>(k) + 1] = kInf;
        }
      }

      k = 0;
      for (std::int64_t i = 0; i < len; ++i) {
        const double x = double(i) * spacing;
        while (z[static_cast<std::size_t>(k) + 1] < x) ++k;
        const std::int64_t p = v[static_cast<std::size_t>(k)];
        const double fp = f[static_cast<std::size_t>(p)];
        const double dx = x - double(p) * spacing;
        field[static_cast<std::size_t>(base + i * s)] = fp == kInf ? kInf : fp + dx * dx;
      }
    }
  }
}

std::vector<double> directed_distances_edt(const std::vector<Point>& from, const Mask& to) {
  const std::vector<double> field = squared_distance_field(to);
  std::vector<double> out;
  out.reserve(from.size());
  for (const Point& p : from) {
    out.push_back(std::sqrt(field[linear_index(to.meta, p.x, p.y, p.z)]));
  }
  return out;
}

double directed_percentile(const std::vector<Point>& from_pts, const Mask& to_mask,
                           const std::vector<Point>& to_pts, DistanceMethod method) {
  std::vector<double> d;
  const bool brute = method == DistanceMethod::BruteForce ||
                     (method == DistanceMethod::Auto &&
                      from_pts.size() <= kBruteForceLimit && to_pts.size() <= kBruteForceLimit);
  if (brute) {
    d = directed_distances_brute(from_pts, to_pts, to_mask.meta.spacing);
  } else {
    d = directed_distances_edt(from_pts, to_mask);
  }
  std::sort(d.begin(), d.end());
  return percentile_sorted(d, 95.0);
}

}  // namespace

void validate_lesionwise_config(const LesionwiseConfig& cfg) {
  if (cfg.match_dilation_iters < 0) {
    throw ConfigError("lesionwise.match_dilation_iters must be >= 0");
  }
  if (!std::isfinite(cfg.fp_dice_penalty) || !std::isfinite(cfg.fn_dice_penalty)) {
    throw ConfigError("lesionwise dice penalties must be finite");
  }
  if (!(cfg.hd95_penalty > 0.0) || !std::isfinite(cfg.hd95_penalty)) {
    throw ConfigError("lesionwise.hd95_penalty must be finite and > 0");
  }
}

double dice_score(const Mask& pred, const Mask& gt) {
  require_same_grid(pred.meta, gt.meta, "dice_score");
  std::size_t inter = 0, np = 0, ng = 0;
  for (std::size_t i = 0; i < pred.v.size(); ++i) {
    const bool a = pred.v[i] != 0, b = gt.v[i] != 0;
    inter += a && b;
    np += a;
    ng += b;
  }
  if (np + ng == 0) return 1.0;
  return 2.0 * double(inter) / double(np + ng);
}

Mask boundary_voxels(const Mask& m) {
  const auto [nx, ny, nz] = m.meta.dims;
  Mask out;
  out.meta = m.meta;
  out.v.assign(m.v.size(), 0);
  const auto& offsets = neighbor_offsets(Connectivity::Face6);
  std::size_t idx = 0;
  for (std::int64_t z = 0; z < nz; ++z) {
    for (std::int64_t y = 0; y < ny; ++y) {
      for (std::int64_t x = 0; x < nx; ++x, ++idx) {
        if (!m.v[idx]) continue;
        for (const auto& o : offsets) {
          const std::int64_t px = x + o.dx, py = y + o.dy, pz = z + o.dz;
          if (px < 0 || py < 0 || pz < 0 || px >= nx || py >= ny || pz >= nz ||
              !m.v[linear_index(m.meta, px, py, pz)]) {
            out.v[idx] = 1;
            break;
          }
        }
      }
    }
  }
  return out;
}

std::vector<double> squared_distance_field(const Mask& features) {
  std::vector<double> field(features.v.size());
  for (std::size_t i = 0; i < field.size(); ++i) field[i] = features.v[i] ? 0.0 : kInf;
  for (int axis = 0; axis < 3; ++axis) {
    edt_pass(field, features.meta.dims, axis, features.meta.spacing[axis]);
  }
  return field;
}

double hd95(const Mask& pred, const Mask& gt, DistanceMethod method) {
  require_same_grid(pred.meta, gt.meta, "hd95");
  const std::size_t np = pred.count_set(), ng = gt.count_set();
  if (np == 0 && ng == 0) return 0.0;
  if (np == 0 || ng == 0) return kInf;

  const Mask pb = boundary_voxels(pred);
  const Mask gb = boundary_voxels(gt);
  const std::vector<Point> ppts = set_points(pb);
  const std::vector<Point> gpts = set_points(gb);
  const double fwd = directed_percentile(ppts, gb, gpts, method);
  const double bwd = directed_percentile(gpts, pb, ppts, method);
  return std::max(fwd, bwd);
}

LesionwiseResult lesion_wise(const Mask& pred, const Mask& gt, const LesionwiseConfig& cfg) {
  require_same_grid(pred.meta, gt.meta, "lesion_wise");
  validate_lesionwise_config(cfg);

  const ComponentMap gt_cm = connected_components(gt, cfg.match_connectivity);
  const ComponentMap pred_cm = connected_components(pred, cfg.match_connectivity);

  auto kept_ids = [&](const ComponentMap& cm) {
    std::vector<std::int32_t> ids;
    for (const ComponentSize& s : component_sizes(cm)) {
      if (s.voxel_count >= cfg.min_lesion_voxels) ids.push_back(s.id);
    }
    return ids;
  };
  const std::vector<std::int32_t> gt_ids = kept_ids(gt_cm);
  const std::vector<std::int32_t> pred_ids = kept_ids(pred_cm);

  LesionwiseResult res;
  if (gt_ids.empty() && pred_ids.empty()) {
    res.lesion_wise_dice = 1.0;
    res.lesion_wise_hd95 = 0.0;
    return res;
  }

  // Match by overlap with the dilated ground-truth lesion. One prediction
  // component may support several ground-truth lesions.
  std::vector<char> pred_matched(pred_ids.size(), 0);
  std::vector<double> dice_terms, hd_terms;
  for (std::int32_t gid : gt_ids) {
    const Mask lesion = component_mask(gt_cm, gid);
    const Mask dilated = dilate(lesion, cfg.match_dilation_iters, cfg.match_connectivity);

    std::vector<char> overlapped(static_cast<std::size_t>(pred_cm.count) + 1, 0);
    for (std::size_t i = 0; i < dilated.v.size(); ++i) {
      if (dilated.v[i] && pred_cm.ids[i] > 0) overlapped[static_cast<std::size_t>(pred_cm.ids[i])] = 1;
    }
    std::vector<char> in_union(static_cast<std::size_t>(pred_cm.count) + 1, 0);
    bool any = false;
    for (std::size_t pi = 0; pi < pred_ids.size(); ++pi) {
      if (!overlapped[static_cast<std::size_t>(pred_ids[pi])]) continue;
      pred_matched[pi] = 1;
      in_union[static_cast<std::size_t>(pred_ids[pi])] = 1;
      any = true;
    }
    if (any) {
      Mask matched_union;
      matched_union.meta = pred.meta;
      matched_union.v.assign(pred.v.size(), 0);
      for (std::size_t i = 0; i < matched_union.v.size(); ++i) {
        if (pred_cm.ids[i] > 0 && in_union[static_cast<std::size_t>(pred_cm.ids[i])]) {
          matched_union.v[i] = 1;
        }
      }
      ++res.tp;
      dice_terms.push_back(dice_score(matched_union, lesion));
      hd_terms.push_back(hd95(matched_union, lesion));
    } else {
      ++res.fn;
    }
  }
  for (char m : pred_matched) {
    if (!m) ++res.fp;
  }

  for (int i = 0; i < res.fp; ++i) {
    dice_terms.push_back(cfg.fp_dice_penalty);
    hd_terms.push_back(cfg.hd95_penalty);
  }
  for (int i = 0; i < res.fn; ++i) {
    dice_terms.push_back(cfg.fn_dice_penalty);
    hd_terms.push_back(cfg.hd95_penalty);
  }

  double dsum = 0.0, hsum = 0.0;
  for (double d : dice_terms) dsum += d;
  for (double h : hd_terms) hsum += h;
  res.lesion_wise_dice = dsum / double(dice_terms.size());
  res.lesion_wise_hd95 = hsum / double(hd_terms.size());
  return res;
}

std::vector<MetricReport> evaluate_case(const LabelVolume& pred, const LabelVolume& gt,
                                        const std::vector<RegionSpec>& regions,
                                        const LesionwiseConfig& cfg) {
  require_same_grid(pred.meta, gt.meta, "evaluate_case");
  std::vector<MetricReport> out;
  out.reserve(regions.size());
  for (const RegionSpec& region : regions) {
    const Mask pm = region_mask(pred, region);
    const Mask gm = region_mask(gt, region);

    MetricReport r;
    r.case_id = gt.meta.case_id;
    r.region = region.name;
    r.dice = dice_score(pm, gm);
    const double hd = hd95(pm, gm);
    r.hd95 = std::isinf(hd) ? cfg.hd95_penalty : hd;
    const LesionwiseResult lw = lesion_wise(pm, gm, cfg);
    r.lesion_wise_dice = lw.lesion_wise_dice;
    r.lesion_wise_hd95 = lw.lesion_wise_hd95;
    r.tp = lw.tp;
    r.fp = lw.fp;
    r.fn = lw.fn;
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace fuseval
