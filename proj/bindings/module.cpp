#include <algorithm>
#include <array>
#include <cstring>
#include <optional>
#include <string>
#include <vector>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fuseval/components.hpp"
#include "fuseval/ensemble.hpp"
#include "fuseval/losses.hpp"
#include "fuseval/metrics.hpp"
#include "fuseval/nifti.hpp"
#include "fuseval/postprocess.hpp"
#include "fuseval/volume.hpp"

namespace py = pybind11;
using namespace fuseval;

namespace {

// Array conventions: label volumes and masks are (nx, ny, nz) uint8 arrays,
// probability volumes are (nx, ny, nz, C) float32 with channels last. Inputs
// of any layout or dtype are cast; internally everything is Fortran-ordered
// (x fastest), matching the NIfTI file order.
using ArrU8 = py::array_t<std::uint8_t, py::array::f_style | py::array::forcecast>;
using ArrF32 = py::array_t<float, py::array::f_style | py::array::forcecast>;

using Spacing = std::array<double, 3>;

VolumeMeta make_meta(std::array<std::int64_t, 3> dims, const Spacing& spacing,
                     std::string case_id) {
  VolumeMeta meta;
  meta.dims = dims;
  meta.spacing = spacing;
  meta.case_id = std::move(case_id);
  validate_meta(meta);
  return meta;
}

LabelVolume to_labels(const ArrU8& a, const Spacing& spacing, const std::string& case_id = {}) {
  if (a.ndim() != 3) throw ShapeError("label array must be 3-D (nx, ny, nz)");
  LabelVolume v;
  v.meta = make_meta({a.shape(0), a.shape(1), a.shape(2)}, spacing, case_id);
  v.voxels.assign(a.data(), a.data() + a.size());
  std::uint8_t max_label = 0;
  for (std::uint8_t l : v.voxels) max_label = std::max(max_label, l);
  v.num_classes = std::max(4, int(max_label) + 1);
  validate_labels(v);
  return v;
}

Mask to_mask(const ArrU8& a, const Spacing& spacing) {
  if (a.ndim() != 3) throw ShapeError("mask array must be 3-D (nx, ny, nz)");
  Mask m;
  m.meta = make_meta({a.shape(0), a.shape(1), a.shape(2)}, spacing, {});
  m.v.assign(a.data(), a.data() + a.size());
  for (auto& b : m.v) b = b ? 1 : 0;
  return m;
}

ProbVolume to_probs(const ArrF32& a, const Spacing& spacing, const std::string& case_id = {}) {
  if (a.ndim() != 4) throw ShapeError("probability array must be 4-D (nx, ny, nz, channels)");
  ProbVolume v;
  v.meta = make_meta({a.shape(0), a.shape(1), a.shape(2)}, spacing, case_id);
  v.channels = int(a.shape(3));
  v.probs.assign(a.data(), a.data() + a.size());
  validate_probs(v);
  return v;
}

template <typename T, typename Src>
py::array_t<T, py::array::f_style> spatial_array(const VolumeMeta& meta, const Src& src) {
  py::array_t<T, py::array::f_style> out(
      {py::ssize_t(meta.dims[0]), py::ssize_t(meta.dims[1]), py::ssize_t(meta.dims[2])});
  static_assert(sizeof(typename Src::value_type) == sizeof(T));
  std::memcpy(out.mutable_data(), src.data(), src.size() * sizeof(T));
  return out;
}

py::array from_labels(const LabelVolume& v) {
  return spatial_array<std::uint8_t>(v.meta, v.voxels);
}

py::array from_mask(const Mask& m) { return spatial_array<std::uint8_t>(m.meta, m.v); }

py::array from_probs(const ProbVolume& v) {
  py::array_t<float, py::array::f_style> out(
      {py::ssize_t(v.meta.dims[0]), py::ssize_t(v.meta.dims[1]), py::ssize_t(v.meta.dims[2]),
       py::ssize_t(v.channels)});
  std::memcpy(out.mutable_data(), v.probs.data(), v.probs.size() * sizeof(float));
  return out;
}

py::dict breakdown_dict(const LossBreakdown& b) {
  py::dict d;
  d["total"] = b.total;
  d["cross_entropy"] = b.cross_entropy;
  d["per_class_dice"] = b.per_class_dice;
  if (b.per_class_jaccard) d["per_class_jaccard"] = *b.per_class_jaccard;
  if (b.per_class_msssim) d["per_class_msssim"] = *b.per_class_msssim;
  if (b.global_term) d["global_term"] = *b.global_term;
  if (b.blob_term) d["blob_term"] = *b.blob_term;
  if (b.blob_class_count) d["blob_class_count"] = *b.blob_class_count;
  return d;
}

LesionwiseConfig make_lesionwise(int match_dilation_iters, const std::string& match_connectivity,
                                 double fp_dice_penalty, double fn_dice_penalty,
                                 double hd95_penalty, int min_lesion_voxels) {
  LesionwiseConfig cfg;
  cfg.match_dilation_iters = match_dilation_iters;
  cfg.match_connectivity = connectivity_from_string(match_connectivity);
  cfg.fp_dice_penalty = fp_dice_penalty;
  cfg.fn_dice_penalty = fn_dice_penalty;
  cfg.hd95_penalty = hd95_penalty;
  cfg.min_lesion_voxels = min_lesion_voxels;
  return cfg;
}

std::vector<RegionSpec> make_regions(
    const std::optional<std::vector<std::pair<std::string, std::vector<int>>>>& regions) {
  if (!regions) return default_regions();
  std::vector<RegionSpec> out;
  for (const auto& [name, labels] : *regions) out.push_back(RegionSpec{name, labels});
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Ensemble fusion, post-processing and lesion-wise evaluation for "
            "multi-class segmentation volumes";
  m.attr("__version__") = "0.1.0";

  py::register_exception<Error>(m, "FusevalError", PyExc_RuntimeError);

  // ---- volumes ----
  m.def(
      "normalize",
      [](const ArrF32& probs, const Spacing& spacing) {
        return from_probs(normalize(to_probs(probs, spacing)));
      },
      py::arg("probs"), py::arg("spacing") = Spacing{1, 1, 1},
      "Rescale every voxel's channels to sum to 1.");
  m.def(
      "argmax_labels",
      [](const ArrF32& probs, const Spacing& spacing) {
        return from_labels(argmax_labels(to_probs(probs, spacing)));
      },
      py::arg("probs"), py::arg("spacing") = Spacing{1, 1, 1},
      "Per-voxel argmax; ties break toward the lowest class index.");
  m.def(
      "one_hot",
      [](const ArrU8& labels, const Spacing& spacing) {
        return from_probs(one_hot(to_labels(labels, spacing)));
      },
      py::arg("labels"), py::arg("spacing") = Spacing{1, 1, 1},
      "One-hot probability encoding of a label volume.");

  // ---- ensemble ----
  m.def(
      "fuse",
      [](const std::vector<ArrF32>& members, const Spacing& spacing) {
        EnsembleAccumulator acc;
        for (const auto& a : members) acc.add(to_probs(a, spacing));
        return from_probs(acc.fuse());
      },
      py::arg("members"), py::arg("spacing") = Spacing{1, 1, 1},
      "Per-voxel arithmetic mean of member probability volumes.");
  m.def(
      "fuse_to_labels",
      [](const std::vector<ArrF32>& members, const Spacing& spacing) {
        std::vector<ProbVolume> vols;
        vols.reserve(members.size());
        for (const auto& a : members) vols.push_back(to_probs(a, spacing));
        return from_labels(fuse_to_labels(vols));
      },
      py::arg("members"), py::arg("spacing") = Spacing{1, 1, 1},
      "argmax of fuse(members).");

  // ---- components & morphology ----
  m.def(
      "connected_components",
      [](const ArrU8& mask, const std::string& connectivity) {
        const ComponentMap cm =
            connected_components(to_mask(mask, {1, 1, 1}), connectivity_from_string(connectivity));
        py::array_t<std::int32_t, py::array::f_style> ids(
            {py::ssize_t(cm.meta.dims[0]), py::ssize_t(cm.meta.dims[1]),
             py::ssize_t(cm.meta.dims[2])});
        std::memcpy(ids.mutable_data(), cm.ids.data(), cm.ids.size() * sizeof(std::int32_t));
        return py::make_tuple(ids, cm.count);
      },
      py::arg("mask"), py::arg("connectivity") = "vertex26",
      "Label connected components; returns (ids, count) with ids in scan order.");
  m.def(
      "dilate",
      [](const ArrU8& mask, int iterations, const std::string& connectivity) {
        return from_mask(
            dilate(to_mask(mask, {1, 1, 1}), iterations, connectivity_from_string(connectivity)));
      },
      py::arg("mask"), py::arg("iterations") = 1, py::arg("connectivity") = "vertex26");
  m.def(
      "erode",
      [](const ArrU8& mask, int iterations, const std::string& connectivity) {
        return from_mask(
            erode(to_mask(mask, {1, 1, 1}), iterations, connectivity_from_string(connectivity)));
      },
      py::arg("mask"), py::arg("iterations") = 1, py::arg("connectivity") = "vertex26");

  // ---- post-processing ----
  m.def(
      "postprocess",
      [](const ArrU8& labels, int min_component_voxels, int smooth_iterations,
         const std::string& connectivity, const std::optional<std::vector<int>>& class_priority,
         const Spacing& spacing) {
        const LabelVolume vol = to_labels(labels, spacing);
        PostprocessConfig cfg;
        cfg.min_component_voxels = min_component_voxels;
        cfg.smooth_iterations = smooth_iterations;
        cfg.connectivity = connectivity_from_string(connectivity);
        if (class_priority) {
          cfg.class_priority = *class_priority;
        } else if (vol.num_classes != 4) {
          cfg.class_priority.clear();
          for (int c = vol.num_classes - 1; c >= 1; --c) cfg.class_priority.push_back(c);
        }
        return from_labels(postprocess(vol, cfg));
      },
      py::arg("labels"), py::arg("min_component_voxels") = 50, py::arg("smooth_iterations") = 0,
      py::arg("connectivity") = "vertex26", py::arg("class_priority") = py::none(),
      py::arg("spacing") = Spacing{1, 1, 1},
      "Per-class size filtering followed by morphological smoothing.");

  // ---- metrics ----
  m.def(
      "dice_score",
      [](const ArrU8& pred, const ArrU8& gt) {
        return dice_score(to_mask(pred, {1, 1, 1}), to_mask(gt, {1, 1, 1}));
      },
      py::arg("pred"), py::arg("gt"), "Overlap 2|P&G|/(|P|+|G|); both empty -> 1.0.");
  m.def(
      "hd95",
      [](const ArrU8& pred, const ArrU8& gt, const Spacing& spacing) {
        return hd95(to_mask(pred, spacing), to_mask(gt, spacing));
      },
      py::arg("pred"), py::arg("gt"), py::arg("spacing") = Spacing{1, 1, 1},
      "95th-percentile symmetric boundary distance in mm; one side empty -> inf.");
  m.def(
      "lesion_wise",
      [](const ArrU8& pred, const ArrU8& gt, const Spacing& spacing, int match_dilation_iters,
         const std::string& match_connectivity, double fp_dice_penalty, double fn_dice_penalty,
         double hd95_penalty, int min_lesion_voxels) {
        const LesionwiseResult r = lesion_wise(
            to_mask(pred, spacing), to_mask(gt, spacing),
            make_lesionwise(match_dilation_iters, match_connectivity, fp_dice_penalty,
                            fn_dice_penalty, hd95_penalty, min_lesion_voxels));
        py::dict d;
        d["lesion_wise_dice"] = r.lesion_wise_dice;
        d["lesion_wise_hd95"] = r.lesion_wise_hd95;
        d["tp"] = r.tp;
        d["fp"] = r.fp;
        d["fn"] = r.fn;
        return d;
      },
      py::arg("pred"), py::arg("gt"), py::arg("spacing") = Spacing{1, 1, 1},
      py::arg("match_dilation_iters") = 3, py::arg("match_connectivity") = "vertex26",
      py::arg("fp_dice_penalty") = 0.0, py::arg("fn_dice_penalty") = 0.0,
      py::arg("hd95_penalty") = 374.0, py::arg("min_lesion_voxels") = 50,
      "Per-lesion dice/hd95 with fixed penalties for unmatched lesions.");
  m.def(
      "evaluate_case",
      [](const ArrU8& pred, const ArrU8& gt, const Spacing& spacing,
         const std::optional<std::vector<std::pair<std::string, std::vector<int>>>>& regions,
         int match_dilation_iters, const std::string& match_connectivity, double fp_dice_penalty,
         double fn_dice_penalty, double hd95_penalty, int min_lesion_voxels) {
        const auto reports = evaluate_case(
            to_labels(pred, spacing), to_labels(gt, spacing), make_regions(regions),
            make_lesionwise(match_dilation_iters, match_connectivity, fp_dice_penalty,
                            fn_dice_penalty, hd95_penalty, min_lesion_voxels));
        py::list rows;
        for (const auto& r : reports) {
          py::dict d;
          d["case_id"] = r.case_id;
          d["region"] = r.region;
          d["lesion_wise_dice"] = r.lesion_wise_dice;
          d["dice"] = r.dice;
          d["lesion_wise_hd95"] = r.lesion_wise_hd95;
          d["hd95"] = r.hd95;
          d["tp"] = r.tp;
          d["fp"] = r.fp;
          d["fn"] = r.fn;
          rows.append(d);
        }
        return rows;
      },
      py::arg("pred"), py::arg("gt"), py::arg("spacing") = Spacing{1, 1, 1},
      py::arg("regions") = py::none(), py::arg("match_dilation_iters") = 3,
      py::arg("match_connectivity") = "vertex26", py::arg("fp_dice_penalty") = 0.0,
      py::arg("fn_dice_penalty") = 0.0, py::arg("hd95_penalty") = 374.0,
      py::arg("min_lesion_voxels") = 50,
      "Plain + lesion-wise metrics per region (default regions: ET, TC, WT).");

  // ---- losses ----
  m.def(
      "ce_dice_loss",
      [](const ArrF32& probs, const ArrU8& labels) {
        return breakdown_dict(ce_dice_loss(to_probs(probs, {1, 1, 1}), to_labels(labels, {1, 1, 1})));
      },
      py::arg("probs"), py::arg("labels"), "Cross-entropy plus mean per-class dice loss.");
  m.def(
      "basnet_hybrid_loss",
      [](const ArrF32& probs, const ArrU8& labels, int window, double sigma, int scales) {
        MsSsimConfig cfg;
        cfg.window = window;
        cfg.sigma = sigma;
        cfg.scales = scales;
        return breakdown_dict(
            basnet_hybrid_loss(to_probs(probs, {1, 1, 1}), to_labels(labels, {1, 1, 1}), cfg));
      },
      py::arg("probs"), py::arg("labels"), py::arg("window") = 7, py::arg("sigma") = 1.5,
      py::arg("scales") = 3, "Cross-entropy + MS-SSIM + jaccard hybrid loss.");
  m.def(
      "blob_loss",
      [](const ArrF32& probs, const ArrU8& labels, double alpha, double beta,
         const std::string& connectivity, bool include_background, int window, double sigma,
         int scales) {
        BlobLossConfig cfg;
        cfg.alpha = alpha;
        cfg.beta = beta;
        cfg.connectivity = connectivity_from_string(connectivity);
        cfg.include_background = include_background;
        MsSsimConfig ms;
        ms.window = window;
        ms.sigma = sigma;
        ms.scales = scales;
        return breakdown_dict(
            blob_loss(to_probs(probs, {1, 1, 1}), to_labels(labels, {1, 1, 1}), cfg, ms));
      },
      py::arg("probs"), py::arg("labels"), py::arg("alpha") = 1.0, py::arg("beta") = 1.0,
      py::arg("connectivity") = "vertex26", py::arg("include_background") = false,
      py::arg("window") = 7, py::arg("sigma") = 1.5, py::arg("scales") = 3,
      "alpha * hybrid loss + beta * mean per-ground-truth-component hybrid loss.");
  m.def(
      "ms_ssim",
      [](const ArrF32& a, const ArrF32& b, int window, double sigma, int scales) {
        if (a.ndim() != 3 || b.ndim() != 3)
          throw ShapeError("ms_ssim expects 3-D scalar fields");
        if (a.shape(0) != b.shape(0) || a.shape(1) != b.shape(1) || a.shape(2) != b.shape(2))
          throw ShapeError("ms_ssim inputs must share dims");
        MsSsimConfig cfg;
        cfg.window = window;
        cfg.sigma = sigma;
        cfg.scales = scales;
        return ms_ssim_index(a.data(), b.data(), {a.shape(0), a.shape(1), a.shape(2)}, cfg);
      },
      py::arg("a"), py::arg("b"), py::arg("window") = 7, py::arg("sigma") = 1.5,
      py::arg("scales") = 3, "Multi-scale structural similarity of two scalar fields.");

  // ---- NIfTI I/O ----
  m.def(
      "read_labels",
      [](const std::string& path) {
        const LabelVolume v = read_labels(path);
        return py::make_tuple(from_labels(v), v.meta.spacing, v.meta.case_id);
      },
      py::arg("path"), "Read a uint8 label volume; returns (data, spacing, case_id).");
  m.def(
      "read_probs",
      [](const std::string& path) {
        const ProbVolume v = read_probs(path);
        return py::make_tuple(from_probs(v), v.meta.spacing, v.meta.case_id);
      },
      py::arg("path"), "Read a float32 probability volume; returns (data, spacing, case_id).");
  m.def(
      "write_labels",
      [](const std::string& path, const ArrU8& data, const Spacing& spacing,
         const std::string& case_id) { write_nifti(to_labels(data, spacing, case_id), path); },
      py::arg("path"), py::arg("data"), py::arg("spacing") = Spacing{1, 1, 1},
      py::arg("case_id") = "", "Write a uint8 label volume (gzip when path ends in .gz).");
  m.def(
      "write_probs",
      [](const std::string& path, const ArrF32& data, const Spacing& spacing,
         const std::string& case_id) { write_nifti(to_probs(data, spacing, case_id), path); },
      py::arg("path"), py::arg("data"), py::arg("spacing") = Spacing{1, 1, 1},
      py::arg("case_id") = "", "Write a float32 probability volume (gzip when path ends in .gz).");
}
