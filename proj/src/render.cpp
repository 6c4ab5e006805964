#include "fuseval/render.hpp"

#include <fstream>

#include "fuseval/errors.hpp"

namespace fuseval {

SliceAxis slice_axis_from_string(const std::string& s) {
  if (s == "sagittal" || s == "x") return SliceAxis::Sagittal;
  if (s == "coronal" || s == "y") return SliceAxis::Coronal;
  if (s == "axial" || s == "z") return SliceAxis::Axial;
  throw ConfigError("unknown slice axis '" + s + "' (expected sagittal, coronal or axial)");
}

Rgb label_color(int label) {
  static const std::array<Rgb, 8> palette = {{
      {0, 0, 0},       // background
      {220, 20, 60},   // necrotic core
      {46, 139, 87},   // edema
      {255, 215, 0},   // enhancing tumor
      {65, 105, 225},
      {255, 140, 0},
      {186, 85, 211},
      {0, 206, 209},
  }};
  return palette[static_cast<std::size_t>(label) % palette.size()];
}

namespace {

constexpr int kSeparatorWidth = 2;
constexpr Rgb kSeparatorColor{128, 128, 128};

// (image_x, image_y) extents and voxel lookup for one axis choice.
struct SlicePlane {
  std::int64_t width, height;
  int fixed_axis;
};

SlicePlane plane_for(const VolumeMeta& meta, SliceAxis axis) {
  switch (axis) {
    case SliceAxis::Sagittal: return {meta.dims[1], meta.dims[2], 0};
    case SliceAxis::Coronal: return {meta.dims[0], meta.dims[2], 1};
    case SliceAxis::Axial: return {meta.dims[0], meta.dims[1], 2};
  }
  return {0, 0, 0};
}

}  // namespace

SliceImage render_slices(const std::vector<LabelVolume>& volumes, SliceAxis axis,
                         std::int64_t slice_index) {
  if (volumes.empty()) throw PreconditionError("render: need at least one volume");
  for (std::size_t i = 1; i < volumes.size(); ++i) {
    require_same_grid(volumes[0].meta, volumes[i].meta, "render");
  }
  const SlicePlane plane = plane_for(volumes[0].meta, axis);
  const std::int64_t extent = volumes[0].meta.dims[plane.fixed_axis];
  if (slice_index < 0 || slice_index >= extent) {
    throw PreconditionError("slice index " + std::to_string(slice_index) +
                            " out of range [0, " + std::to_string(extent) + ")");
  }

  SliceImage img;
  img.width = plane.width * std::int64_t(volumes.size()) +
              kSeparatorWidth * std::int64_t(volumes.size() - 1);
  img.height = plane.height;
  img.pixels.assign(static_cast<std::size_t>(img.width * img.height), kSeparatorColor);

  for (std::size_t v = 0; v < volumes.size(); ++v) {
    const std::int64_t x0 = std::int64_t(v) * (plane.width + kSeparatorWidth);
    for (std::int64_t py = 0; py < plane.height; ++py) {
      for (std::int64_t px = 0; px < plane.width; ++px) {
        std::int64_t x = 0, y = 0, z = 0;
        switch (axis) {
          case SliceAxis::Sagittal: x = slice_index; y = px; z = py; break;
          case SliceAxis::Coronal: x = px; y = slice_index; z = py; break;
          case SliceAxis::Axial: x = px; y = py; z = slice_index; break;
        }
        const int label = volumes[v].at(x, y, z);
        img.pixels[static_cast<std::size_t>(py * img.width + x0 + px)] = label_color(label);
      }
    }
  }
  return img;
}

void write_ppm(const SliceImage& image, const std::string& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  f << "P6\n" << image.width << " " << image.height << "\n255\n";
  f.write(reinterpret_cast<const char*>(image.pixels.data()),
          static_cast<std::streamsize>(image.pixels.size() * sizeof(Rgb)));
  if (!f.good()) throw IoError("failed writing '" + path + "'");
}

}  // namespace fuseval
