#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "fuseval/volume.hpp"

namespace fuseval {

// Slice plane through the volume. Sagittal fixes x, coronal fixes y, axial
// fixes z.
enum class SliceAxis { Sagittal, Coronal, Axial };

SliceAxis slice_axis_from_string(const std::string& s);

struct Rgb {
  std::uint8_t r, g, b;
};

// Fixed label palette: background black, then crimson / sea green / gold for
// classes 1-3; further classes repeat through a small fixed table.
Rgb label_color(int label);

struct SliceImage {
  std::int64_t width = 0;
  std::int64_t height = 0;
  std::vector<Rgb> pixels;  // row-major, row 0 at the top
};

// Renders one slice of each volume side by side, separated by 2-pixel gray
// columns. All volumes must share dims; slice_index must be inside the axis
// extent. Image layout: sagittal -> (ny x nz), coronal -> (nx x nz),
// axial -> (nx x ny), with the remaining fast axis as image x.
SliceImage render_slices(const std::vector<LabelVolume>& volumes, SliceAxis axis,
                         std::int64_t slice_index);

// Binary PPM (P6) writer.
void write_ppm(const SliceImage& image, const std::string& path);

}  // namespace fuseval
