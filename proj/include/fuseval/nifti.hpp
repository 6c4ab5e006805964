#pragma once

#include <string>
#include <variant>

#include "fuseval/volume.hpp"

namespace fuseval {

// Minimal NIfTI-1 support: single-file .nii or .nii.gz, little-endian,
// datatypes uint8 (labels) and float32 (probabilities), 3D or 4D with the
// fourth dimension as channels. Gzip is detected by the 0x1f 0x8b magic, not
// by extension. The case id travels in the header `descrip` field; when that
// is empty the filename stem is used.

using NiftiPayload = std::variant<LabelVolume, ProbVolume>;

NiftiPayload read_nifti(const std::string& path);

// Convenience readers that additionally check the payload kind.
LabelVolume read_labels(const std::string& path);
ProbVolume read_probs(const std::string& path);

// Writes uint8 (labels) or float32 (probabilities). Compresses when the path
// ends in .gz. The file is written to a temp name and renamed into place.
void write_nifti(const LabelVolume& volume, const std::string& path);
void write_nifti(const ProbVolume& volume, const std::string& path);

// "case001.nii.gz" -> "case001"
std::string case_id_from_path(const std::string& path);

}  // namespace fuseval
