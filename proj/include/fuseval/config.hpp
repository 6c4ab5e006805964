#pragma once

#include <string>
#include <vector>

#include "fuseval/losses.hpp"
#include "fuseval/metrics.hpp"
#include "fuseval/postprocess.hpp"
#include "fuseval/synth.hpp"
#include "fuseval/volume.hpp"

namespace fuseval {

// All tunables of the pipeline, loaded from a JSON file whose field names
// mirror the config structs exactly. Omitted sections fall back to defaults;
// inside a present section every field is required, and unknown fields are
// an error. Scalar fields can be overridden through FUSEVAL_* environment
// variables (e.g. FUSEVAL_LESIONWISE_HD95_PENALTY).
struct RunConfig {
  std::vector<RegionSpec> regions = default_regions();
  LesionwiseConfig lesionwise;
  PostprocessConfig postprocess;
  MsSsimConfig msssim;
  BlobLossConfig blob;
  int workers = 1;
};

RunConfig default_run_config();

// Parses the file (strict schema) and applies environment overrides.
RunConfig load_run_config(const std::string& path);

// Environment overrides only, on top of defaults.
RunConfig run_config_from_env();

// One batch case: where to find the member probability volumes and,
// optionally, the ground truth. Relative paths are resolved against the
// manifest file's directory.
struct CaseManifest {
  std::string case_id;
  std::vector<std::string> member_paths;
  std::string gt_path;  // empty when absent
};

std::vector<CaseManifest> load_manifest(const std::string& path);
void save_manifest(const std::vector<CaseManifest>& cases, const std::string& path);

// Synthetic batch description: {"cases": [ ... ]} with one SynthSpec per
// entry.
std::vector<SynthSpec> load_synth_specs(const std::string& path);

}  // namespace fuseval
