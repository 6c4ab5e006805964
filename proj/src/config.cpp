#include "fuseval/config.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include <json.hpp>

#include "fuseval/components.hpp"
#include "fuseval/errors.hpp"

namespace fuseval {
namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

json parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void check_object(const json& j, const std::string& scope) {
  if (!j.is_object()) throw ConfigError(scope + " must be a JSON object");
}

void check_known(const json& obj, const std::string& scope,
                 std::initializer_list<const char*> known) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : known) {
      if (it.key() == k) { ok = true; break; }
    }
    if (!ok) throw ConfigError("unknown config field: " + scope + it.key());
  }
}

const json& require(const json& obj, const std::string& scope, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError("missing config field: " + scope + key);
  return *it;
}

int get_int(const json& j, const std::string& name) {
  if (!j.is_number_integer()) throw ConfigError(name + " must be an integer");
  return j.get<int>();
}

double get_double(const json& j, const std::string& name) {
  if (!j.is_number()) throw ConfigError(name + " must be a number");
  return j.get<double>();
}

bool get_bool(const json& j, const std::string& name) {
  if (!j.is_boolean()) throw ConfigError(name + " must be a boolean");
  return j.get<bool>();
}

std::string get_string(const json& j, const std::string& name) {
  if (!j.is_string()) throw ConfigError(name + " must be a string");
  return j.get<std::string>();
}

Connectivity get_connectivity(const json& j, const std::string& name) {
  return connectivity_from_string(get_string(j, name));
}

std::vector<RegionSpec> parse_regions(const json& arr) {
  if (!arr.is_array() || arr.empty())
    throw ConfigError("regions must be a non-empty array");
  std::vector<RegionSpec> regions;
  std::set<std::string> names;
  for (const auto& r : arr) {
    check_object(r, "regions[]");
    check_known(r, "regions[].", {"name", "labels"});
    RegionSpec spec;
    spec.name = get_string(require(r, "regions[].", "name"), "regions[].name");
    const json& labels = require(r, "regions[].", "labels");
    if (!labels.is_array() || labels.empty())
      throw ConfigError("regions[].labels must be a non-empty array");
    std::set<int> seen;
    for (const auto& l : labels) {
      const int label = get_int(l, "regions[].labels[]");
      if (label < 1) throw ConfigError("region labels must be >= 1");
      if (!seen.insert(label).second)
        throw ConfigError("duplicate label in region '" + spec.name + "'");
      spec.labels.push_back(label);
    }
    if (spec.name.empty()) throw ConfigError("region name must be non-empty");
    if (!names.insert(spec.name).second)
      throw ConfigError("duplicate region name '" + spec.name + "'");
    regions.push_back(std::move(spec));
  }
  return regions;
}

LesionwiseConfig parse_lesionwise(const json& obj) {
  const std::string scope = "lesionwise.";
  check_object(obj, "lesionwise");
  check_known(obj, scope,
              {"match_dilation_iters", "match_connectivity", "fp_dice_penalty",
               "fn_dice_penalty", "hd95_penalty", "min_lesion_voxels"});
  LesionwiseConfig cfg;
  cfg.match_dilation_iters =
      get_int(require(obj, scope, "match_dilation_iters"), scope + "match_dilation_iters");
  cfg.match_connectivity =
      get_connectivity(require(obj, scope, "match_connectivity"), scope + "match_connectivity");
  cfg.fp_dice_penalty =
      get_double(require(obj, scope, "fp_dice_penalty"), scope + "fp_dice_penalty");
  cfg.fn_dice_penalty =
      get_double(require(obj, scope, "fn_dice_penalty"), scope + "fn_dice_penalty");
  cfg.hd95_penalty = get_double(require(obj, scope, "hd95_penalty"), scope + "hd95_penalty");
  const int min_voxels =
      get_int(require(obj, scope, "min_lesion_voxels"), scope + "min_lesion_voxels");
  if (min_voxels < 0) throw ConfigError("lesionwise.min_lesion_voxels must be >= 0");
  cfg.min_lesion_voxels = std::size_t(min_voxels);
  return cfg;
}

PostprocessConfig parse_postprocess(const json& obj) {
  const std::string scope = "postprocess.";
  check_object(obj, "postprocess");
  check_known(obj, scope,
              {"min_component_voxels", "connectivity", "smooth_iterations", "class_priority"});
  PostprocessConfig cfg;
  const int min_voxels =
      get_int(require(obj, scope, "min_component_voxels"), scope + "min_component_voxels");
  if (min_voxels < 0) throw ConfigError("postprocess.min_component_voxels must be >= 0");
  cfg.min_component_voxels = std::size_t(min_voxels);
  cfg.connectivity = get_connectivity(require(obj, scope, "connectivity"), scope + "connectivity");
  cfg.smooth_iterations =
      get_int(require(obj, scope, "smooth_iterations"), scope + "smooth_iterations");
  const json& prio = require(obj, scope, "class_priority");
  if (!prio.is_array() || prio.empty())
    throw ConfigError("postprocess.class_priority must be a non-empty array");
  cfg.class_priority.clear();
  std::set<int> seen;
  for (const auto& p : prio) {
    const int c = get_int(p, "postprocess.class_priority[]");
    if (c < 1) throw ConfigError("postprocess.class_priority entries must be >= 1");
    if (!seen.insert(c).second)
      throw ConfigError("duplicate class in postprocess.class_priority");
    cfg.class_priority.push_back(c);
  }
  return cfg;
}

MsSsimConfig parse_msssim(const json& obj) {
  const std::string scope = "msssim.";
  check_object(obj, "msssim");
  check_known(obj, scope, {"window", "sigma", "scales", "k1", "k2", "dynamic_range"});
  MsSsimConfig cfg;
  cfg.window = get_int(require(obj, scope, "window"), scope + "window");
  cfg.sigma = get_double(require(obj, scope, "sigma"), scope + "sigma");
  cfg.scales = get_int(require(obj, scope, "scales"), scope + "scales");
  cfg.k1 = get_double(require(obj, scope, "k1"), scope + "k1");
  cfg.k2 = get_double(require(obj, scope, "k2"), scope + "k2");
  cfg.dynamic_range = get_double(require(obj, scope, "dynamic_range"), scope + "dynamic_range");
  return cfg;
}

BlobLossConfig parse_blob(const json& obj) {
  const std::string scope = "blob.";
  check_object(obj, "blob");
  check_known(obj, scope,
              {"alpha", "beta", "connectivity", "include_background", "restrict_components"});
  BlobLossConfig cfg;
  cfg.alpha = get_double(require(obj, scope, "alpha"), scope + "alpha");
  cfg.beta = get_double(require(obj, scope, "beta"), scope + "beta");
  cfg.connectivity = get_connectivity(require(obj, scope, "connectivity"), scope + "connectivity");
  cfg.include_background =
      get_bool(require(obj, scope, "include_background"), scope + "include_background");
  cfg.restrict_components =
      get_bool(require(obj, scope, "restrict_components"), scope + "restrict_components");
  return cfg;
}

int env_int(const char* name, const char* value) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(value, &pos);
    if (pos != std::string(value).size()) throw std::invalid_argument(name);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(std::string(name) + ": cannot parse '" + value + "' as integer");
  }
}

double env_double(const char* name, const char* value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != std::string(value).size()) throw std::invalid_argument(name);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(std::string(name) + ": cannot parse '" + value + "' as number");
  }
}

bool env_bool(const char* name, const char* value) {
  const std::string v = value;
  if (v == "1" || v == "true") return true;
  if (v == "0" || v == "false") return false;
  throw ConfigError(std::string(name) + ": cannot parse '" + v + "' as boolean (use true/false)");
}

void apply_env(RunConfig& cfg) {
  const auto ov_i = [](const char* name, int& out) {
    if (const char* v = std::getenv(name)) out = env_int(name, v);
  };
  const auto ov_z = [](const char* name, std::size_t& out) {
    if (const char* v = std::getenv(name)) {
      const int parsed = env_int(name, v);
      if (parsed < 0) throw ConfigError(std::string(name) + " must be >= 0");
      out = std::size_t(parsed);
    }
  };
  const auto ov_d = [](const char* name, double& out) {
    if (const char* v = std::getenv(name)) out = env_double(name, v);
  };
  const auto ov_b = [](const char* name, bool& out) {
    if (const char* v = std::getenv(name)) out = env_bool(name, v);
  };
  const auto ov_c = [](const char* name, Connectivity& out) {
    if (const char* v = std::getenv(name)) out = connectivity_from_string(v);
  };

  ov_i("FUSEVAL_WORKERS", cfg.workers);

  ov_i("FUSEVAL_LESIONWISE_MATCH_DILATION_ITERS", cfg.lesionwise.match_dilation_iters);
  ov_c("FUSEVAL_LESIONWISE_MATCH_CONNECTIVITY", cfg.lesionwise.match_connectivity);
  ov_d("FUSEVAL_LESIONWISE_FP_DICE_PENALTY", cfg.lesionwise.fp_dice_penalty);
  ov_d("FUSEVAL_LESIONWISE_FN_DICE_PENALTY", cfg.lesionwise.fn_dice_penalty);
  ov_d("FUSEVAL_LESIONWISE_HD95_PENALTY", cfg.lesionwise.hd95_penalty);
  ov_z("FUSEVAL_LESIONWISE_MIN_LESION_VOXELS", cfg.lesionwise.min_lesion_voxels);

  ov_z("FUSEVAL_POSTPROCESS_MIN_COMPONENT_VOXELS", cfg.postprocess.min_component_voxels);
  ov_c("FUSEVAL_POSTPROCESS_CONNECTIVITY", cfg.postprocess.connectivity);
  ov_i("FUSEVAL_POSTPROCESS_SMOOTH_ITERATIONS", cfg.postprocess.smooth_iterations);

  ov_i("FUSEVAL_MSSSIM_WINDOW", cfg.msssim.window);
  ov_d("FUSEVAL_MSSSIM_SIGMA", cfg.msssim.sigma);
  ov_i("FUSEVAL_MSSSIM_SCALES", cfg.msssim.scales);
  ov_d("FUSEVAL_MSSSIM_K1", cfg.msssim.k1);
  ov_d("FUSEVAL_MSSSIM_K2", cfg.msssim.k2);
  ov_d("FUSEVAL_MSSSIM_DYNAMIC_RANGE", cfg.msssim.dynamic_range);

  ov_d("FUSEVAL_BLOB_ALPHA", cfg.blob.alpha);
  ov_d("FUSEVAL_BLOB_BETA", cfg.blob.beta);
  ov_c("FUSEVAL_BLOB_CONNECTIVITY", cfg.blob.connectivity);
  ov_b("FUSEVAL_BLOB_INCLUDE_BACKGROUND", cfg.blob.include_background);
  ov_b("FUSEVAL_BLOB_RESTRICT_COMPONENTS", cfg.blob.restrict_components);
}

void validate_run_config(const RunConfig& cfg) {
  if (cfg.workers < 1) throw ConfigError("workers must be >= 1");
  if (cfg.lesionwise.match_dilation_iters < 0)
    throw ConfigError("lesionwise.match_dilation_iters must be >= 0");
  if (cfg.lesionwise.hd95_penalty < 0.0)
    throw ConfigError("lesionwise.hd95_penalty must be >= 0");
  if (cfg.postprocess.smooth_iterations < 0)
    throw ConfigError("postprocess.smooth_iterations must be >= 0");
  if (cfg.msssim.window < 3 || cfg.msssim.window % 2 == 0)
    throw ConfigError("msssim.window must be an odd integer >= 3");
  if (cfg.msssim.sigma <= 0.0) throw ConfigError("msssim.sigma must be > 0");
  if (cfg.msssim.scales < 1) throw ConfigError("msssim.scales must be >= 1");
  if (cfg.msssim.dynamic_range <= 0.0)
    throw ConfigError("msssim.dynamic_range must be > 0");
}

std::string resolve_against(const fs::path& base, const std::string& p) {
  fs::path path(p);
  if (path.is_absolute()) return path.string();
  return (base / path).lexically_normal().string();
}

void write_text_atomic(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + tmp);
    out << text;
    if (!out) throw IoError("write failed: " + tmp);
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp + " to " + path + ": " + ec.message());
}

}  // namespace

RunConfig default_run_config() { return RunConfig{}; }

RunConfig run_config_from_env() {
  RunConfig cfg;
  apply_env(cfg);
  validate_run_config(cfg);
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  const json root = parse_file(path);
  check_object(root, "config");
  check_known(root, "", {"regions", "lesionwise", "postprocess", "msssim", "blob", "workers"});

  RunConfig cfg;
  if (auto it = root.find("regions"); it != root.end()) cfg.regions = parse_regions(*it);
  if (auto it = root.find("lesionwise"); it != root.end()) cfg.lesionwise = parse_lesionwise(*it);
  if (auto it = root.find("postprocess"); it != root.end())
    cfg.postprocess = parse_postprocess(*it);
  if (auto it = root.find("msssim"); it != root.end()) cfg.msssim = parse_msssim(*it);
  if (auto it = root.find("blob"); it != root.end()) cfg.blob = parse_blob(*it);
  if (auto it = root.find("workers"); it != root.end())
    cfg.workers = get_int(*it, "workers");

  apply_env(cfg);
  validate_run_config(cfg);
  return cfg;
}

std::vector<CaseManifest> load_manifest(const std::string& path) {
  const json root = parse_file(path);
  if (!root.is_array()) throw ConfigError("manifest must be a JSON array");
  const fs::path base = fs::path(path).parent_path();

  std::vector<CaseManifest> cases;
  std::set<std::string> ids;
  for (const auto& entry : root) {
    check_object(entry, "manifest entry");
    check_known(entry, "manifest entry: ", {"case_id", "members", "gt"});
    CaseManifest c;
    c.case_id = get_string(require(entry, "", "case_id"), "case_id");
    if (c.case_id.empty()) throw ConfigError("manifest case_id must be non-empty");
    if (!ids.insert(c.case_id).second)
      throw ConfigError("duplicate case_id in manifest: " + c.case_id);
    const json& members = require(entry, "", "members");
    if (!members.is_array() || members.empty())
      throw ConfigError("manifest members must be a non-empty array (case " + c.case_id + ")");
    for (const auto& m : members)
      c.member_paths.push_back(resolve_against(base, get_string(m, "members[]")));
    if (auto it = entry.find("gt"); it != entry.end())
      c.gt_path = resolve_against(base, get_string(*it, "gt"));
    cases.push_back(std::move(c));
  }
  return cases;
}

void save_manifest(const std::vector<CaseManifest>& cases, const std::string& path) {
  json root = json::array();
  for (const auto& c : cases) {
    json entry;
    entry["case_id"] = c.case_id;
    entry["members"] = c.member_paths;
    if (!c.gt_path.empty()) entry["gt"] = c.gt_path;
    root.push_back(std::move(entry));
  }
  write_text_atomic(path, root.dump(2) + "\n");
}

namespace {

SynthShape parse_shape(const json& obj) {
  check_object(obj, "shape");
  check_known(obj, "shapes[].", {"class", "kind", "center", "size"});
  SynthShape shape;
  shape.class_index = get_int(require(obj, "shapes[].", "class"), "shapes[].class");
  const std::string kind = get_string(require(obj, "shapes[].", "kind"), "shapes[].kind");
  if (kind == "sphere") shape.kind = ShapeKind::Sphere;
  else if (kind == "box") shape.kind = ShapeKind::Box;
  else throw ConfigError("shapes[].kind must be 'sphere' or 'box', got '" + kind + "'");

  const json& center = require(obj, "shapes[].", "center");
  if (!center.is_array() || center.size() != 3)
    throw ConfigError("shapes[].center must be an array of 3 numbers");
  for (int i = 0; i < 3; ++i) shape.center[i] = get_double(center[i], "shapes[].center[]");

  const json& size = require(obj, "shapes[].", "size");
  const std::size_t want = shape.kind == ShapeKind::Sphere ? 1 : 3;
  if (!size.is_array() || size.size() != want)
    throw ConfigError(std::string("shapes[].size must be an array of ") +
                      (want == 1 ? "1 number (sphere radius)" : "3 numbers (box half-extents)"));
  shape.size.fill(0.0);
  for (std::size_t i = 0; i < want; ++i)
    shape.size[i] = get_double(size[i], "shapes[].size[]");
  return shape;
}

SynthSpec parse_synth_case(const json& obj) {
  check_object(obj, "cases[]");
  check_known(obj, "cases[].",
              {"case_id", "seed", "dims", "spacing", "num_classes", "noise", "n_models",
               "shapes"});
  SynthSpec spec;
  const json& seed = require(obj, "cases[].", "seed");
  if (!seed.is_number_integer())
    throw ConfigError("cases[].seed must be an integer");
  spec.seed = seed.get<std::uint64_t>();

  const json& dims = require(obj, "cases[].", "dims");
  if (!dims.is_array() || dims.size() != 3)
    throw ConfigError("cases[].dims must be an array of 3 integers");
  for (int i = 0; i < 3; ++i) spec.dims[i] = get_int(dims[i], "cases[].dims[]");

  if (auto it = obj.find("spacing"); it != obj.end()) {
    if (!it->is_array() || it->size() != 3)
      throw ConfigError("cases[].spacing must be an array of 3 numbers");
    for (int i = 0; i < 3; ++i) spec.spacing[i] = get_double((*it)[i], "cases[].spacing[]");
  }
  if (auto it = obj.find("num_classes"); it != obj.end())
    spec.num_classes = get_int(*it, "cases[].num_classes");
  if (auto it = obj.find("noise"); it != obj.end())
    spec.noise = get_double(*it, "cases[].noise");
  if (auto it = obj.find("n_models"); it != obj.end())
    spec.n_models = get_int(*it, "cases[].n_models");
  if (auto it = obj.find("case_id"); it != obj.end())
    spec.case_id = get_string(*it, "cases[].case_id");

  const json& shapes = require(obj, "cases[].", "shapes");
  if (!shapes.is_array()) throw ConfigError("cases[].shapes must be an array");
  for (const auto& s : shapes) spec.shapes.push_back(parse_shape(s));
  return spec;
}

}  // namespace

std::vector<SynthSpec> load_synth_specs(const std::string& path) {
  const json root = parse_file(path);
  check_object(root, "synth spec");
  check_known(root, "", {"cases"});
  const json& cases = require(root, "", "cases");
  if (!cases.is_array() || cases.empty())
    throw ConfigError("cases must be a non-empty array");
  std::vector<SynthSpec> specs;
  for (const auto& c : cases) specs.push_back(parse_synth_case(c));
  return specs;
}

}  // namespace fuseval
