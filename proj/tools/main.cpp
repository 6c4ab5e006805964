#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fuseval/config.hpp"
#include "fuseval/ensemble.hpp"
#include "fuseval/errors.hpp"
#include "fuseval/losses.hpp"
#include "fuseval/metrics.hpp"
#include "fuseval/nifti.hpp"
#include "fuseval/postprocess.hpp"
#include "fuseval/render.hpp"
#include "fuseval/report.hpp"
#include "fuseval/synth.hpp"
#include "fuseval/volume.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

using namespace fuseval;

RunConfig load_config_or_default(const std::string& path, int workers_flag) {
  RunConfig cfg = path.empty() ? run_config_from_env() : load_run_config(path);
  if (workers_flag > 0) cfg.workers = workers_flag;
  return cfg;
}

// Runs fn(0..n-1) on up to `workers` threads. Returns one slot per item:
// empty string on success, the exception message on failure. Work items must
// not share mutable state.
std::vector<std::string> for_each_parallel(int workers, std::size_t n,
                                           const std::function<void(std::size_t)>& fn) {
  std::vector<std::string> errors(n);
  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      } catch (...) {
        errors[i] = "unknown error";
      }
    }
  };
  const std::size_t nw = std::min<std::size_t>(std::max(workers, 1), std::max<std::size_t>(n, 1));
  if (nw <= 1) {
    work();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(nw);
    for (std::size_t t = 0; t < nw; ++t) threads.emplace_back(work);
    for (auto& t : threads) t.join();
  }
  return errors;
}

// Prints per-item failures and returns the exit code for a batch command.
int report_failures(const std::vector<std::string>& errors, const std::vector<std::string>& names) {
  std::size_t failed = 0;
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (errors[i].empty()) continue;
    std::cerr << "error: case " << names[i] << ": " << errors[i] << "\n";
    ++failed;
  }
  if (failed > 0) {
    std::cerr << failed << " of " << errors.size() << " cases failed\n";
    return 1;
  }
  return 0;
}

bool is_nifti_name(const std::string& name) {
  return name.ends_with(".nii") || name.ends_with(".nii.gz");
}

// Maps case id (filename stem) -> path for every NIfTI file in dir.
std::map<std::string, fs::path> index_cases(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::map<std::string, fs::path> cases;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    if (!is_nifti_name(name)) continue;
    const std::string id = case_id_from_path(name);
    if (!cases.emplace(id, entry.path()).second)
      throw DataError("duplicate case id '" + id + "' in " + dir.string());
  }
  return cases;
}

int cmd_fuse(const std::string& manifest_path, const std::string& out_dir, const RunConfig& cfg) {
  const std::vector<CaseManifest> cases = load_manifest(manifest_path);
  fs::create_directories(fs::path(out_dir) / "probs");

  std::vector<std::string> names;
  names.reserve(cases.size());
  for (const auto& c : cases) names.push_back(c.case_id);

  const auto errors = for_each_parallel(cfg.workers, cases.size(), [&](std::size_t i) {
    const CaseManifest& c = cases[i];
    EnsembleAccumulator acc;
    for (const auto& member : c.member_paths) acc.add(read_probs(member));
    ProbVolume fused = acc.fuse();
    fused.meta.case_id = c.case_id;
    LabelVolume labels = argmax_labels(fused);
    labels.meta.case_id = c.case_id;
    write_nifti(fused, (fs::path(out_dir) / "probs" / (c.case_id + "_prob.nii.gz")).string());
    write_nifti(labels, (fs::path(out_dir) / (c.case_id + ".nii.gz")).string());
  });
  return report_failures(errors, names);
}

int cmd_postproc(const std::string& in_path, const std::string& out_path, const RunConfig& cfg) {
  if (fs::is_directory(in_path)) {
    const auto cases = index_cases(in_path);
    fs::create_directories(out_path);
    std::vector<std::string> names;
    std::vector<fs::path> inputs;
    for (const auto& [id, path] : cases) {
      names.push_back(id);
      inputs.push_back(path);
    }
    const auto errors = for_each_parallel(cfg.workers, inputs.size(), [&](std::size_t i) {
      const LabelVolume out = postprocess(read_labels(inputs[i].string()), cfg.postprocess);
      write_nifti(out, (fs::path(out_path) / inputs[i].filename()).string());
    });
    return report_failures(errors, names);
  }
  const LabelVolume out = postprocess(read_labels(in_path), cfg.postprocess);
  if (const fs::path parent = fs::path(out_path).parent_path(); !parent.empty())
    fs::create_directories(parent);
  write_nifti(out, out_path);
  return 0;
}

int cmd_eval(const std::string& pred_dir, const std::string& gt_dir, const std::string& out_csv,
             const RunConfig& cfg) {
  const auto preds = index_cases(pred_dir);
  const auto gts = index_cases(gt_dir);

  std::vector<std::string> ids;
  std::vector<fs::path> pred_paths, gt_paths;
  for (const auto& [id, path] : preds) {
    auto it = gts.find(id);
    if (it == gts.end()) {
      std::cerr << "warning: no ground truth for case " << id << ", skipped\n";
      continue;
    }
    ids.push_back(id);
    pred_paths.push_back(path);
    gt_paths.push_back(it->second);
  }
  for (const auto& [id, path] : gts)
    if (!preds.count(id)) std::cerr << "warning: no prediction for case " << id << ", skipped\n";
  if (ids.empty()) {
    std::cerr << "error: no case appears in both " << pred_dir << " and " << gt_dir << "\n";
    return 1;
  }

  std::vector<std::vector<MetricReport>> per_case(ids.size());
  const auto errors = for_each_parallel(cfg.workers, ids.size(), [&](std::size_t i) {
    LabelVolume pred = read_labels(pred_paths[i].string());
    LabelVolume gt = read_labels(gt_paths[i].string());
    // Report under the filename stem the pair was matched by, whatever the
    // stored descriptions say.
    pred.meta.case_id = ids[i];
    gt.meta.case_id = ids[i];
    per_case[i] = evaluate_case(pred, gt, cfg.regions, cfg.lesionwise);
  });
  const int rc = report_failures(errors, ids);
  if (rc != 0) return rc;

  std::vector<MetricReport> rows;
  for (const auto& case_rows : per_case) rows.insert(rows.end(), case_rows.begin(), case_rows.end());
  write_report_csv(rows, cfg.regions, out_csv);
  std::cout << "wrote " << out_csv << " (" << ids.size() << " cases, " << cfg.regions.size()
            << " regions)\n";
  return 0;
}

json breakdown_json(const LossBreakdown& b) {
  json j;
  j["total"] = b.total;
  j["cross_entropy"] = b.cross_entropy;
  j["per_class_dice"] = b.per_class_dice;
  if (b.per_class_jaccard) j["per_class_jaccard"] = *b.per_class_jaccard;
  if (b.per_class_msssim) j["per_class_msssim"] = *b.per_class_msssim;
  if (b.global_term) j["global_term"] = *b.global_term;
  if (b.blob_term) j["blob_term"] = *b.blob_term;
  if (b.blob_class_count) j["blob_class_count"] = *b.blob_class_count;
  return j;
}

int cmd_loss(const std::string& pred_path, const std::string& gt_path, const std::string& out_path,
             const RunConfig& cfg) {
  const ProbVolume pred = read_probs(pred_path);
  const LabelVolume gt = read_labels(gt_path);

  json report;
  report["case_id"] = gt.meta.case_id;
  report["ce_dice"] = breakdown_json(ce_dice_loss(pred, gt));
  report["basnet_hybrid"] = breakdown_json(basnet_hybrid_loss(pred, gt, cfg.msssim));
  report["blob"] = breakdown_json(blob_loss(pred, gt, cfg.blob, cfg.msssim));
  const std::string text = report.dump(2) + "\n";

  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + out_path);
    out << text;
    if (!out) throw IoError("write failed: " + out_path);
  }
  return 0;
}

int cmd_synth(const std::string& spec_path, const std::string& out_dir, const RunConfig& cfg) {
  const std::vector<SynthSpec> specs = load_synth_specs(spec_path);
  fs::create_directories(fs::path(out_dir) / "gt");
  fs::create_directories(fs::path(out_dir) / "members");

  std::vector<std::string> names;
  for (const auto& s : specs)
    names.push_back(s.case_id.empty() ? "case_" + std::to_string(s.seed) : s.case_id);
  {
    std::map<std::string, int> seen;
    for (const auto& n : names)
      if (++seen[n] > 1) throw ConfigError("duplicate case_id in synth spec: " + n);
  }

  std::vector<CaseManifest> manifest(specs.size());
  const auto errors = for_each_parallel(cfg.workers, specs.size(), [&](std::size_t i) {
    const SynthCase sc = make_case(specs[i]);
    const std::string& id = names[i];
    CaseManifest entry;
    entry.case_id = id;
    entry.gt_path = "gt/" + id + ".nii.gz";
    write_nifti(sc.gt, (fs::path(out_dir) / entry.gt_path).string());
    for (std::size_t m = 0; m < sc.members.size(); ++m) {
      char suffix[16];
      std::snprintf(suffix, sizeof(suffix), "_m%02zu", m);
      const std::string rel = "members/" + id + suffix + ".nii.gz";
      write_nifti(sc.members[m], (fs::path(out_dir) / rel).string());
      entry.member_paths.push_back(rel);
    }
    manifest[i] = std::move(entry);
  });
  const int rc = report_failures(errors, names);
  if (rc != 0) return rc;

  save_manifest(manifest, (fs::path(out_dir) / "manifest.json").string());
  std::cout << "wrote " << specs.size() << " cases to " << out_dir << "\n";
  return 0;
}

int cmd_render(const std::vector<std::string>& label_paths, const std::string& axis_str,
               std::int64_t slice_index, const std::string& out_path) {
  std::vector<LabelVolume> volumes;
  volumes.reserve(label_paths.size());
  for (const auto& p : label_paths) volumes.push_back(read_labels(p));
  const SliceImage image = render_slices(volumes, slice_axis_from_string(axis_str), slice_index);
  if (const fs::path parent = fs::path(out_path).parent_path(); !parent.empty())
    fs::create_directories(parent);
  write_ppm(image, out_path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ensemble fusion, post-processing and lesion-wise evaluation for "
               "multi-class segmentation volumes (NIfTI-1)"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "fuseval 0.1.0");

  std::string config_path;
  int workers_flag = 0;
  app.add_option("--config", config_path, "JSON run config (defaults used when omitted)")
      ->check(CLI::ExistingFile);
  app.add_option("--workers", workers_flag, "parallel case workers (overrides config)")
      ->check(CLI::PositiveNumber);

  std::string fuse_manifest, fuse_out;
  CLI::App* fuse = app.add_subcommand(
      "fuse", "Average member probability volumes per case and write fused probs + argmax labels");
  fuse->add_option("manifest", fuse_manifest, "JSON manifest of cases")
      ->required()
      ->check(CLI::ExistingFile);
  fuse->add_option("--out", fuse_out, "output directory")->required();

  std::string post_in, post_out;
  CLI::App* post = app.add_subcommand(
      "postproc", "Size-filter and smooth a label volume (or every volume in a directory)");
  post->add_option("input", post_in, "label volume or directory")
      ->required()
      ->check(CLI::ExistingPath);
  post->add_option("--out", post_out, "output path (file for file input, directory otherwise)")
      ->required();

  std::string eval_pred, eval_gt, eval_out;
  CLI::App* eval = app.add_subcommand(
      "eval", "Evaluate predictions against ground truth and write a per-region CSV report");
  eval->add_option("pred_dir", eval_pred, "directory of predicted label volumes")
      ->required()
      ->check(CLI::ExistingDirectory);
  eval->add_option("gt_dir", eval_gt, "directory of ground-truth label volumes")
      ->required()
      ->check(CLI::ExistingDirectory);
  eval->add_option("--out", eval_out, "CSV output path")->required();

  std::string loss_pred, loss_gt, loss_out;
  CLI::App* loss = app.add_subcommand(
      "loss", "Evaluate the three training losses of one prediction and print a JSON report");
  loss->add_option("pred", loss_pred, "predicted probability volume (4D float)")
      ->required()
      ->check(CLI::ExistingFile);
  loss->add_option("gt", loss_gt, "ground-truth label volume")
      ->required()
      ->check(CLI::ExistingFile);
  loss->add_option("--out", loss_out, "write the JSON here instead of stdout");

  std::string synth_spec, synth_out;
  CLI::App* synth = app.add_subcommand(
      "synth", "Generate deterministic synthetic cases (ground truth + noisy members + manifest)");
  synth->add_option("spec", synth_spec, "JSON synthesis spec")
      ->required()
      ->check(CLI::ExistingFile);
  synth->add_option("--out", synth_out, "output directory")->required();

  std::vector<std::string> render_labels;
  std::string render_axis = "axial", render_out;
  std::int64_t render_index = 0;
  CLI::App* render = app.add_subcommand(
      "render", "Render one slice of up to three label volumes side by side as a PPM image");
  render->add_option("labels", render_labels, "label volumes (1-3)")
      ->required()
      ->expected(1, 3)
      ->check(CLI::ExistingFile);
  render->add_option("--axis", render_axis, "sagittal|coronal|axial (or x|y|z)");
  render->add_option("--index", render_index, "slice index along the axis")->required();
  render->add_option("--out", render_out, "output PPM path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    const RunConfig cfg = load_config_or_default(config_path, workers_flag);
    if (fuse->parsed()) return cmd_fuse(fuse_manifest, fuse_out, cfg);
    if (post->parsed()) return cmd_postproc(post_in, post_out, cfg);
    if (eval->parsed()) return cmd_eval(eval_pred, eval_gt, eval_out, cfg);
    if (loss->parsed()) return cmd_loss(loss_pred, loss_gt, loss_out, cfg);
    if (synth->parsed()) return cmd_synth(synth_spec, synth_out, cfg);
    if (render->parsed()) return cmd_render(render_labels, render_axis, render_index, render_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
