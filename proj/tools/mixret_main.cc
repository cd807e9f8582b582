// tools/mixret_main.cc

// Copyright 2026  The mixret authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include <chrono>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "mixret/run_config.h"

namespace fs = std::filesystem;
using namespace mixret;

namespace {

// Existing non-empty run directories are never mutated in place; output goes
// to a fresh timestamped subpath instead.
std::string prepare_out_dir(const std::string& requested, const std::string& command) {
  fs::path dir(requested);
  if (!fs::exists(dir)) {
    fs::create_directories(dir);
    return dir.string();
  }
  if (fs::is_directory(dir) && fs::is_empty(dir)) return dir.string();
  auto now = std::chrono::system_clock::now();
  auto secs = std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch());
  std::ostringstream sub;
  sub << command << "_" << secs.count();
  fs::path fresh = dir / sub.str();
  fs::create_directories(fresh);
  return fresh.string();
}

std::vector<double> parse_grid(const std::string& csv) {
  std::vector<double> grid;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) grid.push_back(std::stod(item));
  }
  if (grid.empty()) throw ConfigError("empty SNR grid: " + csv);
  return grid;
}

// Lists split on ';' when present (grid points may themselves contain
// commas, e.g. loss-weight pairs "1,0;0,1;1,1"), otherwise on ','.
std::vector<std::string> parse_list(const std::string& csv) {
  std::vector<std::string> out;
  char sep = csv.find(';') != std::string::npos ? ';' : ',';
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

SnrPolicy parse_snr_policy(const std::string& s) {
  if (s.rfind("+-", 0) == 0) {
    double d = std::stod(s.substr(2));
    return SnrPolicy::uniform(-d, d);
  }
  size_t colon = s.find(':');
  if (colon != std::string::npos)
    return SnrPolicy::uniform(std::stod(s.substr(0, colon)), std::stod(s.substr(colon + 1)));
  return SnrPolicy::fixed(std::stod(s));
}

RunConfig load_base_config(const std::string& config_path) {
  if (config_path.empty()) return RunConfig();
  return RunConfig::load(config_path);
}

int cmd_synth(const RunConfig& cfg) {
  std::string out = prepare_out_dir(cfg.out_dir, "synth");
  RunConfig persisted = cfg;
  persisted.out_dir = out;
  persisted.save(out + "/dataset.json");

  EvalPools pools = build_eval_pools(cfg.subset_specs(), cfg.eval_data_config());
  for (const SubsetSpec& spec : cfg.subset_specs()) {
    BuildResult built = build_subset(spec, pools, cfg.seed, out);
    std::cout << to_string(spec.name) << ": " << built.manifest.rows.size()
              << " clips, manifest hash " << std::hex << built.manifest.content_hash()
              << std::dec << "\n";
  }
  std::cout << "dataset written to " << out << "\n";
  return 0;
}

int cmd_train(RunConfig cfg) {
  std::string out = prepare_out_dir(cfg.out_dir, "train");
  cfg.out_dir = out;

  PretrainCorpus corpus = build_pretrain_corpus(cfg.pretrain);
  EncoderConfig enc = cfg.encoder;
  if (enc.n_classes == 0) enc.n_classes = corpus.n_classes();
  cfg.encoder = enc;
  cfg.save(out + "/config.json");

  Trainer trainer(corpus, enc, cfg.train);
  trainer.run(out);
  std::cout << "trained " << trainer.step() << " steps; final loss "
            << (trainer.metrics().empty() ? 0.0 : trainer.metrics().back().loss_total)
            << "\ncheckpoint: " << out << "/checkpoints/step_" << trainer.step()
            << ".bin\n";
  return 0;
}

DatasetManifest load_manifest_for(const std::string& dataset_dir, const std::string& subset) {
  return DatasetManifest::load_csv(dataset_dir + "/" + subset + "_manifest.csv");
}

int cmd_eval(const RunConfig& cfg, const std::string& checkpoint,
             const std::string& dataset_dir, std::vector<std::string> subsets) {
  CheckpointInfo info = read_checkpoint(checkpoint);
  RunConfig dataset_cfg = RunConfig::load(dataset_dir + "/dataset.json");
  if (subsets.empty()) subsets = dataset_cfg.synth.subsets;

  std::string out = prepare_out_dir(cfg.out_dir, "eval");
  DirClipSource clips(dataset_dir);
  EvalSettings settings = cfg.eval_settings();

  EvalReport merged;
  merged.name = fs::path(checkpoint).stem().string();
  for (const std::string& subset : subsets) {
    DatasetManifest manifest = load_manifest_for(dataset_dir, subset);
    EvalReport r = run_eval(info.params, info.stats, manifest, clips, settings);
    merged.cells.insert(merged.cells.end(), r.cells.begin(), r.cells.end());
  }
  merged.save_csv(out + "/report.csv");
  std::ofstream js(out + "/report.json");
  js << merged.to_json_string() << "\n";
  std::cout << render_report_table({merged});
  std::cout << "report written to " << out << "\n";
  return 0;
}

int cmd_oracle(const RunConfig& cfg, const std::string& checkpoint,
               const std::string& dataset_dir, const std::string& subset, double snr) {
  CheckpointInfo info = read_checkpoint(checkpoint);
  RunConfig dataset_cfg = RunConfig::load(dataset_dir + "/dataset.json");
  EvalPools pools =
      build_eval_pools(dataset_cfg.subset_specs(), dataset_cfg.eval_data_config());
  DatasetManifest manifest = load_manifest_for(dataset_dir, subset);

  std::string out = prepare_out_dir(cfg.out_dir, "oracle");
  OracleComparison cmp =
      oracle_compare(info.params, info.stats, manifest, pools, snr, cfg.eval_settings());
  cmp.save_csv(out + "/oracle.csv");
  std::cout << subset << " @ " << snr << " dB\n" << cmp.render();
  std::cout << "comparison written to " << out << "\n";
  return 0;
}

int cmd_sweep(const RunConfig& cfg) {
  std::string out = prepare_out_dir(cfg.out_dir, "sweep");
  SweepConfig sc;
  sc.axis = sweep_axis_from_string(cfg.sweep.axis);
  sc.grid = cfg.sweep.grid;
  sc.pretrain = cfg.pretrain;
  sc.encoder = cfg.encoder;
  sc.train = cfg.train;
  sc.subsets = cfg.subset_specs();
  sc.eval_data = cfg.eval_data_config();
  sc.eval = cfg.eval_settings();
  sc.seed = cfg.seed;
  sc.out_dir = out;
  RunConfig persisted = cfg;
  persisted.out_dir = out;
  persisted.save(out + "/config.json");

  std::vector<SweepPointResult> results = run_sweep(sc);
  std::vector<EvalReport> reports;
  for (SweepPointResult& r : results) {
    r.report.name = r.key;
    reports.push_back(r.report);
  }
  std::cout << render_report_table(reports);

  // SNR-vs-score curves per subset (layer sweeps chart layer on the x axis)
  std::vector<ChartSeries> series;
  if (sc.axis == SweepAxis::kLayer) {
    ChartSeries s;
    s.label = "hmean(all)";
    for (const SweepPointResult& r : results) {
      s.x.push_back(std::stod(r.key.substr(6)));
      s.y.push_back(100.0 * r.report.hmean_all());
    }
    series.push_back(std::move(s));
    write_line_chart_svg(series, "layer", "official score x100", out + "/layer_curve.svg");
  } else if (!results.empty()) {
    for (const SweepPointResult& r : results) {
      for (const std::string& subset : r.report.subsets()) {
        ChartSeries s;
        s.label = r.key + " " + subset;
        for (double snr : r.report.snr_grid(subset)) {
          s.x.push_back(snr);
          s.y.push_back(100.0 * r.report.grid_score(subset, snr));
        }
        series.push_back(std::move(s));
      }
    }
    write_line_chart_svg(series, "SNR (dB)", "official score x100", out + "/snr_curves.svg");
  }
  std::cout << "sweep results written to " << out << "\n";
  return 0;
}

int cmd_report(const std::vector<std::string>& inputs,
               const std::vector<std::string>& labels, const std::string& out_dir,
               bool svg) {
  if (inputs.empty()) throw ConfigError("report: at least one --in file required");
  std::vector<EvalReport> reports;
  for (size_t i = 0; i < inputs.size(); ++i) {
    EvalReport r = EvalReport::load_csv(inputs[i]);
    r.name = i < labels.size() ? labels[i] : fs::path(inputs[i]).stem().string();
    reports.push_back(std::move(r));
  }
  std::cout << render_report_table(reports);
  if (!out_dir.empty()) {
    std::string out = prepare_out_dir(out_dir, "report");
    std::ofstream os(out + "/table.txt");
    os << render_report_table(reports);
    if (svg) {
      std::vector<ChartSeries> series;
      for (const EvalReport& r : reports) {
        for (const std::string& subset : r.subsets()) {
          ChartSeries s;
          s.label = r.name + " " + subset;
          for (double snr : r.snr_grid(subset)) {
            s.x.push_back(snr);
            s.y.push_back(100.0 * r.grid_score(subset, snr));
          }
          series.push_back(std::move(s));
        }
      }
      write_line_chart_svg(series, "SNR (dB)", "official score x100",
                           out + "/snr_curves.svg");
    }
    std::cout << "report written to " << out << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SNR-exact mixing, retain-not-denoise pre-training and KNN anomaly "
               "scoring for machine sounds"};
  app.require_subcommand(1);

  std::string config_path, out_dir, checkpoint, dataset_dir, subset_arg, snr_grid_csv;
  std::string snr_policy_str, objective, metric, axis, grid_csv;
  std::vector<std::string> report_inputs, report_labels, eval_subsets;
  uint64_t seed = 0;
  bool seed_set = false, desk = false, svg = false;
  int jobs = 0, steps = 0, batch = 0, layer = 0, k = 0;
  double alpha = -1.0, beta = -1.0, duration = 0.0, severity = -1.0, snr = 0.0,
         lambda = -1.0;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON run configuration file");
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_option("--seed", seed, "global seed")->each([&](const std::string&) {
      seed_set = true;
    });
    cmd->add_option("--jobs", jobs, "worker cap (0 = hardware)");
  };

  CLI::App* synth = app.add_subcommand("synth", "build evaluation subsets + manifests");
  add_common(synth);
  synth->add_option("--subset", subset_arg, "subset name or comma list (default: all)");
  synth->add_option("--snr-grid", snr_grid_csv, "comma-separated SNR grid in dB");
  synth->add_option("--duration", duration, "clip duration in seconds");
  synth->add_option("--severity", severity, "anomaly severity knob");

  CLI::App* train = app.add_subcommand("train", "pre-train an encoder");
  add_common(train);
  train->add_option("--alpha", alpha, "tagging loss weight");
  train->add_option("--beta", beta, "mixture alignment loss weight");
  train->add_option("--objective", objective, "retain | denoise");
  train->add_option("--snr", snr_policy_str, "training SNR policy: '0', '+-5' or 'lo:hi'");
  train->add_option("--steps", steps, "optimizer steps");
  train->add_option("--batch", batch, "batch size");
  train->add_flag("--desk", desk, "desk-scale defaults (2000 steps, batch 16)");

  CLI::App* eval_cmd = app.add_subcommand("eval", "score a dataset with a checkpoint");
  add_common(eval_cmd);
  eval_cmd->add_option("--checkpoint", checkpoint, "trainer checkpoint")->required();
  eval_cmd->add_option("--dataset", dataset_dir, "dataset directory from synth")->required();
  eval_cmd->add_option("--subset", eval_subsets, "subset(s) to evaluate");
  eval_cmd->add_option("--layer", layer, "encoder tap (0 = default)");
  eval_cmd->add_option("--k", k, "neighbors");
  eval_cmd->add_option("--metric", metric, "euclidean | cosine");

  CLI::App* oracle = app.add_subcommand("oracle", "wave vs embedding-mixture comparison");
  add_common(oracle);
  oracle->add_option("--checkpoint", checkpoint, "trainer checkpoint")->required();
  oracle->add_option("--dataset", dataset_dir, "dataset directory from synth")->required();
  oracle->add_option("--subset", subset_arg, "subset (default mismatch)");
  oracle->add_option("--snr", snr, "SNR cell to compare at (dB)");
  oracle->add_option("--lambda", lambda, "convex combination weight");
  oracle->add_option("--layer", layer, "encoder tap (0 = default)");

  CLI::App* sweep = app.add_subcommand("sweep", "train/evaluate across one axis");
  add_common(sweep);
  sweep->add_option("--axis", axis, "training_snr | layer | loss_weights | pretrain_data");
  sweep->add_option("--grid", grid_csv, "comma-separated grid points");

  CLI::App* report = app.add_subcommand("report", "render report CSVs as a grid");
  report->add_option("--in", report_inputs, "report CSV file(s)");
  report->add_option("--label", report_labels, "row label(s)");
  report->add_option("--out", out_dir, "output directory");
  report->add_flag("--svg", svg, "emit SVG line charts");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    RunConfig cfg = load_base_config(config_path);
    if (seed_set) cfg.reseed(seed);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (jobs > 0) {
      cfg.jobs = jobs;
      cfg.train.jobs = jobs;
    }

    if (app.got_subcommand(synth)) {
      if (!subset_arg.empty() && subset_arg != "all") cfg.synth.subsets = parse_list(subset_arg);
      if (!snr_grid_csv.empty()) cfg.synth.snr_grid = parse_grid(snr_grid_csv);
      if (duration > 0.0) cfg.synth.duration_s = duration;
      if (severity >= 0.0) cfg.synth.anomaly_severity = severity;
      for (const std::string& s : cfg.synth.subsets) subset_from_string(s);  // validate
      return cmd_synth(cfg);
    }
    if (app.got_subcommand(train)) {
      if (desk) {
        TrainConfig d = TrainConfig::desk_default();
        d.seed = cfg.train.seed;
        cfg.train = d;
      }
      if (alpha >= 0.0) cfg.train.loss_weights.alpha = alpha;
      if (beta >= 0.0) cfg.train.loss_weights.beta = beta;
      if (!objective.empty()) {
        if (objective == "retain") cfg.train.objective = TrainObjective::kRetainTagging;
        else if (objective == "denoise") cfg.train.objective = TrainObjective::kDenoise;
        else throw ConfigError("unknown objective: " + objective);
      }
      if (!snr_policy_str.empty()) cfg.train.snr_policy = parse_snr_policy(snr_policy_str);
      if (steps > 0) cfg.train.steps = steps;
      if (batch > 0) cfg.train.batch_size = batch;
      return cmd_train(cfg);
    }
    if (app.got_subcommand(eval_cmd)) {
      if (layer > 0) cfg.eval.layer = layer;
      if (k > 0) cfg.eval.k = k;
      if (!metric.empty()) cfg.eval.metric = metric;
      return cmd_eval(cfg, checkpoint, dataset_dir, eval_subsets);
    }
    if (app.got_subcommand(oracle)) {
      if (layer > 0) cfg.eval.layer = layer;
      if (lambda >= 0.0) cfg.eval.oracle_lambda = lambda;
      std::string s = subset_arg.empty() ? "mismatch" : subset_arg;
      return cmd_oracle(cfg, checkpoint, dataset_dir, s, snr);
    }
    if (app.got_subcommand(sweep)) {
      if (!axis.empty()) cfg.sweep.axis = axis;
      if (!grid_csv.empty()) cfg.sweep.grid = parse_list(grid_csv);
      return cmd_sweep(cfg);
    }
    if (app.got_subcommand(report))
      return cmd_report(report_inputs, report_labels, out_dir, svg);
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const NonFiniteLoss& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 4;
  } catch (const InvalidParams& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    // data errors: missing/corrupt files, exhausted pools, bad formats
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
