// tests/experiment_test.cc

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

#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "mixret/experiment.h"

using namespace mixret;

namespace {

SubsetSpec tiny_spec(SubsetName name, std::vector<double> grid = {0.0}) {
  SubsetSpec spec = SubsetSpec::for_name(name, std::move(grid));
  spec.counts = {4, 2, 3, 3, 2, 2};
  return spec;
}

EvalDataConfig tiny_data() {
  EvalDataConfig cfg;
  cfg.duration_s = 0.2;
  cfg.seed = 23;
  return cfg;
}

EncoderConfig tiny_encoder() {
  EncoderConfig e;
  e.patch_t = 8;
  e.patch_f = 16;
  e.d_model = 6;
  e.n_layers = 2;
  e.n_classes = 0;
  e.seed = 3;
  return e;
}

}  // namespace

TEST_SUITE("experiment") {

TEST_CASE("injected perfect scores give official 1.0 everywhere") {
  SubsetSpec spec = tiny_spec(SubsetName::kMismatch, {-5.0, 0.0});
  EvalPools pools = build_eval_pools({spec}, tiny_data());
  BuildResult built = build_subset(spec, pools, 50);
  EvalReport report = run_eval_scored(
      built.manifest, [](const ManifestRow& r) { return r.is_anomalous ? 1.0 : 0.0; });
  REQUIRE(report.cells.size() == 12);  // 6 machines x 2 snrs
  for (const EvalCell& c : report.cells) {
    CHECK(c.source_auc == doctest::Approx(1.0));
    CHECK(c.target_auc == doctest::Approx(1.0));
    CHECK(c.pauc == doctest::Approx(1.0));
    CHECK(c.official == doctest::Approx(1.0));
  }
  CHECK(report.grid_score("mismatch", 0.0) == doctest::Approx(1.0));
  // rendered tables print x100 with one decimal
  CHECK(render_report_table({report}).find("100.0") != std::string::npos);
}

TEST_CASE("random scores hover near chance") {
  SubsetSpec spec = tiny_spec(SubsetName::kFactoryA);
  spec.counts = {4, 2, 10, 10, 10, 10};
  EvalPools pools = build_eval_pools({spec}, tiny_data());
  BuildResult built = build_subset(spec, pools, 51);
  Rng rng(8);
  // deterministic pseudo-random scorer keyed on the clip path
  EvalReport report = run_eval_scored(built.manifest, [](const ManifestRow& r) {
    return static_cast<double>(mix_seed(hash_string(r.clip_path)) % 10007) / 10007.0;
  });
  (void)rng;
  for (const EvalCell& c : report.cells) {
    // 3-sigma band for AUC with 20 normals (10 per domain) vs 20 anomalies
    CHECK(c.source_auc > 0.5 - 0.35);
    CHECK(c.source_auc < 0.5 + 0.35);
    CHECK(c.pauc < 0.6);
  }
}

TEST_CASE("run_eval end to end with a real encoder is deterministic") {
  SubsetSpec spec = tiny_spec(SubsetName::kMismatch);
  EvalPools pools = build_eval_pools({spec}, tiny_data());
  BuildResult built = build_subset(spec, pools, 52);
  MemoryClipSource clips(built);

  Parameters params = init_parameters(tiny_encoder());
  NormStats stats{-4.0, 3.0};
  EvalSettings settings;
  settings.layer = 1;

  EvalReport a = run_eval(params, stats, built.manifest, clips, settings);
  EvalReport b = run_eval(params, stats, built.manifest, clips, settings);
  REQUIRE(a.cells.size() == 6);
  for (size_t i = 0; i < a.cells.size(); ++i) {
    CHECK(a.cells[i].official == b.cells[i].official);
    CHECK(a.cells[i].official > 0.0);
    CHECK(a.cells[i].official <= 1.0);
  }
}

TEST_CASE("run_eval refuses anomalous references") {
  SubsetSpec spec = tiny_spec(SubsetName::kFactoryA);
  EvalPools pools = build_eval_pools({spec}, tiny_data());
  BuildResult built = build_subset(spec, pools, 53);
  BuildResult tampered = built;
  for (ManifestRow& r : tampered.manifest.rows) {
    if (r.split == "reference") {
      r.is_anomalous = true;
      break;
    }
  }
  MemoryClipSource clips(tampered);
  Parameters params = init_parameters(tiny_encoder());
  EvalSettings settings;
  settings.layer = 1;
  CHECK_THROWS_AS(run_eval(params, NormStats{0, 1}, tampered.manifest, clips, settings),
                  InvalidParams);
}

TEST_CASE("oracle comparison produces one row per machine") {
  SubsetSpec spec = tiny_spec(SubsetName::kMismatch);
  EvalPools pools = build_eval_pools({spec}, tiny_data());
  BuildResult built = build_subset(spec, pools, 54);
  Parameters params = init_parameters(tiny_encoder());
  NormStats stats{-4.0, 3.0};
  EvalSettings settings;
  settings.layer = 1;

  OracleComparison cmp =
      oracle_compare(params, stats, built.manifest, pools, 0.0, settings);
  CHECK(cmp.rows.size() == 6);
  for (const OracleComparison::Row& r : cmp.rows) {
    CHECK(r.wave_official > 0.0);
    CHECK(r.oracle_official > 0.0);
  }
  CHECK(cmp.wave_hmean() > 0.0);
  CHECK(cmp.oracle_hmean() > 0.0);
  CHECK(cmp.render().find("Hmean") != std::string::npos);

  CHECK_THROWS_AS(oracle_compare(params, stats, built.manifest, pools, 15.0, settings),
                  InvalidParams);

  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "mixret_experiment_test";
  fs::create_directories(dir);
  cmp.save_csv((dir / "oracle.csv").string());
  std::ifstream is(dir / "oracle.csv");
  std::string header;
  std::getline(is, header);
  CHECK(header == "machine_type,route,official_score");
}

TEST_CASE("layer sweep evaluates each tap of one trained encoder") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "mixret_sweep_test";
  fs::remove_all(dir);

  SweepConfig sc;
  sc.axis = SweepAxis::kLayer;
  sc.grid = {"1", "2"};
  sc.pretrain.machine_families = 2;
  sc.pretrain.attributes_per_family = 2;
  sc.pretrain.clips_per_class = 2;
  sc.pretrain.clips_per_noise_class = 4;
  sc.pretrain.duration_s = 1.0;
  sc.pretrain.seed = 5;
  sc.encoder = tiny_encoder();
  sc.encoder.patch_t = 16;
  sc.train.steps = 4;
  sc.train.batch_size = 2;
  sc.train.grad_accum = 1;
  sc.train.warmup_steps = 2;
  sc.subsets = {tiny_spec(SubsetName::kMismatch)};
  sc.eval_data = tiny_data();
  sc.eval.layer = 1;
  sc.seed = 6;
  sc.out_dir = (dir / "layer").string();

  std::vector<SweepPointResult> results = run_sweep(sc);
  REQUIRE(results.size() == 2);
  CHECK(results[0].key == "layer 1");
  CHECK(results[1].key == "layer 2");
  for (const SweepPointResult& r : results) CHECK(r.report.cells.size() == 6);
  CHECK(fs::exists(dir / "layer" / "comparison.csv"));
  CHECK(fs::exists(dir / "layer" / "layer_1.csv"));

  std::ifstream is(dir / "layer" / "comparison.csv");
  std::string header;
  std::getline(is, header);
  CHECK(header.rfind("point,mismatch@0", 0) == 0);
  CHECK(header.find("hmean_low") != std::string::npos);
  CHECK(header.find("hmean_all") != std::string::npos);
}

TEST_CASE("training-snr sweep keys mirror the policy descriptions") {
  SweepConfig sc;
  sc.axis = SweepAxis::kTrainingSnr;
  sc.grid = {"0", "+-5"};
  sc.pretrain.machine_families = 2;
  sc.pretrain.attributes_per_family = 2;
  sc.pretrain.clips_per_class = 2;
  sc.pretrain.clips_per_noise_class = 4;
  sc.pretrain.duration_s = 1.0;
  sc.pretrain.seed = 5;
  sc.encoder = tiny_encoder();
  sc.encoder.patch_t = 16;
  sc.train.steps = 3;
  sc.train.batch_size = 2;
  sc.train.grad_accum = 1;
  sc.train.warmup_steps = 1;
  SubsetSpec spec = tiny_spec(SubsetName::kFactoryA);
  spec.counts = {3, 1, 1, 1, 1, 1};
  sc.subsets = {spec};
  sc.eval_data = tiny_data();
  sc.eval.layer = 1;
  sc.seed = 7;

  std::vector<SweepPointResult> results = run_sweep(sc);
  REQUIRE(results.size() == 2);
  CHECK(results[0].key == "SNR at 0 dB");
  CHECK(results[1].key == "SNR at +-5 dB");
}

TEST_CASE("loss-weight and pretrain-data sweeps emit one row per point") {
  SweepConfig sc;
  sc.pretrain.machine_families = 2;
  sc.pretrain.attributes_per_family = 2;
  sc.pretrain.clips_per_class = 2;
  sc.pretrain.clips_per_noise_class = 4;
  sc.pretrain.duration_s = 1.0;
  sc.pretrain.seed = 9;
  sc.encoder = tiny_encoder();
  sc.encoder.patch_t = 16;
  sc.train.steps = 3;
  sc.train.batch_size = 2;
  sc.train.grad_accum = 1;
  sc.train.warmup_steps = 1;
  SubsetSpec spec = tiny_spec(SubsetName::kMismatch);
  spec.counts = {3, 1, 1, 1, 1, 1};
  sc.subsets = {spec};
  sc.eval_data = tiny_data();
  sc.eval.layer = 1;
  sc.seed = 10;

  SUBCASE("loss weights") {
    sc.axis = SweepAxis::kLossWeights;
    sc.grid = {"1,0", "0,1", "1,1"};
    std::vector<SweepPointResult> results = run_sweep(sc);
    REQUIRE(results.size() == 3);
    CHECK(results[0].key == "alpha=1 beta=0");
    CHECK(results[1].key == "alpha=0 beta=1");
    CHECK(results[2].key == "alpha=1 beta=1");
  }
  SUBCASE("pretrain data recipes") {
    sc.axis = SweepAxis::kPretrainData;
    sc.grid = {"base", "half"};
    std::vector<SweepPointResult> results = run_sweep(sc);
    REQUIRE(results.size() == 2);
    CHECK(results[0].key == "base");
    CHECK(results[1].key == "half");
  }
  SUBCASE("unknown recipe") {
    sc.axis = SweepAxis::kPretrainData;
    sc.grid = {"everything"};
    CHECK_THROWS_AS(run_sweep(sc), InvalidParams);
  }
}

TEST_CASE("chart emission writes parseable SVG") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "mixret_experiment_test";
  fs::create_directories(dir);
  std::string path = (dir / "chart.svg").string();
  ChartSeries s;
  s.label = "demo";
  s.x = {-10, -5, 0, 5};
  s.y = {50, 60, 70, 80};
  write_line_chart_svg({s}, "SNR (dB)", "score", path);
  std::ifstream is(path);
  std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  CHECK(text.find("<svg") != std::string::npos);
  CHECK(text.find("polyline") != std::string::npos);
}

}  // TEST_SUITE
