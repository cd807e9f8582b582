// tests/run_config_test.cc

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

#include "doctest.h"
#include "mixret/run_config.h"

using namespace mixret;

TEST_SUITE("run_config") {

TEST_CASE("JSON round trip is the identity") {
  RunConfig cfg;
  cfg.reseed(12345);
  cfg.out_dir = "runs/demo";
  cfg.jobs = 2;
  cfg.synth.subsets = {"mismatch"};
  cfg.synth.snr_grid = {-10, 0, 10};
  cfg.synth.counts.ref_source = 12;
  cfg.synth.duration_s = 2.0;
  cfg.train.steps = 600;
  cfg.train.batch_size = 8;
  cfg.train.snr_policy = SnrPolicy::fixed(0.0);
  cfg.train.objective = TrainObjective::kDenoise;
  cfg.train.mse_reduce = MseReduce::kMean;
  cfg.encoder.d_model = 32;
  cfg.eval.metric = "cosine";
  cfg.sweep.axis = "loss_weights";
  cfg.sweep.grid = {"1,0", "0,1", "1,1"};

  std::string once = cfg.to_json_string();
  RunConfig back = RunConfig::from_json_string(once);
  CHECK(back.to_json_string() == once);

  CHECK(back.seed == cfg.seed);
  CHECK(back.train.objective == TrainObjective::kDenoise);
  CHECK(back.train.mse_reduce == MseReduce::kMean);
  CHECK(back.train.snr_policy.kind == SnrPolicy::Kind::kFixed);
  CHECK(back.synth.counts.ref_source == 12);
  CHECK(back.eval.metric == "cosine");
  CHECK(back.sweep.grid.size() == 3);
}

TEST_CASE("reseed derives distinct sub-seeds deterministically") {
  RunConfig a, b;
  a.reseed(42);
  b.reseed(42);
  CHECK(a.pretrain.seed == b.pretrain.seed);
  CHECK(a.train.seed == b.train.seed);
  CHECK(a.encoder.seed == b.encoder.seed);
  CHECK(a.pretrain.seed != a.train.seed);
  CHECK(a.encoder.seed != a.train.seed);
  a.reseed(43);
  CHECK(a.pretrain.seed != b.pretrain.seed);
}

TEST_CASE("subset specs inherit grid and counts") {
  RunConfig cfg;
  cfg.synth.subsets = {"factory_a", "mismatch"};
  cfg.synth.snr_grid = {0, 5};
  cfg.synth.counts.ref_source = 7;
  std::vector<SubsetSpec> specs = cfg.subset_specs();
  REQUIRE(specs.size() == 2);
  CHECK(specs[0].name == SubsetName::kFactoryA);
  CHECK(specs[1].name == SubsetName::kMismatch);
  for (const SubsetSpec& s : specs) {
    CHECK(s.snr_grid == std::vector<double>{0, 5});
    CHECK(s.counts.ref_source == 7);
  }
}

TEST_CASE("bad configs are ConfigError") {
  CHECK_THROWS_AS(RunConfig::from_json_string("{not json"), ConfigError);
  RunConfig cfg;
  cfg.eval.metric = "chebyshev";
  CHECK_THROWS_AS(cfg.metric_enum(), ConfigError);
  cfg.synth.subsets = {"factory_c"};
  CHECK_THROWS_AS(cfg.subset_specs(), ConfigError);
}

TEST_CASE("file save/load") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "mixret_run_config_test";
  fs::create_directories(dir);
  std::string path = (dir / "config.json").string();
  RunConfig cfg;
  cfg.reseed(7);
  cfg.save(path);
  RunConfig back = RunConfig::load(path);
  CHECK(back.to_json_string() == cfg.to_json_string());
  CHECK_THROWS_AS(RunConfig::load((dir / "missing.json").string()), IoFailure);
}

}  // TEST_SUITE
