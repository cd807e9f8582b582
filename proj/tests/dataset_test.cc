// tests/dataset_test.cc

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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "doctest.h"
#include "mixret/dataset.h"
#include "mixret/wave.h"

using namespace mixret;

namespace {

SubsetSpec tiny_spec(SubsetName name, std::vector<double> grid = {0.0}) {
  SubsetSpec spec = SubsetSpec::for_name(name, std::move(grid));
  spec.counts = {3, 1, 1, 1, 1, 1};  // 8 clips per cell
  return spec;
}

EvalDataConfig tiny_data() {
  EvalDataConfig cfg;
  cfg.duration_s = 0.2;
  cfg.seed = 17;
  return cfg;
}

}  // namespace

TEST_SUITE("dataset") {

TEST_CASE("subset presets encode the protocol") {
  SubsetSpec a = SubsetSpec::for_name(SubsetName::kFactoryA);
  CHECK(a.reference_noise_kind == SynthKind::kNoiseStationary);
  CHECK(a.test_noise_kind == SynthKind::kNoiseStationary);
  SubsetSpec b = SubsetSpec::for_name(SubsetName::kFactoryB);
  CHECK(b.reference_noise_kind == SynthKind::kNoiseNonstationary);
  SubsetSpec m = SubsetSpec::for_name(SubsetName::kMismatch);
  CHECK(m.reference_noise_kind == SynthKind::kNoiseNonstationary);
  CHECK(m.test_noise_kind == SynthKind::kNoiseStationary);
  CHECK(m.snr_grid == std::vector<double>{-10, -5, 0, 5, 10, 20, 30});

  SubsetSpec bad = m;
  bad.reference_noise_kind = SynthKind::kNoiseStationary;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  SubsetSpec empty_grid = a;
  empty_grid.snr_grid.clear();
  CHECK_THROWS_AS(empty_grid.validate(), ConfigError);
}

TEST_CASE("cell counts are conserved exactly") {
  SubsetSpec spec = tiny_spec(SubsetName::kFactoryA, {0.0, 5.0});
  EvalPools pools = build_eval_pools({spec}, tiny_data());
  BuildResult built = build_subset(spec, pools, 99);
  // 6 machines x 2 snrs x 8 clips
  CHECK(built.manifest.rows.size() == 6u * 2u * 8u);
  CHECK(built.mixtures.size() == built.manifest.rows.size());

  std::map<std::string, int> split_counts;
  for (const ManifestRow& r : built.manifest.rows)
    split_counts[r.split + "/" + r.domain + (r.is_anomalous ? "/anom" : "/norm")]++;
  CHECK(split_counts["reference/source/norm"] == 6 * 2 * 3);
  CHECK(split_counts["reference/target/norm"] == 6 * 2 * 1);
  CHECK(split_counts["test/source/norm"] == 6 * 2 * 1);
  CHECK(split_counts["test/source/anom"] == 6 * 2 * 1);
  CHECK(split_counts["test/target/norm"] == 6 * 2 * 1);
  CHECK(split_counts["test/target/anom"] == 6 * 2 * 1);
}

TEST_CASE("mismatch subset pins noise kinds per split") {
  SubsetSpec spec = tiny_spec(SubsetName::kMismatch);
  EvalPools pools = build_eval_pools({spec}, tiny_data());
  BuildResult built = build_subset(spec, pools, 5);
  for (const ManifestRow& r : built.manifest.rows) {
    if (r.split == "reference")
      CHECK(r.noise_clip_id.rfind("nonstat_", 0) == 0);
    else
      CHECK(r.noise_clip_id.rfind("stat_", 0) == 0);
  }
}

TEST_CASE("references contain normals only; noise ids unique per cell") {
  SubsetSpec spec = tiny_spec(SubsetName::kFactoryB, {-5.0, 0.0});
  EvalPools pools = build_eval_pools({spec}, tiny_data());
  BuildResult built = build_subset(spec, pools, 31);
  std::map<std::pair<std::string, double>, std::set<std::string>> per_cell;
  for (const ManifestRow& r : built.manifest.rows) {
    if (r.split == "reference") CHECK(!r.is_anomalous);
    CHECK(per_cell[{r.machine_type, r.snr_db}].insert(r.noise_clip_id).second);
  }
}

TEST_CASE("re-measured SNR matches the manifest within 1e-6 dB") {
  SubsetSpec spec = tiny_spec(SubsetName::kMismatch);
  EvalPools pools = build_eval_pools({spec}, tiny_data());
  BuildResult built = build_subset(spec, pools, 12);
  for (const ManifestRow& r : built.manifest.rows) {
    const PoolClip* mclip = pools.find_machine_clip(r.machine_type, r.machine_clip_id());
    const PoolClip* nclip = pools.find_noise_clip(r.noise_clip_id);
    REQUIRE(mclip != nullptr);
    REQUIRE(nclip != nullptr);
    CHECK(mclip->spec.seed == r.seed);
    Waveform clean = render_clip(*mclip);
    Waveform noise = render_clip(*nclip);
    double p1 = mean_power(clean);
    double p2 = mean_power(noise);
    double a2 = std::sqrt(p1 / (std::pow(10.0, r.snr_db / 10.0) * p2));
    double measured = 10.0 * std::log10(p1 / (a2 * a2 * p2));
    CHECK(std::abs(measured - r.snr_db) < 1e-6);
  }
}

TEST_CASE("disk mode reproduces identical files per seed") {
  namespace fs = std::filesystem;
  fs::path base = fs::temp_directory_path() / "mixret_dataset_test";
  fs::remove_all(base);
  SubsetSpec spec = tiny_spec(SubsetName::kFactoryA);
  EvalPools pools = build_eval_pools({spec}, tiny_data());

  auto hash_tree = [](const fs::path& root) {
    std::vector<std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(root))
      if (e.is_regular_file()) files.push_back(e.path().string());
    std::sort(files.begin(), files.end());
    uint64_t h = 0xcbf29ce484222325ull;
    for (const std::string& f : files) {
      std::string rel = f.substr(root.string().size());
      h = fnv1a64(rel.data(), rel.size(), h);
      std::ifstream is(f, std::ios::binary);
      std::string body((std::istreambuf_iterator<char>(is)),
                       std::istreambuf_iterator<char>());
      h = fnv1a64(body.data(), body.size(), h);
    }
    return h;
  };

  BuildResult run1 = build_subset(spec, pools, 77, (base / "run1").string());
  BuildResult run2 = build_subset(spec, pools, 77, (base / "run2").string());
  CHECK(run1.manifest.content_hash() == run2.manifest.content_hash());
  CHECK(hash_tree(base / "run1") == hash_tree(base / "run2"));

  BuildResult other = build_subset(spec, pools, 78, (base / "run3").string());
  CHECK(other.manifest.content_hash() != run1.manifest.content_hash());

  // one emitted file is a readable 16 kHz mono wav
  Waveform w = read_wav((base / "run1" / run1.manifest.rows[0].clip_path).string());
  CHECK(w.sample_rate == kSampleRate);
  CHECK(w.samples.size() == static_cast<size_t>(0.2 * kSampleRate));

  // manifest csv round trip
  DatasetManifest loaded =
      DatasetManifest::load_csv((base / "run1" / "factory_a_manifest.csv").string());
  REQUIRE(loaded.rows.size() == run1.manifest.rows.size());
  CHECK(loaded.subset == "factory_a");
  CHECK(loaded.content_hash() == run1.manifest.content_hash());
}

TEST_CASE("exhausted pools raise the documented errors") {
  SubsetSpec spec = tiny_spec(SubsetName::kFactoryA);
  EvalPools pools = build_eval_pools({spec}, tiny_data());

  SUBCASE("noise pool too small") {
    EvalPools starved = pools;
    starved.stationary_noise.resize(3);  // cell needs 8
    CHECK_THROWS_AS(build_subset(spec, starved, 1), InsufficientNoisePool);
  }
  SUBCASE("machine pool too small") {
    EvalPools starved = pools;
    starved.machines[2].source_normals.resize(1);
    CHECK_THROWS_AS(build_subset(spec, starved, 1), InsufficientMachinePool);
  }
}

TEST_CASE("ingested directories become pools") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "mixret_ingest_test";
  fs::remove_all(dir);
  fs::create_directories(dir);
  Waveform w;
  w.samples.assign(1600, 0.05);
  write_wav(w, (dir / "clip_normal_0.wav").string());
  write_wav(w, (dir / "clip_anomaly_0.wav").string());
  std::vector<PoolClip> pool = pool_from_directory(dir.string());
  REQUIRE(pool.size() == 2);
  CHECK(pool[0].id == "clip_anomaly_0");
  CHECK(pool[0].anomalous);
  CHECK(!pool[1].anomalous);
  CHECK(render_clip(pool[0]).samples.size() == 1600);
}

}  // TEST_SUITE
