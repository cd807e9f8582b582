// tests/metrics_test.cc

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
#include <cstdio>
#include <filesystem>

#include "doctest.h"
#include "mixret/metrics.h"
#include "oracles.h"

using namespace mixret;

namespace {

std::vector<ScoredClip> scored(std::vector<double> normals, std::vector<double> anomalies) {
  std::vector<ScoredClip> out;
  for (double v : normals) out.push_back({"n", v, false, Domain::kSource});
  for (double v : anomalies) out.push_back({"a", v, true, Domain::kSource});
  return out;
}

std::vector<ScoredClip> random_scores(Rng& rng, int max_clips, bool force_ties) {
  int n_pos = rng.uniform_int(1, max_clips / 2);
  int n_neg = rng.uniform_int(1, max_clips / 2);
  std::vector<ScoredClip> out;
  for (int i = 0; i < n_pos + n_neg; ++i) {
    double v = force_ties ? std::floor(rng.uniform(0.0, 6.0)) / 5.0 : rng.gaussian();
    out.push_back({"c", v, i < n_pos, Domain::kSource});
  }
  return out;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("auc on hand-checked sets") {
  CHECK(auc(scored({0.1, 0.2}, {0.8, 0.9})) == doctest::Approx(1.0));
  CHECK(auc(scored({0.4, 0.8}, {0.6, 0.9})) == doctest::Approx(0.75));
  CHECK(auc(scored({0.5, 0.5}, {0.5, 0.5})) == doctest::Approx(0.5));  // all ties
  CHECK_THROWS_AS(auc(scored({0.1}, {})), OneClassOnly);
}

TEST_CASE("pauc identities") {
  auto s = scored({0.1, 0.3, 0.6}, {0.2, 0.8, 0.9});
  CHECK(pauc(s, 1.0) == doctest::Approx(auc(s)).epsilon(1e-12));
  CHECK(pauc(scored({0.1, 0.2}, {0.8, 0.9}), 0.1) == doctest::Approx(1.0));
  CHECK_THROWS_AS(pauc(s, 0.0), InvalidP);
  CHECK_THROWS_AS(pauc(s, 1.5), InvalidP);
}

TEST_CASE("auc and pauc match brute-force oracles on random sets") {
  Rng rng(424242);
  const double ps[] = {0.05, 0.1, 0.25, 0.5, 1.0};
  for (int trial = 0; trial < 120; ++trial) {
    std::vector<ScoredClip> s = random_scores(rng, 20, trial % 3 == 0);
    double impl_auc = auc(s);
    double oracle_auc = testing::auc_pair_counting(s);
    CHECK(std::abs(impl_auc - oracle_auc) < 1e-10);
    for (double p : ps) {
      double impl = pauc(s, p);
      double oracle = testing::pauc_threshold_enumeration(s, p);
      CHECK(std::abs(impl - oracle) < 1e-10);
    }
  }
}

TEST_CASE("documented pauc worked example") {
  // 10 normals at 0.1..1.0, one anomaly at 0.55, p = 0.5
  std::vector<double> normals;
  for (int i = 1; i <= 10; ++i) normals.push_back(0.1 * i);
  auto s = scored(normals, {0.55});
  double oracle = testing::pauc_threshold_enumeration(s, 0.5);
  CHECK(pauc(s, 0.5) == doctest::Approx(oracle).epsilon(1e-12));
}

TEST_CASE("auc is invariant under strictly increasing transforms") {
  Rng rng(5150);
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<ScoredClip> s = random_scores(rng, 16, trial % 2 == 0);
    double base = auc(s);
    std::vector<ScoredClip> warped = s;
    for (ScoredClip& c : warped) c.anomaly_score = std::exp(0.5 * c.anomaly_score) + 3.0;
    CHECK(auc(warped) == doctest::Approx(base).epsilon(1e-12));
  }
}

TEST_CASE("negating scores flips the tie-free auc") {
  Rng rng(606);
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<ScoredClip> s = random_scores(rng, 14, false);
    std::vector<ScoredClip> neg = s;
    for (ScoredClip& c : neg) c.anomaly_score = -c.anomaly_score;
    CHECK(auc(neg) == doctest::Approx(1.0 - auc(s)).epsilon(1e-12));
  }
}

TEST_CASE("official score") {
  CHECK(official_score(1.0, 1.0, 1.0) == doctest::Approx(1.0));
  CHECK(official_score(0.6, 0.9, 0.9) ==
        doctest::Approx(3.0 / (1.0 / 0.6 + 1.0 / 0.9 + 1.0 / 0.9)).epsilon(1e-12));
  CHECK_THROWS_AS(official_score(0.0, 0.9, 0.9), ZeroComponent);
  // bounded by the weakest component, equality only when all agree
  CHECK(official_score(0.6, 0.9, 0.9) < 0.9);
  CHECK(official_score(0.6, 0.9, 0.9) > 0.6);
}

TEST_CASE("aggregate harmonic means") {
  CHECK(aggregate_hmean({72, 72, 72}) == doctest::Approx(72.0));
  CHECK(aggregate_hmean({60, 90}) == doctest::Approx(72.0));
  CHECK_THROWS_AS(aggregate_hmean({60, 0}), ZeroComponent);
}

TEST_CASE("published low-SNR aggregation cross-check") {
  // Nine low-SNR cells of a published per-SNR row; their harmonic mean is
  // reported as 66.0 at one decimal.
  std::vector<double> cells = {62.0, 77.2, 86.8, 69.3, 78.3, 86.3, 47.7, 50.9, 61.5};
  double h = aggregate_hmean(cells);
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%.1f", h);
  CHECK(std::string(buf) == "66.0");
}

TEST_CASE("evaluate_cell splits domains per the DCASE convention") {
  std::vector<ScoredClip> scores;
  // 2 source normals scoring low, 2 target normals scoring mid, anomalies high
  scores.push_back({"sn1", 0.1, false, Domain::kSource});
  scores.push_back({"sn2", 0.2, false, Domain::kSource});
  scores.push_back({"tn1", 0.3, false, Domain::kTarget});
  scores.push_back({"tn2", 0.4, false, Domain::kTarget});
  scores.push_back({"sa", 0.8, true, Domain::kSource});
  scores.push_back({"ta", 0.9, true, Domain::kTarget});
  EvalCell cell = evaluate_cell("rotor", "mismatch", 0.0, scores);
  CHECK(cell.source_auc == doctest::Approx(1.0));
  CHECK(cell.target_auc == doctest::Approx(1.0));
  CHECK(cell.pauc == doctest::Approx(1.0));
  CHECK(cell.official == doctest::Approx(1.0));
}

TEST_CASE("report grids, aggregates and serialization") {
  EvalReport r;
  r.name = "demo";
  for (const char* machine : {"rotor", "pump"}) {
    for (double snr : {-10.0, 0.0, 10.0}) {
      EvalCell c;
      c.machine_type = machine;
      c.subset = "factory_a";
      c.snr_db = snr;
      c.source_auc = 0.8;
      c.target_auc = 0.7;
      c.pauc = 0.6;
      c.official = official_score(0.8, 0.7, 0.6) * (machine[0] == 'r' ? 1.0 : 0.9);
      r.cells.push_back(c);
    }
  }
  CHECK(r.subsets() == std::vector<std::string>{"factory_a"});
  CHECK(r.snr_grid("factory_a") == std::vector<double>{-10.0, 0.0, 10.0});
  double cell_val = r.grid_score("factory_a", 0.0);
  double expect = aggregate_hmean({r.cells[1].official, r.cells[4].official});
  CHECK(cell_val == doctest::Approx(expect).epsilon(1e-12));
  CHECK(r.has_low_cells());
  CHECK(r.hmean_low() ==
        doctest::Approx(aggregate_hmean({r.grid_score("factory_a", -10.0),
                                         r.grid_score("factory_a", 0.0)})).epsilon(1e-12));
  CHECK(r.hmean_all() > 0.0);

  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "mixret_metrics_test";
  fs::create_directories(dir);
  std::string path = (dir / "report.csv").string();
  r.save_csv(path);
  EvalReport back = EvalReport::load_csv(path);
  REQUIRE(back.cells.size() == r.cells.size());
  for (size_t i = 0; i < r.cells.size(); ++i) {
    CHECK(back.cells[i].machine_type == r.cells[i].machine_type);
    CHECK(back.cells[i].official == doctest::Approx(r.cells[i].official).epsilon(1e-9));
  }

  std::string table = render_report_table({r});
  CHECK(table.find("factory_a@-10") != std::string::npos);
  CHECK(table.find("demo") != std::string::npos);
  CHECK(r.to_json_string().find("hmean_all") != std::string::npos);
}

}  // TEST_SUITE
