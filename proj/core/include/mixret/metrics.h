// core/include/mixret/metrics.h

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

#ifndef MIXRET_METRICS_H_
#define MIXRET_METRICS_H_

#include <string>
#include <vector>

#include "mixret/scoring.h"

namespace mixret {

struct ScoredClip {
  std::string clip_id;
  double anomaly_score = 0.0;
  bool is_anomalous = false;
  Domain domain = Domain::kSource;
};

// ROC AUC as Mann-Whitney U / (n_pos * n_neg); tied scores count 1/2.
// Throws OneClassOnly unless both classes are present.
double auc(const std::vector<ScoredClip>& scores);

// Area under the ROC curve restricted to FPR in [0, p], divided by p.
// Trapezoidal interpolation, including at the FPR = p cut. p defaults to 0.1
// at call sites following the DCASE convention. pauc(scores, 1) == auc.
double pauc(const std::vector<ScoredClip>& scores, double p);

constexpr double kDefaultPaucP = 0.1;

// evaluate_cell floors each component here so degenerate cells (a raw AUC or
// pAUC of exactly 0) stay aggregatable.
constexpr double kMetricFloor = 1e-3;

// Harmonic mean of (source_auc, target_auc, pauc). Throws ZeroComponent when
// any component is <= 0.
double official_score(double source_auc, double target_auc, double pauc_value);

// Harmonic mean over a declared set of values; used for the SNR-set
// aggregates. Throws ZeroComponent.
double aggregate_hmean(const std::vector<double>& values);

// One evaluated (machine, subset, snr) cell. AUC per domain uses that
// domain's normal clips against all anomalous clips regardless of domain
// (DCASE convention); pAUC pools both domains.
struct EvalCell {
  std::string machine_type;
  std::string subset;
  double snr_db = 0.0;
  double source_auc = 0.0;
  double target_auc = 0.0;
  double pauc = 0.0;
  double official = 0.0;
};

struct EvalReport {
  std::string name;
  std::vector<EvalCell> cells;
  std::vector<double> low_snr_set = {-10.0, -5.0, 0.0};

  // Harmonic mean of official scores across machines for one (subset, snr).
  double grid_score(const std::string& subset, double snr_db) const;
  std::vector<double> snr_grid(const std::string& subset) const;
  std::vector<std::string> subsets() const;

  // Aggregates over every (subset, snr) grid cell.
  bool has_low_cells() const;
  double hmean_low() const;  // cells with snr in low_snr_set
  double hmean_all() const;

  void save_csv(const std::string& path) const;
  static EvalReport load_csv(const std::string& path);
  std::string to_json_string() const;
};

// Computes the per-domain metrics of one cell from scored test clips.
EvalCell evaluate_cell(const std::string& machine_type, const std::string& subset,
                       double snr_db, const std::vector<ScoredClip>& scores,
                       double pauc_p = kDefaultPaucP);

// Rendered Table-style grid, scores x100 with one decimal: one row per
// report, columns ordered subset x snr plus the two harmonic-mean columns.
std::string render_report_table(const std::vector<EvalReport>& reports);

}  // namespace mixret

#endif  // MIXRET_METRICS_H_
