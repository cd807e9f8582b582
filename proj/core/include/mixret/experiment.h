// core/include/mixret/experiment.h

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

#ifndef MIXRET_EXPERIMENT_H_
#define MIXRET_EXPERIMENT_H_

#include <functional>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "mixret/dataset.h"
#include "mixret/metrics.h"
#include "mixret/trainer.h"

namespace mixret {

struct EvalSettings {
  int layer = 0;  // 0 = encoder default tap
  int k = 1;
  DistanceMetric metric = DistanceMetric::kEuclidean;
  double pauc_p = kDefaultPaucP;
  double oracle_lambda = 0.5;
  int jobs = 1;
  // Optional score transform (e.g. domain normalization). Identity when
  // empty; off by default, matching unnormalized scoring.
  std::function<double(double, Domain)> score_hook;
};

// Resolves manifest rows to mixture waveforms.
class ClipSource {
 public:
  virtual ~ClipSource() = default;
  virtual Waveform mixture(const ManifestRow& row) const = 0;
};

// Reads the WAVs written by build_subset under a dataset root.
class DirClipSource : public ClipSource {
 public:
  explicit DirClipSource(std::string root) : root_(std::move(root)) {}
  Waveform mixture(const ManifestRow& row) const override;

 private:
  std::string root_;
};

// Serves mixtures kept in memory by an in-memory build_subset call.
class MemoryClipSource : public ClipSource {
 public:
  explicit MemoryClipSource(const BuildResult& built);
  Waveform mixture(const ManifestRow& row) const override;

 private:
  const BuildResult& built_;
  std::unordered_map<std::string, size_t> index_;
};

// Re-mixes every clip on demand from the synthesis pools; bit-identical to
// what build_subset emits, with only the component waveforms cached. Suits
// datasets too large to keep mixed in memory.
class ResynthClipSource : public ClipSource {
 public:
  explicit ResynthClipSource(const EvalPools& pools) : pools_(pools) {}
  Waveform mixture(const ManifestRow& row) const override;
  std::pair<Waveform, Waveform> components(const ManifestRow& row) const;

 private:
  Waveform rendered(const PoolClip& clip) const;
  const EvalPools& pools_;
  mutable std::mutex mu_;  // guards cache_ under parallel evaluation
  mutable std::unordered_map<std::string, Waveform> cache_;
};

// Builds one KNN reference store per (machine, snr) cell from the reference
// rows, scores every test row, and reports per-cell metrics plus the SNR-set
// harmonic means.
EvalReport run_eval(const Parameters& params, const NormStats& stats,
                    const DatasetManifest& manifest, const ClipSource& clips,
                    const EvalSettings& settings);

// Protocol-only variant with injected scores; used to validate the metric
// plumbing independently of any encoder.
EvalReport run_eval_scored(const DatasetManifest& manifest,
                           const std::function<double(const ManifestRow&)>& scorer,
                           double pauc_p = kDefaultPaucP);

// Wave-mixture vs embedding-mixture (oracle) comparison on one subset at one
// SNR. The oracle route embeds the clean clip and the gain-scaled noise
// component separately and combines them with the convex weight; reference
// and test clips both use the oracle representation.
struct OracleComparison {
  struct Row {
    std::string machine_type;
    double wave_official = 0.0;
    double oracle_official = 0.0;
  };
  double snr_db = 0.0;
  std::vector<Row> rows;

  double wave_hmean() const;
  double oracle_hmean() const;
  void save_csv(const std::string& path) const;
  std::string render() const;
};

OracleComparison oracle_compare(const Parameters& params, const NormStats& stats,
                                const DatasetManifest& manifest, const EvalPools& pools,
                                double snr_db, const EvalSettings& settings);

// ---------------------------------------------------------------------------
// Sweeps over one experiment axis; each grid point is trained (when the axis
// requires it) and evaluated with shared seeds.
// ---------------------------------------------------------------------------

enum class SweepAxis { kTrainingSnr, kLayer, kLossWeights, kPretrainData };

SweepAxis sweep_axis_from_string(const std::string& s);
std::string to_string(SweepAxis axis);

struct SweepConfig {
  SweepAxis axis = SweepAxis::kTrainingSnr;
  std::vector<std::string> grid;    // axis-specific point encodings
  PretrainConfig pretrain;
  EncoderConfig encoder;            // n_classes filled from the corpus
  TrainConfig train;
  std::vector<SubsetSpec> subsets;
  EvalDataConfig eval_data;
  EvalSettings eval;
  uint64_t seed = 0;
  std::string out_dir;              // "" = keep everything in memory
};

struct SweepPointResult {
  std::string key;
  EvalReport report;
};

// Runs every grid point; per-point reports (and an incrementally updated
// comparison CSV) are persisted under out_dir as each point completes.
std::vector<SweepPointResult> run_sweep(const SweepConfig& config);

// One comparison row per point: subset x snr grid scores plus the two
// harmonic-mean columns.
void write_comparison_csv(const std::vector<SweepPointResult>& results,
                          const std::string& path);

// Minimal SVG line chart of score (x100) against the x-values of each
// series; used for the SNR and layer curves.
struct ChartSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};
void write_line_chart_svg(const std::vector<ChartSeries>& series,
                          const std::string& x_label, const std::string& y_label,
                          const std::string& path);

}  // namespace mixret

#endif  // MIXRET_EXPERIMENT_H_
