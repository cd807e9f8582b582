// core/src/experiment.cc

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

#include "mixret/experiment.h"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

namespace mixret {

Waveform DirClipSource::mixture(const ManifestRow& row) const {
  return read_wav((std::filesystem::path(root_) / row.clip_path).string());
}

MemoryClipSource::MemoryClipSource(const BuildResult& built) : built_(built) {
  if (built_.mixtures.size() != built_.manifest.rows.size())
    throw InvalidParams("MemoryClipSource: build result has no in-memory mixtures");
  for (size_t i = 0; i < built_.manifest.rows.size(); ++i)
    index_[built_.manifest.rows[i].clip_path] = i;
}

Waveform MemoryClipSource::mixture(const ManifestRow& row) const {
  auto it = index_.find(row.clip_path);
  if (it == index_.end())
    throw InvalidParams("MemoryClipSource: unknown clip " + row.clip_path);
  return built_.mixtures[it->second];
}

Waveform ResynthClipSource::rendered(const PoolClip& clip) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = cache_.find(clip.id);
  if (it != cache_.end()) return it->second;
  return cache_.emplace(clip.id, render_clip(clip)).first->second;
}

std::pair<Waveform, Waveform> ResynthClipSource::components(const ManifestRow& row) const {
  const PoolClip* m = pools_.find_machine_clip(row.machine_type, row.machine_clip_id());
  const PoolClip* n = pools_.find_noise_clip(row.noise_clip_id);
  if (m == nullptr || n == nullptr)
    throw InvalidParams("ResynthClipSource: cannot resolve " + row.clip_path);
  return {rendered(*m), rendered(*n)};
}

Waveform ResynthClipSource::mixture(const ManifestRow& row) const {
  auto [clean, noise] = components(row);
  return mix_at_snr_scalenoise(clean, noise, row.snr_db).mixture;
}

namespace {

struct CellKey {
  std::string machine_type;
  double snr_db;
  bool operator<(const CellKey& o) const {
    if (machine_type != o.machine_type) return machine_type < o.machine_type;
    return snr_db < o.snr_db;
  }
};

std::map<CellKey, std::vector<int>> group_rows(const DatasetManifest& manifest) {
  std::map<CellKey, std::vector<int>> cells;
  for (size_t i = 0; i < manifest.rows.size(); ++i) {
    const ManifestRow& r = manifest.rows[i];
    cells[{r.machine_type, r.snr_db}].push_back(static_cast<int>(i));
  }
  return cells;
}

int resolve_layer(const Parameters& params, const EvalSettings& settings) {
  return settings.layer > 0 ? settings.layer : params.config.default_tap();
}

}  // namespace

EvalReport run_eval(const Parameters& params, const NormStats& stats,
                    const DatasetManifest& manifest, const ClipSource& clips,
                    const EvalSettings& settings) {
  const int layer = resolve_layer(params, settings);
  EvalReport report;
  report.name = manifest.subset;

  for (const auto& [key, indices] : group_rows(manifest)) {
    std::vector<int> ref_rows, test_rows;
    for (int i : indices) {
      (manifest.rows[i].split == "reference" ? ref_rows : test_rows).push_back(i);
    }
    if (ref_rows.empty() || test_rows.empty())
      throw InvalidParams("run_eval: cell without reference or test rows");

    // embed everything in this cell (row order preserved for determinism)
    std::vector<PooledEmbedding> ref_emb(ref_rows.size()), test_emb(test_rows.size());
    parallel_for(static_cast<int>(ref_rows.size()), settings.jobs, [&](int i) {
      ref_emb[i] = embed_clip(params, clips.mixture(manifest.rows[ref_rows[i]]), layer, stats);
    });
    parallel_for(static_cast<int>(test_rows.size()), settings.jobs, [&](int i) {
      test_emb[i] = embed_clip(params, clips.mixture(manifest.rows[test_rows[i]]), layer, stats);
    });

    ReferenceStore store(key.machine_type, layer);
    for (size_t i = 0; i < ref_rows.size(); ++i) {
      const ManifestRow& r = manifest.rows[ref_rows[i]];
      if (r.is_anomalous)
        throw InvalidParams("run_eval: anomalous clip in reference split: " + r.clip_path);
      store.add(ref_emb[i], r.domain == "target" ? Domain::kTarget : Domain::kSource);
    }

    std::vector<ScoredClip> scores(test_rows.size());
    for (size_t i = 0; i < test_rows.size(); ++i) {
      const ManifestRow& r = manifest.rows[test_rows[i]];
      ScoredClip s;
      s.clip_id = r.clip_path;
      s.is_anomalous = r.is_anomalous;
      s.domain = r.domain == "target" ? Domain::kTarget : Domain::kSource;
      s.anomaly_score = knn_score(test_emb[i], store, settings.k, settings.metric);
      if (settings.score_hook) s.anomaly_score = settings.score_hook(s.anomaly_score, s.domain);
      scores[i] = std::move(s);
    }
    report.cells.push_back(evaluate_cell(key.machine_type, manifest.subset, key.snr_db,
                                         scores, settings.pauc_p));
  }
  return report;
}

EvalReport run_eval_scored(const DatasetManifest& manifest,
                           const std::function<double(const ManifestRow&)>& scorer,
                           double pauc_p) {
  EvalReport report;
  report.name = manifest.subset;
  for (const auto& [key, indices] : group_rows(manifest)) {
    std::vector<ScoredClip> scores;
    for (int i : indices) {
      const ManifestRow& r = manifest.rows[i];
      if (r.split != "test") continue;
      ScoredClip s;
      s.clip_id = r.clip_path;
      s.is_anomalous = r.is_anomalous;
      s.domain = r.domain == "target" ? Domain::kTarget : Domain::kSource;
      s.anomaly_score = scorer(r);
      scores.push_back(std::move(s));
    }
    if (scores.empty()) continue;
    report.cells.push_back(
        evaluate_cell(key.machine_type, manifest.subset, key.snr_db, scores, pauc_p));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Oracle comparison
// ---------------------------------------------------------------------------

double OracleComparison::wave_hmean() const {
  std::vector<double> v;
  for (const Row& r : rows) v.push_back(r.wave_official);
  return aggregate_hmean(v);
}

double OracleComparison::oracle_hmean() const {
  std::vector<double> v;
  for (const Row& r : rows) v.push_back(r.oracle_official);
  return aggregate_hmean(v);
}

void OracleComparison::save_csv(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw IoFailure("OracleComparison::save_csv: cannot open " + path);
  os << "machine_type,route,official_score\n";
  char buf[160];
  for (const Row& r : rows) {
    std::snprintf(buf, sizeof(buf), "%s,wave,%.10g\n%s,embedding-oracle,%.10g\n",
                  r.machine_type.c_str(), r.wave_official, r.machine_type.c_str(),
                  r.oracle_official);
    os << buf;
  }
  std::snprintf(buf, sizeof(buf), "hmean,wave,%.10g\nhmean,embedding-oracle,%.10g\n",
                wave_hmean(), oracle_hmean());
  os << buf;
}

std::string OracleComparison::render() const {
  std::ostringstream os;
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%-18s %10s %18s\n", "machine_type", "wave",
                "embedding-oracle");
  os << buf;
  for (const Row& r : rows) {
    std::snprintf(buf, sizeof(buf), "%-18s %10.1f %18.1f\n", r.machine_type.c_str(),
                  100.0 * r.wave_official, 100.0 * r.oracle_official);
    os << buf;
  }
  std::snprintf(buf, sizeof(buf), "%-18s %10.1f %18.1f\n", "Hmean",
                100.0 * wave_hmean(), 100.0 * oracle_hmean());
  os << buf;
  return os.str();
}

OracleComparison oracle_compare(const Parameters& params, const NormStats& stats,
                                const DatasetManifest& manifest, const EvalPools& pools,
                                double snr_db, const EvalSettings& settings) {
  const int layer = resolve_layer(params, settings);
  OracleComparison out;
  out.snr_db = snr_db;

  // components per row: clean clip as mixed (unit gain) and the gain-scaled
  // noise segment
  ResynthClipSource source(pools);
  auto components = [&](const ManifestRow& row) -> std::pair<Waveform, Waveform> {
    auto [clean, noise] = source.components(row);
    double a2 = std::sqrt(mean_power(clean) /
                          (std::pow(10.0, row.snr_db / 10.0) * mean_power(noise)));
    for (double& s : noise.samples) s *= a2;
    return {std::move(clean), std::move(noise)};
  };

  auto grouped = group_rows(manifest);
  for (const auto& [key, indices] : grouped) {
    if (key.snr_db != snr_db) continue;
    std::vector<int> ref_rows, test_rows;
    for (int i : indices)
      (manifest.rows[i].split == "reference" ? ref_rows : test_rows).push_back(i);
    if (ref_rows.empty() || test_rows.empty()) continue;

    const int n_ref = static_cast<int>(ref_rows.size());
    const int n_test = static_cast<int>(test_rows.size());
    std::vector<PooledEmbedding> wave_ref(n_ref), wave_test(n_test);
    std::vector<PooledEmbedding> oracle_ref(n_ref), oracle_test(n_test);

    parallel_for(n_ref + n_test, settings.jobs, [&](int i) {
      bool is_ref = i < n_ref;
      const ManifestRow& row = manifest.rows[is_ref ? ref_rows[i] : test_rows[i - n_ref]];
      auto [clean, noise] = components(row);
      // noise already carries its mixing gain; the mixture is the plain sum
      Waveform mixture = clean;
      for (size_t s = 0; s < mixture.samples.size(); ++s)
        mixture.samples[s] += noise.samples[s];
      PooledEmbedding wave_emb = embed_clip(params, mixture, layer, stats);
      PooledEmbedding oracle_emb = embedding_mixture_oracle(
          params, clean, noise, settings.oracle_lambda, layer, stats);
      if (is_ref) {
        wave_ref[i] = std::move(wave_emb);
        oracle_ref[i] = std::move(oracle_emb);
      } else {
        wave_test[i - n_ref] = std::move(wave_emb);
        oracle_test[i - n_ref] = std::move(oracle_emb);
      }
    });

    auto official_for = [&](const std::vector<PooledEmbedding>& refs,
                            const std::vector<PooledEmbedding>& tests) {
      ReferenceStore store(key.machine_type, layer);
      for (int i = 0; i < n_ref; ++i) {
        const ManifestRow& r = manifest.rows[ref_rows[i]];
        store.add(refs[i], r.domain == "target" ? Domain::kTarget : Domain::kSource);
      }
      std::vector<ScoredClip> scores(n_test);
      for (int i = 0; i < n_test; ++i) {
        const ManifestRow& r = manifest.rows[test_rows[i]];
        ScoredClip s;
        s.clip_id = r.clip_path;
        s.is_anomalous = r.is_anomalous;
        s.domain = r.domain == "target" ? Domain::kTarget : Domain::kSource;
        s.anomaly_score = knn_score(tests[i], store, settings.k, settings.metric);
        scores[i] = std::move(s);
      }
      EvalCell cell = evaluate_cell(key.machine_type, manifest.subset, key.snr_db,
                                    scores, settings.pauc_p);
      return cell.official;
    };

    OracleComparison::Row row;
    row.machine_type = key.machine_type;
    row.wave_official = official_for(wave_ref, wave_test);
    row.oracle_official = official_for(oracle_ref, oracle_test);
    out.rows.push_back(std::move(row));
  }
  if (out.rows.empty())
    throw InvalidParams("oracle_compare: manifest has no cells at the requested SNR");
  return out;
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

SweepAxis sweep_axis_from_string(const std::string& s) {
  if (s == "training_snr") return SweepAxis::kTrainingSnr;
  if (s == "layer") return SweepAxis::kLayer;
  if (s == "loss_weights") return SweepAxis::kLossWeights;
  if (s == "pretrain_data") return SweepAxis::kPretrainData;
  throw ConfigError("unknown sweep axis: " + s);
}

std::string to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::kTrainingSnr: return "training_snr";
    case SweepAxis::kLayer: return "layer";
    case SweepAxis::kLossWeights: return "loss_weights";
    case SweepAxis::kPretrainData: return "pretrain_data";
  }
  return "training_snr";
}

namespace {

SnrPolicy parse_snr_point(const std::string& s) {
  std::string t = s;
  // accept "+-5", "±5" and plain offsets
  if (t.rfind("+-", 0) == 0) {
    double d = std::stod(t.substr(2));
    return SnrPolicy::uniform(-d, d);
  }
  if (t.size() > 2 && static_cast<unsigned char>(t[0]) == 0xC2 &&
      static_cast<unsigned char>(t[1]) == 0xB1) {  // UTF-8 "±"
    double d = std::stod(t.substr(2));
    return SnrPolicy::uniform(-d, d);
  }
  return SnrPolicy::fixed(std::stod(t));
}

std::pair<double, double> parse_weights_point(const std::string& s) {
  size_t comma = s.find(',');
  if (comma == std::string::npos)
    throw ConfigError("loss_weights grid point must be 'alpha,beta': " + s);
  return {std::stod(s.substr(0, comma)), std::stod(s.substr(comma + 1))};
}

struct BuiltSubsets {
  std::vector<BuildResult> built;
  std::vector<std::unique_ptr<MemoryClipSource>> sources;
};

BuiltSubsets build_all(const std::vector<SubsetSpec>& specs, const EvalPools& pools,
                       uint64_t seed) {
  BuiltSubsets out;
  for (const SubsetSpec& spec : specs)
    out.built.push_back(build_subset(spec, pools, seed));
  for (const BuildResult& b : out.built)
    out.sources.push_back(std::make_unique<MemoryClipSource>(b));
  return out;
}

EvalReport eval_all_subsets(const Parameters& params, const NormStats& stats,
                            const BuiltSubsets& data, const EvalSettings& settings,
                            const std::string& name) {
  EvalReport merged;
  merged.name = name;
  for (size_t i = 0; i < data.built.size(); ++i) {
    EvalReport r = run_eval(params, stats, data.built[i].manifest, *data.sources[i],
                            settings);
    merged.cells.insert(merged.cells.end(), r.cells.begin(), r.cells.end());
  }
  return merged;
}

}  // namespace

std::vector<SweepPointResult> run_sweep(const SweepConfig& config) {
  namespace fs = std::filesystem;
  if (config.grid.empty()) throw ConfigError("run_sweep: empty grid");
  if (!config.out_dir.empty()) fs::create_directories(config.out_dir);

  EvalPools pools = build_eval_pools(config.subsets, config.eval_data);
  BuiltSubsets data = build_all(config.subsets, pools, config.seed);

  std::vector<SweepPointResult> results;
  auto persist = [&](const SweepPointResult& point) {
    if (config.out_dir.empty()) return;
    std::string safe = point.key;
    for (char& c : safe)
      if (c == ' ' || c == ',' || c == '/' ) c = '_';
    point.report.save_csv(config.out_dir + "/" + safe + ".csv");
    write_comparison_csv(results, config.out_dir + "/comparison.csv");
  };

  auto train_and_eval = [&](const std::string& key, const PretrainCorpus& corpus,
                            const TrainConfig& tcfg) {
    EncoderConfig enc = config.encoder;
    enc.n_classes = corpus.n_classes();
    enc.seed = mix_seed(config.seed, hash_string(key));
    Trainer trainer(corpus, enc, tcfg);
    trainer.run(config.out_dir.empty() ? ""
                                       : config.out_dir + "/train_" + std::to_string(
                                             hash_string(key) & 0xffff));
    SweepPointResult point;
    point.key = key;
    point.report =
        eval_all_subsets(trainer.student(), trainer.norm_stats(), data, config.eval, key);
    results.push_back(point);
    persist(results.back());
  };

  switch (config.axis) {
    case SweepAxis::kTrainingSnr: {
      PretrainCorpus corpus = build_pretrain_corpus(config.pretrain);
      for (const std::string& g : config.grid) {
        TrainConfig tcfg = config.train;
        tcfg.snr_policy = parse_snr_point(g);
        tcfg.seed = config.seed;
        train_and_eval(tcfg.snr_policy.describe(), corpus, tcfg);
      }
      break;
    }
    case SweepAxis::kLossWeights: {
      PretrainCorpus corpus = build_pretrain_corpus(config.pretrain);
      for (const std::string& g : config.grid) {
        auto [alpha, beta] = parse_weights_point(g);
        TrainConfig tcfg = config.train;
        tcfg.loss_weights.alpha = alpha;
        tcfg.loss_weights.beta = beta;
        tcfg.seed = config.seed;
        char key[64];
        std::snprintf(key, sizeof(key), "alpha=%g beta=%g", alpha, beta);
        train_and_eval(key, corpus, tcfg);
      }
      break;
    }
    case SweepAxis::kPretrainData: {
      for (const std::string& recipe : config.grid) {
        PretrainCorpus corpus = build_pretrain_corpus_with_recipe(config.pretrain, recipe);
        TrainConfig tcfg = config.train;
        tcfg.seed = config.seed;
        train_and_eval(recipe, corpus, tcfg);
      }
      break;
    }
    case SweepAxis::kLayer: {
      PretrainCorpus corpus = build_pretrain_corpus(config.pretrain);
      EncoderConfig enc = config.encoder;
      enc.n_classes = corpus.n_classes();
      enc.seed = mix_seed(config.seed, hash_string("layer-sweep"));
      TrainConfig tcfg = config.train;
      tcfg.seed = config.seed;
      Trainer trainer(corpus, enc, tcfg);
      trainer.run(config.out_dir.empty() ? "" : config.out_dir + "/train_layer_sweep");
      for (const std::string& g : config.grid) {
        int layer = std::stoi(g);
        EvalSettings settings = config.eval;
        settings.layer = layer;
        SweepPointResult point;
        point.key = "layer " + std::to_string(layer);
        point.report = eval_all_subsets(trainer.student(), trainer.norm_stats(), data,
                                        settings, point.key);
        results.push_back(point);
        persist(results.back());
      }
      break;
    }
  }
  return results;
}

void write_comparison_csv(const std::vector<SweepPointResult>& results,
                          const std::string& path) {
  if (results.empty()) return;
  std::ofstream os(path);
  if (!os) throw IoFailure("write_comparison_csv: cannot open " + path);
  const EvalReport& first = results.front().report;
  std::vector<std::pair<std::string, double>> columns;
  for (const std::string& subset : first.subsets())
    for (double snr : first.snr_grid(subset)) columns.emplace_back(subset, snr);

  os << "point";
  char buf[96];
  for (const auto& [subset, snr] : columns) {
    std::snprintf(buf, sizeof(buf), ",%s@%g", subset.c_str(), snr);
    os << buf;
  }
  os << ",hmean_low,hmean_all\n";
  for (const SweepPointResult& r : results) {
    os << r.key;
    for (const auto& [subset, snr] : columns) {
      std::snprintf(buf, sizeof(buf), ",%.10g", r.report.grid_score(subset, snr));
      os << buf;
    }
    if (r.report.has_low_cells())
      std::snprintf(buf, sizeof(buf), ",%.10g,%.10g", r.report.hmean_low(),
                    r.report.hmean_all());
    else
      std::snprintf(buf, sizeof(buf), ",,%.10g", r.report.hmean_all());
    os << buf << "\n";
  }
}

void write_line_chart_svg(const std::vector<ChartSeries>& series,
                          const std::string& x_label, const std::string& y_label,
                          const std::string& path) {
  const int w = 720, h = 440, margin = 60;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const ChartSeries& s : series) {
    for (double x : s.x) { xmin = std::min(xmin, x); xmax = std::max(xmax, x); }
    for (double y : s.y) { ymin = std::min(ymin, y); ymax = std::max(ymax, y); }
  }
  if (series.empty() || xmin > xmax) throw InvalidParams("write_line_chart_svg: no data");
  if (xmax == xmin) xmax = xmin + 1.0;
  if (ymax == ymin) ymax = ymin + 1.0;
  double ypad = 0.05 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;

  auto px = [&](double x) { return margin + (x - xmin) / (xmax - xmin) * (w - 2 * margin); };
  auto py = [&](double y) { return h - margin - (y - ymin) / (ymax - ymin) * (h - 2 * margin); };

  const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"};
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
     << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "<line x1=\"%d\" y1=\"%d\" x2=\"%d\" y2=\"%d\" stroke=\"black\"/>\n",
                margin, h - margin, w - margin, h - margin);
  os << buf;
  std::snprintf(buf, sizeof(buf),
                "<line x1=\"%d\" y1=\"%d\" x2=\"%d\" y2=\"%d\" stroke=\"black\"/>\n",
                margin, margin, margin, h - margin);
  os << buf;
  std::snprintf(buf, sizeof(buf),
                "<text x=\"%d\" y=\"%d\" text-anchor=\"middle\">%s</text>\n", w / 2,
                h - 12, x_label.c_str());
  os << buf;
  std::snprintf(buf, sizeof(buf),
                "<text x=\"16\" y=\"%d\" transform=\"rotate(-90 16 %d)\" "
                "text-anchor=\"middle\">%s</text>\n",
                h / 2, h / 2, y_label.c_str());
  os << buf;
  for (size_t si = 0; si < series.size(); ++si) {
    const ChartSeries& s = series[si];
    os << "<polyline fill=\"none\" stroke=\"" << colors[si % 6]
       << "\" stroke-width=\"2\" points=\"";
    for (size_t i = 0; i < s.x.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.1f,%.1f ", px(s.x[i]), py(s.y[i]));
      os << buf;
    }
    os << "\"/>\n";
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%d\" y=\"%d\" fill=\"%s\">%s</text>\n", w - margin - 150,
                  margin + 18 * static_cast<int>(si), colors[si % 6], s.label.c_str());
    os << buf;
  }
  os << "</svg>\n";
  std::ofstream file(path);
  if (!file) throw IoFailure("write_line_chart_svg: cannot open " + path);
  file << os.str();
}

}  // namespace mixret
