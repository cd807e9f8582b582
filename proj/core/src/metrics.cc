// core/src/metrics.cc

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

#include "mixret/metrics.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

namespace mixret {

namespace {

void split_counts(const std::vector<ScoredClip>& scores, int* n_pos, int* n_neg) {
  *n_pos = 0;
  *n_neg = 0;
  for (const ScoredClip& s : scores) {
    if (!std::isfinite(s.anomaly_score))
      throw InvalidParams("metrics: non-finite anomaly score");
    (s.is_anomalous ? *n_pos : *n_neg)++;
  }
  if (*n_pos == 0 || *n_neg == 0)
    throw OneClassOnly("metrics: need at least one normal and one anomalous clip");
}

// ROC points from (0,0) to (1,1), one per distinct score threshold taken in
// descending order; tie groups advance TPR and FPR together, producing the
// diagonal segments that realize the half-tie convention under trapezoidal
// integration.
std::vector<std::pair<double, double>> roc_points(const std::vector<ScoredClip>& scores,
                                                  int n_pos, int n_neg) {
  std::vector<std::pair<double, bool>> s;  // (score, is_anomalous)
  s.reserve(scores.size());
  for (const ScoredClip& c : scores) s.emplace_back(c.anomaly_score, c.is_anomalous);
  std::sort(s.begin(), s.end(), [](const auto& a, const auto& b) { return a.first > b.first; });

  std::vector<std::pair<double, double>> pts;
  pts.emplace_back(0.0, 0.0);
  int tp = 0, fp = 0;
  size_t i = 0;
  while (i < s.size()) {
    double v = s[i].first;
    while (i < s.size() && s[i].first == v) {
      (s[i].second ? tp : fp)++;
      ++i;
    }
    pts.emplace_back(static_cast<double>(fp) / n_neg, static_cast<double>(tp) / n_pos);
  }
  return pts;
}

double area_up_to(const std::vector<std::pair<double, double>>& pts, double fpr_cut) {
  double area = 0.0;
  for (size_t i = 1; i < pts.size(); ++i) {
    double x0 = pts[i - 1].first, y0 = pts[i - 1].second;
    double x1 = pts[i].first, y1 = pts[i].second;
    if (x0 >= fpr_cut) break;
    if (x1 <= fpr_cut) {
      area += (x1 - x0) * 0.5 * (y0 + y1);
    } else {
      // interpolate the segment at the cut
      double t = (fpr_cut - x0) / (x1 - x0);
      double yc = y0 + t * (y1 - y0);
      area += (fpr_cut - x0) * 0.5 * (y0 + yc);
      break;
    }
  }
  return area;
}

}  // namespace

double auc(const std::vector<ScoredClip>& scores) {
  int n_pos = 0, n_neg = 0;
  split_counts(scores, &n_pos, &n_neg);

  // Mann-Whitney via midranks
  std::vector<std::pair<double, bool>> s;
  s.reserve(scores.size());
  for (const ScoredClip& c : scores) s.emplace_back(c.anomaly_score, c.is_anomalous);
  std::sort(s.begin(), s.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

  double rank_sum_pos = 0.0;
  size_t i = 0;
  while (i < s.size()) {
    size_t j = i;
    while (j < s.size() && s[j].first == s[i].first) ++j;
    double midrank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));  // 1-based
    for (size_t k = i; k < j; ++k)
      if (s[k].second) rank_sum_pos += midrank;
    i = j;
  }
  double u = rank_sum_pos - static_cast<double>(n_pos) * (n_pos + 1) / 2.0;
  return u / (static_cast<double>(n_pos) * n_neg);
}

double pauc(const std::vector<ScoredClip>& scores, double p) {
  if (!(p > 0.0 && p <= 1.0)) throw InvalidP("pauc: p must be in (0, 1]");
  int n_pos = 0, n_neg = 0;
  split_counts(scores, &n_pos, &n_neg);
  auto pts = roc_points(scores, n_pos, n_neg);
  return area_up_to(pts, p) / p;
}

double official_score(double source_auc, double target_auc, double pauc_value) {
  if (source_auc <= 0.0 || target_auc <= 0.0 || pauc_value <= 0.0)
    throw ZeroComponent("official_score: all components must be > 0");
  return 3.0 / (1.0 / source_auc + 1.0 / target_auc + 1.0 / pauc_value);
}

double aggregate_hmean(const std::vector<double>& values) {
  if (values.empty()) throw InvalidParams("aggregate_hmean: empty set");
  double acc = 0.0;
  for (double v : values) {
    if (v <= 0.0) throw ZeroComponent("aggregate_hmean: component <= 0");
    acc += 1.0 / v;
  }
  return static_cast<double>(values.size()) / acc;
}

EvalCell evaluate_cell(const std::string& machine_type, const std::string& subset,
                       double snr_db, const std::vector<ScoredClip>& scores,
                       double pauc_p) {
  EvalCell cell;
  cell.machine_type = machine_type;
  cell.subset = subset;
  cell.snr_db = snr_db;

  // Domain AUC: that domain's normals against all anomalies (anomaly domain
  // labels are unavailable at test time under the DCASE protocol).
  std::vector<ScoredClip> source_set, target_set;
  for (const ScoredClip& s : scores) {
    if (s.is_anomalous) {
      source_set.push_back(s);
      target_set.push_back(s);
    } else if (s.domain == Domain::kSource) {
      source_set.push_back(s);
    } else {
      target_set.push_back(s);
    }
  }
  cell.source_auc = auc(source_set);
  cell.target_auc = auc(target_set);
  cell.pauc = pauc(scores, pauc_p);
  // A degenerate cell can reach exactly 0 (e.g. pAUC when no anomaly ranks
  // inside the FPR band). Flooring keeps harmonic means defined while still
  // penalizing the cell hard; the raw auc/pauc/official_score operations keep
  // their strict error contracts.
  cell.source_auc = std::max(cell.source_auc, kMetricFloor);
  cell.target_auc = std::max(cell.target_auc, kMetricFloor);
  cell.pauc = std::max(cell.pauc, kMetricFloor);
  cell.official = official_score(cell.source_auc, cell.target_auc, cell.pauc);
  return cell;
}

// ---------------------------------------------------------------------------
// EvalReport
// ---------------------------------------------------------------------------

double EvalReport::grid_score(const std::string& subset, double snr_db) const {
  std::vector<double> vals;
  for (const EvalCell& c : cells)
    if (c.subset == subset && c.snr_db == snr_db) vals.push_back(c.official);
  if (vals.empty())
    throw InvalidParams("EvalReport: no cells for " + subset + " at " +
                        std::to_string(snr_db) + " dB");
  return aggregate_hmean(vals);
}

std::vector<std::string> EvalReport::subsets() const {
  std::vector<std::string> out;
  for (const EvalCell& c : cells)
    if (std::find(out.begin(), out.end(), c.subset) == out.end()) out.push_back(c.subset);
  return out;
}

std::vector<double> EvalReport::snr_grid(const std::string& subset) const {
  std::vector<double> out;
  for (const EvalCell& c : cells) {
    if (c.subset != subset) continue;
    if (std::find(out.begin(), out.end(), c.snr_db) == out.end()) out.push_back(c.snr_db);
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool EvalReport::has_low_cells() const {
  for (const EvalCell& c : cells)
    if (std::find(low_snr_set.begin(), low_snr_set.end(), c.snr_db) != low_snr_set.end())
      return true;
  return false;
}

double EvalReport::hmean_low() const {
  std::vector<double> vals;
  for (const std::string& subset : subsets()) {
    for (double snr : snr_grid(subset)) {
      if (std::find(low_snr_set.begin(), low_snr_set.end(), snr) != low_snr_set.end())
        vals.push_back(grid_score(subset, snr));
    }
  }
  return aggregate_hmean(vals);
}

double EvalReport::hmean_all() const {
  std::vector<double> vals;
  for (const std::string& subset : subsets())
    for (double snr : snr_grid(subset)) vals.push_back(grid_score(subset, snr));
  return aggregate_hmean(vals);
}

void EvalReport::save_csv(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw IoFailure("EvalReport::save_csv: cannot open " + path);
  os << "machine_type,subset,snr_db,source_auc,target_auc,pauc,official_score\n";
  char buf[256];
  for (const EvalCell& c : cells) {
    std::snprintf(buf, sizeof(buf), "%s,%s,%.10g,%.10g,%.10g,%.10g,%.10g\n",
                  c.machine_type.c_str(), c.subset.c_str(), c.snr_db, c.source_auc,
                  c.target_auc, c.pauc, c.official);
    os << buf;
  }
}

EvalReport EvalReport::load_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoFailure("EvalReport::load_csv: cannot open " + path);
  EvalReport report;
  std::string line;
  std::getline(is, line);  // header
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    EvalCell c;
    std::getline(ss, c.machine_type, ',');
    std::getline(ss, c.subset, ',');
    std::getline(ss, field, ',');
    c.snr_db = std::stod(field);
    std::getline(ss, field, ',');
    c.source_auc = std::stod(field);
    std::getline(ss, field, ',');
    c.target_auc = std::stod(field);
    std::getline(ss, field, ',');
    c.pauc = std::stod(field);
    std::getline(ss, field, ',');
    c.official = std::stod(field);
    report.cells.push_back(std::move(c));
  }
  return report;
}

std::string EvalReport::to_json_string() const {
  nlohmann::json j;
  j["name"] = name;
  nlohmann::json cells_json = nlohmann::json::array();
  for (const EvalCell& c : cells)
    cells_json.push_back({{"machine_type", c.machine_type}, {"subset", c.subset},
                          {"snr_db", c.snr_db}, {"source_auc", c.source_auc},
                          {"target_auc", c.target_auc}, {"pauc", c.pauc},
                          {"official_score", c.official}});
  j["cells"] = cells_json;
  nlohmann::json grid;
  for (const std::string& subset : subsets()) {
    nlohmann::json per_snr;
    for (double snr : snr_grid(subset)) {
      char key[32];
      std::snprintf(key, sizeof(key), "%g", snr);
      per_snr[key] = grid_score(subset, snr);
    }
    grid[subset] = per_snr;
  }
  j["grid"] = grid;
  if (has_low_cells()) j["hmean_low"] = hmean_low();
  j["hmean_all"] = hmean_all();
  return j.dump(2);
}

std::string render_report_table(const std::vector<EvalReport>& reports) {
  if (reports.empty()) return "";
  // column layout from the first report
  const EvalReport& first = reports.front();
  std::vector<std::pair<std::string, double>> columns;
  for (const std::string& subset : first.subsets())
    for (double snr : first.snr_grid(subset)) columns.emplace_back(subset, snr);

  size_t name_w = 8;
  for (const EvalReport& r : reports) name_w = std::max(name_w, r.name.size() + 2);

  std::ostringstream os;
  os << std::string(name_w, ' ');
  char buf[64];
  for (const auto& [subset, snr] : columns) {
    std::snprintf(buf, sizeof(buf), "%s@%g", subset.c_str(), snr);
    os << ' ' << buf;
  }
  os << "  Hmean(low) Hmean(all)\n";  // low column blank when absent
  for (const EvalReport& r : reports) {
    os << r.name << std::string(name_w - r.name.size(), ' ');
    for (const auto& [subset, snr] : columns) {
      std::snprintf(buf, sizeof(buf), "%s@%g", subset.c_str(), snr);
      int w = static_cast<int>(std::string(buf).size());
      double v = 100.0 * r.grid_score(subset, snr);
      std::snprintf(buf, sizeof(buf), " %*.1f", w, v);
      os << buf;
    }
    if (r.has_low_cells())
      std::snprintf(buf, sizeof(buf), "  %10.1f %10.1f", 100.0 * r.hmean_low(),
                    100.0 * r.hmean_all());
    else
      std::snprintf(buf, sizeof(buf), "  %10s %10.1f", "-", 100.0 * r.hmean_all());
    os << buf << "\n";
  }
  return os.str();
}

}  // namespace mixret
