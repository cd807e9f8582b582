// core/src/dataset.cc

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

#include "mixret/dataset.h"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "mixret/wave.h"

namespace mixret {

std::string to_string(SubsetName name) {
  switch (name) {
    case SubsetName::kFactoryA: return "factory_a";
    case SubsetName::kFactoryB: return "factory_b";
    case SubsetName::kMismatch: return "mismatch";
  }
  return "factory_a";
}

SubsetName subset_from_string(const std::string& s) {
  if (s == "factory_a") return SubsetName::kFactoryA;
  if (s == "factory_b") return SubsetName::kFactoryB;
  if (s == "mismatch") return SubsetName::kMismatch;
  throw ConfigError("unknown subset name: " + s);
}

SubsetSpec SubsetSpec::for_name(SubsetName name) {
  SubsetSpec spec;
  spec.name = name;
  switch (name) {
    case SubsetName::kFactoryA:
      spec.reference_noise_kind = SynthKind::kNoiseStationary;
      spec.test_noise_kind = SynthKind::kNoiseStationary;
      break;
    case SubsetName::kFactoryB:
      spec.reference_noise_kind = SynthKind::kNoiseNonstationary;
      spec.test_noise_kind = SynthKind::kNoiseNonstationary;
      break;
    case SubsetName::kMismatch:
      spec.reference_noise_kind = SynthKind::kNoiseNonstationary;
      spec.test_noise_kind = SynthKind::kNoiseStationary;
      break;
  }
  return spec;
}

SubsetSpec SubsetSpec::for_name(SubsetName name, std::vector<double> grid) {
  SubsetSpec spec = for_name(name);
  spec.snr_grid = std::move(grid);
  return spec;
}

void SubsetSpec::validate() const {
  if (name == SubsetName::kMismatch &&
      (reference_noise_kind != SynthKind::kNoiseNonstationary ||
       test_noise_kind != SynthKind::kNoiseStationary))
    throw ConfigError("mismatch subset requires non-stationary references and "
                      "stationary test noise");
  if (snr_grid.empty()) throw ConfigError("subset spec: empty snr grid");
  if (counts.ref_source <= 0 || counts.ref_target <= 0 ||
      counts.test_source_normal <= 0 || counts.test_source_anomalous <= 0 ||
      counts.test_target_normal <= 0 || counts.test_target_anomalous <= 0)
    throw ConfigError("subset spec: all cell counts must be positive");
}

std::string ManifestRow::machine_clip_id() const {
  // <...>/<machine_clip_id>__<noise_id>__snr<x>.wav
  std::string base = clip_path;
  size_t slash = base.find_last_of('/');
  if (slash != std::string::npos) base = base.substr(slash + 1);
  size_t sep = base.find("__");
  if (sep == std::string::npos)
    throw InvalidParams("manifest row: unparsable clip path " + clip_path);
  return base.substr(0, sep);
}

void DatasetManifest::save_csv(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw IoFailure("manifest: cannot open " + path);
  os << "clip_path,machine_type,split,domain,is_anomalous,snr_db,noise_clip_id,seed\n";
  char buf[64];
  for (const ManifestRow& r : rows) {
    std::snprintf(buf, sizeof(buf), "%.10g", r.snr_db);
    os << r.clip_path << ',' << r.machine_type << ',' << r.split << ',' << r.domain
       << ',' << (r.is_anomalous ? 1 : 0) << ',' << buf << ',' << r.noise_clip_id
       << ',' << r.seed << "\n";
  }
}

DatasetManifest DatasetManifest::load_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoFailure("manifest: cannot open " + path);
  DatasetManifest m;
  std::string line;
  std::getline(is, line);  // header
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    ManifestRow r;
    std::string field;
    std::getline(ss, r.clip_path, ',');
    std::getline(ss, r.machine_type, ',');
    std::getline(ss, r.split, ',');
    std::getline(ss, r.domain, ',');
    std::getline(ss, field, ',');
    r.is_anomalous = field == "1";
    std::getline(ss, field, ',');
    r.snr_db = std::stod(field);
    std::getline(ss, r.noise_clip_id, ',');
    std::getline(ss, field, ',');
    r.seed = std::stoull(field);
    m.rows.push_back(std::move(r));
  }
  // subset name from the first clip path component
  if (!m.rows.empty()) {
    const std::string& p = m.rows.front().clip_path;
    m.subset = p.substr(0, p.find('/'));
  }
  return m;
}

uint64_t DatasetManifest::content_hash() const {
  uint64_t h = 0xcbf29ce484222325ull;
  h = fnv1a64(subset.data(), subset.size(), h);
  for (const ManifestRow& r : rows) {
    h = fnv1a64(r.clip_path.data(), r.clip_path.size(), h);
    h = fnv1a64(r.noise_clip_id.data(), r.noise_clip_id.size(), h);
    h = fnv1a64(&r.snr_db, sizeof(r.snr_db), h);
    h = fnv1a64(&r.seed, sizeof(r.seed), h);
    char flags[2] = {static_cast<char>(r.is_anomalous), r.domain == "target"};
    h = fnv1a64(flags, 2, h);
  }
  return h;
}

const std::vector<PoolClip>& EvalPools::noise_for(SynthKind kind) const {
  if (kind == SynthKind::kNoiseStationary) return stationary_noise;
  if (kind == SynthKind::kNoiseNonstationary) return nonstationary_noise;
  throw InvalidParams("EvalPools: machine kind has no noise pool");
}

const PoolClip* EvalPools::find_machine_clip(const std::string& machine_type,
                                             const std::string& clip_id) const {
  for (const EvalMachinePool& pool : machines) {
    if (pool.machine_type != machine_type) continue;
    for (const auto* bucket : {&pool.source_normals, &pool.target_normals,
                               &pool.source_anomalies, &pool.target_anomalies}) {
      for (const PoolClip& c : *bucket)
        if (c.id == clip_id) return &c;
    }
  }
  return nullptr;
}

const PoolClip* EvalPools::find_noise_clip(const std::string& clip_id) const {
  for (const auto* bucket : {&stationary_noise, &nonstationary_noise}) {
    for (const PoolClip& c : *bucket)
      if (c.id == clip_id) return &c;
  }
  return nullptr;
}

EvalPools build_eval_pools(const std::vector<SubsetSpec>& specs,
                           const EvalDataConfig& config) {
  if (specs.empty()) throw ConfigError("build_eval_pools: no subset specs");
  int src_norm = 0, tgt_norm = 0, src_anom = 0, tgt_anom = 0;
  int need_stat = 0, need_nonstat = 0;
  for (const SubsetSpec& spec : specs) {
    spec.validate();
    const SubsetCounts& c = spec.counts;
    src_norm = std::max(src_norm, c.ref_source + c.test_source_normal);
    tgt_norm = std::max(tgt_norm, c.ref_target + c.test_target_normal);
    src_anom = std::max(src_anom, c.test_source_anomalous);
    tgt_anom = std::max(tgt_anom, c.test_target_anomalous);
    int ref_stat = spec.reference_noise_kind == SynthKind::kNoiseStationary
                       ? c.ref_total() : 0;
    int ref_nonstat = c.ref_total() - ref_stat;
    int test_stat = spec.test_noise_kind == SynthKind::kNoiseStationary
                        ? c.test_total() : 0;
    int test_nonstat = c.test_total() - test_stat;
    need_stat = std::max(need_stat, ref_stat + test_stat);
    need_nonstat = std::max(need_nonstat, ref_nonstat + test_nonstat);
  }
  EvalPools pools;
  for (const std::string& machine : eval_machine_types())
    pools.machines.push_back(build_eval_machine_pool(machine, src_norm, tgt_norm,
                                                     src_anom, tgt_anom, config));
  if (need_stat > 0)
    pools.stationary_noise =
        build_eval_noise_pool(SynthKind::kNoiseStationary, need_stat, config);
  if (need_nonstat > 0)
    pools.nonstationary_noise =
        build_eval_noise_pool(SynthKind::kNoiseNonstationary, need_nonstat, config);
  return pools;
}

namespace {

std::string snr_tag(double snr) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", snr);
  return buf;
}

struct RoleSlice {
  const std::vector<PoolClip>* clips;
  int offset;
  int count;
  const char* split;
  const char* domain;
  bool anomalous;
  bool is_reference;
};

}  // namespace

BuildResult build_subset(const SubsetSpec& spec, const EvalPools& pools,
                         uint64_t seed, const std::string& out_dir,
                         bool keep_mixtures) {
  namespace fs = std::filesystem;
  spec.validate();
  const SubsetCounts& counts = spec.counts;
  const std::string subset = to_string(spec.name);
  const bool to_disk = !out_dir.empty();

  BuildResult result;
  result.manifest.subset = subset;

  // noise segments recur across cells; render each once
  std::unordered_map<std::string, Waveform> noise_cache;
  auto rendered_noise = [&noise_cache](const PoolClip& clip) -> const Waveform& {
    auto it = noise_cache.find(clip.id);
    if (it != noise_cache.end()) return it->second;
    return noise_cache.emplace(clip.id, render_clip(clip)).first->second;
  };

  for (const EvalMachinePool& machine : pools.machines) {
    // reference clips come first within each normal bucket, test clips after
    if (static_cast<int>(machine.source_normals.size()) <
            counts.ref_source + counts.test_source_normal ||
        static_cast<int>(machine.target_normals.size()) <
            counts.ref_target + counts.test_target_normal ||
        static_cast<int>(machine.source_anomalies.size()) < counts.test_source_anomalous ||
        static_cast<int>(machine.target_anomalies.size()) < counts.test_target_anomalous)
      throw InsufficientMachinePool("build_subset: machine pool too small for " +
                                    machine.machine_type);

    const RoleSlice roles[] = {
        {&machine.source_normals, 0, counts.ref_source, "reference", "source", false, true},
        {&machine.target_normals, 0, counts.ref_target, "reference", "target", false, true},
        {&machine.source_normals, counts.ref_source, counts.test_source_normal,
         "test", "source", false, false},
        {&machine.source_anomalies, 0, counts.test_source_anomalous,
         "test", "source", true, false},
        {&machine.target_normals, counts.ref_target, counts.test_target_normal,
         "test", "target", false, false},
        {&machine.target_anomalies, 0, counts.test_target_anomalous,
         "test", "target", true, false},
    };

    // cache clean waveforms once per machine; reused across the SNR grid
    std::vector<const PoolClip*> clip_ptrs;
    for (const RoleSlice& role : roles)
      for (int i = 0; i < role.count; ++i)
        clip_ptrs.push_back(&(*role.clips)[role.offset + i]);
    std::vector<Waveform> clean_waves(clip_ptrs.size());
    for (size_t i = 0; i < clip_ptrs.size(); ++i) clean_waves[i] = render_clip(*clip_ptrs[i]);

    for (double snr : spec.snr_grid) {
      Rng cell_rng(mix_seed(mix_seed(seed, hash_string(machine.machine_type)),
                            hash_string(subset + "/" + snr_tag(snr))));
      const std::vector<PoolClip>& ref_pool = pools.noise_for(spec.reference_noise_kind);
      const std::vector<PoolClip>& test_pool = pools.noise_for(spec.test_noise_kind);
      const bool same_kind = spec.reference_noise_kind == spec.test_noise_kind;

      int ref_need = counts.ref_total();
      int test_need = counts.test_total();
      if (same_kind) {
        if (static_cast<int>(ref_pool.size()) < ref_need + test_need)
          throw InsufficientNoisePool("build_subset: noise pool too small for cell " +
                                      machine.machine_type + "@" + snr_tag(snr));
      } else {
        if (static_cast<int>(ref_pool.size()) < ref_need ||
            static_cast<int>(test_pool.size()) < test_need)
          throw InsufficientNoisePool("build_subset: noise pool too small for cell " +
                                      machine.machine_type + "@" + snr_tag(snr));
      }

      // without-replacement draws: one shuffled index stream per pool
      std::vector<int> ref_perm = cell_rng.permutation(static_cast<int>(ref_pool.size()));
      std::vector<int> test_perm =
          same_kind ? ref_perm
                    : cell_rng.permutation(static_cast<int>(test_pool.size()));
      size_t ref_cursor = 0;
      size_t test_cursor = same_kind ? static_cast<size_t>(ref_need) : 0;

      std::set<std::string> used_ids;  // build-time without-replacement assertion
      size_t clean_idx = 0;
      for (const RoleSlice& role : roles) {
        for (int i = 0; i < role.count; ++i, ++clean_idx) {
          const PoolClip& clean_clip = *clip_ptrs[clean_idx];
          const std::vector<PoolClip>& noise_pool = role.is_reference ? ref_pool : test_pool;
          size_t& cursor = role.is_reference ? ref_cursor : test_cursor;
          const std::vector<int>& perm = role.is_reference ? ref_perm : test_perm;
          const PoolClip& noise_clip = noise_pool[perm[cursor++]];
          if (!used_ids.insert(noise_clip.id).second)
            throw InsufficientNoisePool("build_subset: duplicate noise id " +
                                        noise_clip.id + " within a cell");

          MixResult mixed =
              mix_at_snr_scalenoise(clean_waves[clean_idx], rendered_noise(noise_clip), snr);

          ManifestRow row;
          row.clip_path = subset + "/" + machine.machine_type + "/" + role.split + "/" +
                          role.domain + "/" + clean_clip.id + "__" + noise_clip.id +
                          "__snr" + snr_tag(snr) + ".wav";
          row.machine_type = machine.machine_type;
          row.split = role.split;
          row.domain = role.domain;
          row.is_anomalous = role.anomalous;
          row.snr_db = snr;
          row.noise_clip_id = noise_clip.id;
          row.seed = clean_clip.spec.seed;

          if (to_disk) {
            fs::path path = fs::path(out_dir) / row.clip_path;
            fs::create_directories(path.parent_path());
            write_wav(mixed.mixture, path.string());
          } else if (keep_mixtures) {
            result.mixtures.push_back(std::move(mixed.mixture));
          }
          result.manifest.rows.push_back(std::move(row));
        }
      }
    }
  }

  if (to_disk)
    result.manifest.save_csv((fs::path(out_dir) / (subset + "_manifest.csv")).string());
  return result;
}

}  // namespace mixret
