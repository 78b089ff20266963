// Copyright 2026 The qwalk Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Grid sweeps with an append-only checkpoint.
//
// The checkpoint is JSON Lines: a header line carrying the plan hash, then
// one record per completed (level, read_layer). Resuming validates the hash,
// skips recorded tasks and ignores a truncated trailing line.

#include <qwalk/ensemble.hpp>
#include <qwalk/errors.hpp>
#include <qwalk/serialize.hpp>

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace qwalk {

class Checkpoint {
 public:
  using Key = std::pair<std::uint64_t, int>;

  /// Starts a fresh checkpoint, or with `resume` reloads an existing one
  /// written for the same plan.
  Checkpoint(std::string path, std::string plan_hash, bool resume)
      : path_(std::move(path)), plan_hash_(std::move(plan_hash)) {
    if (resume && std::filesystem::exists(path_)) {
      load();
      return;
    }
    write_file(path_, Json{{"plan_hash", plan_hash_}}.dump() + "\n");
  }

  const std::map<Key, LevelRecord>& completed() const { return completed_; }

  void append(const LevelRecord& record) {
    std::ofstream out(path_, std::ios::binary | std::ios::app);
    if (!out) throw PersistenceError("cannot append to checkpoint '" + path_ + "'");
    out << to_json(record).dump() << '\n';
    out.flush();
    if (!out) throw PersistenceError("checkpoint write to '" + path_ + "' failed");
    completed_[{record.level_index, record.read_layer}] = record;
  }

 private:
  void load() {
    std::ifstream in(path_, std::ios::binary);
    std::string line;
    if (!std::getline(in, line)) throw PersistenceError("checkpoint '" + path_ + "' is empty");
    Json header = Json::parse(line, nullptr, false);
    if (header.is_discarded() || header.value("plan_hash", std::string()) != plan_hash_)
      throw PersistenceError("checkpoint '" + path_ + "' was written for a different plan");
    while (std::getline(in, line)) {
      Json j = Json::parse(line, nullptr, false);
      if (j.is_discarded()) break;  // interrupted mid-write
      LevelRecord r = record_from_json(j);
      completed_[{r.level_index, r.read_layer}] = std::move(r);
    }
  }

  std::string path_;
  std::string plan_hash_;
  std::map<Key, LevelRecord> completed_;
};

struct SweepOptions {
  unsigned workers = 1;
  std::optional<std::string> checkpoint_path;
  bool resume = false;
  /// Adds a wall-clock timestamp to the metadata; off by default so that
  /// identical runs produce identical documents.
  bool stamp_time = false;
  /// Called on the calling thread after each record is finished.
  std::function<void(const LevelRecord&)> on_record;
};

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Every (level, read_layer) of the plan, propagated with the symmetric walk
/// program.
inline EnsembleResult run_sweep(const SweepPlan& plan, const SweepOptions& options = {}) {
  plan.validate();
  EnsembleResult result;
  result.plan = plan;
  result.metadata.plan_hash = plan_hash(plan);
  result.metadata.n = plan.realizations_per_level;
  if (options.stamp_time) result.metadata.timestamp = utc_timestamp();

  std::optional<Checkpoint> checkpoint;
  if (options.checkpoint_path)
    checkpoint.emplace(*options.checkpoint_path, result.metadata.plan_hash, options.resume);

  std::vector<LevelTask> pending;
  for (std::size_t i = 0; i < plan.grid.size(); ++i)
    for (int layer : plan.effective_read_layers()) {
      if (checkpoint && checkpoint->completed().contains({i, layer})) continue;
      pending.push_back(LevelTask{plan.grid[i], i, layer});
    }

  const MeshProgram program = build_symmetric_qw(plan.spec);
  const std::size_t chunks =
      (plan.realizations_per_level + kRealizationChunk - 1) / kRealizationChunk;
  const std::size_t batch = std::clamp<std::size_t>(
      (4 * std::max(1u, options.workers) + chunks - 1) / chunks, 1, 64);

  std::vector<LevelRecord> fresh;
  for (std::size_t start = 0; start < pending.size(); start += batch) {
    std::vector<LevelTask> tasks(pending.begin() + static_cast<std::ptrdiff_t>(start),
                                 pending.begin() + static_cast<std::ptrdiff_t>(std::min(pending.size(), start + batch)));
    auto stats = run_levels(plan.spec, program, tasks, plan.realizations_per_level,
                            plan.master_seed, plan.policy, options.workers);
    for (std::size_t k = 0; k < tasks.size(); ++k) {
      LevelRecord record = make_record(plan, tasks[k].level_index, tasks[k].read_layer,
                                       std::move(stats[k]));
      if (checkpoint) {
        try {
          checkpoint->append(record);
        } catch (const std::exception& e) {
          result.errors.push_back("level " + std::to_string(record.level_index) + " layer " +
                                  std::to_string(record.read_layer) + ": " + e.what());
        }
      }
      if (options.on_record) options.on_record(record);
      fresh.push_back(std::move(record));
    }
  }

  if (checkpoint)
    for (const auto& [key, record] : checkpoint->completed()) result.records.push_back(record);
  // Records that failed to persist are still part of the result.
  for (auto& r : fresh)
    if (!checkpoint || !checkpoint->completed().contains({r.level_index, r.read_layer}))
      result.records.push_back(std::move(r));
  std::sort(result.records.begin(), result.records.end(), [](const auto& a, const auto& b) {
    return std::pair(a.level_index, a.read_layer) < std::pair(b.level_index, b.read_layer);
  });
  return result;
}

}  // namespace qwalk
