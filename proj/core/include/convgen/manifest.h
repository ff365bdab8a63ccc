// Copyright 2026 The convgen Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace convgen {

/// What one stage consumed and produced. Inputs are keyed by role
/// ("corpus", "pairs", ...); outputs by path relative to the run directory.
/// Values are SHA-256 hex digests.
struct StageRecord {
  std::string config_hash;
  std::map<std::string, std::string> inputs;
  std::map<std::string, std::string> outputs;

  friend bool operator==(const StageRecord&, const StageRecord&) = default;
};

/// Content hashes of every artifact of a run, stage by stage. Holds no
/// timestamps, so identical runs produce identical manifests.
class Manifest {
 public:
  /// Empty manifest when the file does not exist; DataError when it is
  /// unreadable.
  static Manifest load_or_empty(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  nlohmann::json to_json() const;
  static Manifest from_json(const nlohmann::json& j);

  const StageRecord* find(std::string_view stage) const;
  void record(const std::string& stage, StageRecord rec) { stages_[stage] = std::move(rec); }
  void erase(std::string_view stage);

  /// True when `stage` ran with the same config hash and inputs and every
  /// recorded output under `run_dir` still has its recorded hash.
  bool is_current(std::string_view stage, const std::string& config_hash,
                  const std::map<std::string, std::string>& inputs,
                  const std::filesystem::path& run_dir) const;

  const std::map<std::string, StageRecord, std::less<>>& stages() const { return stages_; }

 private:
  std::map<std::string, StageRecord, std::less<>> stages_;
};

/// Creates "<output_dir>/run-YYYYmmdd-HHMMSS" (UTC; a numeric suffix avoids
/// collisions) and points "<output_dir>/latest" at it.
std::filesystem::path create_run_dir(const std::filesystem::path& output_dir);

/// Directory named by "<output_dir>/latest". Throws ValidationError when
/// there is none.
std::filesystem::path latest_run_dir(const std::filesystem::path& output_dir);

/// Appends one JSON object per line. Thread-safe.
class JsonlLog {
 public:
  explicit JsonlLog(std::filesystem::path path) : path_(std::move(path)) {}
  /// Adds "time" (UTC, ISO 8601) to `record` and appends it.
  void write(nlohmann::json record);

 private:
  std::filesystem::path path_;
  std::mutex mu_;
};

}  // namespace convgen
