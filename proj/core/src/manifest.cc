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


#include "convgen/manifest.h"

#include <chrono>
#include <ctime>
#include <fstream>

#include "convgen/error.h"
#include "convgen/hashing.h"
#include "convgen/text.h"

namespace convgen {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kManifestVersion = 1;
constexpr const char* kLatestFile = "latest";

std::string utc_now(const char* format) {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[64];
  std::strftime(buf, sizeof(buf), format, &tm);
  return buf;
}

}  // namespace

Manifest Manifest::load_or_empty(const fs::path& path) {
  if (!fs::exists(path)) return {};
  json j = json::parse(read_file(path), nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) throw DataError(path.string() + ": malformed manifest");
  try {
    return from_json(j);
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": malformed manifest (" + e.what() + ")");
  }
}

void Manifest::save(const fs::path& path) const {
  write_file(path, to_json().dump(2) + "\n");
}

json Manifest::to_json() const {
  json stages = json::object();
  for (const auto& [name, rec] : stages_) {
    stages[name] = {{"config", rec.config_hash}, {"inputs", rec.inputs}, {"outputs", rec.outputs}};
  }
  return {{"version", kManifestVersion}, {"stages", stages}};
}

Manifest Manifest::from_json(const json& j) {
  if (j.at("version").get<int>() != kManifestVersion) {
    throw DataError("unsupported manifest version");
  }
  Manifest m;
  for (const auto& [name, rec] : j.at("stages").items()) {
    StageRecord r;
    r.config_hash = rec.at("config").get<std::string>();
    r.inputs = rec.at("inputs").get<std::map<std::string, std::string>>();
    r.outputs = rec.at("outputs").get<std::map<std::string, std::string>>();
    m.stages_.emplace(name, std::move(r));
  }
  return m;
}

const StageRecord* Manifest::find(std::string_view stage) const {
  auto it = stages_.find(stage);
  return it == stages_.end() ? nullptr : &it->second;
}

void Manifest::erase(std::string_view stage) {
  auto it = stages_.find(stage);
  if (it != stages_.end()) stages_.erase(it);
}

bool Manifest::is_current(std::string_view stage, const std::string& config_hash,
                          const std::map<std::string, std::string>& inputs,
                          const fs::path& run_dir) const {
  const StageRecord* rec = find(stage);
  if (!rec || rec->config_hash != config_hash || rec->inputs != inputs) return false;
  for (const auto& [rel, digest] : rec->outputs) {
    const fs::path p = run_dir / rel;
    if (!fs::exists(p) || sha256_file(p) != digest) return false;
  }
  return true;
}

fs::path create_run_dir(const fs::path& output_dir) {
  std::error_code ec;
  fs::create_directories(output_dir, ec);
  if (ec) throw DataError("cannot create " + output_dir.string() + ": " + ec.message());
  const std::string base = "run-" + utc_now("%Y%m%d-%H%M%S");
  std::string name = base;
  for (int n = 2; fs::exists(output_dir / name); ++n) name = base + "-" + std::to_string(n);
  fs::create_directory(output_dir / name, ec);
  if (ec) throw DataError("cannot create run directory: " + ec.message());
  write_file(output_dir / kLatestFile, name + "\n");
  return output_dir / name;
}

fs::path latest_run_dir(const fs::path& output_dir) {
  const fs::path pointer = output_dir / kLatestFile;
  if (!fs::exists(pointer)) {
    throw ValidationError("no previous run under " + output_dir.string());
  }
  const std::string name(text::trim(read_file(pointer)));
  const fs::path dir = output_dir / name;
  if (name.empty() || !fs::is_directory(dir)) {
    throw ValidationError(pointer.string() + " names a missing run directory");
  }
  return dir;
}

void JsonlLog::write(json record) {
  record["time"] = utc_now("%Y-%m-%dT%H:%M:%SZ");
  const std::string line = record.dump() + "\n";
  std::lock_guard<std::mutex> lock(mu_);
  std::ofstream out(path_, std::ios::app | std::ios::binary);
  if (!out) throw DataError("cannot append to " + path_.string());
  out << line;
}

}  // namespace convgen
