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


// convgen: generate, filter, train, retrieve and evaluate from one config.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "convgen/config.h"
#include "convgen/error.h"
#include "convgen/pipeline.h"

namespace fs = std::filesystem;
using namespace convgen;

namespace {

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> output;
  std::optional<std::string> run_dir;
  bool resume = false;
  bool quiet = false;
};

enum class RunDirPolicy { kFresh, kLatest };

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config, "Pipeline config (JSON)")->required();
  cmd->add_option("--seed", o.seed, "Global seed (overrides config)");
  cmd->add_option("--workers", o.workers, "Worker threads (overrides config)");
  cmd->add_option("--output", o.output, "Output directory for run directories");
  cmd->add_option("--run-dir", o.run_dir, "Use this run directory");
  cmd->add_flag("--resume", o.resume, "Continue in the latest run directory");
  cmd->add_flag("-q,--quiet", o.quiet, "No progress output");
  cmd->allow_extras();
}

// Leftover "--a.b value" / "--a.b=value" arguments become config overrides.
std::vector<std::pair<std::string, std::string>> dotted_overrides(
    const std::vector<std::string>& extras) {
  std::vector<std::pair<std::string, std::string>> out;
  for (std::size_t i = 0; i < extras.size(); ++i) {
    const std::string& arg = extras[i];
    if (arg.rfind("--", 0) != 0 || arg.size() < 3) {
      throw ValidationError("unexpected argument \"" + arg + "\"");
    }
    std::string key = arg.substr(2);
    const auto eq = key.find('=');
    if (eq != std::string::npos) {
      out.emplace_back(key.substr(0, eq), key.substr(eq + 1));
      continue;
    }
    if (i + 1 >= extras.size()) throw ValidationError("override " + arg + " needs a value");
    out.emplace_back(key, extras[++i]);
  }
  return out;
}

PipelineConfig load(const CommonOptions& o, const CLI::App* cmd) {
  auto overrides = dotted_overrides(cmd->remaining());
  if (o.seed) overrides.emplace_back("seed", std::to_string(*o.seed));
  if (o.workers) overrides.emplace_back("workers", std::to_string(*o.workers));
  PipelineConfig config = load_config(o.config, overrides);
  if (o.output) config.output_dir = fs::absolute(*o.output);
  return config;
}

fs::path choose_run_dir(const CommonOptions& o, const PipelineConfig& config,
                        RunDirPolicy policy) {
  if (o.run_dir) {
    fs::create_directories(*o.run_dir);
    return *o.run_dir;
  }
  if (o.resume) return latest_run_dir(config.output_dir);
  if (policy == RunDirPolicy::kLatest && fs::exists(config.output_dir / "latest")) {
    return latest_run_dir(config.output_dir);
  }
  return create_run_dir(config.output_dir);
}

std::optional<fs::path> as_path(const std::optional<std::string>& s) {
  if (!s) return std::nullopt;
  return fs::path(*s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthetic conversational query generation and dense retrieval"};
  app.require_subcommand(1);

  CommonOptions common;
  std::optional<std::string> dialogues, pairs, model, queries, run, qrels;
  std::optional<std::size_t> k;
  std::vector<std::string> metrics;

  auto* generate = app.add_subcommand("generate", "Generate synthetic conversations");
  add_common(generate, common);

  auto* filter = app.add_subcommand("filter", "Round-trip consistency filtering");
  add_common(filter, common);
  filter->add_option("--dialogues", dialogues, "Dialogues JSONL (default: run directory)");

  auto* train = app.add_subcommand("train", "Train the dual encoder");
  add_common(train, common);
  train->add_option("--pairs", pairs, "Training pairs JSONL (default: kept pairs)");

  auto* retrieve = app.add_subcommand("retrieve", "Retrieve for conversational queries");
  add_common(retrieve, common);
  retrieve->add_option("--model", model, "Model file (default: run directory)");
  retrieve->add_option("--queries", queries, "Queries JSONL {\"qid\", \"history\"}");
  retrieve->add_option("-k,--k", k, "Results per query");

  auto* evaluate = app.add_subcommand("evaluate", "Score a TREC run against qrels");
  add_common(evaluate, common);
  evaluate->add_option("--run", run, "TREC run file (default: run directory)");
  evaluate->add_option("--qrels", qrels, "TREC qrels file");
  evaluate->add_option("--metrics", metrics, "Metrics, e.g. mrr@5 recall@5 map@10");

  auto* pipeline = app.add_subcommand("pipeline", "Run every stage in order");
  add_common(pipeline, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : exit_code_for(ErrorKind::kValidation);
  }

  try {
    CLI::App* cmd = app.get_subcommands().front();
    PipelineConfig config = load(common, cmd);
    if (!metrics.empty()) config.metrics = metrics;
    config.validate();

    StageInputs in;
    in.dialogues = as_path(dialogues);
    in.pairs = as_path(pairs);
    in.model = as_path(model);
    in.queries = as_path(queries);
    in.run = as_path(run);
    in.qrels = as_path(qrels);
    in.k = k;

    RunDirPolicy policy = RunDirPolicy::kLatest;
    if (cmd == generate) {
      Pipeline::validate_generate(config);
      policy = RunDirPolicy::kFresh;
    } else if (cmd == filter) {
      Pipeline::validate_filter(config, in);
    } else if (cmd == train) {
      Pipeline::validate_train(config, in);
    } else if (cmd == retrieve) {
      Pipeline::validate_retrieve(config, in);
    } else if (cmd == evaluate) {
      Pipeline::validate_evaluate(config, in);
    } else {
      Pipeline::validate_all(config);
      policy = RunDirPolicy::kFresh;
    }

    const fs::path run_dir = choose_run_dir(common, config, policy);
    Pipeline p(config, run_dir, nullptr, common.quiet ? nullptr : &std::cerr);
    if (!common.quiet) std::cerr << "run directory: " << run_dir.string() << '\n';

    if (cmd == generate) {
      p.generate();
    } else if (cmd == filter) {
      p.filter(in);
    } else if (cmd == train) {
      p.train(in);
    } else if (cmd == retrieve) {
      p.retrieve(in);
    } else if (cmd == evaluate) {
      EvalReport report;
      p.evaluate(in, &report);
      std::cout << report.to_table();
    } else {
      p.run_all();
    }
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(ErrorKind::kData);
  }
}
