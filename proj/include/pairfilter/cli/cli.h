#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pairfilter/error.h"
#include "pairfilter/model/trainer.h"
#include "pairfilter/util.h"

namespace pairfilter {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitData = 3,
  kExitClient = 4,
  kExitInternal = 5,
};

int ExitCodeFor(ErrorKind kind);

// Settings shared by all commands; loaded from --config and overridden by
// command-line flags.
struct RunConfig {
  std::string relations;      // one relation per line
  std::string normalization;  // TSV structured -> natural name
  std::string checkpoint;
  std::string features;       // precomputed hidden states (adapter mode)
  std::string templates;      // JSON prompt template overrides
  std::string examples;       // JSONL few-shot examples
  TrainConfig train;

  std::string llm_client = "fixture";  // "fixture" or "http"
  std::string llm_model = "gpt-3.5-turbo";
  std::string llm_fixture;
  std::size_t parallelism = 4;
  int max_retries = 3;
  int timeout_seconds = 60;
  bool few_shot = false;

  std::string mode = "full";
  std::string candidates = "external-ner";
  double threshold = 0.0;
  std::vector<std::size_t> min_triples = {5};
  std::vector<std::size_t> min_tokens;
  std::optional<std::uint64_t> seed;

  static RunConfig FromJson(const Json& j);
  static RunConfig Load(const std::string& path);
  Json ToJson() const;
  // kConfig when a referenced file is missing or a value is out of range.
  void Validate() const;
};

// Full command-line entry point. `args[0]` is the program name.
int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pairfilter
