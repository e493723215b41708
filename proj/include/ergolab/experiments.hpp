#pragma once

// Batch experiments behind the command-line tool. Each kind validates its
// parameter block completely before doing any work.

#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "ergolab/config.hpp"

namespace ergolab {

struct RunOptions {
  unsigned jobs = 1;
  bool transcript = false;
};

struct ExperimentOutput {
  nlohmann::json summary;                    // embeds the resolved config and version
  std::map<std::string, std::string> files;  // file name -> contents (CSV detail, transcripts)
  std::vector<std::string> failures;         // empirical verdict failures
};

ExperimentOutput run_experiment(const ExperimentConfig& cfg, const RunOptions& options = {});

/// Writes summary.json, the detail files and meta.json (the only file with
/// timestamps) into `dir`, creating it if needed.
void write_outputs(const ExperimentOutput& out, const std::string& dir, const RunOptions& options);

/// Parameter reference for one kind; UsageError for unknown kinds.
std::string describe_kind(const std::string& kind);

const char* tool_version();

}  // namespace ergolab
