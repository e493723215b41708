// ergolab: run <config.json> [--jobs N] [--out DIR] [--transcript] | describe <kind> | list
// Exit codes: 0 success, 1 usage or configuration error, 2 verdict failure.

#include <cstdlib>
#include <exception>
#include <iostream>
#include <thread>

#include "CLI11.hpp"

#include "ergolab/config.hpp"
#include "ergolab/error.hpp"
#include "ergolab/experiments.hpp"

namespace {

constexpr const char* kOutEnv = "ERGOLAB_OUT";
constexpr const char* kDefaultOut = "ergolab-out";

std::string output_dir(const std::string& flag, const ergolab::ExperimentConfig& cfg) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv(kOutEnv); env && *env) return env;
  if (!cfg.output_dir.empty()) return cfg.output_dir;
  return kDefaultOut;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Symbolic-dynamics and local lemma experiments"};
  app.set_version_flag("--version", ergolab::tool_version());
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run the experiment described by a JSON config");
  std::string config_path;
  std::string out_flag;
  unsigned jobs = 0;
  bool transcript = false;
  run->add_option("config", config_path, "Experiment config (JSON)")->required();
  run->add_option("--jobs,-j", jobs, "Worker threads (default: hardware concurrency)");
  run->add_option("--out,-o", out_flag, std::string("Output directory (default: $") + kOutEnv +
                                            ", then output.dir in the config, then ./" + kDefaultOut + ")");
  run->add_flag("--transcript", transcript, "Write Moser-Tardos transcripts");

  auto* describe = app.add_subcommand("describe", "Print the parameters of an experiment kind");
  std::string kind;
  describe->add_option("kind", kind, "Experiment kind")->required();

  auto* list = app.add_subcommand("list", "List experiment kinds");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error: " << e.what() << "\n\n";
    for (const auto* sub : {run, describe, list}) {
      if (sub->parsed()) {
        std::cerr << sub->help();
        return 1;
      }
    }
    std::cerr << app.help();
    return 1;
  }

  try {
    if (list->parsed()) {
      for (const auto& k : ergolab::experiment_kinds()) std::cout << k << '\n';
      return 0;
    }
    if (describe->parsed()) {
      std::cout << ergolab::describe_kind(kind);
      return 0;
    }
    const auto cfg = ergolab::load_config(config_path);
    ergolab::RunOptions options;
    options.jobs = jobs ? jobs : std::max(1u, std::thread::hardware_concurrency());
    options.transcript = transcript;
    const auto out = ergolab::run_experiment(cfg, options);
    const auto dir = output_dir(out_flag, cfg);
    ergolab::write_outputs(out, dir, options);
    std::cout << cfg.kind << ": " << (out.failures.empty() ? "pass" : "FAIL") << " (reports in " << dir << ")\n";
    for (const auto& f : out.failures) std::cout << "  verdict: " << f << '\n';
    return out.failures.empty() ? 0 : 2;
  } catch (const ergolab::UsageError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  } catch (const ergolab::PreconditionError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
