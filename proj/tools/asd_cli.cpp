// asd: experiment runner for the speculative sampler.
//
//   asd <experiment> [--config PATH] [--seed N] [--threads N] [--out DIR]
//                    [--theta N] [--dump-traj]
//   asd summarize FILE...
//
// Exit status: 0 all checks passed, 1 some check failed, 2 usage error,
// 3 output not writable, 4 config schema violation, 5 summarize input
// mismatch, 6 other runtime error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include "CLI11.hpp"
#include "asd/experiments.hpp"

namespace {

enum Exit { kPass = 0, kFail = 1, kUsage = 2, kOutput = 3, kConfig = 4, kInput = 5, kRuntime = 6 };

asd::Json load_json(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw asd::ConfigError("cannot read config '" + path + "'");
  try {
    return asd::Json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    throw asd::ConfigError("config '" + path + "': " + e.what());
  }
}

// Display columns of a UTF-8 string.
std::size_t columns(const std::string& s) {
  std::size_t n = 0;
  for (unsigned char ch : s) n += (ch & 0xC0) != 0x80 ? 1 : 0;
  return n;
}

void print_checks(const asd::ExperimentOutput& out, const std::string& name) {
  std::size_t width = 0;
  for (const auto& c : out.checks) width = std::max(width, columns(c.name));
  for (const auto& c : out.checks) {
    const std::string pad(width - columns(c.name), ' ');
    std::printf("%s  %s%s  %s\n", c.passed ? "PASS" : "FAIL", c.name.c_str(), pad.c_str(),
                c.detail.c_str());
  }
  std::printf("%s: %s\n", name.c_str(), out.passed ? "passed" : "FAILED");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Speculative sampling experiments"};
  app.require_subcommand(1);

  struct Flags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> threads;
    std::string out;
    std::optional<int> theta;
    bool dump_traj = false;
  };
  Flags flags;
  std::vector<std::string> files;

  const std::vector<std::string> names{"verify-grs", "correctness", "exchangeability",
                                       "scaling",    "reparam",     "speedup"};
  for (const auto& n : names) {
    auto* sub = app.add_subcommand(n, "run the " + n + " experiment");
    sub->add_option("--config", flags.config, "JSON config file");
    sub->add_option("--seed", flags.seed, "first seed; keeps the configured seed count");
    sub->add_option("--threads", flags.threads, "worker threads (default $ASD_THREADS or all)");
    sub->add_option("--out", flags.out, "output directory");
    sub->add_option("--theta", flags.theta, "speculation window length")
        ->check(CLI::PositiveNumber);
    sub->add_flag("--dump-traj", flags.dump_traj, "also write example trajectories");
  }
  auto* summ = app.add_subcommand("summarize", "aggregate result files");
  summ->add_option("files", files, "result JSON or CSV files");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kUsage;
  }

  const std::string cmd = app.get_subcommands().front()->get_name();
  if (cmd == "summarize") {
    if (files.empty()) {
      std::cerr << "summarize: no input files\n";
      return kUsage;
    }
    try {
      std::cout << asd::summarize(files);
      return kPass;
    } catch (const asd::InputError& e) {
      std::cerr << "summarize: " << e.what() << '\n';
      return kInput;
    }
  }

  asd::ExperimentConfig config;
  try {
    const asd::Experiment exp = asd::parse_experiment(cmd);
    if (flags.config.empty()) {
      config = asd::default_config(exp);
    } else {
      asd::Json j = load_json(flags.config);
      if (j.is_object() && j.contains("experiment") && j["experiment"] != cmd) {
        throw asd::ConfigError("config is for '" + j["experiment"].dump() + "', not '" + cmd + "'");
      }
      if (j.is_object() && !j.contains("experiment")) j["experiment"] = cmd;
      config = asd::config_from_json(j);
    }
    if (flags.seed) {
      std::iota(config.seeds.begin(), config.seeds.end(), *flags.seed);
    }
    if (flags.threads) config.threads = *flags.threads;
    if (!flags.out.empty()) config.output = flags.out;
    if (flags.theta) config.theta = *flags.theta;
    if (flags.dump_traj) config.dump_traj = true;
  } catch (const asd::UnknownExperiment& e) {
    std::cerr << e.what() << '\n';
    return kUsage;
  } catch (const asd::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  }

  try {
    const asd::ExperimentOutput out = asd::run_experiment(config);
    asd::write_outputs(config, out, config.output);
    print_checks(out, cmd);
    return out.passed ? kPass : kFail;
  } catch (const asd::OutputError& e) {
    std::cerr << "output error: " << e.what() << '\n';
    return kOutput;
  } catch (const asd::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
}
