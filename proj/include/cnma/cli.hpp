#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "cnma/bayes.hpp"
#include "cnma/mcmc.hpp"

namespace cnma {

inline constexpr std::string_view kVersion = "cnma 1.0.0";

/// Settings of one command run. Every field has a default; the JSON form
/// round-trips exactly.
struct RunConfig {
  std::string command = "fit";
  std::string data;
  std::string out = "out";
  std::string model = "bayes-arm";
  std::string anchor;
  std::string comparator;
  std::string effects = "random";
  std::string zero_cell = "error";
  std::string direction = "higher";
  std::string separator = "+";
  double level = 0.95;
  std::uint64_t seed = 20240101;
  bool dic = false;

  double prior_d_var = 1000.0;
  double prior_alpha_var = 1000.0;
  double prior_sigma_upper = 2.0;

  std::size_t chains = 2;
  std::size_t burn_in = 2000;
  std::size_t iterations = 5000;
  std::size_t thin = 1;

  int network = 1;
  std::string data_anchor;      // empty: the network's reference
  std::string analysis_anchor;  // empty: the network's reference
  long n_per_arm = 500;
  std::size_t replicates = 200;
  std::size_t workers = 1;
  std::vector<std::string> models{"anchored-arm", "freq-contrast", "bayes-contrast", "bayes-arm"};
  bool records = false;

  bool operator==(const RunConfig&) const = default;

  McmcConfig mcmc() const;
  Priors priors() const;
};

std::string config_to_json(const RunConfig& config);
RunConfig config_from_json(std::string_view text);
void save_config(const std::filesystem::path& path, const RunConfig& config);
RunConfig load_config(const std::filesystem::path& path);

/// Each command writes its files under config.out and a short summary to log.
void cmd_convert(const RunConfig& config, std::ostream& log);
void cmd_fit(const RunConfig& config, std::ostream& log);
void cmd_rank(const RunConfig& config, std::ostream& log);
void cmd_simulate(const RunConfig& config, std::ostream& log);

/// Entry point of the command-line tool; returns the process exit code.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace cnma
