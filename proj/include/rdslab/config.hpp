#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "rdslab/cocycle.hpp"
#include "rdslab/env.hpp"
#include "rdslab/maps.hpp"

namespace rdslab {

/// Malformed configuration; key() is the dotted path of the offending entry.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::runtime_error("config: " + key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

/// Subcommand parameters from the [run] section.
struct RunParams {
  long start = 0;
  int n = 20;                  // window length or Birkhoff length
  std::vector<int> ladder;     // n ladder for be, lclt, mdp, pressure
  int trials = 10000;
  int samples = 50;            // test functions or cone pairs
  int depth = 0;               // back depth, 0 = automatic
  double a_exponent = 0.35;    // lclt: a_n = n^a_exponent
  double mdp_exponent = 0.7;   // mdp: a_n = n^mdp_exponent
  double x = 1.0;              // mdp level
  double p = 0.0;              // moment exponent, 0 = infinity
  int nodes = 32;              // circle nodes
  double window_lo = 0.0;      // lclt interval
  double window_hi = 1.0;
  double threshold = 0.5;      // tails: A = {field <= threshold}
  std::vector<long> js = {10, 20, 40};
  int k_max = 20;              // mixing lags
};

struct ExperimentConfig {
  // driver
  DriverSpec driver;
  std::uint64_t env_seed = 0;
  bool env_seed_given = false;  // otherwise the path uses the master seed
  // family
  std::string family_kind = "linear";
  std::string field_kind = "table";
  std::vector<double> values;
  int radius = 0;
  std::vector<int> set;
  double offset = 0.0;  // added to the field value before it reaches the family
  double fraction = 0.5;
  std::vector<std::vector<double>> breakpoints;
  // model
  Potential potential;
  double alpha = 1.0;
  int N = 256;
  std::string observable;
  // run
  RunParams run;
  std::uint64_t seed = 0;
  std::string out = "out";
  double slack = 0.05;
  int threads = 1;

  std::uint64_t hash = 0;  // FNV-1a of the canonical key=value listing

  ParamField field() const;
  Family family() const;
  /// Cocycle over a path of the given horizon, sampled with env_seed.
  Cocycle cocycle(int horizon) const;
};

/// Parses INI text. Throws ConfigError naming the key on unknown or malformed entries.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

std::uint64_t fnv1a64(const std::string& s);

}  // namespace rdslab
