#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rdslab/rng.hpp"

namespace rdslab {

// ============================================================================
// Driver specification
// ============================================================================

enum class DriverKind { Iid, Markov };

struct DriverSpec {
  DriverKind kind = DriverKind::Iid;
  int alphabet_size = 0;
  Eigen::MatrixXd transition;      // markov only
  std::vector<double> stationary;  // pi
  std::string seed_algorithm_id = "splitmix64-counter";

  static DriverSpec iid(std::vector<double> probs);
  /// Builds a Markov spec; pi is the normalized left fixed vector of P.
  static DriverSpec markov(const Eigen::MatrixXd& P);

  /// Throws std::invalid_argument on a malformed spec.
  void validate() const;

  /// Reversed chain P~_ij = pi_j P_ji / pi_i.
  Eigen::MatrixXd reversed() const;
};

/// Left fixed vector of a row-stochastic matrix, normalized to sum 1.
std::vector<double> stationary_vector(const Eigen::MatrixXd& P);

// ============================================================================
// Paths
// ============================================================================

/**
 * @brief Two-sided coordinate path of the driving system.
 *
 * Stores X_j for |j| <= W + horizon around the sampling origin. shift moves the
 * origin without copying; coordinate j of shift(p, k) is coordinate j+k of p.
 */
class EnvPath {
 public:
  EnvPath() = default;
  EnvPath(std::vector<int> coords, int window, int horizon, std::uint64_t seed);

  /// Coordinate X_j relative to the current origin.
  int operator[](long j) const;
  bool contains(long j) const;

  long lowest() const { return -static_cast<long>(center_) - offset_; }
  long highest() const { return static_cast<long>(data_->size()) - 1 - center_ - offset_; }

  long origin_offset() const { return offset_; }
  int window() const { return window_; }
  int horizon() const { return horizon_; }
  std::uint64_t seed() const { return seed_; }

  EnvPath shift(long k) const;
  std::vector<int> slice(long from, long to) const;  // inclusive

 private:
  std::shared_ptr<const std::vector<int>> data_;
  std::size_t center_ = 0;
  long offset_ = 0;
  int window_ = 0;
  int horizon_ = 0;
  std::uint64_t seed_ = 0;
};

/// Stationary two-sided path with |j| <= window + horizon.
EnvPath sample_path(const DriverSpec& spec, std::uint64_t seed, int horizon, int window = 0);

/// Same as sample_path but with an explicit generator.
EnvPath sample_path(const DriverSpec& spec, CounterRng& rng, int horizon, int window = 0);

// ============================================================================
// Parameter fields
// ============================================================================

/**
 * @brief A real parameter computed from the coordinates X_{-r..r} of a path.
 */
struct ParamField {
  int radius = 0;
  std::function<double(const std::vector<int>&)> evaluator;  // argument has 2r+1 entries

  double operator()(const EnvPath& path, long j = 0) const;

  /// Table lookup on X_0.
  static ParamField table(std::vector<double> values);
  /// Mean of table values over X_{-r..r}.
  static ParamField window_mean(std::vector<double> values, int r);
  /// sum_{|j|<=r} 2^{-|j|-2} 1{X_j in set}.
  static ParamField geometric_indicator(std::vector<int> set, int r);
};

/// Checks that the evaluator ignores coordinates beyond the radius by resampling them.
bool field_is_local(const ParamField& field, const DriverSpec& spec, std::uint64_t seed, int trials = 200);

// ============================================================================
// Mixing, hitting times, tails
// ============================================================================

Eigen::MatrixXd matrix_power(const Eigen::MatrixXd& P, int k);

/// max(0, max_ij P^k_ij / pi_j - 1); 0 for iid drivers.
double psi_upper_mixing(const DriverSpec& spec, int k);

struct HittingTime {
  long n = 0;
  bool censored = false;
};

constexpr long kDefaultCensoring = 1000000;

/// Smallest n >= 1 with pred(n) true, n <= max_n and inside the path; otherwise censored.
HittingTime hitting_time(const EnvPath& path, const std::function<bool(const EnvPath&, long)>& pred,
                         long max_n = kDefaultCensoring);

/// Exact P(field <= threshold) by enumeration of the window law (alphabet^(2r+1) <= 2^22).
double set_probability(const DriverSpec& spec, const ParamField& field, double threshold);

struct TailReport {
  long j = 0;
  double empirical = 0.0;
  double bound = 1.0;
  int best_r = 0;
  double sigma = 0.0;
  bool pass = false;
};

/**
 * @brief Empirical P(n_A > j) for A = {field <= threshold} against the block bound
 * (1+psi(r))^{m-1} (1-P(A)+beta_r)^m + m beta_r, m = floor(j/3r), minimized over r.
 */
TailReport tail_bound_check(const DriverSpec& spec, const ParamField& field, double threshold, long j,
                            int trials, std::uint64_t seed);

/// Monte-Carlo estimate of || f - E[f | X_{-r..r}] ||_{L1}.
double beta_r(const ParamField& field, int r, const DriverSpec& spec, int samples, std::uint64_t seed,
              int inner = 32);

}  // namespace rdslab
