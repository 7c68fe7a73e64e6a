#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "rdslab/cocycle.hpp"
#include "rdslab/rng.hpp"
#include "rdslab/rpf.hpp"

namespace rdslab {

// ============================================================================
// Trajectory sampling
// ============================================================================

/// Runs fn(i) for i in [0, n) on up to `threads` threads, in contiguous blocks.
void parallel_for(long n, int threads, const std::function<void(long)>& fn);

/**
 * @brief Path sampler for the Birkhoff sums S_j = sum_{i<j} u~_i(x_i), x_i = T^i x_0, x_0 ~ mu_0.
 *
 * Paths are drawn backwards: x_n ~ mu_n, then x_j is the preimage y of x_{j+1}
 * under branch i with probability e^{phi(y)} h_j(y) / (lambda_j h_{j+1}(x_{j+1})),
 * which is the law of (x_0, ..., x_n) under mu_0. Forward iteration of the
 * expanding maps loses all binary digits of x_0 after about 50 steps, backward
 * sampling does not.
 */
class PathSampler {
 public:
  /// Uses fibers start, ..., start+n-1 of the triplet window.
  PathSampler(const Cocycle& cc, const RPFTriplet& t, long start, int n);

  int length() const { return n_; }
  int grid() const { return N_; }

  /// Draws x ~ mu_{start+n} from the piecewise-linear density.
  double sample_end(CounterRng& rng) const;

  /**
   * @brief One path; returns S_n. If `ladder` is non-empty, out[i] receives S_{ladder[i]}.
   * Ladder entries must lie in [1, n].
   */
  double sample(CounterRng& rng, const std::vector<int>& ladder = {}, double* out = nullptr) const;

  /**
   * @brief One path under the proposal that also weighs branch i by F_j(y_i).
   *
   * F has one grid function per fiber (index j - start), given as N+1 nodes with
   * the last node repeated. Returns S_n and writes
   * the log of the exact likelihood ratio dP/dQ of the drawn path to *log_ratio.
   */
  double sample_tilted(CounterRng& rng, const std::vector<std::vector<double>>& F, double* log_ratio) const;

  /**
   * @brief Trials first, ..., first+count-1 with generators master.split(trial).
   *
   * Same draws as calling sample() per trial. On two-branch affine windows
   * each group of kBlock trials advances together fiber by fiber.
   * pre has ladder.size() entries per trial.
   */
  void sample_many(const CounterRng& master, long first, int count, const std::vector<int>& ladder, double* sums,
                   double* pre) const;
  /// Batched sample_tilted with the same convention.
  void sample_tilted_many(const CounterRng& master, long first, int count, const std::vector<std::vector<double>>& F,
                          double* sums, double* log_ratio) const;

  static constexpr int kBlock = 512;

  /// Observable u~_j at x (j relative to start).
  double u(int j, double x) const;

 private:
  struct Fiber {
    const FiberCache* cache;
    bool affine;                        // closed-form inverses and constant e^phi per branch
    std::vector<double> left, width;    // affine inverse y = left + width x
    std::vector<double> branch_weight;  // e^phi per branch when affine
    std::vector<double> h;              // N+1 padded nodes of h_j, empty when h_j is constant
    std::vector<double> u;              // N+1 padded nodes of the centered observable
  };
  // Two affine branches: the common case, sampled without the generic branch loop.
  struct Pair {
    double l0, w0, l1, w1, e0, e1;
    const double* h;
    const double* u;
  };
  void choose(const Fiber& f, double x, const double* F, double* y_out, double* p_choice, double* p_prop,
              CounterRng& rng) const;

  std::vector<Pair> pairs_;  // filled when every fiber is a two-branch affine map
  int n_ = 0, N_ = 0;
  std::vector<Fiber> fibers_;
  std::vector<double> cdf_;   // cumulative cell masses of mu_n
  std::vector<double> dens_;  // lumped density of mu_n
};

struct TrajectoryBatch {
  int n = 0;
  int trials = 0;
  std::vector<double> sums;                    // S_n per trial
  std::map<int, std::vector<double>> prefix;  // S_m per trial for ladder entries m
  std::string x0_law = "mu_omega";
  std::uint64_t seed = 0;
};

/// Trial i uses the generator CounterRng(seed).split(i), so results do not depend on `threads`.
TrajectoryBatch birkhoff_batch(const Cocycle& cc, const RPFTriplet& t, long start, int n, int trials,
                               std::uint64_t seed, const std::vector<int>& ladder = {}, int threads = 1);

// ============================================================================
// Variance
// ============================================================================

/// Var_mu(S_n) on the grid from covariance sums, truncating lags once terms drop below tol.
double sum_variance(const Cocycle& cc, const RPFTriplet& t, long start, int n, double tol = 1e-13);

/// Cov_{mu_j}(u~_j, u~_{j+k} o T^k) for k = 0..K.
std::vector<double> lag_covariances(const Cocycle& cc, const RPFTriplet& t, long j, int K);

struct VarianceEstimate {
  double direct = 0.0;      // Var(samples) / n
  double green_kubo = 0.0;  // averaged over the sampled fibers
  int K = 0;
  bool K_capped = false;
  double tail_bound = 0.0;  // correlation-decay bound on the truncated tail
  double agreement = 0.0;   // direct / green_kubo
};

/**
 * @brief Green-Kubo sum averaged over `fibers` start points.
 *
 * K is the smallest lag with the decay-of-correlations bound on the tail below
 * 1% of the partial sum, capped at K_cap.
 */
VarianceEstimate variance_estimate(const Cocycle& cc, const RPFTriplet& t, const TrajectoryBatch& batch, long start,
                                   int fibers = 16, int K_cap = 2000);

double sample_variance(const std::vector<double>& x);
double sample_mean(const std::vector<double>& x);

// ============================================================================
// CLT, Berry-Esseen, LCLT
// ============================================================================

double normal_cdf(double x);

/// sup_t |F_emp(t) - Phi(t)| of x.
double ks_normal(std::vector<double> x);

struct Degeneracy {
  double var_n = 0.0;   // Var(S_n) / n
  double var_4n = 0.0;  // Var(S_4n) / 4n
  double ratio = 0.0;
  bool degenerate = false;  // ratio > 3
};

/// Uses the ladder entries n and 4n of the batch.
Degeneracy detect_degeneracy(const TrajectoryBatch& batch, int n);

struct CltResult {
  double ks = 1.0;
  bool degenerate = false;
  bool pass = false;
};

/// KS distance of S_n / sqrt(n sigma2) against N(0,1); pass iff ks < threshold and not degenerate.
CltResult clt_check(const TrajectoryBatch& batch, double sigma2, const Degeneracy* deg = nullptr,
                    double threshold = 0.02);

struct CurvePoint {
  int n = 0;
  double value = 0.0;
  bool censored = false;
};

struct BeCurve {
  std::vector<CurvePoint> points;
  double noise_floor = 0.0;  // 1/sqrt(trials)
  double slope = 0.0;        // least squares in log-log over uncensored points
  bool degenerate = false;
  bool pass(double lo = -0.65, double hi = -0.35) const;
};

/// sigma_n[i] = sqrt(Var S_{ladder[i]}); each prefix is normalized by its own sigma.
BeCurve berry_esseen_curve(const TrajectoryBatch& batch, const std::vector<int>& ladder,
                           const std::vector<double>& sigma_n);

/// Least-squares slope of ln y against ln x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

struct LcltResult {
  double gap = 0.0;
  double kappa = 0.0;
  bool censored = false;
};

/**
 * @brief sup over v of |sqrt(2 pi) kappa P(S_n in a_n (v + I)) - |I| e^{-v^2 / (2 kappa^2)}|,
 * kappa = sigma_n / a_n.
 */
LcltResult lclt_window(const std::vector<double>& sums, double sigma_n, double a_n, double lo, double hi,
                       const std::vector<double>& v);

/// Count of strict increases in a sequence that should decrease.
int inversions(const std::vector<double>& y);

// ============================================================================
// Martingale decomposition and rho sums
// ============================================================================

struct MartingaleDecomp {
  std::vector<GridFn> G;  // G_0 = 0, ..., G_n
  std::vector<GridFn> M;  // M_0, ..., M_{n-1} at the nodes
  std::vector<double> residual;  // sup |L_m M_m|
  double max_residual = 0.0;
  double G_norm = 0.0;   // ||G_n||
  double G_bound = 0.0;  // B_{theta^n omega} max_j ||u~_j|| R_n
};

MartingaleDecomp martingale_decomp(const Cocycle& cc, const RPFTriplet& t, long start, int n);

struct RhoSums {
  double R_n = 0.0;
  double R_mn = 0.0;
};

/// rho[j] = rho(theta^j omega); needs rho.size() > n for R_{m,n}.
RhoSums rho_partial_sums(const std::vector<double>& rho, int n, int m);

/// E[R_n^p] for p = 1..p_max over environments; rho_seq(seed) returns a rho sequence of length >= max n.
std::vector<std::vector<double>> rho_moments(const std::function<std::vector<double>(std::uint64_t)>& rho_seq,
                                             const std::vector<int>& ns, int envs, int p_max, std::uint64_t seed);

}  // namespace rdslab
