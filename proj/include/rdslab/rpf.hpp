#pragma once

#include <string>
#include <vector>

#include "rdslab/cocycle.hpp"
#include "rdslab/cones.hpp"
#include "rdslab/fnspace.hpp"
#include "rdslab/transfer.hpp"

namespace rdslab {

// ============================================================================
// Reconstruction of nu, h, lambda
// ============================================================================

/**
 * @brief One backward step of the dual: nu_omega from nu_{theta omega}.
 *
 * nu_omega(e_j) is proportional to nu_{theta omega}(L_omega e_j) for the hat
 * basis e_j. The right side is integrated against the piecewise-linear density
 * of nu_{theta omega} after the change of variables x = T(y) on each branch,
 * with 3-point Gauss-Legendre rules between consecutive breakpoints, so the
 * step is exact for affine branches with locally constant e^phi T'.
 *
 * @param total receives nu_{theta omega}(L_omega 1) before normalization.
 */
GridMeasure dual_step(const FiberCache& c, const GridMeasure& nu_next, double* total = nullptr);

struct NuEstimate {
  GridMeasure nu;
  double bound = 0.0;  // sqrt(2) rho_{omega,n}, times (1+s) in Maps2
};

/// nu at fiber j from Lebesgue at fiber j+depth.
NuEstimate compute_nu(const Cocycle& cc, long j, int depth);

/// h at fiber j: L^depth applied to `seed` (default 1) from fiber j-depth, scaled so nu(h) = 1.
GridFn compute_h(const Cocycle& cc, long j, int depth, const GridMeasure& nu, const GridFn* seed = nullptr);

/// lambda_omega = nu_{theta omega}(L_omega 1).
double compute_lambda(const FiberContext& ctx, const GridMeasure& nu_next);

/// prod_{i<n} rho(theta^{from+i} omega).
double rho_product(const Cocycle& cc, long from, int n);

/// Smallest n with rho_{.,n} < tol both forward from `last` and backward from `first`, capped at `cap`.
int default_back_depth(const Cocycle& cc, long first, long last, bool* capped = nullptr, double tol = 1e-6,
                       int cap = 200);

// ============================================================================
// Triplet over a window
// ============================================================================

/**
 * @brief RPF data for fibers start, ..., start+fibers-1, plus h, nu, mu at start+fibers.
 *
 * lambda_j = nu_{j+1}(L_j h_j) and h_{j+1} = L_j h_j / lambda_j, so nu_j(h_j) = 1
 * holds along the window up to roundoff. lambda_dual holds nu_{j+1}(L_j 1).
 */
struct RPFTriplet {
  long start = 0;
  int fibers = 0;
  int back_depth = 0;
  bool depth_capped = false;
  std::vector<double> lambda;       // fibers
  std::vector<double> lambda_dual;  // fibers
  std::vector<GridFn> h;            // fibers + 1
  std::vector<GridMeasure> nu;      // fibers + 1
  std::vector<GridMeasure> mu;      // fibers + 1
  std::vector<double> center;       // mu_j(u_j), empty without an observable
  double residual = 0.0;            // max |nu_j(h_j) - 1| and |lambda - lambda_dual| / lambda

  bool covers(long j) const { return j >= start && j <= start + fibers; }
  int index(long j) const;
  const GridFn& h_at(long j) const { return h[index(j)]; }
  const GridMeasure& nu_at(long j) const { return nu[index(j)]; }
  const GridMeasure& mu_at(long j) const { return mu[index(j)]; }
  double lambda_at(long j) const;
  double center_at(long j) const;
};

/// depth <= 0 selects default_back_depth.
RPFTriplet build_triplet(const Cocycle& cc, long start, int fibers, int depth = 0);

/// L_j g = L_j(g h_j) / (lambda_j h_{j+1}), with g and h interpolated separately.
GridFn normalized_apply(const Cocycle& cc, const RPFTriplet& t, long j, const GridFn& g);
/// Complex version with weight e^{z (u_j - center_j)}.
CGridFn normalized_apply(const Cocycle& cc, const RPFTriplet& t, long j, const CGridFn& g, cplx z);

/// Centered observable u_j - mu_j(u_j) on the grid.
GridFn centered_observable(const Cocycle& cc, const RPFTriplet& t, long j);

// ============================================================================
// Certificates
// ============================================================================

struct CertificateRow {
  std::string check;  // "i-cone", "i-norm", "ii-lower", "ii-ratio", "iii", "iv", "v"
  int n = 0;
  int sample = -1;
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = false;
};

struct Certificate {
  std::vector<CertificateRow> rows;
  bool pass() const;
  /// Empty string when everything passes.
  std::string first_failure() const;
};

/**
 * @brief Checks (i)-(v) along the triplet window with multiplicative slack.
 *
 * gs and fs are paired test functions at the start fiber; the norm of g is the
 * Hoelder norm sup|g| + v_alpha(g).
 */
Certificate verify_rpf(const Cocycle& cc, const RPFTriplet& t, const std::vector<GridFn>& gs,
                       const std::vector<GridFn>& fs, int n_max, double slack = 0.05);

/// Random Hoelder test function: random Fourier modes plus a slope, sup about `scale`.
GridFn random_holder(int N, double alpha, CounterRng& rng, double scale = 1.0);

struct Decomposition {
  GridFn g1, g2;
  double c1 = 0.0, c2 = 0.0;
  bool in_cone = false;
  double lhs = 0.0;  // norm sum
  double rhs = 0.0;  // bound times ||g||
};

/// Maps2: g = g1 - c with c = v(g)/kappa + sup|g|; bound 3 ||g||.
Decomposition generating_maps2(const GridFn& g, const ConeSpec& spec);
/// Maps1: g = g1 - c1 - (g2 - c2) with g1, g2 in the cone; bound 4 (1 + 2/gamma^alpha) ||g||.
Decomposition generating_maps1(const GridFn& g, const ConeSpec& spec);

}  // namespace rdslab
