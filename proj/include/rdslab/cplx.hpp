#pragma once

#include <cstdint>
#include <vector>

#include "rdslab/cocycle.hpp"
#include "rdslab/cones.hpp"
#include "rdslab/rpf.hpp"

namespace rdslab {

/// E_{mu_start}[e^{z S_n}] = mu_{start+n}(L^{(z),n} 1).
cplx normalized_mgf(const Cocycle& cc, const RPFTriplet& t, long start, int n, cplx z);

/// Smallest r0 over fibers start..start+n-1, with the observable norms of each fiber.
double window_r0(const Cocycle& cc, const RPFTriplet& t, long start, int n);

struct PressureWindow {
  int n = 0;
  double radius = 0.0;
  bool r0_binds = false;  // radius set by r0 / 2 rather than n^{-2/p}
  std::vector<cplx> nodes;
  std::vector<cplx> samples;  // principal log of the MGF at the nodes
  cplx d1 = 0.0;
  cplx d2 = 0.0;
  double sigma2_n = 0.0;
  double real_axis_imag = 0.0;  // max |Im Pi| at z = +-r
  double conjugation = 0.0;     // max |Pi(conj z) - conj Pi(z)|
  double analyticity = 0.0;     // largest negative-frequency coefficient over max |Pi|
  bool pass = false;            // |d1| <= 1e-3 n and d2 / sigma2_n in [0.98, 1.02]
};

/**
 * @brief Pi on the circle |z| = r_n, r_n = min(r0/2, n^{-2/p}), and its first two
 * derivatives at 0 from the trapezoidal Cauchy integrals.
 *
 * Throws std::runtime_error when the MGF winds around 0 along the circle.
 * p_exponent = 0 means p = infinity.
 */
PressureWindow pressure_window(const Cocycle& cc, const RPFTriplet& t, long start, int n, double p_exponent,
                               double sigma2_n, int nodes = 32);

struct CharGap {
  std::vector<double> t;
  std::vector<double> gap;
  double max_gap = 0.0;
  bool degenerate = false;
};

/// |E[e^{i t S_n / sigma_n}] - e^{-t^2/2}| over the grid.
CharGap char_fn_gap(const Cocycle& cc, const RPFTriplet& t, long start, int n, double sigma_n,
                    const std::vector<double>& tgrid);

struct MdpPoint {
  int n = 0;
  double a_n = 0.0;
  double x = 0.0;
  double theta = 0.0;        // tilt of the proposal
  double probability = 0.0;  // estimate of P(S_n / a_n > x)
  double rel_error = 0.0;    // standard error over the estimate
  double rate = 0.0;         // (n / a_n^2) ln P
  double target = 0.0;       // -x^2 / (2 sigma2)
  double ratio = 0.0;        // rate / target
  bool censored = false;
};

/**
 * @brief Importance-sampled moderate-deviation rate.
 *
 * Paths are drawn backwards under the proposal weighting branch i by
 * e^{theta u~(y_i)} G_j(y_i), with G_0 = 1 and G_{j+1} = L^{(theta)}_j G_j the
 * real tilted normalized operator, theta = x a_n / (n sigma2). The estimator
 * averages 1{S_n > x a_n} times the exact likelihood ratio of each path.
 */
MdpPoint mdp_point(const Cocycle& cc, const RPFTriplet& t, long start, int n, double a_n, double x, double sigma2,
                   int trials, std::uint64_t seed, int threads = 1);

}  // namespace rdslab
