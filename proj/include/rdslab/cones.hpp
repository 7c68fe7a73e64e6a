#pragma once

#include <limits>
#include <string>
#include <vector>

#include "rdslab/fnspace.hpp"
#include "rdslab/maps.hpp"
#include "rdslab/rng.hpp"
#include "rdslab/transfer.hpp"

namespace rdslab {

// ============================================================================
// Effective rates
// ============================================================================

struct EffectiveRates {
  Regime regime = Regime::Maps1;
  double q = 0.0;
  double D = 0.0;
  double rho = 0.0;
  double B = 0.0;
  double B1 = 0.0;
  double K = 0.0;
  double M = 0.0;
  double rho_tilde = 0.0;
  double zeta = 0.0;  // Maps2
  bool has_u = false;
  double H_tilde = 0.0;
  double c0 = 0.0;
  double E = 0.0;
  double Dbar = 0.0;
};

/// Observable data entering c0, E and Dbar.
struct ObservableNorms {
  double sup = 0.0;     // ||u~||_inf
  double var = 0.0;     // v_alpha(u)
  double holder = 0.0;  // ||u~||_alpha
  static ObservableNorms of(const GridFn& u_centered);
};

/// Throws std::domain_error quoting the failing standing condition.
EffectiveRates effective_rates(const FiberParams& p, const FiberParams& next, const ObservableNorms* u = nullptr);

/// Closed form of the linear a-map example: rho for successive parameter a' at exponent alpha.
double linear_example_rho(double a_next, double alpha);
double linear_example_B(double a, double alpha);

struct ComplexRates {
  double rho_tilde = 0.0;
  double r0 = 0.0;  // delta(z) = 2|z| c0 (1 + cosh(D/2)) <= 1 - e^{-D}
};

ComplexRates complex_rates(const EffectiveRates& r);

// ============================================================================
// Cones and the Hilbert metric
// ============================================================================

struct ConeSpec {
  Regime regime = Regime::Maps1;
  double parameter = 1.0;  // Maps1: gamma^alpha; Maps2: kappa
  double alpha = 1.0;
};

ConeSpec cone_for(const FiberParams& p);

struct Membership {
  bool member = false;
  double margin = 0.0;
};

Membership cone_contains(const ConeSpec& spec, const GridFn& g);

/// ln(beta/alpha); +infinity when f or g sits on the cone boundary.
double hilbert_distance(const ConeSpec& spec, const GridFn& f, const GridFn& g);

/// Extremal scalars sup{s: f - s g in C} and inf{t: t g - f in C}.
std::pair<double, double> hilbert_extremes(const ConeSpec& spec, const GridFn& f, const GridFn& g);

/// g = exp(t w) with w a random smooth field and t leaving at least 10% of the budget.
GridFn sample_cone_element(const ConeSpec& spec, int N, CounterRng& rng);

struct InvarianceReport {
  int samples = 0;
  int failures = 0;
  double min_margin = std::numeric_limits<double>::infinity();
  bool pass() const { return failures == 0; }
};

InvarianceReport verify_invariance(const FiberContext& ctx, const ConeSpec& in, const ConeSpec& out, int samples,
                                   CounterRng& rng);

struct ContractionReport {
  int pairs = 0;
  double diameter = 0.0;
  double D = 0.0;
  double max_ratio = 0.0;
  double rho = 0.0;
  double slack = 0.05;
  bool diameter_pass = false;
  bool ratio_pass = false;         // ratio <= rho (1 + slack)
  bool ratio_pass_additive = false;  // ratio <= rho + slack
  std::vector<double> ratios;
};

ContractionReport verify_contraction_and_diameter(const FiberContext& ctx, const ConeSpec& in, const ConeSpec& out,
                                                  const EffectiveRates& rates, int samples, double slack,
                                                  CounterRng& rng);

}  // namespace rdslab
