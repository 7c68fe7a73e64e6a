#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "rdslab/cones.hpp"
#include "rdslab/env.hpp"
#include "rdslab/maps.hpp"
#include "rdslab/transfer.hpp"

namespace rdslab {

/**
 * @brief A map family indexed by a scalar parameter read from the environment.
 *
 * Families whose fiber depends on the next parameter too (C^2 perturbations
 * sized by the budget of the following fiber) set uses_next.
 */
struct Family {
  std::string kind;
  ParamField field;
  bool uses_next = false;
  std::function<MapFiber(double p, double p_next)> make;

  /// Two-branch a-maps with a = field value.
  static Family linear(ParamField a);
  /// Manneville-Pomeau fibers with beta = field value.
  static Family manneville_pomeau(ParamField beta);
  /// a-maps perturbed by quadratic bumps using `fraction` of the budget.
  static Family perturbed(ParamField a, double fraction);
  /// Fixed list of breakpoint sets; the field value selects the entry.
  static Family general_linear(std::vector<std::vector<double>> breakpoints, ParamField index);
};

/**
 * @brief Environment path plus family: the random cocycle seen from one path.
 *
 * Fiber caches and parameters are memoized on the family key, so a window over
 * a finite alphabet builds each distinct fiber once. Thread-safe.
 */
class Cocycle {
 public:
  Cocycle(EnvPath path, Family family, Potential potential, int N, double alpha, Observable u = {});

  const EnvPath& path() const { return path_; }
  const Family& family() const { return family_; }
  const Potential& potential() const { return potential_; }
  int N() const { return N_; }
  double alpha() const { return alpha_; }
  bool has_observable() const { return static_cast<bool>(u_); }
  const Observable& observable() const { return u_; }

  /// Range of fiber indices j whose fiber (and successor parameter) is defined.
  long lowest() const;
  long highest() const;

  double parameter(long j) const;
  std::shared_ptr<const MapFiber> fiber(long j) const;
  std::shared_ptr<const FiberCache> cache(long j) const;
  FiberContext context(long j, cplx z = 0.0, double center = 0.0) const;
  /// Contexts for fibers from, from+1, ..., from+n-1.
  CocycleWindow window(long from, int n) const;

  const FiberParams& params(long j) const;
  /// Rates of fiber j (needs fiber j+1); with u, the observable enters c0, E, Dbar.
  EffectiveRates rates(long j, const ObservableNorms* u = nullptr) const;

 private:
  using Key = std::pair<double, double>;
  Key key(long j) const;

  EnvPath path_;
  Family family_;
  Potential potential_;
  int N_;
  double alpha_;
  Observable u_;
  mutable std::mutex mu_;
  mutable std::map<Key, std::shared_ptr<const FiberCache>> caches_;
  mutable std::map<Key, std::unique_ptr<FiberParams>> params_;
};

// ============================================================================
// Observables
// ============================================================================

/// Parses "zero", "x", "x-1/2", "power:k", "cos:m", "bump:delta", "coboundary:m".
/// coboundary:m is q - q o T with q = cos(2 pi m x). A prefix "c*" scales by c.
Observable parse_observable(const std::string& spec);

}  // namespace rdslab
