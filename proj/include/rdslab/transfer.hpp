#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "rdslab/fnspace.hpp"
#include "rdslab/maps.hpp"

namespace rdslab {

/// Observable u_omega(x) given the fiber map.
using Observable = std::function<double(const MapFiber&, double)>;

/**
 * @brief Inverse-branch data of one fiber on the grid x_k = k/N.
 *
 * Entry (k, i) holds y_i(x_k), the weight e^{phi(y_i(x_k))}, the interpolation
 * cell of y_i(x_k), and the interpolated observable value at y_i(x_k).
 */
class FiberCache {
 public:
  FiberCache(std::shared_ptr<const MapFiber> fiber, Potential potential, int N, double alpha,
             const Observable& u = {});

  const MapFiber& fiber() const { return *fiber_; }
  std::shared_ptr<const MapFiber> fiber_ptr() const { return fiber_; }
  const Potential& potential() const { return potential_; }
  int N() const { return N_; }
  int degree() const { return d_; }
  double alpha() const { return alpha_; }

  double y(int k, int i) const { return y_[k * d_ + i]; }
  double weight(int k, int i) const { return w_[k * d_ + i]; }
  const Locate& loc(int k, int i) const { return loc_[k * d_ + i]; }
  double u_at(int k, int i) const { return uy_[k * d_ + i]; }

  bool has_u() const { return has_u_; }
  const GridFn& u() const { return u_; }
  const Observable& observable() const { return obs_; }

  /// Inverse branch of x with a cached starting guess for non-affine branches.
  double inverse(int i, double x) const;

 private:
  std::shared_ptr<const MapFiber> fiber_;
  Potential potential_;
  int N_, d_;
  double alpha_;
  std::vector<double> y_, w_, uy_;
  std::vector<Locate> loc_;
  GridFn u_;
  Observable obs_;
  bool has_u_ = false;
};

/// Operator parameters on top of a cache: L^(z) uses the weight e^{phi + z (u - center)}.
struct FiberContext {
  std::shared_ptr<const FiberCache> cache;
  cplx z = 0.0;
  double center = 0.0;

  const FiberCache& operator*() const { return *cache; }
  const FiberCache* operator->() const { return cache.get(); }
};

using CocycleWindow = std::vector<FiberContext>;

template <class T>
inline T interp_at(const BasicGridFn<T>& g, const Locate& l) {
  if (l.t == 0.0) return g[l.i];
  return g[l.i] + l.t * (g[l.i + 1] - g[l.i]);
}

GridFn apply_transfer(const FiberContext& ctx, const GridFn& g);
CGridFn apply_transfer(const FiberContext& ctx, const CGridFn& g);

/// sum_i e^{phi(y_i(x_k))} f(y_i(x_k)) for a callable f (real operator, z ignored).
template <class F>
double transfer_at(const FiberCache& c, int k, F&& f) {
  double s = 0.0;
  for (int i = 0; i < c.degree(); ++i) s += c.weight(k, i) * f(c.y(k, i), k, i);
  return s;
}

GridFn compose_n(const CocycleWindow& window, GridFn g);
CGridFn compose_n(const CocycleWindow& window, CGridFn g);

/// (f o T)(x_k) with f interpolated at T(x_k).
GridFn koopman_pullback(const MapFiber& fiber, const GridFn& f);

}  // namespace rdslab
