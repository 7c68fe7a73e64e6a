#include "rdslab/transfer.hpp"

#include <cmath>
#include <stdexcept>
#include <type_traits>

namespace rdslab {

FiberCache::FiberCache(std::shared_ptr<const MapFiber> fiber, Potential potential, int N, double alpha,
                       const Observable& u)
    : fiber_(std::move(fiber)), potential_(potential), N_(N), d_(fiber_->degree()), alpha_(alpha), obs_(u) {
  if (N < 2) throw std::invalid_argument("FiberCache: grid too small");
  y_.resize(N * d_);
  w_.resize(N * d_);
  uy_.assign(N * d_, 0.0);
  loc_.resize(N * d_);
  for (int i = 0; i < d_; ++i) {
    const Branch& b = fiber_->branch(i);
    for (int k = 0; k < N; ++k) {
      const double y = b.inverse(static_cast<double>(k) / N);
      y_[k * d_ + i] = y;
      w_[k * d_ + i] = std::exp(potential_.at_branch(b, y));
      loc_[k * d_ + i] = locate(y, N);
    }
  }
  if (u) {
    has_u_ = true;
    u_ = GridFn::sample(N, alpha, [&](double x) { return u(*fiber_, x); });
    for (int j = 0; j < N * d_; ++j) uy_[j] = interp_at(u_, loc_[j]);
  } else {
    u_ = GridFn(N, alpha, 0.0);
  }
}

double FiberCache::inverse(int i, double x) const {
  const Branch& b = fiber_->branch(i);
  if (b.kind == BranchKind::Linear) return b.left + x * (b.right - b.left);
  // Newton from the interpolated cached preimage, falling back to the bracketed solver.
  const Locate l = locate(x, N_);
  double y = l.t == 0.0 ? y_[l.i * d_ + i] : y_[l.i * d_ + i] + l.t * (y_[(l.i + 1) * d_ + i] - y_[l.i * d_ + i]);
  for (int it = 0; it < 4; ++it) {
    const double fy = b.apply(y) - x;
    if (std::abs(fy) <= 1e-13) return y;
    y -= fy / b.deriv(y);
    if (!(y >= b.left && y < b.right)) return b.inverse(x);
  }
  if (std::abs(b.apply(y) - x) <= 1e-12) return y;
  return b.inverse(x);
}

namespace {

template <class T>
BasicGridFn<T> apply_impl(const FiberContext& ctx, const BasicGridFn<T>& g) {
  const FiberCache& c = *ctx.cache;
  if (g.size() != c.N()) throw std::invalid_argument("apply_transfer: grid size mismatch");
  const int N = c.N(), d = c.degree();
  BasicGridFn<T> out(N, g.alpha());
  const bool tilt = ctx.z != 0.0;
  for (int k = 0; k < N; ++k) {
    T s{};
    for (int i = 0; i < d; ++i) {
      T v = interp_at(g, c.loc(k, i)) * c.weight(k, i);
      if (tilt) {
        if constexpr (std::is_same_v<T, double>)
          v *= std::exp(ctx.z.real() * (c.u_at(k, i) - ctx.center));
        else
          v *= std::exp(ctx.z * (c.u_at(k, i) - ctx.center));
      }
      s += v;
    }
    out[k] = s;
  }
  return out;
}

}  // namespace

GridFn apply_transfer(const FiberContext& ctx, const GridFn& g) {
  if (ctx.z.imag() != 0.0) throw std::invalid_argument("apply_transfer: complex z requires a complex grid function");
  return apply_impl(ctx, g);
}

CGridFn apply_transfer(const FiberContext& ctx, const CGridFn& g) { return apply_impl(ctx, g); }

GridFn compose_n(const CocycleWindow& window, GridFn g) {
  if (window.empty()) throw std::invalid_argument("compose_n: empty window");
  for (const FiberContext& c : window) g = apply_transfer(c, g);
  return g;
}

CGridFn compose_n(const CocycleWindow& window, CGridFn g) {
  if (window.empty()) throw std::invalid_argument("compose_n: empty window");
  for (const FiberContext& c : window) g = apply_transfer(c, g);
  return g;
}

GridFn koopman_pullback(const MapFiber& fiber, const GridFn& f) {
  const int N = f.size();
  GridFn out(N, f.alpha());
  for (int k = 0; k < N; ++k) out[k] = f(fiber.apply(static_cast<double>(k) / N));
  return out;
}

}  // namespace rdslab
