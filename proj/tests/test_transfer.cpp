#include <gtest/gtest.h>

#include <cmath>
#include <memory>

#include "property.hpp"
#include "rdslab/transfer.hpp"

using namespace rdslab;

namespace {

FiberContext context_for(const MapFiber& f, Potential pot, int N, const Observable& u = {}, cplx z = 0.0) {
  auto fib = std::make_shared<const MapFiber>(f);
  return FiberContext{std::make_shared<const FiberCache>(fib, pot, N, 1.0, u), z, 0.0};
}

GridFn smooth_fn(int N, CounterRng& rng) {
  const double a = rng.normal(), b = rng.normal(), c = rng.normal();
  return GridFn::sample(N, 1.0, [=](double x) { return 2.0 + a * std::sin(6.28318 * x) + b * x * x + 0.2 * c * x; });
}

}  // namespace

TEST(Transfer, MatchesExplicitFormulaForAMaps) {
  // Smooth potential: L g(x) = a g(a x) + (1-a) g(a + (1-a) x); exact for affine g.
  const int N = 128;
  for (double a : {0.5, 0.62, 0.9}) {
    const FiberContext ctx = context_for(make_piecewise_linear(a), Potential{PotentialKind::Smooth}, N);
    const GridFn g = GridFn::sample(N, 1.0, [](double x) { return 1.0 + 3.0 * x; });
    const GridFn Lg = apply_transfer(ctx, g);
    for (int k = 0; k < N; ++k) {
      const double x = static_cast<double>(k) / N;
      EXPECT_NEAR(Lg[k], a * g(a * x) + (1 - a) * g(a + (1 - a) * x), 1e-13) << "a=" << a << " k=" << k;
    }
  }
}

TEST(Transfer, ZeroPotentialDoublingDoublesConstants) {
  const FiberContext ctx = context_for(make_piecewise_linear(0.5), Potential{}, 64);
  const GridFn Lg = apply_transfer(ctx, GridFn(64, 1.0, 1.0));
  for (int k = 0; k < 64; ++k) EXPECT_DOUBLE_EQ(Lg[k], 2.0);
}

TEST(Transfer, PositiveAndLinear) {
  EXPECT_TRUE(prop::forall(40, [](CounterRng& rng, int) -> std::string {
    const FiberContext ctx = context_for(make_piecewise_linear(0.5 + 0.45 * rng.uniform()),
                                         Potential{PotentialKind::Smooth}, 64);
    GridFn g(64, 1.0), h(64, 1.0);
    for (int k = 0; k < 64; ++k) {
      g[k] = rng.uniform();
      h[k] = rng.normal();
    }
    const double c = rng.normal();
    const GridFn Lg = apply_transfer(ctx, g);
    if (min_value(Lg) < 0.0) return "L g has a negative value for g >= 0";
    const GridFn lhs = apply_transfer(ctx, g + h * c), rhs = Lg + apply_transfer(ctx, h) * c;
    if (sup_norm(lhs - rhs) > 1e-13 * (1.0 + sup_norm(lhs))) return "L is not linear";
    return "";
  }));
}

TEST(Transfer, DualityAgainstKoopmanForSmoothPotential) {
  // int L(g) f dLeb = int g (f o T) dLeb up to the O(1/N) interpolation error.
  EXPECT_TRUE(prop::forall(20, [](CounterRng& rng, int) -> std::string {
    const int N = 1024;
    const MapFiber map = make_piecewise_linear(0.5 + 0.4 * rng.uniform());
    const FiberContext ctx = context_for(map, Potential{PotentialKind::Smooth}, N);
    const GridFn g = smooth_fn(N, rng), f = smooth_fn(N, rng);
    const GridMeasure leb = GridMeasure::lebesgue(N);
    const double lhs = integrate(apply_transfer(ctx, g) * f, leb);
    const double rhs = integrate(g * koopman_pullback(map, f), leb);
    if (std::abs(lhs - rhs) > 40.0 / N) return "duality gap " + std::to_string(std::abs(lhs - rhs));
    return "";
  }));
}

TEST(Transfer, ComplexTiltAtRealZMatchesRealTilt) {
  const Observable u = [](const MapFiber&, double x) { return x - 0.5; };
  const FiberContext ctx = context_for(make_piecewise_linear(0.7), Potential{}, 64, u, cplx(0.3));
  const GridFn g = GridFn::sample(64, 1.0, [](double x) { return 1.0 + x; });
  const GridFn r = apply_transfer(ctx, g);
  const CGridFn c = apply_transfer(ctx, to_complex(g));
  for (int k = 0; k < 64; ++k) {
    EXPECT_NEAR(c[k].real(), r[k], 1e-14);
    EXPECT_NEAR(c[k].imag(), 0.0, 1e-14);
  }
  FiberContext im = ctx;
  im.z = cplx(0.0, 0.3);
  EXPECT_THROW(apply_transfer(im, g), std::invalid_argument);
}

TEST(Transfer, ComposeIsSequentialApplication) {
  const Potential pot{PotentialKind::Smooth};
  CocycleWindow w = {context_for(make_piecewise_linear(0.6), pot, 64), context_for(make_piecewise_linear(0.8), pot, 64),
                     context_for(make_manneville_pomeau(0.4), Potential{}, 64)};
  const GridFn g = GridFn::sample(64, 1.0, [](double x) { return std::exp(x); });
  const GridFn seq = apply_transfer(w[2], apply_transfer(w[1], apply_transfer(w[0], g)));
  EXPECT_EQ(sup_norm(compose_n(w, g) - seq), 0.0);
}

TEST(Transfer, CacheHoldsPreimagesAndWeights) {
  const FiberContext ctx = context_for(make_manneville_pomeau(0.6), Potential{PotentialKind::Smooth}, 64);
  const FiberCache& c = *ctx;
  for (int k = 0; k < 64; k += 7)
    for (int i = 0; i < c.degree(); ++i) {
      const double y = c.y(k, i);
      EXPECT_NEAR(c.fiber().branch(i).apply(y), k / 64.0, 1e-12);
      EXPECT_NEAR(c.weight(k, i), 1.0 / c.fiber().deriv(y), 1e-12);
    }
}
