#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "property.hpp"
#include "rdslab/fnspace.hpp"

using namespace rdslab;

namespace {

GridFn random_fn(int N, double alpha, CounterRng& rng) {
  GridFn f(N, alpha);
  for (int k = 0; k < N; ++k) f[k] = rng.normal();
  return f;
}

}  // namespace

TEST(Fnspace, LocateClampsAndInterpolates) {
  const Locate a = locate(0.0, 64), b = locate(0.999, 64), c = locate(10.5 / 64, 64);
  EXPECT_EQ(a.i, 0);
  EXPECT_EQ(b.i, 63);
  EXPECT_EQ(b.t, 0.0);
  EXPECT_EQ(c.i, 10);
  EXPECT_DOUBLE_EQ(c.t, 0.5);
}

TEST(Fnspace, InterpolationIsExactOnLinearFunctions) {
  const GridFn f = GridFn::sample(64, 1.0, [](double x) { return 3.0 * x - 1.0; });
  for (double x : {0.1, 0.33, 0.5, 0.77, 0.98})
    EXPECT_NEAR(f(x), std::min(3.0 * x - 1.0, 3.0 * 63.0 / 64.0 - 1.0), 1e-14);
}

TEST(Fnspace, HolderSeminormMatchesBruteForceAtAlphaOne) {
  EXPECT_TRUE(prop::forall(50, [](CounterRng& rng, int) -> std::string {
    const GridFn f = random_fn(8, 1.0, rng);
    const double fast = holder_seminorm(f), slow = oracle::holder_brute(f.values(), 1.0);
    if (std::abs(fast - slow) > 1e-12 * slow) return "alpha=1 mismatch";
    return "";
  }));
}

TEST(Fnspace, DyadicSeminormBracketsBruteForce) {
  // Strides 2^m see a lower bound; the binary expansion of a gap gives the upper one.
  EXPECT_TRUE(prop::forall(50, [](CounterRng& rng, int i) -> std::string {
    const double alpha = 0.3 + 0.6 * (i % 5) / 4.0;
    const GridFn f = random_fn(16, alpha, rng);
    const double fast = holder_seminorm(f), slow = oracle::holder_brute(f.values(), alpha);
    if (fast > slow * (1 + 1e-12)) return "dyadic value exceeds all-pairs value";
    if (slow > fast / (1.0 - std::pow(2.0, -alpha)) * (1 + 1e-12)) return "all-pairs value above the dyadic bound";
    return "";
  }));
}

TEST(Fnspace, LebesgueIntegratesInterpolantExactly) {
  // Clamped interpolant of x^2 on N = 64: exact integral of the polygon plus the flat last cell.
  const int N = 64;
  const GridFn f = GridFn::sample(N, 1.0, [](double x) { return x * x; });
  long double exact = 0.0L;
  for (int k = 0; k + 1 < N; ++k) exact += 0.5L * (f[k] + f[k + 1]) / N;
  exact += static_cast<long double>(f[N - 1]) / N;
  EXPECT_NEAR(integrate(f, GridMeasure::lebesgue(N)), static_cast<double>(exact), 1e-15);
}

TEST(Fnspace, MeasureNormalizesAndReportsTv) {
  GridMeasure m({1.0, 3.0, 0.0, 4.0});
  double s = 0;
  for (double w : m.weights()) s += w;
  EXPECT_DOUBLE_EQ(s, 1.0);
  GridMeasure u({1.0, 1.0, 1.0, 1.0});
  EXPECT_NEAR(m.total_variation(u), 0.5 * (0.125 + 0.125 + 0.25 + 0.25), 1e-15);
  EXPECT_THROW(GridMeasure({1.0, -1.0}), std::invalid_argument);
}

TEST(Fnspace, NormsOnConstantsAndComplex) {
  const GridFn c(64, 0.5, -2.0);
  EXPECT_EQ(holder_seminorm(c), 0.0);
  EXPECT_EQ(holder_norm(c), 2.0);
  CGridFn z(64, 1.0, cplx(3.0, 4.0));
  EXPECT_DOUBLE_EQ(sup_norm(z), 5.0);
  EXPECT_DOUBLE_EQ(real_part(z)[7], 3.0);
  EXPECT_DOUBLE_EQ(to_complex(c)[3].real(), -2.0);
}

TEST(Fnspace, SeminormIsSubadditiveAndHomogeneous) {
  EXPECT_TRUE(prop::forall(40, [](CounterRng& rng, int) -> std::string {
    const GridFn f = random_fn(64, 0.7, rng), g = random_fn(64, 0.7, rng);
    const double c = rng.normal();
    if (holder_seminorm(f + g) > holder_seminorm(f) + holder_seminorm(g) + 1e-12) return "not subadditive";
    if (std::abs(holder_seminorm(f * c) - std::abs(c) * holder_seminorm(f)) > 1e-12 * (1 + holder_seminorm(f)))
      return "not homogeneous";
    return "";
  }));
}
