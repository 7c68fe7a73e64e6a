#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

#include "property.hpp"
#include "rdslab/cones.hpp"
#include "rdslab/cplx.hpp"
#include "rdslab/rpf.hpp"
#include "rdslab/stats.hpp"

using namespace rdslab;

namespace {

std::string fmt(const char* what, double lhs, double rhs) {
  std::ostringstream os;
  os.precision(17);
  os << what << ": " << lhs << " vs " << rhs;
  return os.str();
}

Eigen::MatrixXd random_stochastic(CounterRng& rng, int m) {
  Eigen::MatrixXd P(m, m);
  for (int i = 0; i < m; ++i) {
    double s = 0.0;
    for (int j = 0; j < m; ++j) s += P(i, j) = 0.05 + rng.uniform();
    P.row(i) /= s;
  }
  return P;
}

std::vector<double> random_probs(CounterRng& rng, int m) {
  std::vector<double> p(m);
  double s = 0.0;
  for (double& x : p) s += x = 0.05 + rng.uniform();
  for (double& x : p) x /= s;
  return p;
}

double random_a(CounterRng& rng) { return 0.5 + 0.45 * rng.uniform(); }

FiberContext context_for(const MapFiber& f, Potential pot, int N, double alpha = 1.0) {
  return FiberContext{std::make_shared<const FiberCache>(std::make_shared<const MapFiber>(f), pot, N, alpha), 0.0,
                      0.0};
}

Cocycle random_amaps(CounterRng& rng, const std::string& obs, int N = 256, int horizon = 400) {
  const int m = 2 + static_cast<int>(rng.below(2));
  std::vector<double> values(m);
  for (double& a : values) a = 0.55 + 0.35 * rng.uniform();
  return Cocycle(sample_path(DriverSpec::iid(random_probs(rng, m)), rng(), horizon),
                 Family::linear(ParamField::table(values)), Potential{}, N, 1.0, parse_observable(obs));
}

}  // namespace

// env

TEST(Properties, StochasticMatricesHaveFixedStationaryVector) {
  EXPECT_TRUE(prop::forall(50, [](CounterRng& rng, int) -> std::string {
    const int m = 2 + static_cast<int>(rng.below(4));
    const DriverSpec s = DriverSpec::markov(random_stochastic(rng, m));
    double tot = 0.0;
    for (double p : s.stationary) tot += p;
    if (std::abs(tot - 1.0) > 1e-12) return fmt("sum pi", tot, 1.0);
    Eigen::VectorXd pi(m);
    for (int i = 0; i < m; ++i) pi[i] = s.stationary[i];
    const Eigen::VectorXd moved = s.transition.transpose() * pi;
    if ((moved - pi).cwiseAbs().maxCoeff() > 1e-12) return "pi P != pi";
    const Eigen::MatrixXd R = s.reversed();
    for (int i = 0; i < m; ++i)
      if (std::abs(R.row(i).sum() - 1.0) > 1e-12) return fmt("reversed row sum", R.row(i).sum(), 1.0);
    if (((R.transpose() * pi) - pi).cwiseAbs().maxCoeff() > 1e-12) return "pi not stationary for reversed chain";
    return {};
  }));
}

TEST(Properties, ShiftsComposeAndCoordinatesStayInAlphabet) {
  EXPECT_TRUE(prop::forall(30, [](CounterRng& rng, int) -> std::string {
    const int m = 2 + static_cast<int>(rng.below(3));
    const DriverSpec s = DriverSpec::markov(random_stochastic(rng, m));
    const EnvPath p = sample_path(s, rng(), 200);
    const long k = static_cast<long>(rng.below(100));
    const EnvPath q = p.shift(k);
    const EnvPath back = q.shift(-k);
    for (long j = -100; j <= 100; ++j) {
      if (p[j] < 0 || p[j] >= m) return fmt("coordinate out of range", p[j], m);
      if (back[j] != p[j]) return fmt("shift(k).shift(-k)", back[j], p[j]);
      if (j + k <= 100 && q[j] != p[j + k]) return fmt("shift(k)[j]", q[j], p[j + k]);
    }
    return {};
  }));
}

TEST(Properties, PsiMixingIsNonincreasing) {
  EXPECT_TRUE(prop::forall(20, [](CounterRng& rng, int) -> std::string {
    const DriverSpec s = DriverSpec::markov(random_stochastic(rng, 2 + static_cast<int>(rng.below(3))));
    double prev = psi_upper_mixing(s, 1);
    for (int k = 2; k <= 50; ++k) {
      const double v = psi_upper_mixing(s, k);
      if (v > prev + 1e-14) return fmt("psi increased", v, prev);
      prev = v;
    }
    return {};
  }));
}

TEST(Properties, WindowFieldsAreLocal) {
  EXPECT_TRUE(prop::forall(10, [](CounterRng& rng, int) -> std::string {
    const int m = 2 + static_cast<int>(rng.below(3));
    std::vector<double> vals(m);
    for (double& v : vals) v = rng.uniform();
    const int r = static_cast<int>(rng.below(4));
    const DriverSpec s = DriverSpec::markov(random_stochastic(rng, m));
    if (!field_is_local(ParamField::window_mean(vals, r), s, rng(), 50)) return "window_mean not local";
    return {};
  }));
}

// maps

TEST(Properties, InverseBranchesCoverEveryPoint) {
  EXPECT_TRUE(prop::forall(1000, [](CounterRng& rng, int i) -> std::string {
    const MapFiber f = i % 2 ? make_piecewise_linear(random_a(rng)) : make_manneville_pomeau(0.05 + 0.9 * rng.uniform());
    const double x = rng.uniform();
    const auto ys = f.inverse_branches(x);
    if (static_cast<int>(ys.size()) != f.degree()) return fmt("preimage count", ys.size(), f.degree());
    for (int b = 0; b < f.degree(); ++b) {
      const Branch& br = f.branch(b);
      if (ys[b] < br.left || ys[b] > br.right) return fmt("preimage outside branch", ys[b], br.left);
      if (std::abs(br.apply(ys[b]) - x) > 1e-10) return fmt("T(y_i(x))", br.apply(ys[b]), x);
    }
    return {};
  }));
}

TEST(Properties, InverseBranchesContractByGamma) {
  EXPECT_TRUE(prop::forall(1000, [](CounterRng& rng, int) -> std::string {
    const MapFiber f = make_piecewise_linear(random_a(rng));
    const double x = rng.uniform(), xp = rng.uniform();
    for (int b = 0; b < f.degree(); ++b) {
      const double lhs = std::abs(f.inverse(b, x) - f.inverse(b, xp));
      const double rhs = std::abs(x - xp) / f.gamma();
      if (lhs > rhs * (1.0 + 1e-12) + 1e-15) return fmt("pairing contraction", lhs, rhs);
    }
    return {};
  }));
}

TEST(Properties, MannevillePomeauBranchesSplitByClass) {
  EXPECT_TRUE(prop::forall(200, [](CounterRng& rng, int) -> std::string {
    const MapFiber f = make_manneville_pomeau(0.05 + 0.9 * rng.uniform());
    const FiberParams p = fiber_params(f, Potential{}, 1.0, 256);
    const double x = rng.uniform(), xp = rng.uniform();
    for (int b = 0; b < f.degree(); ++b) {
      const double lhs = std::abs(f.inverse(b, x) - f.inverse(b, xp));
      const double d = std::abs(x - xp);
      if (f.branch(b).cls == BranchClass::Contracting) {
        if (lhs > p.l * d * (1.0 + 1e-9) + 1e-15) return fmt("contracting pair", lhs, p.l * d);
      } else if (lhs > d / p.sigma * (1.0 + 1e-9) + 1e-15) {
        return fmt("expanding pair", lhs, d / p.sigma);
      }
    }
    return {};
  }));
}

TEST(Properties, SmoothPotentialMakesTransferFixOne) {
  EXPECT_TRUE(prop::forall(40, [](CounterRng& rng, int i) -> std::string {
    const MapFiber f = i % 2 ? make_piecewise_linear(random_a(rng))
                             : make_general_piecewise_linear({0.2 + 0.3 * rng.uniform(), 0.75});
    const GridFn one(256, 1.0, 1.0);
    const GridFn l1 = apply_transfer(context_for(f, Potential{PotentialKind::Smooth}, 256), one);
    for (int k = 0; k < l1.size(); ++k)
      if (std::abs(l1[k] - 1.0) > 1e-10) return fmt("L1", l1[k], 1.0);
    return {};
  }));
}

// fnspace

TEST(Properties, HolderNormIsSubmultiplicative) {
  EXPECT_TRUE(prop::forall(200, [](CounterRng& rng, int i) -> std::string {
    const double alpha = i % 2 ? 1.0 : 0.5 + 0.5 * rng.uniform();
    const GridFn f = random_holder(256, alpha, rng), g = random_holder(256, alpha, rng);
    const double lhs = holder_norm(f * g), rhs = 3.0 * holder_norm(f) * holder_norm(g);
    if (lhs > rhs) return fmt("||fg||", lhs, rhs);
    return {};
  }));
}

TEST(Properties, SeminormIgnoresConstants) {
  EXPECT_TRUE(prop::forall(200, [](CounterRng& rng, int) -> std::string {
    const GridFn f = random_holder(128, 0.5 + 0.5 * rng.uniform(), rng);
    GridFn g = f;
    g += 10.0 * rng.normal();
    const double a = holder_seminorm(f), b = holder_seminorm(g);
    if (std::abs(a - b) > 1e-9 * std::max(1.0, a)) return fmt("v(f+c)", b, a);
    return {};
  }));
}

TEST(Properties, SeminormRefinesMonotonically) {
  EXPECT_TRUE(prop::forall(50, [](CounterRng& rng, int) -> std::string {
    const double alpha = 0.5 + 0.5 * rng.uniform();
    const double w = 1.0 + 3.0 * rng.uniform(), ph = rng.uniform();
    auto f = [&](double x) { return std::sin(w * x + ph) + x * x; };
    for (int N : {64, 128, 256, 512}) {
      const double a = holder_seminorm(GridFn::sample(N, alpha, f));
      const double b = holder_seminorm(GridFn::sample(2 * N, alpha, f));
      if (a > 1.05 * b) return fmt("seminorm at N vs 2N", a, b);
    }
    return {};
  }));
}

TEST(Properties, GridMeasuresAreProbabilities) {
  EXPECT_TRUE(prop::forall(100, [](CounterRng& rng, int) -> std::string {
    std::vector<double> w(64);
    for (double& x : w) x = rng.uniform();
    const GridMeasure m(w), l = GridMeasure::lebesgue(64);
    double s = 0.0;
    for (double x : m.weights()) s += x;
    if (std::abs(s - 1.0) > 1e-12) return fmt("mass", s, 1.0);
    if (m.total_variation(m) != 0.0) return "TV(m, m) != 0";
    if (std::abs(m.total_variation(l) - l.total_variation(m)) > 1e-15) return "TV not symmetric";
    if (m.total_variation(l) > 1.0 + 1e-12) return fmt("TV", m.total_variation(l), 1.0);
    return {};
  }));
}

// transfer

TEST(Properties, TransferIsPositiveLinearAndConjugationSymmetric) {
  EXPECT_TRUE(prop::forall(50, [](CounterRng& rng, int i) -> std::string {
    const MapFiber f = i % 2 ? make_piecewise_linear(random_a(rng)) : make_manneville_pomeau(0.05 + 0.9 * rng.uniform());
    const auto cache = std::make_shared<const FiberCache>(std::make_shared<const MapFiber>(f), Potential{}, 256, 1.0,
                                                          parse_observable("cos:1"));
    const FiberContext ctx{cache, 0.0, 0.0};
    GridFn g = random_holder(256, 1.0, rng);
    for (auto& v : g.values()) v = std::abs(v);
    const GridFn h = random_holder(256, 1.0, rng);
    const GridFn lg = apply_transfer(ctx, g);
    if (min_value(lg) < 0.0) return fmt("positivity", min_value(lg), 0.0);
    const double c = rng.normal();
    const GridFn lin = apply_transfer(ctx, g + c * h) - (lg + c * apply_transfer(ctx, h));
    if (sup_norm(lin) > 1e-12 * (1.0 + sup_norm(lg))) return fmt("linearity", sup_norm(lin), 0.0);
    const cplx z(0.1 * rng.normal(), rng.normal());
    CGridFn cg = to_complex(g);
    for (int k = 0; k < cg.size(); ++k) cg[k] += cplx(0.0, h[k]);
    CGridFn conj_cg = cg;
    for (auto& v : conj_cg.values()) v = std::conj(v);
    const CGridFn a = apply_transfer(FiberContext{cache, std::conj(z), 0.0}, conj_cg);
    const CGridFn b = apply_transfer(FiberContext{cache, z, 0.0}, cg);
    for (int k = 0; k < a.size(); ++k)
      if (std::abs(a[k] - std::conj(b[k])) > 1e-12 * (1.0 + std::abs(b[k]))) return "conjugation symmetry";
    return {};
  }));
}

// cones

TEST(Properties, ExampleRhoIncreasesWithA) {
  EXPECT_TRUE(prop::forall(200, [](CounterRng& rng, int) -> std::string {
    const double alpha = 0.3 + 0.7 * rng.uniform();
    double a = random_a(rng), b = random_a(rng);
    if (a > b) std::swap(a, b);
    if (b - a < 1e-6) return {};
    if (!(linear_example_rho(a, alpha) < linear_example_rho(b, alpha)))
      return fmt("rho not increasing", linear_example_rho(a, alpha), linear_example_rho(b, alpha));
    return {};
  }));
}

TEST(Properties, RatesFollowTheProjectiveDiameter) {
  EXPECT_TRUE(prop::forall(100, [](CounterRng& rng, int i) -> std::string {
    const MapFiber f = i % 2 ? make_piecewise_linear(random_a(rng)) : make_manneville_pomeau(0.05 + 0.9 * rng.uniform());
    const MapFiber g = i % 2 ? make_piecewise_linear(random_a(rng)) : make_manneville_pomeau(0.05 + 0.9 * rng.uniform());
    const EffectiveRates r =
        effective_rates(fiber_params(f, Potential{}, 1.0, 256), fiber_params(g, Potential{}, 1.0, 256));
    if (std::abs(r.rho - std::tanh(r.D / 4.0)) > 1e-15) return fmt("rho", r.rho, std::tanh(r.D / 4.0));
    if (std::abs(r.rho_tilde - std::tanh(7.0 * r.D / 4.0)) > 1e-15) return fmt("rho~", r.rho_tilde, 0.0);
    if (!(r.rho < 1.0 && r.rho_tilde < 1.0)) return fmt("rho < 1", r.rho, 1.0);
    return {};
  }));
}

TEST(Properties, HilbertMetricSatisfiesTriangleInequality) {
  EXPECT_TRUE(prop::forall(100, [](CounterRng& rng, int i) -> std::string {
    const MapFiber f = i % 2 ? make_piecewise_linear(random_a(rng)) : make_manneville_pomeau(0.05 + 0.9 * rng.uniform());
    const ConeSpec spec = cone_for(fiber_params(f, Potential{}, 1.0, 128));
    const GridFn a = sample_cone_element(spec, 128, rng), b = sample_cone_element(spec, 128, rng),
                 c = sample_cone_element(spec, 128, rng);
    const double ab = hilbert_distance(spec, a, b), bc = hilbert_distance(spec, b, c),
                 ac = hilbert_distance(spec, a, c);
    if (ac > ab + bc + 1e-8) return fmt("d(a,c) vs d(a,b)+d(b,c)", ac, ab + bc);
    if (std::abs(ab - hilbert_distance(spec, b, a)) > 1e-8) return "asymmetric";
    if (hilbert_distance(spec, a, a * 3.0) > 1e-8) return "nonzero on rays";
    return {};
  }));
}

TEST(Properties, ConesAreInvariantAndContractOnRandomFibers) {
  EXPECT_TRUE(prop::forall(8, [](CounterRng& rng, int i) -> std::string {
    const MapFiber f = i % 2 ? make_piecewise_linear(random_a(rng)) : make_manneville_pomeau(0.05 + 0.9 * rng.uniform());
    const MapFiber g = i % 2 ? make_piecewise_linear(random_a(rng)) : make_manneville_pomeau(0.05 + 0.9 * rng.uniform());
    const FiberParams p = fiber_params(f, Potential{}, 1.0, 256), q = fiber_params(g, Potential{}, 1.0, 256);
    const FiberContext ctx = context_for(f, Potential{}, 256);
    const InvarianceReport inv = verify_invariance(ctx, cone_for(q), cone_for(p), 20, rng);
    if (!inv.pass()) return fmt("invariance failures", inv.failures, 0);
    const ContractionReport c =
        verify_contraction_and_diameter(ctx, cone_for(q), cone_for(p), effective_rates(p, q), 20, 0.05, rng);
    if (!c.ratio_pass_additive) return fmt("contraction ratio", c.max_ratio, c.rho + 0.05);
    return {};
  }));
}

// rpf

TEST(Properties, TripletIsNormalizedOnRandomCocycles) {
  EXPECT_TRUE(prop::forall(6, [](CounterRng& rng, int) -> std::string {
    const Cocycle cc = random_amaps(rng, "zero");
    const RPFTriplet t = build_triplet(cc, 0, 8);
    for (int j = 0; j <= t.fibers; ++j) {
      const double nu1 = integrate(GridFn(cc.N(), 1.0, 1.0), t.nu[j]);
      const double nuh = integrate(t.h[j], t.nu[j]);
      if (std::abs(nu1 - 1.0) > 1e-12) return fmt("nu(1)", nu1, 1.0);
      if (std::abs(nuh - 1.0) > 1e-8) return fmt("nu(h)", nuh, 1.0);
    }
    for (int j = 0; j < t.fibers; ++j) {
      const double floor = std::exp(-cc.params(j).phi_sup);
      if (t.lambda[j] < floor) return fmt("lambda", t.lambda[j], floor);
    }
    return {};
  }));
}

TEST(Properties, GeneratingDecompositionsStayInBudget) {
  EXPECT_TRUE(prop::forall(100, [](CounterRng& rng, int) -> std::string {
    const ConeSpec s2 = cone_for(fiber_params(make_manneville_pomeau(0.05 + 0.9 * rng.uniform()), Potential{}, 1.0, 256));
    const ConeSpec s1 = cone_for(fiber_params(make_piecewise_linear(random_a(rng)), Potential{}, 1.0, 256));
    const GridFn g = random_holder(256, 1.0, rng, 0.1 + 5.0 * rng.uniform());
    const Decomposition d2 = generating_maps2(g, s2), d1 = generating_maps1(g, s1);
    if (!d2.in_cone) return "Maps2 g + c(g) outside the cone";
    if (d2.lhs > d2.rhs) return fmt("Maps2 bound", d2.lhs, d2.rhs);
    if (!d1.in_cone) return "Maps1 pieces outside the cone";
    if (d1.lhs > d1.rhs) return fmt("Maps1 bound", d1.lhs, d1.rhs);
    const GridFn back = (d1.g1 - d1.g2) + GridFn(256, 1.0, d1.c2 - d1.c1);
    if (sup_norm(back - g) > 1e-12 * (1.0 + sup_norm(g))) return "Maps1 pieces do not reassemble g";
    return {};
  }));
}

// cplx

TEST(Properties, MgfIsOneAtZeroAndConjugationSymmetric) {
  EXPECT_TRUE(prop::forall(5, [](CounterRng& rng, int) -> std::string {
    const Cocycle cc = random_amaps(rng, "0.01*cos:1", 128);
    const RPFTriplet t = build_triplet(cc, 0, 12);
    const double m0 = std::abs(normalized_mgf(cc, t, 0, 12, 0.0) - 1.0);
    if (m0 > 1e-8) return fmt("|M(0) - 1|", m0, 0.0);
    const cplx z(0.2 * rng.normal(), rng.normal());
    const double d =
        std::abs(std::log(normalized_mgf(cc, t, 0, 12, std::conj(z))) - std::conj(std::log(normalized_mgf(cc, t, 0, 12, z))));
    if (d > 1e-8) return fmt("Pi(conj z) - conj Pi(z)", d, 0.0);
    if (!(window_r0(cc, t, 0, 12) > 0.0)) return "r0 not positive";
    return {};
  }));
}

TEST(Properties, PressureIsAnalyticOnTheCircle) {
  EXPECT_TRUE(prop::forall(3, [](CounterRng& rng, int) -> std::string {
    const Cocycle cc = random_amaps(rng, "0.01*cos:1", 128);
    const RPFTriplet t = build_triplet(cc, 0, 16);
    const double var = sum_variance(cc, t, 0, 16);
    const PressureWindow w = pressure_window(cc, t, 0, 16, 0.0, var);
    if (w.analyticity > 1e-6) return fmt("negative frequencies", w.analyticity, 1e-6);
    if (!(w.d2.real() > 0.0)) return fmt("d2", w.d2.real(), 0.0);
    return {};
  }));
}

// stats

TEST(Properties, EquivarianceOfFiberMeasures) {
  EXPECT_TRUE(prop::forall(5, [](CounterRng& rng, int) -> std::string {
    // Geometric potential on C2 perturbed fibers: mu_j has a density, unlike the zero-potential states.
    std::vector<double> values(3);
    for (double& a : values) a = 0.55 + 0.35 * rng.uniform();
    const Cocycle cc(sample_path(DriverSpec::iid({0.3, 0.3, 0.4}), rng(), 400),
                     Family::perturbed(ParamField::table(values), 0.5), Potential{PotentialKind::Smooth}, 512, 1.0);
    const RPFTriplet t = build_triplet(cc, 0, 6);
    const GridFn u = random_holder(512, 1.0, rng);
    const GridFn dens(t.mu[0].density(), 1.0);
    constexpr int M = 1 << 16;
    for (int j = 1; j <= 4; ++j) {
      // Midpoint rule for the integral of u o T^j against the density of mu_0.
      double lhs = 0.0;
      for (int m = 0; m < M; ++m) {
        double x = (m + 0.5) / M;
        const double w = dens(x);
        for (int k = 0; k < j; ++k) x = cc.fiber(k)->apply(x);
        lhs += u(x) * w;
      }
      lhs /= M;
      const double rhs = integrate(u, t.mu[j]);
      if (std::abs(lhs - rhs) > 2.0 / 512 * (1.0 + sup_norm(u))) return fmt("mu(u o T^j)", lhs, rhs);
    }
    return {};
  }));
}

TEST(Properties, SampledCenteredSumsHaveZeroMean) {
  EXPECT_TRUE(prop::forall(4, [](CounterRng& rng, int) -> std::string {
    const Cocycle cc = random_amaps(rng, "cos:1");
    const RPFTriplet t = build_triplet(cc, 0, 20);
    const int trials = 20000;
    const TrajectoryBatch b = birkhoff_batch(cc, t, 0, 20, trials, rng());
    const double se = std::sqrt(sum_variance(cc, t, 0, 20) / trials);
    const double m = sample_mean(b.sums);
    if (std::abs(m) > 4.0 * se) return fmt("mean of S_n", m, 4.0 * se);
    return {};
  }));
}

TEST(Properties, KsOfNormalSamplesStaysInDkwBand) {
  EXPECT_TRUE(prop::forall(20, [](CounterRng& rng, int) -> std::string {
    const int n = 2000;
    std::vector<double> x(n);
    for (double& v : x) v = rng.normal();
    const double band = std::sqrt(std::log(2.0 / 0.01) / (2.0 * n));
    const double ks = ks_normal(x);
    if (ks > band) return fmt("KS", ks, band);
    return {};
  }));
}

TEST(Properties, MartingaleIncrementsHaveZeroConditionalMean) {
  EXPECT_TRUE(prop::forall(6, [](CounterRng& rng, int i) -> std::string {
    const char* obs[] = {"x", "cos:2", "0.3*power:3"};
    const Cocycle cc = random_amaps(rng, obs[i % 3]);
    const RPFTriplet t = build_triplet(cc, 0, 30);
    const MartingaleDecomp d = martingale_decomp(cc, t, 0, 30);
    if (d.max_residual > 1e-8) return fmt("sup |L M|", d.max_residual, 1e-8);
    return {};
  }));
}

TEST(Properties, CoboundariesHaveVanishingVariance) {
  EXPECT_TRUE(prop::forall(3, [](CounterRng& rng, int) -> std::string {
    const double w = 1.0 + static_cast<int>(rng.below(3));
    std::ostringstream spec;
    spec << "coboundary:" << w;
    const Cocycle cc(sample_path(DriverSpec::iid({1.0}), 1, 800), Family::linear(ParamField::table({0.5})), Potential{},
                     256, 1.0, parse_observable(spec.str()));
    const RPFTriplet t = build_triplet(cc, 0, 256, 40);
    std::vector<double> ns, vs;
    for (int n : {16, 64, 256}) {
      ns.push_back(n);
      vs.push_back(sum_variance(cc, t, 0, n) / n);
    }
    const double slope = loglog_slope(ns, vs);
    if (std::abs(slope + 1.0) > 0.15) return fmt("log-log slope of Var/n", slope, -1.0);
    return {};
  }));
}
