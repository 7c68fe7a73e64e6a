#include "rdslab/cones.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace rdslab {

// ============================================================================
// Effective rates
// ============================================================================

ObservableNorms ObservableNorms::of(const GridFn& u) {
  ObservableNorms n;
  n.sup = sup_norm(u);
  n.var = holder_seminorm(u);
  n.holder = n.sup + n.var;
  return n;
}

EffectiveRates effective_rates(const FiberParams& p, const FiberParams& next, const ObservableNorms* u) {
  if (p.regime != next.regime) throw std::invalid_argument("effective_rates: regime mismatch");
  EffectiveRates r;
  r.regime = p.regime;
  const double al = p.alpha;
  if (p.regime == Regime::Maps1) {
    const double gn = std::pow(next.gamma, al);
    const double g = std::pow(p.gamma, al);
    r.q = (p.H + 1.0) / gn;
    if (!(r.q < 1.0)) {
      std::ostringstream os;
      os << "H_omega <= gamma_{theta omega}^alpha - 1 violated: H=" << p.H << ", gamma_next^alpha=" << gn;
      throw std::domain_error(os.str());
    }
    r.D = gn + 2.0 * std::log((1.0 + r.q) / (1.0 - r.q));
    r.B = 24.0 * std::exp(4.0 * g) * (1.0 + g) * (1.0 + g);
    r.B1 = std::exp(g);
    r.K = (1.0 + g) * std::exp(g);
    r.M = 8.0 / std::pow(1.0 - std::exp(-g), 2);
    if (u) {
      r.has_u = true;
      r.H_tilde = u->var / g + p.H;
      if (!(r.H_tilde < gn - 1.0)) {
        std::ostringstream os;
        os << "gamma^-alpha v(u) + H <= gamma_{theta omega}^alpha - 1 violated: " << r.H_tilde << " vs " << gn - 1.0;
        throw std::domain_error(os.str());
      }
      r.c0 = 3.0 * u->sup + r.H_tilde / (gn - (1.0 + r.H_tilde));
      r.Dbar = 16.0 * std::exp(u->sup) * (1.0 + u->var) * (1.0 + r.H_tilde) * p.Dsum;
    }
  } else {
    const double s = p.s, sn = next.s;
    if (!(s < 1.0) || !(sn < 1.0)) {
      std::ostringstream os;
      os << "s_omega < 1 violated: s=" << s << ", s_next=" << sn;
      throw std::domain_error(os.str());
    }
    r.zeta = sn * (1.0 + (1.0 + 1.0 / s) * std::exp(p.osc) * p.H);
    if (!(r.zeta < 1.0)) {
      std::ostringstream os;
      os << "e^eps H <= (1/s_next - 1)/(1 + 1/s) violated: zeta=" << r.zeta;
      throw std::domain_error(os.str());
    }
    r.q = r.zeta;
    r.D = 2.0 * std::log((1.0 + r.zeta) / (1.0 - r.zeta)) + 2.0 * std::log(1.0 + r.zeta / s);
    r.B = 12.0 * std::pow(1.0 + 2.0 / s, 4);
    r.B1 = 1.0 + 1.0 / s;
    r.K = 1.0 + 2.0 / s;
    r.M = 6.0 / s;
    if (u) {
      r.has_u = true;
      const double contraction = std::max(std::pow(p.l, al), std::pow(p.sigma, -al));
      r.H_tilde = contraction * u->var + p.H;
      r.c0 = 32.0 * sn * (1.0 + 2.0 / s) * std::exp(u->sup + 2.0 * p.phi_sup) * u->holder * (1.0 + p.H) /
             (1.0 - r.zeta);
      r.Dbar = 16.0 * std::exp(u->sup) * (1.0 + u->var) * (1.0 + r.H_tilde) * p.deg * std::exp(p.phi_sup);
    }
  }
  r.rho = std::tanh(r.D / 4.0);
  r.rho_tilde = std::tanh(7.0 * r.D / 4.0);
  if (u) r.E = r.c0 * (1.0 + std::cosh(7.0 * r.D / 2.0));
  return r;
}

double linear_example_rho(double a, double alpha) {
  const double aa = std::pow(a, alpha);
  const double e = std::exp(std::pow(a, -alpha) / 2.0);
  return (e * (1.0 + aa) - (1.0 - aa)) / (e * (1.0 + aa) + (1.0 - aa));
}

double linear_example_B(double a, double alpha) {
  const double g = std::pow(a, -alpha);
  return 24.0 * std::exp(4.0 * g) * (1.0 + g) * (1.0 + g);
}

ComplexRates complex_rates(const EffectiveRates& r) {
  ComplexRates c;
  c.rho_tilde = r.rho_tilde;
  if (r.has_u && r.c0 > 0.0)
    c.r0 = (1.0 - std::exp(-r.D)) / (2.0 * r.c0 * (1.0 + std::cosh(r.D / 2.0)));
  else
    c.r0 = std::numeric_limits<double>::infinity();
  return c;
}

// ============================================================================
// Cones
// ============================================================================

ConeSpec cone_for(const FiberParams& p) {
  ConeSpec c;
  c.regime = p.regime;
  c.alpha = p.alpha;
  c.parameter = p.regime == Regime::Maps1 ? std::pow(p.gamma, p.alpha) : p.kappa;
  return c;
}

namespace {

struct PairTable {
  std::vector<int> a, b;
  std::vector<double> dist;  // |x-y|^alpha
};

PairTable pair_table(int N, double alpha) {
  PairTable t;
  for (int g = 1; g < N; g *= 2) {
    const double d = std::pow(static_cast<double>(g) / N, alpha);
    for (int k = 0; k + g < N; ++k) {
      t.a.push_back(k);
      t.b.push_back(k + g);
      t.dist.push_back(d);
    }
  }
  return t;
}

}  // namespace

Membership cone_contains(const ConeSpec& spec, const GridFn& g) {
  const int N = g.size();
  const double mn = min_value(g);
  Membership m;
  if (spec.regime == Regime::Maps1) {
    double pm = std::numeric_limits<double>::infinity();
    for (int gap = 1; gap < N; gap *= 2) {
      const double e = std::exp(spec.parameter * std::pow(static_cast<double>(gap) / N, spec.alpha));
      for (int k = 0; k + gap < N; ++k) {
        pm = std::min(pm, e * g[k + gap] - g[k]);
        pm = std::min(pm, e * g[k] - g[k + gap]);
      }
    }
    m.margin = std::min(pm, mn);
  } else {
    m.margin = std::min(spec.parameter * mn - holder_seminorm(GridFn(g.values(), spec.alpha)), mn);
  }
  m.member = m.margin >= -1e-10;
  return m;
}

std::pair<double, double> hilbert_extremes(const ConeSpec& spec, const GridFn& f, const GridFn& g) {
  const int N = f.size();
  const double inf = std::numeric_limits<double>::infinity();
  double lo = inf, hi = 0.0;
  auto take = [&](double A, double B) {
    // constraint A - s B >= 0 for s in [lo side], t B - A >= 0 for the upper side
    if (B > 0.0) {
      const double r = A / B;
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    } else if (B == 0.0) {
      if (A > 0.0) hi = inf;
      if (A < 0.0) lo = -inf;
    }
    // B < 0 only when g is outside the cone; such constraints bound s from below.
  };
  for (int k = 0; k < N; ++k) take(f[k], g[k]);
  const PairTable pt = pair_table(N, spec.alpha);
  const std::size_t P = pt.a.size();
  if (spec.regime == Regime::Maps1) {
    for (std::size_t p = 0; p < P; ++p) {
      const double e = std::exp(spec.parameter * pt.dist[p]);
      const int x = pt.a[p], y = pt.b[p];
      take(e * f[y] - f[x], e * g[y] - g[x]);
      take(e * f[x] - f[y], e * g[x] - g[y]);
    }
  } else {
    const double kap = spec.parameter;
    std::vector<double> kf(N), kg(N);
    for (int z = 0; z < N; ++z) {
      kf[z] = kap * f[z];
      kg[z] = kap * g[z];
    }
    for (std::size_t p = 0; p < P; ++p) {
      const double df = (f[pt.a[p]] - f[pt.b[p]]) / pt.dist[p];
      const double dg = (g[pt.a[p]] - g[pt.b[p]]) / pt.dist[p];
      for (int sgn = -1; sgn <= 1; sgn += 2) {
        const double a = sgn * df, b = sgn * dg;
        for (int z = 0; z < N; ++z) take(kf[z] - a, kg[z] - b);
      }
    }
  }
  return {lo, hi};
}

double hilbert_distance(const ConeSpec& spec, const GridFn& f, const GridFn& g) {
  const auto [lo, hi] = hilbert_extremes(spec, f, g);
  if (!(lo > 0.0) || !std::isfinite(hi)) return std::numeric_limits<double>::infinity();
  return std::max(0.0, std::log(hi / lo));
}

GridFn sample_cone_element(const ConeSpec& spec, int N, CounterRng& rng) {
  double a[6], b[6];
  for (int m = 0; m < 6; ++m) {
    a[m] = rng.normal();
    b[m] = rng.normal();
  }
  const double slope = rng.normal();
  GridFn w = GridFn::sample(N, spec.alpha, [&](double x) {
    double s = slope * x;
    for (int m = 0; m < 6; ++m) {
      const double th = 6.283185307179586 * (m + 1) * x;
      s += (a[m] * std::cos(th) + b[m] * std::sin(th)) / ((m + 1) * (m + 1));
    }
    return s;
  });
  const double vw = holder_seminorm(w);
  const double frac = 0.9 * (0.2 + 0.8 * rng.uniform());
  auto expo = [&](double t) {
    GridFn g(N, spec.alpha);
    for (int k = 0; k < N; ++k) g[k] = std::exp(t * w[k]);
    return g;
  };
  if (vw == 0.0) return expo(0.0);
  if (spec.regime == Regime::Maps1) return expo(frac * spec.parameter / vw);
  // Maps2: v(e^{tw}) / inf e^{tw} is increasing in t; bisect for frac * kappa.
  auto ratio = [&](double t) {
    const GridFn g = expo(t);
    return holder_seminorm(g) / min_value(g);
  };
  double lo = 0.0, hi = spec.parameter / vw;
  while (ratio(hi) < frac * spec.parameter) hi *= 2.0;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (ratio(mid) < frac * spec.parameter ? lo : hi) = mid;
  }
  return expo(lo);
}

InvarianceReport verify_invariance(const FiberContext& ctx, const ConeSpec& in, const ConeSpec& out, int samples,
                                   CounterRng& rng) {
  InvarianceReport rep;
  const int N = ctx->N();
  for (int s = 0; s < samples; ++s) {
    const GridFn g = sample_cone_element(in, N, rng);
    const GridFn Lg = apply_transfer(ctx, g);
    const Membership m = cone_contains(out, Lg);
    const double rel = m.margin / sup_norm(Lg);
    ++rep.samples;
    if (!m.member) ++rep.failures;
    rep.min_margin = std::min(rep.min_margin, rel);
  }
  return rep;
}

ContractionReport verify_contraction_and_diameter(const FiberContext& ctx, const ConeSpec& in, const ConeSpec& out,
                                                  const EffectiveRates& rates, int samples, double slack,
                                                  CounterRng& rng) {
  ContractionReport rep;
  rep.D = rates.D;
  rep.rho = rates.rho;
  rep.slack = slack;
  const int N = ctx->N();
  for (int s = 0; s < samples; ++s) {
    const GridFn f = sample_cone_element(in, N, rng);
    const GridFn g = sample_cone_element(in, N, rng);
    const double din = hilbert_distance(in, f, g);
    const GridFn Lf = apply_transfer(ctx, f), Lg = apply_transfer(ctx, g);
    const double dout = hilbert_distance(out, Lf, Lg);
    rep.diameter = std::max(rep.diameter, dout);
    ++rep.pairs;
    if (std::isfinite(din) && din > 1e-12) {
      const double r = dout / din;
      rep.ratios.push_back(r);
      rep.max_ratio = std::max(rep.max_ratio, r);
    }
  }
  rep.diameter_pass = rep.diameter <= rates.D * (1.0 + slack);
  rep.ratio_pass = rep.max_ratio <= rates.rho * (1.0 + slack);
  rep.ratio_pass_additive = rep.max_ratio <= rates.rho + slack;
  return rep;
}

}  // namespace rdslab
