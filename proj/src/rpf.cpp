#include "rdslab/rpf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <type_traits>

namespace rdslab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double interp_vec(const std::vector<double>& v, double x) {
  const Locate l = locate(x, static_cast<int>(v.size()));
  if (l.t == 0.0) return v[l.i];
  return v[l.i] + l.t * (v[l.i + 1] - v[l.i]);
}

}  // namespace

GridMeasure dual_step(const FiberCache& c, const GridMeasure& nu_next, double* total) {
  const int N = c.N();
  if (nu_next.size() != N) throw std::invalid_argument("dual_step: grid size mismatch");
  const std::vector<double> dens = nu_next.density();
  const MapFiber& fib = c.fiber();
  const double gx = std::sqrt(0.6);
  const double nodes[3] = {-gx, 0.0, gx};
  const double wts[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
  std::vector<double> b(N, 0.0);
  std::vector<double> pts;
  for (int i = 0; i < fib.degree(); ++i) {
    const Branch& br = fib.branch(i);
    pts.clear();
    pts.push_back(br.left);
    pts.push_back(br.right);
    for (int m = static_cast<int>(std::ceil(br.left * N)); m < N && static_cast<double>(m) / N < br.right; ++m)
      if (static_cast<double>(m) / N > br.left) pts.push_back(static_cast<double>(m) / N);
    for (int k = 1; k < N; ++k) pts.push_back(c.y(k, i));
    std::sort(pts.begin(), pts.end());
    for (std::size_t s = 0; s + 1 < pts.size(); ++s) {
      const double p = pts[s], q = pts[s + 1];
      if (!(q > p)) continue;
      const double mid = 0.5 * (p + q), half = 0.5 * (q - p);
      for (int g = 0; g < 3; ++g) {
        const double y = mid + half * nodes[g];
        const double jac = std::exp(c.potential().at_branch(br, y)) * br.deriv(y);
        const double w = wts[g] * half * jac * interp_vec(dens, br.apply(y));
        const Locate l = locate(y, N);
        b[l.i] += w * (1.0 - l.t);
        if (l.t > 0.0) b[l.i + 1] += w * l.t;
      }
    }
  }
  double sum = 0.0;
  for (double v : b) sum += v;
  if (total) *total = sum;
  if (!(sum > 0.0)) throw std::runtime_error("dual_step: non-positive total mass");
  return GridMeasure(std::move(b), true);
}

double rho_product(const Cocycle& cc, long from, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) {
    try {
      r *= cc.rates(from + i).rho;
    } catch (const std::domain_error&) {
      return kInf;
    }
  }
  return r;
}

NuEstimate compute_nu(const Cocycle& cc, long j, int depth) {
  if (depth < 1) throw std::invalid_argument("compute_nu: depth must be at least 1");
  if (j + depth > cc.highest() + 1) throw std::out_of_range("compute_nu: window leaves the path");
  GridMeasure m = GridMeasure::lebesgue(cc.N());
  for (long i = j + depth - 1; i >= j; --i) m = dual_step(*cc.cache(i), m);
  NuEstimate out{std::move(m), std::sqrt(2.0) * rho_product(cc, j, depth)};
  if (cc.params(j).regime == Regime::Maps2) out.bound *= 1.0 + cc.params(j).s;
  return out;
}

GridFn compute_h(const Cocycle& cc, long j, int depth, const GridMeasure& nu, const GridFn* seed) {
  if (depth < 1) throw std::invalid_argument("compute_h: depth must be at least 1");
  if (j - depth < cc.lowest()) throw std::out_of_range("compute_h: window leaves the path");
  GridFn g = seed ? *seed : GridFn(cc.N(), cc.alpha(), 1.0);
  for (long i = j - depth; i < j; ++i) {
    g = apply_transfer(cc.context(i), g);
    g *= 1.0 / max_value(g);
  }
  return g * (1.0 / integrate(g, nu));
}

double compute_lambda(const FiberContext& ctx, const GridMeasure& nu_next) {
  return integrate(apply_transfer(FiberContext{ctx.cache}, GridFn(ctx->N(), ctx->alpha(), 1.0)), nu_next);
}

int default_back_depth(const Cocycle& cc, long first, long last, bool* capped, double tol, int cap) {
  double fwd = 1.0, bwd = 1.0;
  for (int n = 1; n <= cap; ++n) {
    if (last + n > cc.highest() || first - n < cc.lowest()) break;
    try {
      fwd *= cc.rates(last + n - 1).rho;
      bwd *= cc.rates(first - n).rho;
    } catch (const std::domain_error&) {
      break;
    }
    if (fwd < tol && bwd < tol) {
      if (capped) *capped = false;
      return n;
    }
  }
  if (capped) *capped = true;
  const long room = std::min<long>(cc.highest() + 1 - last, first - cc.lowest());
  return static_cast<int>(std::max<long>(1, std::min<long>(cap, room)));
}

int RPFTriplet::index(long j) const {
  if (!covers(j)) throw std::out_of_range("RPFTriplet: fiber outside the window");
  return static_cast<int>(j - start);
}

double RPFTriplet::lambda_at(long j) const {
  const int i = index(j);
  if (i >= fibers) throw std::out_of_range("RPFTriplet: lambda needs the next fiber");
  return lambda[i];
}

double RPFTriplet::center_at(long j) const {
  if (center.empty()) return 0.0;
  return center[index(j)];
}

RPFTriplet build_triplet(const Cocycle& cc, long start, int fibers, int depth) {
  if (fibers < 1) throw std::invalid_argument("build_triplet: need at least one fiber");
  RPFTriplet t;
  t.start = start;
  t.fibers = fibers;
  const long last = start + fibers;
  if (depth <= 0) depth = default_back_depth(cc, start, last, &t.depth_capped);
  t.back_depth = depth;
  if (last + depth > cc.highest() + 1 || start - depth < cc.lowest())
    throw std::out_of_range("build_triplet: window plus back_depth leaves the path");

  t.nu.assign(fibers + 1, GridMeasure());
  GridMeasure m = GridMeasure::lebesgue(cc.N());
  for (long i = last + depth - 1; i >= start; --i) {
    m = dual_step(*cc.cache(i), m);
    if (i <= last) t.nu[i - start] = m;
  }
  t.h.push_back(compute_h(cc, start, depth, t.nu[0]));
  for (int j = 0; j < fibers; ++j) {
    const FiberContext ctx = cc.context(start + j);
    GridFn lh = apply_transfer(ctx, t.h[j]);
    const double lam = integrate(lh, t.nu[j + 1]);
    t.lambda.push_back(lam);
    t.lambda_dual.push_back(compute_lambda(ctx, t.nu[j + 1]));
    t.h.push_back(lh * (1.0 / lam));
  }
  for (int j = 0; j <= fibers; ++j) {
    std::vector<double> w(cc.N());
    for (int k = 0; k < cc.N(); ++k) w[k] = t.nu[j][k] * t.h[j][k];
    t.mu.emplace_back(std::move(w), true);
    t.residual = std::max(t.residual, std::abs(integrate(t.h[j], t.nu[j]) - 1.0));
    if (j < fibers)
      t.residual = std::max(t.residual, std::abs(t.lambda[j] - t.lambda_dual[j]) / t.lambda[j]);
  }
  if (cc.has_observable())
    for (int j = 0; j <= fibers; ++j) t.center.push_back(integrate(cc.cache(start + j)->u(), t.mu[j]));
  return t;
}

namespace {

template <class T>
BasicGridFn<T> normalized_impl(const Cocycle& cc, const RPFTriplet& t, long j, const BasicGridFn<T>& g, cplx z) {
  const FiberCache& c = *cc.cache(j);
  const GridFn& h = t.h_at(j);
  const GridFn& hn = t.h_at(j + 1);
  const double lam = t.lambda_at(j);
  const double ctr = t.center_at(j);
  const int N = c.N(), d = c.degree();
  if (g.size() != N) throw std::invalid_argument("normalized_apply: grid size mismatch");
  const bool tilt = z != 0.0;
  BasicGridFn<T> out(N, g.alpha());
  for (int k = 0; k < N; ++k) {
    if (!(hn[k] > 1e-8)) throw std::runtime_error("normalized_apply: h is below 1e-8 (conditioning)");
    T s{};
    for (int i = 0; i < d; ++i) {
      const Locate& l = c.loc(k, i);
      T v = interp_at(g, l) * (interp_at(h, l) * c.weight(k, i));
      if constexpr (std::is_same_v<T, cplx>) {
        if (tilt) v *= std::exp(z * (c.u_at(k, i) - ctr));
      }
      s += v;
    }
    out[k] = s / (lam * hn[k]);
  }
  return out;
}

}  // namespace

GridFn normalized_apply(const Cocycle& cc, const RPFTriplet& t, long j, const GridFn& g) {
  return normalized_impl(cc, t, j, g, 0.0);
}

CGridFn normalized_apply(const Cocycle& cc, const RPFTriplet& t, long j, const CGridFn& g, cplx z) {
  return normalized_impl(cc, t, j, g, z);
}

GridFn centered_observable(const Cocycle& cc, const RPFTriplet& t, long j) {
  GridFn u = cc.cache(j)->u();
  u += -t.center_at(j);
  return u;
}

bool Certificate::pass() const {
  return std::all_of(rows.begin(), rows.end(), [](const CertificateRow& r) { return r.pass; });
}

std::string Certificate::first_failure() const {
  for (const CertificateRow& r : rows) {
    if (r.pass) continue;
    std::ostringstream os;
    os << "check " << r.check << " at n=" << r.n;
    if (r.sample >= 0) os << " sample " << r.sample;
    os << ": " << r.lhs << " > " << r.rhs;
    return os.str();
  }
  return {};
}

Certificate verify_rpf(const Cocycle& cc, const RPFTriplet& t, const std::vector<GridFn>& gs,
                       const std::vector<GridFn>& fs, int n_max, double slack) {
  if (gs.size() != fs.size()) throw std::invalid_argument("verify_rpf: g and f samples must pair up");
  n_max = std::min(n_max, t.fibers - 1);
  if (n_max < 1) throw std::invalid_argument("verify_rpf: window too short");
  const double up = 1.0 + slack;
  std::vector<EffectiveRates> rates;
  for (int j = 0; j <= n_max; ++j) rates.push_back(cc.rates(t.start + j));

  Certificate cert;
  auto add = [&](std::string id, int n, int s, double lhs, double rhs, bool ok) {
    cert.rows.push_back({std::move(id), n, s, lhs, rhs, ok});
  };
  for (int j = 0; j <= n_max; ++j) {
    const GridFn& h = t.h[j];
    const Membership mem = cone_contains(cone_for(cc.params(t.start + j)), h);
    add("i-cone", j, -1, -mem.margin, 0.0, mem.member);
    const double hn = holder_norm(h);
    add("i-norm", j, -1, hn, rates[j].K, hn <= rates[j].K * up);
    const double sup = max_value(h), inf = min_value(h);
    add("ii-lower", j, -1, 1.0, sup, 1.0 <= sup * up);
    add("ii-ratio", j, -1, sup, rates[j].B1 * inf, sup <= rates[j].B1 * inf * up);
  }
  for (std::size_t s = 0; s < gs.size(); ++s) {
    const GridFn& g = gs[s];
    const GridFn& f = fs[s];
    const double ng = holder_norm(g);
    const double nu_g = integrate(g, t.nu[0]);
    const double mu_g = integrate(g, t.mu[0]);
    GridFn a = g, b = g;
    double rho = 1.0;
    GridFn absf = f;
    for (auto& v : absf.values()) v = std::abs(v);
    for (int n = 1; n <= n_max; ++n) {
      const long j = t.start + n - 1;
      a = apply_transfer(cc.context(j), a) * (1.0 / t.lambda[n - 1]);
      b = normalized_apply(cc, t, j, b);
      rho *= rates[n - 1].rho;
      const double K = rates[n].K, B = rates[n].B;
      const double l3 = holder_norm(a - t.h[n] * nu_g), r3 = 4.0 * K * ng * rho;
      add("iii", n, static_cast<int>(s), l3, r3, l3 <= r3 * up);
      GridFn c = b;
      c += -mu_g;
      const double l4 = holder_norm(c), r4 = B * rho * ng;
      add("iv", n, static_cast<int>(s), l4, r4, l4 <= r4 * up);
      const double cov = integrate(f * b, t.mu[n]) - mu_g * integrate(f, t.mu[n]);
      const double r5 = B * rho * ng * integrate(absf, t.mu[n]);
      add("v", n, static_cast<int>(s), std::abs(cov), r5, std::abs(cov) <= r5 * up);
    }
  }
  return cert;
}

GridFn random_holder(int N, double alpha, CounterRng& rng, double scale) {
  const double c0 = rng.normal();
  const double slope = rng.normal();
  double a[4], ph[4];
  for (int m = 0; m < 4; ++m) {
    a[m] = rng.normal() / (m + 1);
    ph[m] = 2.0 * std::numbers::pi * rng.uniform();
  }
  return GridFn::sample(N, alpha, [&](double x) {
    double v = c0 + slope * x;
    for (int m = 0; m < 4; ++m) v += a[m] * std::cos(2.0 * std::numbers::pi * (m + 1) * x + ph[m]);
    return scale * v;
  });
}

Decomposition generating_maps2(const GridFn& g, const ConeSpec& spec) {
  if (spec.regime != Regime::Maps2) throw std::invalid_argument("generating_maps2: Maps2 cone required");
  Decomposition d;
  d.c1 = holder_seminorm(g) / spec.parameter + sup_norm(g);
  d.g1 = g;
  d.g1 += d.c1;
  d.in_cone = cone_contains(spec, d.g1).member;
  d.lhs = holder_norm(d.g1) + d.c1;
  d.rhs = 3.0 * holder_norm(g);
  return d;
}

Decomposition generating_maps1(const GridFn& g, const ConeSpec& spec) {
  if (spec.regime != Regime::Maps1) throw std::invalid_argument("generating_maps1: Maps1 cone required");
  Decomposition d;
  const double ng = holder_norm(g);
  d.c1 = sup_norm(g) + holder_seminorm(g) / spec.parameter;
  d.g1 = g;
  d.g1 += d.c1;
  d.c2 = ng > 0.0 ? 0.5 * ng : 1.0;
  d.g2 = GridFn(g.size(), g.alpha(), d.c2);
  d.in_cone = cone_contains(spec, d.g1).member && cone_contains(spec, d.g2).member;
  d.lhs = holder_norm(d.g1) + holder_norm(d.g2) + d.c1 + d.c2;
  d.rhs = 4.0 * (1.0 + 2.0 / spec.parameter) * ng;
  return d;
}

}  // namespace rdslab
