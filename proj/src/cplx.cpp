#include "rdslab/cplx.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "rdslab/stats.hpp"

namespace rdslab {

cplx normalized_mgf(const Cocycle& cc, const RPFTriplet& t, long start, int n, cplx z) {
  if (n < 0) throw std::invalid_argument("normalized_mgf: negative length");
  CGridFn g(cc.N(), cc.alpha(), cplx(1.0));
  for (int j = 0; j < n; ++j) g = normalized_apply(cc, t, start + j, g, z);
  return integrate(g, t.mu_at(start + n));
}

double window_r0(const Cocycle& cc, const RPFTriplet& t, long start, int n) {
  double r0 = std::numeric_limits<double>::infinity();
  for (int j = 0; j < n; ++j) {
    const ObservableNorms u = ObservableNorms::of(centered_observable(cc, t, start + j));
    r0 = std::min(r0, complex_rates(cc.rates(start + j, &u)).r0);
  }
  return r0;
}

PressureWindow pressure_window(const Cocycle& cc, const RPFTriplet& t, long start, int n, double p_exponent,
                               double sigma2_n, int nodes) {
  if (n < 1 || nodes < 4) throw std::invalid_argument("pressure_window: need n >= 1 and at least 4 nodes");
  PressureWindow w;
  w.n = n;
  w.sigma2_n = sigma2_n;
  const double r0 = window_r0(cc, t, start, n);
  const double rn = p_exponent > 0.0 ? std::pow(static_cast<double>(n), -2.0 / p_exponent) : 1.0;
  w.r0_binds = r0 / 2.0 < rn;
  w.radius = std::min(r0 / 2.0, rn);
  std::vector<cplx> mgf(nodes);
  for (int k = 0; k < nodes; ++k) {
    const cplx z = std::polar(w.radius, 2.0 * std::numbers::pi * k / nodes);
    w.nodes.push_back(z);
    mgf[k] = normalized_mgf(cc, t, start, n, z);
  }
  double winding = 0.0;
  for (int k = 0; k < nodes; ++k) winding += std::arg(mgf[(k + 1) % nodes] / mgf[k]);
  if (std::abs(winding) > std::numbers::pi)
    throw std::runtime_error("pressure_window: the MGF winds around 0 on the circle; increase n");
  double pmax = 0.0;
  for (int k = 0; k < nodes; ++k) {
    w.samples.push_back(std::log(mgf[k]));
    pmax = std::max(pmax, std::abs(w.samples[k]));
    w.d1 += w.samples[k] / w.nodes[k];
    w.d2 += w.samples[k] / (w.nodes[k] * w.nodes[k]);
  }
  w.d1 /= static_cast<double>(nodes);
  w.d2 *= 2.0 / nodes;
  w.real_axis_imag = std::max(std::abs(w.samples[0].imag()), nodes % 2 == 0 ? std::abs(w.samples[nodes / 2].imag()) : 0.0);
  for (int k = 1; k < nodes; ++k)
    w.conjugation = std::max(w.conjugation, std::abs(w.samples[nodes - k] - std::conj(w.samples[k])));
  for (int m = 1; m < nodes / 2; ++m) {
    cplx a = 0.0;
    for (int k = 0; k < nodes; ++k) a += w.samples[k] * std::polar(1.0, 2.0 * std::numbers::pi * m * k / nodes);
    w.analyticity = std::max(w.analyticity, std::abs(a) / nodes);
  }
  if (pmax > 0.0) w.analyticity /= pmax;
  const double ratio = sigma2_n > 0.0 ? w.d2.real() / sigma2_n : 0.0;
  w.pass = std::abs(w.d1) <= 1e-3 * n && ratio >= 0.98 && ratio <= 1.02;
  return w;
}

CharGap char_fn_gap(const Cocycle& cc, const RPFTriplet& t, long start, int n, double sigma_n,
                    const std::vector<double>& tgrid) {
  CharGap c;
  c.t = tgrid;
  c.degenerate = !(sigma_n > 1e-12);
  for (double s : tgrid) {
    const double target = std::exp(-0.5 * s * s);
    double g;
    if (c.degenerate)
      g = std::abs(1.0 - target);
    else
      g = std::abs(normalized_mgf(cc, t, start, n, cplx(0.0, s / sigma_n)) - target);
    c.gap.push_back(g);
    c.max_gap = std::max(c.max_gap, g);
  }
  return c;
}

MdpPoint mdp_point(const Cocycle& cc, const RPFTriplet& t, long start, int n, double a_n, double x, double sigma2,
                   int trials, std::uint64_t seed, int threads) {
  if (!(sigma2 > 0.0)) throw std::invalid_argument("mdp_point: sigma2 must be positive");
  if (trials < 1) throw std::invalid_argument("mdp_point: trials must be positive");
  MdpPoint p;
  p.n = n;
  p.a_n = a_n;
  p.x = x;
  p.target = -x * x / (2.0 * sigma2);
  p.theta = x * a_n / (n * sigma2);
  const int N = cc.N();

  std::vector<std::vector<double>> F(n, std::vector<double>(N + 1));
  CGridFn G(N, cc.alpha(), cplx(1.0));
  for (int j = 0; j < n; ++j) {
    const GridFn u = centered_observable(cc, t, start + j);
    double mx = 0.0;
    for (int k = 0; k < N; ++k) {
      F[j][k] = std::exp(p.theta * u[k]) * G[k].real();
      mx = std::max(mx, F[j][k]);
    }
    for (int k = 0; k < N; ++k) F[j][k] /= mx;
    F[j][N] = F[j][N - 1];
    G = normalized_apply(cc, t, start + j, G, cplx(p.theta));
    double gmax = 0.0;
    for (int k = 0; k < N; ++k) gmax = std::max(gmax, G[k].real());
    G *= cplx(1.0 / gmax);
  }

  const PathSampler sampler(cc, t, start, n);
  std::vector<double> S(trials), L(trials);
  const CounterRng master(seed);
  constexpr int chunk = PathSampler::kBlock;
  parallel_for((trials + chunk - 1) / chunk, threads, [&](long c) {
    const long first = c * chunk;
    const int count = static_cast<int>(std::min<long>(chunk, trials - first));
    sampler.sample_tilted_many(master, first, count, F, &S[first], &L[first]);
  });

  const double level = x * a_n;
  double lmax = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < trials; ++i)
    if (S[i] > level) lmax = std::max(lmax, L[i]);
  if (!std::isfinite(lmax)) {
    p.censored = true;
    return p;
  }
  double s1 = 0.0, s2 = 0.0;
  for (int i = 0; i < trials; ++i) {
    if (!(S[i] > level)) continue;
    const double v = std::exp(L[i] - lmax);
    s1 += v;
    s2 += v * v;
  }
  const double mean = s1 / trials;
  const double var = std::max(0.0, s2 / trials - mean * mean);
  p.rel_error = std::sqrt(var / trials) / mean;
  const double logp = lmax + std::log(mean);
  p.probability = std::exp(logp);
  p.rate = n / (a_n * a_n) * logp;
  p.ratio = p.rate / p.target;
  return p;
}

}  // namespace rdslab
