#include "rdslab/stats.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <thread>

namespace rdslab {

namespace {

constexpr int kMaxDegree = 16;

// Branch-free clamped interpolation on N+1 padded nodes (v[N] == v[N-1]).
inline double lerp_pad(const double* v, int N, double x) {
  const double s = std::max(x * N, 0.0);
  const int i = std::min(static_cast<int>(s), N - 1);
  const double t = s - i;
  return v[i] + t * (v[i + 1] - v[i]);
}

std::vector<double> padded(const std::vector<double>& v) {
  std::vector<double> p(v);
  p.push_back(v.back());
  return p;
}

}  // namespace

void parallel_for(long n, int threads, const std::function<void(long)>& fn) {
  threads = std::max(1, threads);
  if (threads == 1 || n < 2) {
    for (long i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  const long block = (n + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const long lo = t * block, hi = std::min(n, lo + block);
    if (lo >= hi) break;
    pool.emplace_back([&fn, lo, hi] {
      for (long i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

// ============================================================================
// PathSampler
// ============================================================================

PathSampler::PathSampler(const Cocycle& cc, const RPFTriplet& t, long start, int n) : n_(n), N_(cc.N()) {
  if (n < 1) throw std::invalid_argument("PathSampler: n must be positive");
  if (!t.covers(start) || !t.covers(start + n)) throw std::out_of_range("PathSampler: triplet does not cover the path");
  for (int j = 0; j < n; ++j) {
    const long idx = start + j;
    Fiber f;
    f.cache = cc.cache(idx).get();
    if (f.cache->degree() > kMaxDegree) throw std::invalid_argument("PathSampler: degree above 16");
    const GridFn& h = t.h_at(idx);
    const double hmax = max_value(h), hmin = min_value(h);
    if (hmax - hmin > 1e-14 * hmax) f.h = padded(h.values());
    f.affine = f.cache->fiber().affine();
    for (const Branch& b : f.cache->fiber().branches()) {
      f.left.push_back(b.left);
      f.width.push_back(b.right - b.left);
      f.branch_weight.push_back(std::exp(f.cache->potential().at_branch(b, 0.5 * (b.left + b.right))));
    }
    const GridFn& u = f.cache->u();
    const double c = t.center_at(idx);
    f.u.resize(N_ + 1);
    for (int k = 0; k < N_; ++k) f.u[k] = u[k] - c;
    f.u[N_] = f.u[N_ - 1];
    fibers_.push_back(std::move(f));
  }
  bool simple = true;
  for (const Fiber& f : fibers_) simple = simple && f.affine && f.cache->degree() == 2;
  if (simple)
    for (const Fiber& f : fibers_)
      pairs_.push_back({f.left[0], f.width[0], f.left[1], f.width[1], f.branch_weight[0], f.branch_weight[1],
                        f.h.empty() ? nullptr : f.h.data(), f.u.data()});
  dens_ = t.mu_at(start + n).density();
  cdf_.resize(N_);
  double acc = 0.0;
  for (int k = 0; k < N_; ++k) {
    acc += k + 1 < N_ ? 0.5 * (dens_[k] + dens_[k + 1]) / N_ : dens_[k] / N_;
    cdf_[k] = acc;
  }
}

double PathSampler::sample_end(CounterRng& rng) const {
  const double target = rng.uniform() * cdf_.back();
  const int k = static_cast<int>(std::upper_bound(cdf_.begin(), cdf_.end(), target) - cdf_.begin());
  const int cell = std::min(k, N_ - 1);
  const double below = cell == 0 ? 0.0 : cdf_[cell - 1];
  const double x0 = static_cast<double>(cell) / N_;
  if (cell == N_ - 1) return std::min(x0 + (target - below) / dens_[cell], std::nextafter(1.0, 0.0));
  // Invert the linear density d0 + (d1 - d0) t on the cell.
  const double d0 = dens_[cell], d1 = dens_[cell + 1];
  const double c = (target - below) * N_;
  const double disc = d0 * d0 + 2.0 * (d1 - d0) * c;
  const double t = 2.0 * c / (d0 + std::sqrt(std::max(0.0, disc)));
  return x0 + std::clamp(t, 0.0, 1.0) / N_;
}

double PathSampler::u(int j, double x) const { return lerp_pad(fibers_[j].u.data(), N_, x); }

void PathSampler::choose(const Fiber& f, double x, const double* F, double* y_out, double* p_choice, double* p_prop,
                         CounterRng& rng) const {
  const FiberCache& c = *f.cache;
  const int d = c.degree();
  const double* h = f.h.empty() ? nullptr : f.h.data();
  std::array<double, kMaxDegree> y, w, q;
  double sw = 0.0, sq = 0.0;
  for (int i = 0; i < d; ++i) {
    double wi;
    if (f.affine) {
      y[i] = f.left[i] + f.width[i] * x;
      wi = f.branch_weight[i];
    } else {
      y[i] = c.inverse(i, x);
      wi = std::exp(c.potential().at_branch(c.fiber().branch(i), y[i]));
    }
    if (h) wi *= lerp_pad(h, N_, y[i]);
    w[i] = wi;
    sw += wi;
    q[i] = F ? wi * lerp_pad(F, N_, y[i]) : wi;
    sq += q[i];
  }
  double r = rng.uniform() * sq;
  int i;
  if (d == 2) {
    i = r >= q[0];
  } else {
    for (i = 0; i < d - 1; ++i) {
      r -= q[i];
      if (r < 0.0) break;
    }
  }
  *y_out = y[i];
  if (p_choice) *p_choice = w[i] / sw;
  if (p_prop) *p_prop = q[i] / sq;
}

double PathSampler::sample(CounterRng& rng, const std::vector<int>& ladder, double* out) const {
  double x = sample_end(rng);
  double R = 0.0;
  int next = static_cast<int>(ladder.size()) - 1;
  std::array<double, 64> rm{};
  if (ladder.size() > rm.size()) throw std::invalid_argument("PathSampler::sample: ladder longer than 64");
  while (next >= 0 && ladder[next] >= n_) rm[next--] = 0.0;
  int mark = next >= 0 ? ladder[next] : -1;
  for (int j = n_ - 1; j >= 0; --j) {
    if (!pairs_.empty()) {
      const Pair& p = pairs_[j];
      const double y0 = p.l0 + p.w0 * x, y1 = p.l1 + p.w1 * x;
      double q0 = p.e0, q1 = p.e1;
      if (p.h) {
        q0 *= lerp_pad(p.h, N_, y0);
        q1 *= lerp_pad(p.h, N_, y1);
      }
      // Arithmetic select: the branch choice is a coin flip, so a jump would mispredict half the time.
      const double one = static_cast<double>(rng.uniform() * (q0 + q1) >= q0);
      x = y0 + one * (y1 - y0);
      R += lerp_pad(p.u, N_, x);
    } else {
      const Fiber& f = fibers_[j];
      choose(f, x, nullptr, &x, nullptr, nullptr, rng);
      R += lerp_pad(f.u.data(), N_, x);
    }
    if (j == mark) {
      rm[next--] = R;
      mark = next >= 0 ? ladder[next] : -1;
    }
  }
  for (std::size_t i = 0; i < ladder.size(); ++i) out[i] = R - rm[i];
  return R;
}

double PathSampler::sample_tilted(CounterRng& rng, const std::vector<std::vector<double>>& F, double* log_ratio) const {
  if (static_cast<int>(F.size()) < n_) throw std::invalid_argument("PathSampler::sample_tilted: F too short");
  double x = sample_end(rng);
  double R = 0.0, ratio = 1.0, logr = 0.0;
  for (int j = n_ - 1; j >= 0; --j) {
    const double* Fj = F[j].data();
    if (!pairs_.empty()) {
      const Pair& p = pairs_[j];
      const double y0 = p.l0 + p.w0 * x, y1 = p.l1 + p.w1 * x;
      double w0 = p.e0, w1 = p.e1;
      if (p.h) {
        w0 *= lerp_pad(p.h, N_, y0);
        w1 *= lerp_pad(p.h, N_, y1);
      }
      const double q0 = w0 * lerp_pad(Fj, N_, y0), q1 = w1 * lerp_pad(Fj, N_, y1);
      const bool one = rng.uniform() * (q0 + q1) >= q0;
      x = one ? y1 : y0;
      // dP/dQ of this step: (w_i / (w0 + w1)) / (q_i / (q0 + q1)).
      ratio *= (q0 + q1) / (w0 + w1) * (one ? w1 / q1 : w0 / q0);
      R += lerp_pad(p.u, N_, x);
    } else {
      const Fiber& f = fibers_[j];
      double pc, pp;
      choose(f, x, Fj, &x, &pc, &pp, rng);
      ratio *= pc / pp;
      R += lerp_pad(f.u.data(), N_, x);
    }
    if ((j & 31) == 0) {
      int e;
      ratio = std::frexp(ratio, &e);
      logr += e * std::numbers::ln2;
    }
  }
  *log_ratio = logr + std::log(ratio);
  return R;
}

void PathSampler::sample_many(const CounterRng& master, long first, int count, const std::vector<int>& ladder,
                              double* sums, double* pre) const {
  const std::size_t L = ladder.size();
  if (L > 64) throw std::invalid_argument("PathSampler::sample_many: ladder longer than 64");
  if (count > kBlock) {
    for (int b0 = 0; b0 < count; b0 += kBlock)
      sample_many(master, first + b0, std::min(kBlock, count - b0), ladder, sums + b0, L ? pre + b0 * L : nullptr);
    return;
  }
  std::vector<CounterRng> rng(count);
  for (int b = 0; b < count; ++b) rng[b] = master.split(static_cast<std::uint64_t>(first + b));
  if (pairs_.empty()) {
    for (int b = 0; b < count; ++b) sums[b] = sample(rng[b], ladder, L ? pre + b * L : nullptr);
    return;
  }
  // All trials advance fiber by fiber, so each fiber's tables are read once per call.
  std::vector<double> x(count), R(count, 0.0), rm(L * count, 0.0);
  for (int b = 0; b < count; ++b) x[b] = sample_end(rng[b]);
  int next = static_cast<int>(L) - 1;
  while (next >= 0 && ladder[next] >= n_) --next;
  int mark = next >= 0 ? ladder[next] : -1;
  for (int j = n_ - 1; j >= 0; --j) {
    const Pair& p = pairs_[j];
    for (int b = 0; b < count; ++b) {
      const double y0 = p.l0 + p.w0 * x[b], y1 = p.l1 + p.w1 * x[b];
      double q0 = p.e0, q1 = p.e1;
      if (p.h) {
        q0 *= lerp_pad(p.h, N_, y0);
        q1 *= lerp_pad(p.h, N_, y1);
      }
      const double one = static_cast<double>(rng[b].uniform() * (q0 + q1) >= q0);
      x[b] = y0 + one * (y1 - y0);
      R[b] += lerp_pad(p.u, N_, x[b]);
    }
    if (j == mark) {
      std::copy(R.begin(), R.end(), rm.begin() + next * count);
      --next;
      mark = next >= 0 ? ladder[next] : -1;
    }
  }
  for (int b = 0; b < count; ++b) {
    sums[b] = R[b];
    for (std::size_t i = 0; i < L; ++i) pre[b * L + i] = R[b] - rm[i * count + b];
  }
}

void PathSampler::sample_tilted_many(const CounterRng& master, long first, int count,
                                     const std::vector<std::vector<double>>& F, double* sums,
                                     double* log_ratio) const {
  if (static_cast<int>(F.size()) < n_) throw std::invalid_argument("PathSampler::sample_tilted_many: F too short");
  if (count > kBlock) {
    for (int b0 = 0; b0 < count; b0 += kBlock)
      sample_tilted_many(master, first + b0, std::min(kBlock, count - b0), F, sums + b0, log_ratio + b0);
    return;
  }
  std::vector<CounterRng> rng(count);
  for (int b = 0; b < count; ++b) rng[b] = master.split(static_cast<std::uint64_t>(first + b));
  if (pairs_.empty()) {
    for (int b = 0; b < count; ++b) sums[b] = sample_tilted(rng[b], F, &log_ratio[b]);
    return;
  }
  std::vector<double> x(count), R(count, 0.0), logr(count, 0.0), ratio(count, 1.0);
  for (int b = 0; b < count; ++b) x[b] = sample_end(rng[b]);
  for (int j = n_ - 1; j >= 0; --j) {
    const Pair& p = pairs_[j];
    const double* Fj = F[j].data();
    for (int b = 0; b < count; ++b) {
      const double y0 = p.l0 + p.w0 * x[b], y1 = p.l1 + p.w1 * x[b];
      double w0 = p.e0, w1 = p.e1;
      if (p.h) {
        w0 *= lerp_pad(p.h, N_, y0);
        w1 *= lerp_pad(p.h, N_, y1);
      }
      const double q0 = w0 * lerp_pad(Fj, N_, y0), q1 = w1 * lerp_pad(Fj, N_, y1);
      const bool one = rng[b].uniform() * (q0 + q1) >= q0;
      x[b] = one ? y1 : y0;
      ratio[b] *= (q0 + q1) / (w0 + w1) * (one ? w1 / q1 : w0 / q0);
      R[b] += lerp_pad(p.u, N_, x[b]);
    }
    if ((j & 31) == 0) {
      for (int b = 0; b < count; ++b) {
        int e;
        ratio[b] = std::frexp(ratio[b], &e);
        logr[b] += e * std::numbers::ln2;
      }
    }
  }
  for (int b = 0; b < count; ++b) {
    sums[b] = R[b];
    log_ratio[b] = logr[b] + std::log(ratio[b]);
  }
}

TrajectoryBatch birkhoff_batch(const Cocycle& cc, const RPFTriplet& t, long start, int n, int trials,
                               std::uint64_t seed, const std::vector<int>& ladder, int threads) {
  if (trials < 1) throw std::invalid_argument("birkhoff_batch: trials must be positive");
  if (!cc.has_observable()) throw std::invalid_argument("birkhoff_batch: cocycle has no observable");
  for (std::size_t i = 0; i < ladder.size(); ++i)
    if (ladder[i] < 1 || ladder[i] > n || (i > 0 && ladder[i] <= ladder[i - 1]))
      throw std::invalid_argument("birkhoff_batch: ladder must be increasing inside [1, n]");
  const PathSampler sampler(cc, t, start, n);
  TrajectoryBatch b;
  b.n = n;
  b.trials = trials;
  b.seed = seed;
  b.sums.resize(trials);
  const std::size_t L = ladder.size();
  std::vector<double> pre(static_cast<std::size_t>(trials) * L);
  const CounterRng master(seed);
  constexpr int chunk = PathSampler::kBlock;
  parallel_for((trials + chunk - 1) / chunk, threads, [&](long c) {
    const long first = c * chunk;
    const int count = static_cast<int>(std::min<long>(chunk, trials - first));
    sampler.sample_many(master, first, count, ladder, &b.sums[first], L ? &pre[first * L] : nullptr);
  });
  for (std::size_t l = 0; l < L; ++l) {
    std::vector<double>& v = b.prefix[ladder[l]];
    v.resize(trials);
    for (int i = 0; i < trials; ++i) v[i] = pre[i * L + l];
  }
  return b;
}

// ============================================================================
// Variance
// ============================================================================

double sample_mean(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v;
  return x.empty() ? 0.0 : s / x.size();
}

double sample_variance(const std::vector<double>& x) {
  if (x.size() < 2) return 0.0;
  const double m = sample_mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / (x.size() - 1);
}

std::vector<double> lag_covariances(const Cocycle& cc, const RPFTriplet& t, long j, int K) {
  std::vector<double> c;
  const GridFn u0 = centered_observable(cc, t, j);
  c.push_back(integrate(u0 * u0, t.mu_at(j)));
  GridFn v = u0;
  for (int k = 1; k <= K; ++k) {
    v = normalized_apply(cc, t, j + k - 1, v);
    c.push_back(integrate(centered_observable(cc, t, j + k) * v, t.mu_at(j + k)));
  }
  return c;
}

double sum_variance(const Cocycle& cc, const RPFTriplet& t, long start, int n, double tol) {
  double total = 0.0;
  for (int j = 0; j < n; ++j) {
    const GridFn u0 = centered_observable(cc, t, start + j);
    const double scale = 1.0 + sup_norm(u0);
    total += integrate(u0 * u0, t.mu_at(start + j));
    GridFn v = u0;
    for (int k = 1; j + k < n; ++k) {
      v = normalized_apply(cc, t, start + j + k - 1, v);
      total += 2.0 * integrate(centered_observable(cc, t, start + j + k) * v, t.mu_at(start + j + k));
      GridFn vc = v;
      vc += -integrate(v, t.mu_at(start + j + k));
      if (sup_norm(vc) <= tol * scale) break;
    }
  }
  return total;
}

VarianceEstimate variance_estimate(const Cocycle& cc, const RPFTriplet& t, const TrajectoryBatch& batch, long start,
                                   int fibers, int K_cap) {
  VarianceEstimate e;
  e.direct = sample_variance(batch.sums) / batch.n;
  const long room = t.start + t.fibers - 1 - start;
  if (room < 2) throw std::out_of_range("variance_estimate: triplet window too short");
  K_cap = static_cast<int>(std::min<long>(K_cap, room / 2));
  const long spread = room - K_cap;
  fibers = std::max(1, fibers);
  double gk = 0.0, tail = 0.0;
  int Kmax = 0;
  for (int s = 0; s < fibers; ++s) {
    const long j = start + (fibers == 1 ? 0 : s * spread / fibers);
    const GridFn u0 = centered_observable(cc, t, j);
    const double u_norm = holder_norm(u0);
    double partial = integrate(u0 * u0, t.mu_at(j));
    double rho = 1.0, B = 0.0, rho_max = 0.0, fiber_tail = 0.0;
    GridFn v = u0;
    int K = 0;
    bool done = false;
    while (!done) {
      if (K == K_cap) {
        e.K_capped = true;
        break;
      }
      ++K;
      const long jk = j + K;
      const EffectiveRates r = cc.rates(jk - 1);
      rho *= r.rho;
      rho_max = std::max(rho_max, r.rho);
      v = normalized_apply(cc, t, jk - 1, v);
      const GridFn uk = centered_observable(cc, t, jk);
      partial += 2.0 * integrate(uk * v, t.mu_at(jk));
      GridFn absu = uk;
      for (auto& x : absu.values()) x = std::abs(x);
      B = std::max(B, cc.rates(jk).B);
      // Geometric tail of 2 B rho_{j,k} ||u|| ||u_k||_{L1} beyond K.
      fiber_tail = 2.0 * B * u_norm * integrate(absu, t.mu_at(jk)) * rho * rho_max / (1.0 - rho_max);
      done = fiber_tail < 0.01 * std::abs(partial);
    }
    gk += partial;
    tail += fiber_tail;
    Kmax = std::max(Kmax, K);
  }
  e.green_kubo = gk / fibers;
  e.tail_bound = tail / fibers;
  e.K = Kmax;
  e.agreement = e.green_kubo != 0.0 ? e.direct / e.green_kubo : 0.0;
  return e;
}

// ============================================================================
// CLT, Berry-Esseen, LCLT
// ============================================================================

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double ks_normal(std::vector<double> x) {
  if (x.empty()) return 1.0;
  std::sort(x.begin(), x.end());
  const double m = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double F = normal_cdf(x[i]);
    d = std::max({d, (i + 1) / m - F, F - i / m});
  }
  return d;
}

Degeneracy detect_degeneracy(const TrajectoryBatch& batch, int n) {
  auto a = batch.prefix.find(n), b = batch.prefix.find(4 * n);
  if (a == batch.prefix.end() || b == batch.prefix.end())
    throw std::invalid_argument("detect_degeneracy: batch needs ladder entries n and 4n");
  Degeneracy d;
  d.var_n = sample_variance(a->second) / n;
  d.var_4n = sample_variance(b->second) / (4.0 * n);
  d.ratio = d.var_4n > 0.0 ? d.var_n / d.var_4n : std::numeric_limits<double>::infinity();
  d.degenerate = d.ratio > 3.0;
  return d;
}

CltResult clt_check(const TrajectoryBatch& batch, double sigma2, const Degeneracy* deg, double threshold) {
  CltResult r;
  r.degenerate = !(sigma2 > 1e-12) || (deg && deg->degenerate);
  if (sigma2 > 0.0) {
    std::vector<double> z(batch.sums);
    const double s = std::sqrt(batch.n * sigma2);
    for (double& v : z) v /= s;
    r.ks = ks_normal(std::move(z));
  }
  r.pass = !r.degenerate && r.ks < threshold;
  return r;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("loglog_slope: need two or more points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= x.size();
  my /= y.size();
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

bool BeCurve::pass(double lo, double hi) const {
  int live = 0;
  for (const CurvePoint& p : points) live += !p.censored;
  return !degenerate && live >= 3 && slope >= lo && slope <= hi;
}

BeCurve berry_esseen_curve(const TrajectoryBatch& batch, const std::vector<int>& ladder,
                           const std::vector<double>& sigma_n) {
  if (ladder.size() != sigma_n.size()) throw std::invalid_argument("berry_esseen_curve: ladder/sigma size mismatch");
  BeCurve c;
  c.noise_floor = 1.0 / std::sqrt(static_cast<double>(batch.trials));
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < ladder.size(); ++i) {
    CurvePoint p;
    p.n = ladder[i];
    auto it = batch.prefix.find(ladder[i]);
    if (it == batch.prefix.end()) throw std::invalid_argument("berry_esseen_curve: missing ladder entry");
    if (!(sigma_n[i] > 1e-12)) {
      c.degenerate = true;
      p.censored = true;
    } else {
      std::vector<double> z(it->second);
      for (double& v : z) v /= sigma_n[i];
      p.value = ks_normal(std::move(z));
      p.censored = p.value < c.noise_floor;
    }
    if (!p.censored) {
      xs.push_back(p.n);
      ys.push_back(p.value);
    }
    c.points.push_back(p);
  }
  c.slope = xs.size() >= 2 ? loglog_slope(xs, ys) : 0.0;
  return c;
}

LcltResult lclt_window(const std::vector<double>& sums, double sigma_n, double a_n, double lo, double hi,
                       const std::vector<double>& v) {
  LcltResult r;
  if (!(sigma_n > 0.0) || !(a_n > 0.0)) throw std::invalid_argument("lclt_window: sigma_n and a_n must be positive");
  r.kappa = sigma_n / a_n;
  if (!(hi > lo)) return r;
  std::vector<double> s(sums);
  std::sort(s.begin(), s.end());
  const double m = static_cast<double>(s.size());
  const double c = std::sqrt(2.0 * std::numbers::pi) * r.kappa;
  long hits = 0;
  for (double vv : v) {
    const auto a = std::lower_bound(s.begin(), s.end(), a_n * (vv + lo));
    const auto b = std::lower_bound(s.begin(), s.end(), a_n * (vv + hi));
    const long cnt = b - a;
    hits += cnt;
    const double gap = std::abs(c * cnt / m - (hi - lo) * std::exp(-vv * vv / (2.0 * r.kappa * r.kappa)));
    r.gap = std::max(r.gap, gap);
  }
  r.censored = hits == 0;
  return r;
}

int inversions(const std::vector<double>& y) {
  int c = 0;
  for (std::size_t i = 1; i < y.size(); ++i) c += y[i] > y[i - 1];
  return c;
}

// ============================================================================
// Martingale decomposition and rho sums
// ============================================================================

MartingaleDecomp martingale_decomp(const Cocycle& cc, const RPFTriplet& t, long start, int n) {
  if (!cc.has_observable()) throw std::invalid_argument("martingale_decomp: cocycle has no observable");
  MartingaleDecomp m;
  const int N = cc.N();
  m.G.emplace_back(N, cc.alpha(), 0.0);
  double u_max = 0.0;
  for (int s = 0; s < n; ++s) {
    const long j = start + s;
    const GridFn u = centered_observable(cc, t, j);
    u_max = std::max(u_max, holder_norm(u));
    m.G.push_back(normalized_apply(cc, t, j, u + m.G[s]));
    const GridFn& Gs = m.G[s];
    const GridFn& Gn = m.G[s + 1];
    const FiberCache& c = *cc.cache(j);
    const MapFiber& fib = c.fiber();
    GridFn M(N, cc.alpha());
    for (int k = 0; k < N; ++k) M[k] = u[k] + Gs[k] - Gn(fib.apply(static_cast<double>(k) / N));
    m.M.push_back(std::move(M));
    // L_j M evaluated with M as a function: M(y) = u(y) + G_s(y) - G_{s+1}(T y).
    const GridFn& h = t.h_at(j);
    const GridFn& hn = t.h_at(j + 1);
    const double lam = t.lambda_at(j);
    double res = 0.0;
    for (int k = 0; k < N; ++k) {
      double acc = 0.0;
      for (int i = 0; i < c.degree(); ++i) {
        const Locate& l = c.loc(k, i);
        const double My = interp_at(u, l) + interp_at(Gs, l) - Gn(fib.apply(c.y(k, i)));
        acc += c.weight(k, i) * interp_at(h, l) * My;
      }
      res = std::max(res, std::abs(acc / (lam * hn[k])));
    }
    m.residual.push_back(res);
    m.max_residual = std::max(m.max_residual, res);
  }
  std::vector<double> rho;
  for (int s = 0; s < n; ++s) rho.push_back(cc.rates(start + s).rho);
  m.G_norm = holder_norm(m.G[n]);
  m.G_bound = cc.rates(start + n).B * u_max * rho_partial_sums(rho, n, 0).R_n;
  return m;
}

RhoSums rho_partial_sums(const std::vector<double>& rho, int n, int m) {
  if (n < 0 || m < 0 || m > n) throw std::invalid_argument("rho_partial_sums: need 0 <= m <= n");
  if (static_cast<int>(rho.size()) < n) throw std::invalid_argument("rho_partial_sums: rho sequence too short");
  RhoSums r;
  double P = 1.0;
  for (int j = n - 1; j >= 0; --j) {
    P *= rho[j];
    r.R_n += P;
  }
  if (static_cast<int>(rho.size()) > n) {
    double S = 0.0;  // S_k = sum_{j=k}^{n} rho_k ... rho_j
    for (int k = n; k >= m; --k) {
      S = rho[k] * (1.0 + S);
      r.R_mn += S;
    }
  }
  return r;
}

std::vector<std::vector<double>> rho_moments(const std::function<std::vector<double>(std::uint64_t)>& rho_seq,
                                             const std::vector<int>& ns, int envs, int p_max, std::uint64_t seed) {
  std::vector<std::vector<double>> mom(ns.size(), std::vector<double>(p_max, 0.0));
  const CounterRng master(seed);
  for (int e = 0; e < envs; ++e) {
    const std::vector<double> rho = rho_seq(master.split(e).key());
    for (std::size_t i = 0; i < ns.size(); ++i) {
      const double R = rho_partial_sums(rho, ns[i], 0).R_n;
      double pw = 1.0;
      for (int p = 0; p < p_max; ++p) {
        pw *= R;
        mom[i][p] += pw / envs;
      }
    }
  }
  return mom;
}

}  // namespace rdslab
