#include "rdslab/env.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace rdslab {

namespace {

int draw(const double* cdf, int n, double u) {
  for (int i = 0; i < n - 1; ++i)
    if (u < cdf[i]) return i;
  return n - 1;
}

struct Sampler {
  int n = 0;
  std::vector<double> pi_cdf;
  std::vector<double> fwd_cdf;  // row-major n x n
  std::vector<double> bwd_cdf;

  explicit Sampler(const DriverSpec& spec) : n(spec.alphabet_size) {
    pi_cdf.resize(n);
    std::partial_sum(spec.stationary.begin(), spec.stationary.end(), pi_cdf.begin());
    if (spec.kind == DriverKind::Markov) {
      const Eigen::MatrixXd R = spec.reversed();
      fwd_cdf.resize(n * n);
      bwd_cdf.resize(n * n);
      for (int i = 0; i < n; ++i) {
        double a = 0.0, b = 0.0;
        for (int j = 0; j < n; ++j) {
          a += spec.transition(i, j);
          b += R(i, j);
          fwd_cdf[i * n + j] = a;
          bwd_cdf[i * n + j] = b;
        }
      }
    }
  }

  bool markov() const { return !fwd_cdf.empty(); }
  int stationary(CounterRng& r) const { return draw(pi_cdf.data(), n, r.uniform()); }
  int forward(int from, CounterRng& r) const {
    return markov() ? draw(&fwd_cdf[from * n], n, r.uniform()) : stationary(r);
  }
  int backward(int from, CounterRng& r) const {
    return markov() ? draw(&bwd_cdf[from * n], n, r.uniform()) : stationary(r);
  }
};

}  // namespace

// ============================================================================
// DriverSpec
// ============================================================================

std::vector<double> stationary_vector(const Eigen::MatrixXd& P) {
  const int n = static_cast<int>(P.rows());
  // Solve (P^T - I) pi = 0 with the normalization row replacing the last equation.
  Eigen::MatrixXd A = P.transpose() - Eigen::MatrixXd::Identity(n, n);
  A.row(n - 1).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  b(n - 1) = 1.0;
  Eigen::VectorXd pi = A.fullPivLu().solve(b);
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = std::max(0.0, pi(i));
  const double s = std::accumulate(out.begin(), out.end(), 0.0);
  for (double& x : out) x /= s;
  return out;
}

DriverSpec DriverSpec::iid(std::vector<double> probs) {
  DriverSpec s;
  s.kind = DriverKind::Iid;
  s.alphabet_size = static_cast<int>(probs.size());
  s.stationary = std::move(probs);
  s.validate();
  return s;
}

DriverSpec DriverSpec::markov(const Eigen::MatrixXd& P) {
  DriverSpec s;
  s.kind = DriverKind::Markov;
  s.alphabet_size = static_cast<int>(P.rows());
  s.transition = P;
  if (P.rows() != P.cols()) throw std::invalid_argument("transition matrix is not square");
  for (int i = 0; i < P.rows(); ++i) {
    if (std::abs(P.row(i).sum() - 1.0) > 1e-12) throw std::invalid_argument("transition rows must sum to 1");
    for (int j = 0; j < P.cols(); ++j)
      if (P(i, j) < 0.0) throw std::invalid_argument("transition has a negative entry");
  }
  s.stationary = stationary_vector(P);
  s.validate();
  return s;
}

void DriverSpec::validate() const {
  if (alphabet_size < 1) throw std::invalid_argument("alphabet size must be positive");
  if (static_cast<int>(stationary.size()) != alphabet_size)
    throw std::invalid_argument("stationary vector has the wrong length");
  double s = 0.0;
  for (double p : stationary) {
    if (!(p >= 0.0)) throw std::invalid_argument("stationary vector has a negative entry");
    s += p;
  }
  if (std::abs(s - 1.0) > 1e-10) throw std::invalid_argument("stationary vector must sum to 1");
  if (kind == DriverKind::Markov) {
    if (transition.rows() != alphabet_size || transition.cols() != alphabet_size)
      throw std::invalid_argument("transition matrix has the wrong shape");
    for (int i = 0; i < alphabet_size; ++i) {
      if (std::abs(transition.row(i).sum() - 1.0) > 1e-12)
        throw std::invalid_argument("transition rows must sum to 1");
      for (int j = 0; j < alphabet_size; ++j)
        if (transition(i, j) < 0.0) throw std::invalid_argument("transition has a negative entry");
    }
    for (int j = 0; j < alphabet_size; ++j) {
      double pj = 0.0;
      for (int i = 0; i < alphabet_size; ++i) pj += stationary[i] * transition(i, j);
      if (std::abs(pj - stationary[j]) > 1e-10) throw std::invalid_argument("pi is not stationary for P");
    }
  }
}

Eigen::MatrixXd DriverSpec::reversed() const {
  const int n = alphabet_size;
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    if (stationary[i] <= 0.0) {
      R(i, i) = 1.0;  // state never visited; any row works
      continue;
    }
    for (int j = 0; j < n; ++j) R(i, j) = stationary[j] * transition(j, i) / stationary[i];
  }
  return R;
}

// ============================================================================
// EnvPath
// ============================================================================

EnvPath::EnvPath(std::vector<int> coords, int window, int horizon, std::uint64_t seed)
    : data_(std::make_shared<const std::vector<int>>(std::move(coords))),
      center_(static_cast<std::size_t>(window + horizon)),
      window_(window),
      horizon_(horizon),
      seed_(seed) {
  if (data_->size() != 2 * center_ + 1) throw std::invalid_argument("EnvPath: inconsistent storage size");
}

bool EnvPath::contains(long j) const { return j >= lowest() && j <= highest(); }

int EnvPath::operator[](long j) const {
  if (!contains(j)) throw std::out_of_range("EnvPath: coordinate outside stored window");
  return (*data_)[static_cast<std::size_t>(static_cast<long>(center_) + offset_ + j)];
}

EnvPath EnvPath::shift(long k) const {
  const long off = offset_ + k;
  if (std::labs(off) > horizon_) throw std::out_of_range("EnvPath: shift leaves the stored horizon");
  EnvPath p = *this;
  p.offset_ = off;
  return p;
}

std::vector<int> EnvPath::slice(long from, long to) const {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(std::max(0L, to - from + 1)));
  for (long j = from; j <= to; ++j) out.push_back((*this)[j]);
  return out;
}

EnvPath sample_path(const DriverSpec& spec, CounterRng& rng, int horizon, int window) {
  if (horizon < 1) throw std::invalid_argument("sample_path: horizon must be at least 1");
  if (window < 0) throw std::invalid_argument("sample_path: negative window");
  spec.validate();
  const Sampler s(spec);
  const int half = window + horizon;
  std::vector<int> c(2 * half + 1);
  c[half] = s.stationary(rng);
  for (int j = 1; j <= half; ++j) c[half + j] = s.forward(c[half + j - 1], rng);
  for (int j = 1; j <= half; ++j) c[half - j] = s.backward(c[half - j + 1], rng);
  return EnvPath(std::move(c), window, horizon, rng.key());
}

EnvPath sample_path(const DriverSpec& spec, std::uint64_t seed, int horizon, int window) {
  CounterRng rng(seed);
  EnvPath p = sample_path(spec, rng, horizon, window);
  return EnvPath(p.slice(p.lowest(), p.highest()), window, horizon, seed);
}

// ============================================================================
// ParamField
// ============================================================================

double ParamField::operator()(const EnvPath& path, long j) const {
  return evaluator(path.slice(j - radius, j + radius));
}

ParamField ParamField::table(std::vector<double> values) {
  ParamField f;
  f.radius = 0;
  f.evaluator = [values = std::move(values)](const std::vector<int>& w) { return values.at(w[0]); };
  return f;
}

ParamField ParamField::window_mean(std::vector<double> values, int r) {
  ParamField f;
  f.radius = r;
  f.evaluator = [values = std::move(values)](const std::vector<int>& w) {
    double s = 0.0;
    for (int x : w) s += values.at(x);
    return s / static_cast<double>(w.size());
  };
  return f;
}

ParamField ParamField::geometric_indicator(std::vector<int> set, int r) {
  ParamField f;
  f.radius = r;
  f.evaluator = [set = std::move(set), r](const std::vector<int>& w) {
    double s = 0.0;
    for (int j = -r; j <= r; ++j)
      if (std::find(set.begin(), set.end(), w[j + r]) != set.end()) s += std::ldexp(1.0, -std::abs(j) - 2);
    return s;
  };
  return f;
}

bool field_is_local(const ParamField& field, const DriverSpec& spec, std::uint64_t seed, int trials) {
  CounterRng rng(seed);
  const Sampler s(spec);
  const int R = field.radius;
  for (int t = 0; t < trials; ++t) {
    EnvPath p = sample_path(spec, rng, R + 8);
    std::vector<int> c = p.slice(p.lowest(), p.highest());
    const double v0 = field(p);
    const long half = p.highest();
    for (long j = R + 1; j <= half; ++j) c[half + j] = static_cast<int>(rng.below(spec.alphabet_size));
    for (long j = R + 1; j <= half; ++j) c[half - j] = static_cast<int>(rng.below(spec.alphabet_size));
    EnvPath q(std::move(c), 0, p.horizon(), 0);
    if (field(q) != v0) return false;
  }
  return true;
}

// ============================================================================
// Mixing, hitting times, tails
// ============================================================================

Eigen::MatrixXd matrix_power(const Eigen::MatrixXd& P, int k) {
  if (k < 0) throw std::invalid_argument("matrix_power: negative exponent");
  Eigen::MatrixXd result = Eigen::MatrixXd::Identity(P.rows(), P.cols());
  Eigen::MatrixXd base = P;
  while (k > 0) {
    if (k & 1) result = result * base;
    base = base * base;
    k >>= 1;
  }
  return result;
}

double psi_upper_mixing(const DriverSpec& spec, int k) {
  if (k < 1) throw std::invalid_argument("psi_upper_mixing: k must be at least 1");
  if (spec.kind == DriverKind::Iid) return 0.0;
  const Eigen::MatrixXd Pk = matrix_power(spec.transition, k);
  // P^k - 1 pi^T = (P - 1 pi^T)^k; the right side decays without cancellation.
  const int m = spec.alphabet_size;
  Eigen::RowVectorXd pi(m);
  for (int j = 0; j < m; ++j) pi[j] = spec.stationary[j];
  const Eigen::MatrixXd Dk = matrix_power(spec.transition - Eigen::VectorXd::Ones(m) * pi, k);
  double best = 0.0;
  for (int i = 0; i < spec.alphabet_size; ++i) {
    if (spec.stationary[i] <= 0.0) continue;  // unreachable in the stationary chain
    for (int j = 0; j < spec.alphabet_size; ++j) {
      if (spec.stationary[j] <= 0.0) {
        if (Pk(i, j) > 0.0) throw std::domain_error("psi_upper_mixing: degenerate chain (pi_j = 0 but reachable)");
        continue;
      }
      best = std::max(best, Dk(i, j) / spec.stationary[j]);
    }
  }
  return best;
}

HittingTime hitting_time(const EnvPath& path, const std::function<bool(const EnvPath&, long)>& pred, long max_n) {
  for (long n = 1; n <= max_n; ++n) {
    try {
      if (pred(path, n)) return {n, false};
    } catch (const std::out_of_range&) {
      return {n - 1, true};
    }
  }
  return {max_n, true};
}

double set_probability(const DriverSpec& spec, const ParamField& field, double threshold) {
  const int L = 2 * field.radius + 1;
  const int n = spec.alphabet_size;
  double total = std::pow(static_cast<double>(n), L);
  if (total > static_cast<double>(1 << 22)) throw std::invalid_argument("set_probability: window too large to enumerate");
  std::vector<int> w(L, 0);
  double prob = 0.0;
  for (long idx = 0; idx < static_cast<long>(total); ++idx) {
    long r = idx;
    for (int i = 0; i < L; ++i) {
      w[i] = static_cast<int>(r % n);
      r /= n;
    }
    double p = spec.stationary[w[0]];
    for (int i = 1; i < L && p > 0.0; ++i)
      p *= spec.kind == DriverKind::Markov ? spec.transition(w[i - 1], w[i]) : spec.stationary[w[i]];
    if (p > 0.0 && field.evaluator(w) <= threshold) prob += p;
  }
  return prob;
}

TailReport tail_bound_check(const DriverSpec& spec, const ParamField& field, double threshold, long j, int trials,
                            std::uint64_t seed) {
  const double pA = set_probability(spec, field, threshold);
  if (pA <= 0.0) throw std::domain_error("tail_bound_check: P(A) = 0");
  TailReport rep;
  rep.j = j;
  rep.bound = 1.0;
  // beta_r vanishes once r covers the field radius; smaller r would need an L1 estimate
  // of the set approximation and is not used.
  for (long r = std::max(1, field.radius); 3 * r <= j; ++r) {
    const long m = j / (3 * r);
    const double psi = psi_upper_mixing(spec, static_cast<int>(r));
    const double b = std::pow(1.0 + psi, static_cast<double>(m - 1)) * std::pow(1.0 - pA, static_cast<double>(m));
    if (b < rep.bound) {
      rep.bound = b;
      rep.best_r = static_cast<int>(r);
    }
  }
  CounterRng master(seed);
  long survive = 0;
  const auto pred = [&](const EnvPath& p, long n) { return field(p, n) <= threshold; };
  for (int t = 0; t < trials; ++t) {
    CounterRng r = master.split(static_cast<std::uint64_t>(t));
    EnvPath p = sample_path(spec, r, static_cast<int>(j) + field.radius + 1);
    if (hitting_time(p, pred, j).censored) ++survive;
  }
  rep.empirical = static_cast<double>(survive) / trials;
  rep.sigma = std::sqrt(std::max(rep.bound * (1.0 - rep.bound), 0.0) / trials);
  rep.pass = rep.empirical <= rep.bound + 3.0 * rep.sigma;
  return rep;
}

double beta_r(const ParamField& field, int r, const DriverSpec& spec, int samples, std::uint64_t seed, int inner) {
  if (samples < 100) throw std::invalid_argument("beta_r: at least 100 samples required");
  const int R = field.radius;
  if (r >= R) return 0.0;
  const Sampler s(spec);
  CounterRng rng(seed);
  const int L = 2 * R + 1;
  std::vector<int> w(L), v(L);
  double acc = 0.0;
  for (int t = 0; t < samples; ++t) {
    w[R] = s.stationary(rng);
    for (int j = 1; j <= R; ++j) w[R + j] = s.forward(w[R + j - 1], rng);
    for (int j = 1; j <= R; ++j) w[R - j] = s.backward(w[R - j + 1], rng);
    const double f0 = field.evaluator(w);
    double dev = 0.0;
    for (int m = 0; m < inner; ++m) {
      v = w;
      for (int j = r + 1; j <= R; ++j) v[R + j] = s.forward(v[R + j - 1], rng);
      for (int j = r + 1; j <= R; ++j) v[R - j] = s.backward(v[R - j + 1], rng);
      dev += field.evaluator(v) - f0;
    }
    acc += std::abs(dev / inner);
  }
  return acc / samples;
}

}  // namespace rdslab
