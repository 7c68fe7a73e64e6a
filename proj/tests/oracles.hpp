#pragma once
// Reference values computed independently of the library: closed forms in long
// double and brute-force loops over small grids.

#include <algorithm>
#include <cmath>
#include <vector>

namespace oracle {

// rho for the two-branch a-map with successor parameter a_next.
inline long double linear_rho(long double a_next, long double alpha) {
  const long double aa = std::pow(a_next, alpha);
  const long double e = std::exp(0.5L / aa);
  return (e * (1.0L + aa) - (1.0L - aa)) / (e * (1.0L + aa) + (1.0L - aa));
}

inline long double linear_B(long double a, long double alpha) {
  const long double g = std::pow(a, -alpha);
  return 24.0L * std::exp(4.0L * g) * (1.0L + g) * (1.0L + g);
}

// Cov_Leb(x - 1/2, (x - 1/2) o T^n) for the doubling map.
inline long double doubling_cov(int n) { return std::ldexp(1.0L, -n) / 12.0L; }

// Var_Leb(S_n) for x - 1/2 under the doubling map.
inline long double doubling_sum_var(int n) {
  long double s = n / 12.0L;
  for (int k = 1; k < n; ++k) s += 2.0L * (n - k) * doubling_cov(k);
  return s;
}

// psi_U(k) for the chain [[1-p, p], [q, 1-q]]: P^k = Pi + l^k (I - Pi), l = 1 - p - q.
inline long double two_state_psi(long double p, long double q, int k) {
  const long double pi0 = q / (p + q), pi1 = p / (p + q);
  const long double lk = std::pow(1.0L - p - q, static_cast<long double>(k));
  long double best = 0.0L;
  const long double pi[2] = {pi0, pi1};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const long double pk = pi[j] + lk * ((i == j ? 1.0L : 0.0L) - pi[j]);
      best = std::max(best, pk / pi[j] - 1.0L);
    }
  return best;
}

// All-pairs Hoelder seminorm on the grid x_k = k/N.
inline double holder_brute(const std::vector<double>& f, double alpha) {
  const int N = static_cast<int>(f.size());
  double best = 0.0;
  for (int i = 0; i < N; ++i)
    for (int j = i + 1; j < N; ++j)
      best = std::max(best, std::abs(f[j] - f[i]) / std::pow(static_cast<double>(j - i) / N, alpha));
  return best;
}

// Log-Lipschitz cone {g > 0 : g(x) <= e^{c |x-y|^alpha} g(y)} membership by brute force.
inline bool in_log_cone(const std::vector<double>& g, double c, double alpha, double tol = 1e-12) {
  const int N = static_cast<int>(g.size());
  for (int i = 0; i < N; ++i) {
    if (!(g[i] > 0.0)) return false;
    for (int j = 0; j < N; ++j) {
      const double d = std::pow(std::abs(i - j) / static_cast<double>(N), alpha);
      if (g[i] > std::exp(c * d) * g[j] * (1.0 + tol)) return false;
    }
  }
  return true;
}

// Hilbert distance in the log-Lipschitz cone by bisection on the extremal scalars.
inline double hilbert_brute(const std::vector<double>& f, const std::vector<double>& g, double c, double alpha) {
  auto combo = [&](double a, double b) {
    std::vector<double> h(f.size());
    for (std::size_t k = 0; k < f.size(); ++k) h[k] = a * f[k] + b * g[k];
    return h;
  };
  // alpha_ = sup{s : f - s g in C}
  double lo = 0.0, hi = 1.0;
  while (in_log_cone(combo(1.0, -hi), c, alpha, 0.0)) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double m = 0.5 * (lo + hi);
    (in_log_cone(combo(1.0, -m), c, alpha, 0.0) ? lo : hi) = m;
  }
  const double s = lo;
  // beta = inf{t : t g - f in C}
  lo = 0.0;
  hi = 1.0;
  while (!in_log_cone(combo(-1.0, hi), c, alpha, 0.0)) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double m = 0.5 * (lo + hi);
    (in_log_cone(combo(-1.0, m), c, alpha, 0.0) ? hi : lo) = m;
  }
  return std::log(hi / s);
}

// Standard normal CDF through erfc in long double.
inline long double Phi(long double x) { return 0.5L * std::erfc(-x / std::sqrt(2.0L)); }

}  // namespace oracle
