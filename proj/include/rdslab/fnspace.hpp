#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace rdslab {

using cplx = std::complex<double>;

// ============================================================================
// Grid geometry
// ============================================================================

/// Cell index and offset of x in the clamped linear interpolation rule.
struct Locate {
  int i;     // left node
  double t;  // weight of node i+1, in [0,1)
};

/// Points at or beyond 1-1/N take the last node value; x<0 is clamped to node 0.
inline Locate locate(double x, int N) {
  const double s = x * N;
  if (!(s > 0.0)) return {0, 0.0};
  if (s >= N - 1) return {N - 1, 0.0};
  const int i = static_cast<int>(s);
  return {i, s - i};
}

inline bool valid_grid_size(int N) { return N >= 64 && (N & (N - 1)) == 0; }

/// Stride pairs (k, k+g) for g in {1,2,4,...} < N.
std::vector<std::pair<int, int>> stride_pairs(int N);

/// Integral over [0,1) of the k-th interpolation basis function.
inline double hat_mass(int k, int N) {
  if (k == 0) return 0.5 / N;
  if (k == N - 1) return 1.5 / N;
  return 1.0 / N;
}

// ============================================================================
// GridFn
// ============================================================================

template <class T>
class BasicGridFn {
 public:
  BasicGridFn() = default;
  BasicGridFn(int N, double alpha, T fill = T{}) : v_(N, fill), alpha_(alpha) {
    if (N < 2) throw std::invalid_argument("GridFn: N must be at least 2");
  }
  BasicGridFn(std::vector<T> values, double alpha) : v_(std::move(values)), alpha_(alpha) {}

  template <class F>
  static BasicGridFn sample(int N, double alpha, F&& f) {
    BasicGridFn g(N, alpha);
    for (int k = 0; k < N; ++k) g.v_[k] = f(static_cast<double>(k) / N);
    return g;
  }

  int size() const { return static_cast<int>(v_.size()); }
  bool empty() const { return v_.empty(); }
  double alpha() const { return alpha_; }
  double node(int k) const { return static_cast<double>(k) / size(); }

  T& operator[](int k) { return v_[k]; }
  const T& operator[](int k) const { return v_[k]; }
  const std::vector<T>& values() const { return v_; }
  std::vector<T>& values() { return v_; }

  T operator()(double x) const {
    const Locate l = locate(x, size());
    if (l.t == 0.0) return v_[l.i];
    return v_[l.i] + l.t * (v_[l.i + 1] - v_[l.i]);
  }

  BasicGridFn& operator+=(const BasicGridFn& o) {
    for (int k = 0; k < size(); ++k) v_[k] += o.v_[k];
    return *this;
  }
  BasicGridFn& operator-=(const BasicGridFn& o) {
    for (int k = 0; k < size(); ++k) v_[k] -= o.v_[k];
    return *this;
  }
  BasicGridFn& operator*=(T c) {
    for (auto& x : v_) x *= c;
    return *this;
  }
  BasicGridFn& operator+=(T c) {
    for (auto& x : v_) x += c;
    return *this;
  }

  friend BasicGridFn operator+(BasicGridFn a, const BasicGridFn& b) { return a += b; }
  friend BasicGridFn operator-(BasicGridFn a, const BasicGridFn& b) { return a -= b; }
  friend BasicGridFn operator*(BasicGridFn a, T c) { return a *= c; }
  friend BasicGridFn operator*(T c, BasicGridFn a) { return a *= c; }
  friend BasicGridFn operator*(BasicGridFn a, const BasicGridFn& b) {
    for (int k = 0; k < a.size(); ++k) a.v_[k] *= b.v_[k];
    return a;
  }

 private:
  std::vector<T> v_;
  double alpha_ = 1.0;
};

using GridFn = BasicGridFn<double>;
using CGridFn = BasicGridFn<cplx>;

CGridFn to_complex(const GridFn& f);
GridFn real_part(const CGridFn& f);

// ============================================================================
// GridMeasure
// ============================================================================

/**
 * @brief Probability measure on the grid, stored as the masses of the
 * interpolation basis functions.
 *
 * integrate(f, m) = sum_k m_k f_k, which equals the integral of the clamped
 * linear interpolant of f when m has a piecewise-linear density.
 */
class GridMeasure {
 public:
  GridMeasure() = default;
  explicit GridMeasure(std::vector<double> weights, bool normalize = true);

  static GridMeasure lebesgue(int N);

  int size() const { return static_cast<int>(w_.size()); }
  double operator[](int k) const { return w_[k]; }
  const std::vector<double>& weights() const { return w_; }

  /// Nodal values of the lumped density w_k / hat_mass(k).
  std::vector<double> density() const;

  double total_variation(const GridMeasure& o) const;

 private:
  std::vector<double> w_;
};

// ============================================================================
// Norms and integration
// ============================================================================

double sup_norm(const GridFn& f);
double sup_norm(const CGridFn& f);

/// max over stride pairs of |f(x)-f(y)| / |x-y|^alpha.
double holder_seminorm(const GridFn& f);
double holder_seminorm(const CGridFn& f);

double holder_norm(const GridFn& f);
double holder_norm(const CGridFn& f);

double integrate(const GridFn& f, const GridMeasure& m);
cplx integrate(const CGridFn& f, const GridMeasure& m);

double min_value(const GridFn& f);
double max_value(const GridFn& f);

}  // namespace rdslab
