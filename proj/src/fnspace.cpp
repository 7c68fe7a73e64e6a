#include "rdslab/fnspace.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rdslab {

std::vector<std::pair<int, int>> stride_pairs(int N) {
  std::vector<std::pair<int, int>> out;
  for (int g = 1; g < N; g *= 2)
    for (int k = 0; k + g < N; ++k) out.emplace_back(k, k + g);
  return out;
}

CGridFn to_complex(const GridFn& f) {
  CGridFn c(f.size(), f.alpha());
  for (int k = 0; k < f.size(); ++k) c[k] = f[k];
  return c;
}

GridFn real_part(const CGridFn& f) {
  GridFn r(f.size(), f.alpha());
  for (int k = 0; k < f.size(); ++k) r[k] = f[k].real();
  return r;
}

GridMeasure::GridMeasure(std::vector<double> weights, bool normalize) : w_(std::move(weights)) {
  for (double w : w_)
    if (!(w >= 0.0)) throw std::invalid_argument("GridMeasure: negative or NaN weight");
  if (normalize) {
    const double s = std::accumulate(w_.begin(), w_.end(), 0.0);
    if (!(s > 0.0)) throw std::invalid_argument("GridMeasure: zero total mass");
    for (double& w : w_) w /= s;
  }
}

GridMeasure GridMeasure::lebesgue(int N) {
  std::vector<double> w(N);
  for (int k = 0; k < N; ++k) w[k] = hat_mass(k, N);
  return GridMeasure(std::move(w), false);
}

std::vector<double> GridMeasure::density() const {
  const int N = size();
  std::vector<double> d(N);
  for (int k = 0; k < N; ++k) d[k] = w_[k] / hat_mass(k, N);
  return d;
}

double GridMeasure::total_variation(const GridMeasure& o) const {
  double s = 0.0;
  for (int k = 0; k < size(); ++k) s += std::abs(w_[k] - o.w_[k]);
  return 0.5 * s;
}

namespace {

template <class T>
double seminorm_impl(const BasicGridFn<T>& f) {
  const int N = f.size();
  const double a = f.alpha();
  double best = 0.0;
  for (int g = 1; g < N; g *= 2) {
    const double inv = std::pow(static_cast<double>(g) / N, -a);
    for (int k = 0; k + g < N; ++k) best = std::max(best, std::abs(f[k + g] - f[k]) * inv);
  }
  return best;
}

template <class T>
double sup_impl(const BasicGridFn<T>& f) {
  double m = 0.0;
  for (int k = 0; k < f.size(); ++k) m = std::max(m, std::abs(f[k]));
  return m;
}

}  // namespace

double sup_norm(const GridFn& f) { return sup_impl(f); }
double sup_norm(const CGridFn& f) { return sup_impl(f); }
double holder_seminorm(const GridFn& f) { return seminorm_impl(f); }
double holder_seminorm(const CGridFn& f) { return seminorm_impl(f); }
double holder_norm(const GridFn& f) { return sup_impl(f) + seminorm_impl(f); }
double holder_norm(const CGridFn& f) { return sup_impl(f) + seminorm_impl(f); }

double integrate(const GridFn& f, const GridMeasure& m) {
  double s = 0.0;
  for (int k = 0; k < f.size(); ++k) s += m[k] * f[k];
  return s;
}

cplx integrate(const CGridFn& f, const GridMeasure& m) {
  cplx s = 0.0;
  for (int k = 0; k < f.size(); ++k) s += m[k] * f[k];
  return s;
}

double min_value(const GridFn& f) { return *std::min_element(f.values().begin(), f.values().end()); }
double max_value(const GridFn& f) { return *std::max_element(f.values().begin(), f.values().end()); }

}  // namespace rdslab
