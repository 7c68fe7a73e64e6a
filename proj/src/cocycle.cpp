#include "rdslab/cocycle.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace rdslab {

Family Family::linear(ParamField a) {
  Family f;
  f.kind = "linear";
  f.field = std::move(a);
  f.make = [](double p, double) { return make_piecewise_linear(p); };
  return f;
}

Family Family::manneville_pomeau(ParamField beta) {
  Family f;
  f.kind = "mp";
  f.field = std::move(beta);
  f.make = [](double p, double) { return make_manneville_pomeau(p); };
  return f;
}

Family Family::perturbed(ParamField a, double fraction) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw std::invalid_argument("Family::perturbed: fraction must lie in (0,1)");
  Family f;
  f.kind = "perturbed";
  f.field = std::move(a);
  f.uses_next = true;
  f.make = [fraction](double p, double p_next) {
    const MapFiber base = make_piecewise_linear(p);
    const double eps = perturbation_budget(base.gamma(), 1.0 / p_next);
    std::vector<Bump> bumps;
    for (const Branch& b : base.branches())
      bumps.push_back(Bump::quadratic(Bump::quadratic_amplitude(fraction * eps, b.left, b.right), b.left, b.right));
    return perturb_c2(base, 1.0 / p_next, bumps);
  };
  return f;
}

Family Family::general_linear(std::vector<std::vector<double>> breakpoints, ParamField index) {
  if (breakpoints.empty()) throw std::invalid_argument("Family::general_linear: no breakpoint sets");
  Family f;
  f.kind = "general-linear";
  f.field = std::move(index);
  f.make = [bps = std::move(breakpoints)](double p, double) {
    const long i = std::lround(p);
    if (i < 0 || i >= static_cast<long>(bps.size()))
      throw std::out_of_range("Family::general_linear: index outside the breakpoint table");
    return make_general_piecewise_linear(bps[i]);
  };
  return f;
}

Cocycle::Cocycle(EnvPath path, Family family, Potential potential, int N, double alpha, Observable u)
    : path_(std::move(path)), family_(std::move(family)), potential_(potential), N_(N), alpha_(alpha), u_(std::move(u)) {
  if (!family_.make || !family_.field.evaluator) throw std::invalid_argument("Cocycle: incomplete family");
  if (!valid_grid_size(N)) throw std::invalid_argument("Cocycle: N must be a power of two >= 64");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("Cocycle: alpha must lie in (0,1]");
}

long Cocycle::lowest() const { return path_.lowest() + family_.field.radius; }

// One extra fiber is reserved so that rates(j) and uses_next families see j+1.
long Cocycle::highest() const { return path_.highest() - family_.field.radius - 1 - (family_.uses_next ? 1 : 0); }

double Cocycle::parameter(long j) const { return family_.field(path_, j); }

Cocycle::Key Cocycle::key(long j) const {
  return {parameter(j), family_.uses_next ? parameter(j + 1) : 0.0};
}

std::shared_ptr<const FiberCache> Cocycle::cache(long j) const {
  const Key k = key(j);
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = caches_.find(k);
    if (it != caches_.end()) return it->second;
  }
  auto fib = std::make_shared<const MapFiber>(family_.make(k.first, k.second));
  auto c = std::make_shared<const FiberCache>(fib, potential_, N_, alpha_, u_);
  std::lock_guard<std::mutex> lock(mu_);
  return caches_.emplace(k, std::move(c)).first->second;
}

std::shared_ptr<const MapFiber> Cocycle::fiber(long j) const { return cache(j)->fiber_ptr(); }

FiberContext Cocycle::context(long j, cplx z, double center) const { return FiberContext{cache(j), z, center}; }

CocycleWindow Cocycle::window(long from, int n) const {
  CocycleWindow w;
  w.reserve(n);
  for (int i = 0; i < n; ++i) w.push_back(context(from + i));
  return w;
}

const FiberParams& Cocycle::params(long j) const {
  const Key k = key(j);
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = params_.find(k);
    if (it != params_.end()) return *it->second;
  }
  auto p = std::make_unique<FiberParams>(fiber_params(*fiber(j), potential_, alpha_, N_));
  std::lock_guard<std::mutex> lock(mu_);
  return *params_.emplace(k, std::move(p)).first->second;
}

EffectiveRates Cocycle::rates(long j, const ObservableNorms* u) const {
  return effective_rates(params(j), params(j + 1), u);
}

Observable parse_observable(const std::string& spec) {
  const auto star = spec.find('*');
  if (star != std::string::npos) {
    std::istringstream is(spec.substr(0, star));
    double c = 0.0;
    if (!(is >> c) || !is.eof()) throw std::invalid_argument("observable: bad scale in '" + spec + "'");
    Observable inner = parse_observable(spec.substr(star + 1));
    return [c, inner](const MapFiber& f, double x) { return c * inner(f, x); };
  }
  const auto colon = spec.find(':');
  const std::string name = spec.substr(0, colon);
  double arg = 0.0;
  if (colon != std::string::npos) {
    std::istringstream is(spec.substr(colon + 1));
    if (!(is >> arg) || !is.eof()) throw std::invalid_argument("observable: bad argument in '" + spec + "'");
  }
  const bool has_arg = colon != std::string::npos;
  constexpr double pi = std::numbers::pi;
  if (name == "zero" && !has_arg) return [](const MapFiber&, double) { return 0.0; };
  if (name == "x" && !has_arg) return [](const MapFiber&, double x) { return x; };
  if (name == "x-1/2" && !has_arg) return [](const MapFiber&, double x) { return x - 0.5; };
  if (name == "power" && has_arg && arg > 0.0)
    return [arg](const MapFiber&, double x) { return std::pow(x, arg); };
  if (name == "cos" && has_arg) return [arg](const MapFiber&, double x) { return std::cos(2.0 * pi * arg * x); };
  if (name == "bump" && has_arg && arg > 0.0)
    return [arg](const MapFiber&, double x) { return std::max(0.0, 1.0 - x / arg); };
  if (name == "coboundary" && has_arg)
    return [arg](const MapFiber& f, double x) {
      return std::cos(2.0 * pi * arg * x) - std::cos(2.0 * pi * arg * f.apply(x));
    };
  throw std::invalid_argument("observable: unknown spec '" + spec + "'");
}

}  // namespace rdslab
