#include "rdslab/maps.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "rdslab/fnspace.hpp"

namespace rdslab {

const char* to_string(Regime r) { return r == Regime::Maps1 ? "maps1" : "maps2"; }

const char* to_string(BranchKind k) {
  switch (k) {
    case BranchKind::Linear: return "linear";
    case BranchKind::PerturbedC2: return "perturbed-c2";
    case BranchKind::MannevillePomeau: return "manneville-pomeau";
    case BranchKind::Custom: return "custom";
  }
  return "?";
}

const char* to_string(PotentialKind k) {
  switch (k) {
    case PotentialKind::Zero: return "zero";
    case PotentialKind::Smooth: return "smooth";
    case PotentialKind::Scaled: return "scaled";
  }
  return "?";
}

// ============================================================================
// Bumps and branches
// ============================================================================

Bump Bump::quadratic(double A, double left, double right) {
  const double L = right - left;
  Bump b;
  b.f = [=](double y) {
    const double t = (y - left) / L;
    return A * t * (1.0 - t);
  };
  b.df = [=](double y) { return A * (1.0 - 2.0 * (y - left) / L) / L; };
  b.d2f = [=](double) { return -2.0 * A / (L * L); };
  b.c2norm = std::abs(A) * (0.25 + 1.0 / L + 2.0 / (L * L));
  return b;
}

double Bump::quadratic_amplitude(double norm, double left, double right) {
  const double L = right - left;
  return norm / (0.25 + 1.0 / L + 2.0 / (L * L));
}

double Branch::apply(double y) const {
  const double L = right - left;
  switch (kind) {
    case BranchKind::Linear: return (y - left) / L;
    case BranchKind::PerturbedC2: return (y - left) / L + bump.f(y);
    case BranchKind::MannevillePomeau: return y * (1.0 + std::pow(2.0 * y, beta));
    case BranchKind::Custom: return custom_f(y);
  }
  return 0.0;
}

double Branch::deriv(double y) const {
  const double L = right - left;
  switch (kind) {
    case BranchKind::Linear: return 1.0 / L;
    case BranchKind::PerturbedC2: return 1.0 / L + bump.df(y);
    case BranchKind::MannevillePomeau: return 1.0 + (1.0 + beta) * std::pow(2.0 * y, beta);
    case BranchKind::Custom: return custom_df(y);
  }
  return 0.0;
}

double Branch::inverse(double x) const {
  if (kind == BranchKind::Linear) return left + x * (right - left);
  double lo = left, hi = right;
  double y = left + x * (right - left);
  for (int it = 0; it < 200; ++it) {
    const double fy = apply(y) - x;
    if (std::abs(fy) <= 1e-13) return y;
    if (fy > 0.0)
      hi = y;
    else
      lo = y;
    const double d = deriv(y);
    double next = y - fy / d;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == y || hi - lo <= 4 * std::numeric_limits<double>::epsilon() * std::max(1.0, hi)) {
      if (std::abs(apply(next) - x) <= 1e-12) return next;
      break;
    }
    y = next;
  }
  if (std::abs(apply(y) - x) <= 1e-12) return y;
  std::ostringstream os;
  os << "inverse branch root-finder failed on branch [" << left << "," << right << ") at x=" << x;
  throw std::runtime_error(os.str());
}

// ============================================================================
// MapFiber
// ============================================================================

MapFiber::MapFiber(std::vector<Branch> branches, Regime regime, double gamma, std::string label)
    : branches_(std::move(branches)), regime_(regime), gamma_(gamma), base_gamma_(gamma), label_(std::move(label)) {
  if (branches_.empty()) throw std::invalid_argument("MapFiber: no branches");
  double c = 0.0;
  for (const Branch& b : branches_) {
    if (std::abs(b.left - c) > 1e-15 || !(b.right > b.left))
      throw std::invalid_argument("MapFiber: branch intervals must partition [0,1)");
    c = b.right;
    if (std::abs(b.apply(b.left)) > 1e-10) throw std::invalid_argument("MapFiber: branch does not start at 0");
    const double yr = b.right - 1e-13 * (b.right - b.left);
    if (std::abs(b.apply(yr) - 1.0) > 1e-10) throw std::invalid_argument("MapFiber: branch is not onto [0,1)");
  }
  if (std::abs(c - 1.0) > 1e-15) throw std::invalid_argument("MapFiber: branches do not cover [0,1)");
}

int MapFiber::branch_index(double x) const {
  int i = 0;
  while (i + 1 < degree() && x >= branches_[i + 1].left) ++i;
  return i;
}

double MapFiber::apply(double x) const {
  const double y = branches_[branch_index(x)].apply(x);
  return y < 1.0 ? y : std::nextafter(1.0, 0.0);
}

double MapFiber::deriv(double x) const { return branches_[branch_index(x)].deriv(x); }

std::vector<double> MapFiber::inverse_branches(double x) const {
  std::vector<double> out(branches_.size());
  for (std::size_t i = 0; i < branches_.size(); ++i) out[i] = branches_[i].inverse(x);
  return out;
}

bool MapFiber::affine() const {
  return std::all_of(branches_.begin(), branches_.end(), [](const Branch& b) { return b.kind == BranchKind::Linear; });
}

MapFiber make_piecewise_linear(double a) {
  if (!(a >= 0.5 && a < 1.0)) throw std::domain_error("make_piecewise_linear: a must lie in [1/2, 1)");
  Branch b0, b1;
  b0.left = 0.0;
  b0.right = a;
  b1.left = a;
  b1.right = 1.0;
  std::ostringstream os;
  os << "linear(a=" << a << ")";
  return MapFiber({b0, b1}, Regime::Maps1, 1.0 / a, os.str());
}

MapFiber make_general_piecewise_linear(const std::vector<double>& bp) {
  if (bp.empty()) throw std::domain_error("make_general_piecewise_linear: at least one breakpoint required");
  std::vector<Branch> br;
  double c = 0.0, longest = 0.0;
  for (std::size_t i = 0; i <= bp.size(); ++i) {
    const double r = i < bp.size() ? bp[i] : 1.0;
    if (!(r > c) || r > 1.0) throw std::domain_error("make_general_piecewise_linear: breakpoints must increase in (0,1)");
    Branch b;
    b.left = c;
    b.right = r;
    br.push_back(b);
    longest = std::max(longest, r - c);
    c = r;
  }
  std::ostringstream os;
  os << "linear(" << br.size() << " branches)";
  return MapFiber(std::move(br), Regime::Maps1, 1.0 / longest, os.str());
}

double perturbation_budget(double g, double gn) {
  return 0.5 * std::min({0.25 * (gn - 1.0) * g * g, gn - 1.0, g - 1.0});
}

MapFiber perturb_c2(const MapFiber& base, double next_gamma, const std::vector<Bump>& bumps) {
  if (!base.affine()) throw std::invalid_argument("perturb_c2: base must be piecewise linear");
  if (static_cast<int>(bumps.size()) != base.degree()) throw std::invalid_argument("perturb_c2: one bump per branch");
  const double g = base.gamma();
  const double eps = perturbation_budget(g, next_gamma);
  std::vector<Branch> br = base.branches();
  for (int i = 0; i < base.degree(); ++i) {
    const Bump& b = bumps[i];
    if (!b.f) continue;
    if (b.c2norm > eps) {
      std::ostringstream os;
      os << "perturb_c2: bump " << i << " has C2 norm " << b.c2norm << " above the budget " << eps;
      throw std::domain_error(os.str());
    }
    if (std::abs(b.f(br[i].left)) > 1e-12 || std::abs(b.f(br[i].right)) > 1e-12)
      throw std::domain_error("perturb_c2: bump must vanish at the branch endpoints");
    br[i].kind = BranchKind::PerturbedC2;
    br[i].bump = b;
    for (int k = 0; k <= 1024; ++k) {
      const double y = br[i].left + (br[i].right - br[i].left) * k / 1024.0;
      if (!(br[i].deriv(y) > 0.0)) throw std::domain_error("perturb_c2: perturbed branch is not monotone");
    }
  }
  MapFiber out(std::move(br), Regime::Maps1, g - eps, base.label() + "+c2");
  out.base_gamma_ = g;
  out.budget_ = eps;
  return out;
}

MapFiber make_manneville_pomeau(double beta) {
  if (!(beta > 0.0 && beta < 1.0)) throw std::domain_error("make_manneville_pomeau: beta must lie in (0,1)");
  Branch b0, b1;
  b0.left = 0.0;
  b0.right = 0.5;
  b0.kind = BranchKind::MannevillePomeau;
  b0.cls = BranchClass::Contracting;
  b0.beta = beta;
  b1.left = 0.5;
  b1.right = 1.0;
  std::ostringstream os;
  os << "mp(beta=" << beta << ")";
  return MapFiber({b0, b1}, Regime::Maps2, 1.0, os.str());
}

MapFiber make_custom(const std::vector<double>& bp, std::vector<std::function<double(double)>> f,
                     std::vector<std::function<double(double)>> df, std::vector<BranchClass> cls, Regime regime) {
  const std::size_t d = bp.size() + 1;
  if (f.size() != d || df.size() != d || cls.size() != d) throw std::invalid_argument("make_custom: size mismatch");
  std::vector<Branch> br;
  double c = 0.0, gam = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < d; ++i) {
    Branch b;
    b.left = c;
    b.right = i < bp.size() ? bp[i] : 1.0;
    b.kind = BranchKind::Custom;
    b.cls = cls[i];
    b.custom_f = std::move(f[i]);
    b.custom_df = std::move(df[i]);
    for (int k = 0; k < 1024; ++k) gam = std::min(gam, b.custom_df(b.left + (b.right - b.left) * k / 1024.0));
    br.push_back(std::move(b));
    c = br.back().right;
  }
  return MapFiber(std::move(br), regime, gam, "custom");
}

// ============================================================================
// Potentials and parameters
// ============================================================================

double Potential::at_branch(const Branch& b, double y) const {
  switch (kind) {
    case PotentialKind::Zero: return 0.0;
    case PotentialKind::Smooth: return -std::log(std::abs(b.deriv(y)));
    case PotentialKind::Scaled: return -std::log(std::abs(b.deriv(y))) / temperature;
  }
  return 0.0;
}

double Potential::operator()(const MapFiber& fiber, double y) const {
  return at_branch(fiber.branch(fiber.branch_index(y)), y);
}

FiberParams fiber_params(const MapFiber& fiber, const Potential& pot, double alpha, int grid) {
  if (grid < 64) throw std::invalid_argument("fiber_params: grid must be at least 64");
  FiberParams p;
  p.regime = fiber.regime();
  p.alpha = alpha;
  p.gamma = fiber.gamma();
  p.deg = fiber.degree();
  const int d = fiber.degree();
  std::vector<std::vector<double>> y(d, std::vector<double>(grid)), phi(d, std::vector<double>(grid));
  for (int i = 0; i < d; ++i)
    for (int k = 0; k < grid; ++k) {
      y[i][k] = fiber.branch(i).inverse(static_cast<double>(k) / grid);
      phi[i][k] = pot.at_branch(fiber.branch(i), y[i][k]);
    }
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (int i = 0; i < d; ++i)
    for (int k = 0; k < grid; ++k) {
      lo = std::min(lo, phi[i][k]);
      hi = std::max(hi, phi[i][k]);
    }
  p.osc = hi - lo;
  p.phi_sup = std::max(std::abs(lo), std::abs(hi));
  for (int i = 0; i < d; ++i) {
    GridFn f(phi[i], alpha);
    p.H = std::max(p.H, holder_seminorm(f));
  }
  for (int k = 0; k < grid; ++k) {
    double s = 0.0;
    for (int i = 0; i < d; ++i) s += std::exp(phi[i][k]);
    p.Dsum = std::max(p.Dsum, s);
  }
  p.sigma = std::numeric_limits<double>::infinity();
  p.l = 0.0;
  p.q = 0;
  for (int i = 0; i < d; ++i) {
    const Branch& b = fiber.branch(i);
    double inf_d = std::numeric_limits<double>::infinity(), sup_d = 0.0;
    for (int k = 0; k <= 4 * grid; ++k) {
      const double t = static_cast<double>(k) / (4 * grid);
      const double yy = b.left + (b.right - b.left) * std::min(t, 1.0 - 1e-12);
      const double dv = std::abs(b.deriv(yy));
      inf_d = std::min(inf_d, dv);
      sup_d = std::max(sup_d, dv);
    }
    p.Nmax = std::max(p.Nmax, sup_d);
    if (b.cls == BranchClass::Contracting) {
      ++p.q;
      p.l = std::max(p.l, 1.0 / inf_d);
      p.forward_lip = std::max(p.forward_lip, sup_d);
    } else {
      p.sigma = std::min(p.sigma, inf_d);
    }
  }
  if (p.q == d) p.sigma = 1.0;
  p.a = (p.q * std::pow(p.l, alpha) + (d - p.q) * std::pow(p.sigma, -alpha)) / d;
  p.s = std::exp(p.osc) * p.a;
  p.kappa = 1.0 / p.s;
  return p;
}

std::string ValidationReport::first_failure() const {
  std::ostringstream os;
  if (!maps1_H) os << "H_omega <= gamma_next^alpha - 1 fails (margin " << maps1_H_margin << ")";
  else if (!maps1_tilde_H) os << "gamma^-alpha v(u) + H <= gamma_next^alpha - 1 fails (margin " << maps1_tilde_H_margin << ")";
  else if (!maps2_s) os << "s_omega < 1 fails (margin " << maps2_s_margin << ")";
  else if (!maps2_bound) os << "e^eps H <= (1/s_next - 1)/(1 + 1/s) fails (margin " << maps2_bound_margin << ")";
  return os.str();
}

ValidationReport validate_conditions(const FiberParams& p, const FiberParams& next, double u_variation) {
  if (p.regime != next.regime || p.alpha != next.alpha)
    throw std::invalid_argument("validate_conditions: fibers must share regime and alpha");
  ValidationReport r;
  if (p.regime == Regime::Maps1) {
    const double cap = std::pow(next.gamma, p.alpha) - 1.0;
    r.maps1_H_margin = cap - p.H;
    r.maps1_H = r.maps1_H_margin >= 0.0;
    r.maps1_tilde_H_margin = cap - (std::pow(p.gamma, -p.alpha) * u_variation + p.H);
    r.maps1_tilde_H = r.maps1_tilde_H_margin >= 0.0;
  } else {
    r.maps2_s_margin = 1.0 - p.s;
    r.maps2_s = r.maps2_s_margin > 0.0;
    r.maps2_bound_margin = (1.0 / next.s - 1.0) / (1.0 + 1.0 / p.s) - std::exp(p.osc) * p.H;
    r.maps2_bound = r.maps2_bound_margin >= 0.0;
  }
  return r;
}

}  // namespace rdslab
