#pragma once

#include <functional>
#include <string>
#include <vector>

namespace rdslab {

enum class Regime { Maps1, Maps2 };
enum class BranchKind { Linear, PerturbedC2, MannevillePomeau, Custom };
enum class BranchClass { Expanding, Contracting };

const char* to_string(Regime r);
const char* to_string(BranchKind k);

/// C^2 bump on a branch interval, vanishing at both endpoints.
struct Bump {
  std::function<double(double)> f, df, d2f;
  double c2norm = 0.0;  // sup|b| + sup|b'| + sup|b''|

  /// b(y) = A t(1-t), t = (y-left)/(right-left).
  static Bump quadratic(double amplitude, double left, double right);
  /// Amplitude giving a quadratic bump of C^2 norm equal to `norm`.
  static double quadratic_amplitude(double norm, double left, double right);
};

/**
 * @brief One increasing branch of a full-branch map.
 *
 * Maps [left, right) onto [0,1). The value at the left endpoint belongs to this
 * branch; the right endpoint is never evaluated.
 */
struct Branch {
  double left = 0.0;
  double right = 1.0;
  BranchKind kind = BranchKind::Linear;
  BranchClass cls = BranchClass::Expanding;
  double beta = 0.0;                                // Manneville-Pomeau exponent
  Bump bump;                                        // PerturbedC2 only
  std::function<double(double)> custom_f, custom_df;  // Custom only

  double apply(double y) const;
  double deriv(double y) const;
  /// Preimage of x in this branch; |T(y)-x| <= 1e-12.
  double inverse(double x) const;
};

class MapFiber {
 public:
  MapFiber() = default;
  MapFiber(std::vector<Branch> branches, Regime regime, double gamma, std::string label);

  int degree() const { return static_cast<int>(branches_.size()); }
  const Branch& branch(int i) const { return branches_[i]; }
  const std::vector<Branch>& branches() const { return branches_; }
  Regime regime() const { return regime_; }
  const std::string& label() const { return label_; }

  /// Reported minimal expansion (Maps1); for perturbed fibers gamma(l) - eps.
  double gamma() const { return gamma_; }
  double base_gamma() const { return base_gamma_; }
  double budget() const { return budget_; }

  int branch_index(double x) const;
  double apply(double x) const;
  double deriv(double x) const;
  double inverse(int i, double x) const { return branches_[i].inverse(x); }
  std::vector<double> inverse_branches(double x) const;

  /// True when every branch is affine (closed-form inverses, constant slopes).
  bool affine() const;

 private:
  friend MapFiber perturb_c2(const MapFiber&, double, const std::vector<Bump>&);
  std::vector<Branch> branches_;
  Regime regime_ = Regime::Maps1;
  double gamma_ = 1.0;
  double base_gamma_ = 1.0;
  double budget_ = 0.0;
  std::string label_;
};

MapFiber make_piecewise_linear(double a);
MapFiber make_general_piecewise_linear(const std::vector<double>& breakpoints);
/// Perturbation budget eps = 1/2 min((gn-1) g^2 / 4, gn - 1, g - 1).
double perturbation_budget(double gamma_l, double next_gamma_l);
MapFiber perturb_c2(const MapFiber& base, double next_gamma, const std::vector<Bump>& bumps);
MapFiber make_manneville_pomeau(double beta);
/// Increasing onto branches given by callables (value and derivative) on a partition.
MapFiber make_custom(const std::vector<double>& breakpoints, std::vector<std::function<double(double)>> f,
                     std::vector<std::function<double(double)>> df, std::vector<BranchClass> cls, Regime regime);

// ============================================================================
// Potentials and fiber parameters
// ============================================================================

enum class PotentialKind { Zero, Smooth, Scaled };

struct Potential {
  PotentialKind kind = PotentialKind::Zero;
  double temperature = 1.0;  // Scaled: phi = -ln|T'| / temperature

  double operator()(const MapFiber& fiber, double y) const;
  double at_branch(const Branch& b, double y) const;
};

const char* to_string(PotentialKind k);

struct FiberParams {
  Regime regime = Regime::Maps1;
  double alpha = 1.0;
  double gamma = 1.0;       // minimal expansion
  double H = 0.0;           // Hoelder constant of phi along inverse branches
  double osc = 0.0;         // eps_omega = osc(phi)
  double phi_sup = 0.0;     // ||phi||_inf
  int deg = 0;
  int q = 0;                // contracting branches
  double l = 1.0;           // Lipschitz constant of contracting inverse branches
  double sigma = 1.0;       // minimal expansion on expanding branches
  double forward_lip = 0.0; // sup T' on contracting branches (diagnostic)
  double a = 1.0;           // (q l^alpha + (d-q) sigma^-alpha) / d
  double s = 1.0;           // e^eps a
  double kappa = 1.0;       // 1/s
  double Dsum = 0.0;        // sup sum_i e^{phi(y_i)}
  double Nmax = 0.0;        // sup |T'|
};

FiberParams fiber_params(const MapFiber& fiber, const Potential& potential, double alpha, int grid);

struct ValidationReport {
  bool maps1_H = true;
  double maps1_H_margin = 0.0;   // gamma_next^alpha - 1 - H
  bool maps1_tilde_H = true;
  double maps1_tilde_H_margin = 0.0;
  bool maps2_s = true;
  double maps2_s_margin = 0.0;   // 1 - s
  bool maps2_bound = true;
  double maps2_bound_margin = 0.0;
  bool ok() const { return maps1_H && maps1_tilde_H && maps2_s && maps2_bound; }
  std::string first_failure() const;
};

ValidationReport validate_conditions(const FiberParams& p, const FiberParams& next, double u_variation);

}  // namespace rdslab
