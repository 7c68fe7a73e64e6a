#include "rdslab/runner.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

#include "rdslab/cones.hpp"
#include "rdslab/cplx.hpp"
#include "rdslab/rpf.hpp"
#include "rdslab/stats.hpp"

namespace rdslab {

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string num(long v) { return std::to_string(v); }
std::string num(int v) { return std::to_string(v); }

class Table {
 public:
  explicit Table(std::vector<std::string> header) : header_(std::move(header)) {}

  void add(std::vector<std::string> cells, bool pass) {
    cells.push_back(pass ? "1" : "0");
    if (!pass) {
      ++failures_;
      if (first_failure_.empty()) {
        for (std::size_t i = 0; i < cells.size() - 1; ++i)
          first_failure_ += (i ? ", " : "") + header_[i] + "=" + cells[i];
      }
    }
    rows_.push_back(std::move(cells));
  }

  int failures() const { return failures_; }
  std::size_t size() const { return rows_.size(); }
  const std::string& first_failure() const { return first_failure_; }

  std::string csv(const ExperimentConfig& c) const {
    std::ostringstream os;
    for (std::size_t i = 0; i < header_.size(); ++i) os << header_[i] << ',';
    os << "pass\n";
    for (const auto& r : rows_) {
      for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
      os << '\n';
    }
    char foot[96];
    std::snprintf(foot, sizeof foot, "# config_hash=%016" PRIx64 " seed=%" PRIu64 "\n", c.hash, c.seed);
    os << foot;
    return os.str();
  }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
  int failures_ = 0;
  std::string first_failure_;
};

struct Output {
  Table table;
  std::vector<std::string> notes;  // summary lines
  std::vector<std::pair<std::string, Table>> extra;
};

constexpr int kDepthCap = 200;

int horizon_for(const ExperimentConfig& c, long span) {
  return static_cast<int>(std::abs(c.run.start) + span + 2 * kDepthCap + 16);
}

std::vector<int> ladder_or_n(const RunParams& p) {
  std::vector<int> l = p.ladder.empty() ? std::vector<int>{p.n} : p.ladder;
  std::sort(l.begin(), l.end());
  l.erase(std::unique(l.begin(), l.end()), l.end());
  return l;
}

std::uint64_t stream_seed(const ExperimentConfig& c, const std::string& sub) {
  return CounterRng(c.seed).split(fnv1a64(sub)).key();
}

void require_observable(const ExperimentConfig& c, const std::string& sub) {
  if (c.observable.empty()) throw ConfigError("model.observable", "required by '" + sub + "'");
}

// ---------------------------------------------------------------------------

Output do_rates(const ExperimentConfig& c) {
  const RunParams& p = c.run;
  const Cocycle cc = c.cocycle(horizon_for(c, p.n + 2));
  Output o{Table({"j", "quantity", "value"}), {}, {}};
  RPFTriplet t;
  if (cc.has_observable()) t = build_triplet(cc, p.start, p.n, p.depth);
  for (long j = p.start; j < p.start + p.n; ++j) {
    ObservableNorms u;
    if (cc.has_observable()) u = ObservableNorms::of(centered_observable(cc, t, j));
    const EffectiveRates r = cc.rates(j, cc.has_observable() ? &u : nullptr);
    std::vector<std::pair<std::string, double>> q = {{"q", r.q},   {"D", r.D},   {"rho", r.rho}, {"B", r.B},
                                                     {"B1", r.B1}, {"K", r.K},   {"M", r.M},     {"rho_tilde", r.rho_tilde}};
    if (r.regime == Regime::Maps2) q.push_back({"zeta", r.zeta});
    // Alternative q for the linear family, reported next to the table value.
    if (c.family_kind == "linear") q.push_back({"q_remark", 1.0 / (cc.fiber(j)->gamma() * cc.fiber(j + 1)->gamma())});
    if (r.has_u) {
      q.insert(q.end(), {{"H_tilde", r.H_tilde}, {"c0", r.c0}, {"E", r.E}, {"Dbar", r.Dbar},
                         {"r0", complex_rates(r).r0}});
    }
    for (const auto& [name, v] : q) o.table.add({num(j), name, num(v)}, std::isfinite(v));
  }
  o.notes.push_back("regime: " + std::string(to_string(cc.fiber(p.start)->regime())));
  return o;
}

Output do_cone_verify(const ExperimentConfig& c) {
  const RunParams& p = c.run;
  const Cocycle cc = c.cocycle(horizon_for(c, p.n + 2));
  Output o{Table({"j", "check", "value", "bound"}), {}, {}};
  const CounterRng master(stream_seed(c, "cone-verify"));
  for (long j = p.start; j < p.start + p.n; ++j) {
    const ConeSpec in = cone_for(cc.params(j)), out = cone_for(cc.params(j + 1));
    const EffectiveRates r = cc.rates(j);
    CounterRng rng = master.split(static_cast<std::uint64_t>(j - p.start));
    const FiberContext ctx = cc.context(j);
    const InvarianceReport inv = verify_invariance(ctx, in, out, p.samples, rng);
    const ContractionReport con = verify_contraction_and_diameter(ctx, in, out, r, p.samples, c.slack, rng);
    o.table.add({num(j), "invariance_failures", num(inv.failures), "0"}, inv.pass());
    o.table.add({num(j), "diameter", num(con.diameter), num(r.D * (1.0 + c.slack))}, con.diameter_pass);
    o.table.add({num(j), "contraction", num(con.max_ratio), num(r.rho + c.slack)}, con.ratio_pass_additive);
  }
  return o;
}

Output do_rpf_verify(const ExperimentConfig& c) {
  const RunParams& p = c.run;
  const Cocycle cc = c.cocycle(horizon_for(c, p.n + 2));
  const RPFTriplet t = build_triplet(cc, p.start, p.n + 1, p.depth);
  CounterRng rng(stream_seed(c, "rpf-verify"));
  std::vector<GridFn> gs, fs;
  for (int s = 0; s < p.samples; ++s) {
    gs.push_back(random_holder(c.N, c.alpha, rng));
    fs.push_back(random_holder(c.N, c.alpha, rng));
  }
  const Certificate cert = verify_rpf(cc, t, gs, fs, p.n, c.slack);
  Output o{Table({"check", "n", "sample", "lhs", "rhs"}), {}, {}};
  for (const CertificateRow& r : cert.rows)
    o.table.add({r.check, num(r.n), num(r.sample), num(r.lhs), num(r.rhs)}, r.pass);
  Table h({"x", "value"});
  const GridFn& h0 = t.h_at(p.start);
  for (int k = 0; k <= c.N; ++k) h.add({num(static_cast<double>(k) / c.N), num(h0[k])}, true);
  o.extra.emplace_back("rpf-verify_h", std::move(h));
  o.notes.push_back("back depth: " + std::to_string(t.back_depth) + (t.depth_capped ? " (capped)" : ""));
  o.notes.push_back("triplet residual: " + num(t.residual));
  return o;
}

TrajectoryBatch sample_batch(const ExperimentConfig& c, const Cocycle& cc, const RPFTriplet& t, const std::string& sub,
                             int n, const std::vector<int>& ladder) {
  return birkhoff_batch(cc, t, c.run.start, n, c.run.trials, stream_seed(c, sub), ladder, c.threads);
}

const std::vector<std::string> kStatHeader = {"n", "statistic", "value", "lo", "hi"};

Output do_clt(const ExperimentConfig& c) {
  const RunParams& p = c.run;
  if (p.n < 4) throw ConfigError("run.n", "clt needs n >= 4");
  const int m = p.n / 4;
  require_observable(c, "clt");
  const Cocycle cc = c.cocycle(horizon_for(c, p.n + 2));
  const RPFTriplet t = build_triplet(cc, p.start, p.n, p.depth);
  const TrajectoryBatch batch = sample_batch(c, cc, t, "clt", p.n, {m, 4 * m});
  const double sigma2 = sum_variance(cc, t, p.start, p.n) / p.n;
  const Degeneracy deg = detect_degeneracy(batch, m);
  const CltResult r = clt_check(batch, sigma2, &deg);
  Output o{Table(kStatHeader), {}, {}};
  o.table.add({num(p.n), "sigma2", num(sigma2), "0", "inf"}, sigma2 > 0.0);
  o.table.add({num(p.n), "degeneracy_ratio", num(deg.ratio), "0", "3"}, !deg.degenerate);
  o.table.add({num(p.n), "ks", num(r.ks), "0", "0.02"}, r.pass);
  o.notes.push_back(std::string("degenerate: ") + (deg.degenerate ? "yes" : "no"));
  return o;
}

Output do_be(const ExperimentConfig& c) {
  const RunParams& p = c.run;
  const std::vector<int> ladder = ladder_or_n(p);
  require_observable(c, "be");
  const Cocycle cc = c.cocycle(horizon_for(c, ladder.back() + 2));
  const RPFTriplet t = build_triplet(cc, p.start, ladder.back(), p.depth);
  const TrajectoryBatch batch = sample_batch(c, cc, t, "be", ladder.back(), ladder);
  std::vector<double> sig;
  for (int n : ladder) sig.push_back(std::sqrt(sum_variance(cc, t, p.start, n)));
  const BeCurve curve = berry_esseen_curve(batch, ladder, sig);
  Output o{Table(kStatHeader), {}, {}};
  for (const CurvePoint& q : curve.points)
    o.table.add({num(q.n), q.censored ? "sup_cdf_censored" : "sup_cdf", num(q.value), num(curve.noise_floor), "1"},
                true);
  o.table.add({num(ladder.back()), "loglog_slope", num(curve.slope), "-0.65", "-0.35"}, curve.pass());
  return o;
}

Output do_lclt(const ExperimentConfig& c) {
  const RunParams& p = c.run;
  const std::vector<int> ladder = ladder_or_n(p);
  require_observable(c, "lclt");
  const Cocycle cc = c.cocycle(horizon_for(c, ladder.back() + 2));
  const RPFTriplet t = build_triplet(cc, p.start, ladder.back(), p.depth);
  const TrajectoryBatch batch = sample_batch(c, cc, t, "lclt", ladder.back(), ladder);
  Output o{Table(kStatHeader), {}, {}};
  std::vector<double> gaps;
  for (int n : ladder) {
    const double sigma_n = std::sqrt(sum_variance(cc, t, p.start, n));
    const double a_n = std::pow(static_cast<double>(n), p.a_exponent);
    const double kappa = sigma_n / a_n;
    std::vector<double> v;
    for (int k = -40; k <= 40; ++k) v.push_back(3.0 * kappa * k / 40.0);
    const std::vector<double>& sums = n == batch.n ? batch.sums : batch.prefix.at(n);
    const LcltResult r = lclt_window(sums, sigma_n, a_n, p.window_lo, p.window_hi, v);
    gaps.push_back(r.gap);
    o.table.add({num(n), r.censored ? "gap_censored" : "gap", num(r.gap), "0", "inf"}, true);
  }
  const int inv = inversions(gaps);
  o.table.add({num(ladder.back()), "inversions", num(inv), "0", "1"}, inv <= 1);
  return o;
}

Output do_mdp(const ExperimentConfig& c) {
  require_observable(c, "mdp");
  const RunParams& p = c.run;
  const std::vector<int> ladder = ladder_or_n(p);
  const Cocycle cc = c.cocycle(horizon_for(c, ladder.back() + 2));
  const RPFTriplet t = build_triplet(cc, p.start, ladder.back(), p.depth);
  Output o{Table({"n", "a_n", "x", "rate", "target", "ratio", "rel_error"}), {}, {}};
  for (int n : ladder) {
    const double sigma2 = sum_variance(cc, t, p.start, n) / n;
    const double a_n = std::pow(static_cast<double>(n), p.mdp_exponent);
    const MdpPoint q = mdp_point(cc, t, p.start, n, a_n, p.x, sigma2, p.trials,
                                 stream_seed(c, "mdp") ^ static_cast<std::uint64_t>(n), c.threads);
    o.table.add({num(n), num(a_n), num(p.x), num(q.rate), num(q.target), num(q.ratio), num(q.rel_error)},
                !q.censored && std::abs(q.ratio - 1.0) <= 0.25);
  }
  return o;
}

Output do_pressure(const ExperimentConfig& c) {
  require_observable(c, "pressure");
  const RunParams& p = c.run;
  const std::vector<int> ladder = ladder_or_n(p);
  const Cocycle cc = c.cocycle(horizon_for(c, ladder.back() + 2));
  const RPFTriplet t = build_triplet(cc, p.start, ladder.back(), p.depth);
  Output o{Table({"n", "r_n", "d1", "d2", "sigma2_n"}), {}, {}};
  for (int n : ladder) {
    const double var = sum_variance(cc, t, p.start, n);
    const PressureWindow w = pressure_window(cc, t, p.start, n, p.p, var, p.nodes);
    o.table.add({num(n), num(w.radius), num(w.d1.real()), num(w.d2.real()), num(var)}, w.pass);
  }
  return o;
}

Output do_mixing(const ExperimentConfig& c) {
  Output o{Table({"k", "value", "bound"}), {}, {}};
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= c.run.k_max; ++k) {
    const double v = psi_upper_mixing(c.driver, k);
    o.table.add({num(k), num(v), num(prev)}, v <= prev + 1e-12);
    prev = v;
  }
  return o;
}

Output do_tails(const ExperimentConfig& c) {
  const ParamField f = c.field();
  Output o{Table({"j", "value", "bound"}), {}, {}};
  o.notes.push_back("P(A) = " + num(set_probability(c.driver, f, c.run.threshold)));
  for (long j : c.run.js) {
    const TailReport r = tail_bound_check(c.driver, f, c.run.threshold, j, c.run.trials,
                                          stream_seed(c, "tails") ^ static_cast<std::uint64_t>(j));
    o.table.add({num(j), num(r.empirical), num(r.bound + 3.0 * r.sigma)}, r.pass);
  }
  return o;
}

const std::map<std::string, std::function<Output(const ExperimentConfig&)>>& table() {
  static const std::map<std::string, std::function<Output(const ExperimentConfig&)>> t = {
      {"rates", do_rates},     {"cone-verify", do_cone_verify}, {"rpf-verify", do_rpf_verify},
      {"clt", do_clt},         {"be", do_be},                   {"lclt", do_lclt},
      {"mdp", do_mdp},         {"pressure", do_pressure},       {"mixing", do_mixing},
      {"tails", do_tails},
  };
  return t;
}

void write_file(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << body;
}

}  // namespace

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names = {"rates", "cone-verify", "rpf-verify", "clt",    "be",
                                                 "lclt",  "mdp",         "pressure",   "mixing", "tails"};
  return names;
}

RunResult run(const ExperimentConfig& config, const std::string& subcommand) {
  RunResult res;
  auto it = table().find(subcommand);
  if (it == table().end()) {
    res.status = kExitConfig;
    res.message = "unknown subcommand '" + subcommand + "'";
    return res;
  }
  Output o{Table({}), {}, {}};
  try {
    o = it->second(config);
  } catch (const ConfigError& e) {
    res.status = kExitConfig;
    res.message = e.what();
    return res;
  } catch (const std::exception& e) {
    res.status = kExitRuntime;
    res.message = subcommand + ": " + e.what();
    return res;
  }

  const std::filesystem::path dir(config.out);
  std::filesystem::create_directories(dir);
  const auto csv = dir / (subcommand + ".csv");
  write_file(csv, o.table.csv(config));
  res.files.push_back(csv.string());
  for (const auto& [name, t] : o.extra) {
    const auto p = dir / (name + ".csv");
    write_file(p, t.csv(config));
    res.files.push_back(p.string());
  }

  if (o.table.failures() > 0) {
    res.status = kExitFailed;
    res.message = subcommand + ": first failing check: " + o.table.first_failure();
  }
  std::ostringstream sum;
  char hash[24];
  std::snprintf(hash, sizeof hash, "%016" PRIx64, config.hash);
  sum << "subcommand: " << subcommand << "\n"
      << "config hash: " << hash << "\n"
      << "seed: " << config.seed << "\n"
      << "rows: " << o.table.size() << "\n"
      << "failures: " << o.table.failures() << "\n";
  for (const auto& n : o.notes) sum << n << "\n";
  sum << "status: " << (res.status == kExitOk ? "PASS" : "FAIL") << "\n";
  if (!res.message.empty()) sum << res.message << "\n";
  const auto txt = dir / (subcommand + "_summary.txt");
  write_file(txt, sum.str());
  res.files.push_back(txt.string());
  return res;
}

}  // namespace rdslab
