#include "rdslab/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "rdslab/fnspace.hpp"

namespace rdslab {

namespace pt = boost::property_tree;

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

const std::map<std::string, std::set<std::string>> kKeys = {
    {"driver", {"kind", "alphabet", "probs", "transition", "seed"}},
    {"family", {"kind", "field", "values", "radius", "set", "offset", "fraction", "breakpoints"}},
    {"model", {"potential", "temperature", "alpha", "N", "observable"}},
    {"run",
     {"seed", "out", "slack", "threads", "start", "n", "ladder", "trials", "samples", "depth", "a_exponent",
      "mdp_exponent", "x", "p", "nodes", "window_lo", "window_hi", "threshold", "js", "k_max"}},
};

class Reader {
 public:
  explicit Reader(const pt::ptree& tree) : tree_(tree) {}

  bool has(const std::string& key) const { return static_cast<bool>(tree_.get_optional<std::string>(key)); }

  std::string str(const std::string& key, const std::string& def) const {
    return tree_.get<std::string>(key, def);
  }

  std::string required(const std::string& key) const {
    auto v = tree_.get_optional<std::string>(key);
    if (!v || v->empty()) throw ConfigError(key, "missing");
    return *v;
  }

  template <class T>
  T num(const std::string& key, T def) const {
    if (!has(key)) return def;
    return parse<T>(key, tree_.get<std::string>(key));
  }

  template <class T>
  std::vector<T> list(const std::string& key, std::vector<T> def = {}) const {
    if (!has(key)) return def;
    return parse_list<T>(key, tree_.get<std::string>(key));
  }

  std::vector<std::vector<double>> rows(const std::string& key) const {
    std::vector<std::vector<double>> out;
    if (!has(key)) return out;
    std::stringstream ss(tree_.get<std::string>(key));
    std::string row;
    while (std::getline(ss, row, ';')) out.push_back(parse_list<double>(key, row));
    return out;
  }

 private:
  template <class T>
  static T parse(const std::string& key, const std::string& text) {
    std::istringstream is(text);
    T v{};
    if (!(is >> v)) throw ConfigError(key, "expected a number, got '" + text + "'");
    is >> std::ws;
    if (!is.eof()) throw ConfigError(key, "trailing characters in '" + text + "'");
    return v;
  }

  template <class T>
  static std::vector<T> parse_list(const std::string& key, std::string text) {
    for (char& c : text)
      if (c == ',') c = ' ';
    std::istringstream is(text);
    std::vector<T> out;
    std::string tok;
    while (is >> tok) out.push_back(parse<T>(key, tok));
    if (out.empty()) throw ConfigError(key, "empty list");
    return out;
  }

  const pt::ptree& tree_;
};

void check_keys(const pt::ptree& tree) {
  for (const auto& [section, body] : tree) {
    auto it = kKeys.find(section);
    if (!body.data().empty()) throw ConfigError(section, "unknown key (entries belong to a section)");
    if (it == kKeys.end()) throw ConfigError(section, "unknown section");
    for (const auto& [key, value] : body)
      if (!it->second.count(key)) throw ConfigError(section + "." + key, "unknown key");
  }
}

std::string canonical(const pt::ptree& tree) {
  std::string s;
  for (const auto& [section, body] : tree)
    for (const auto& [key, value] : body) s += section + "." + key + "=" + value.data() + "\n";
  return s;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  pt::ptree tree;
  std::istringstream is(text);
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("line " + std::to_string(e.line()), e.message());
  }
  check_keys(tree);
  const Reader r(tree);
  ExperimentConfig c;
  c.hash = fnv1a64(canonical(tree));

  // driver
  const std::string kind = r.required("driver.kind");
  try {
    if (kind == "iid") {
      std::vector<double> probs = r.list<double>("driver.probs");
      if (probs.empty()) {
        const int m = r.num<int>("driver.alphabet", 0);
        if (m < 1) throw ConfigError("driver.probs", "missing (or give driver.alphabet for a uniform law)");
        probs.assign(m, 1.0 / m);
      }
      c.driver = DriverSpec::iid(probs);
    } else if (kind == "markov") {
      const auto rows = r.rows("driver.transition");
      if (rows.empty()) throw ConfigError("driver.transition", "missing");
      Eigen::MatrixXd P(rows.size(), rows.size());
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows.size()) throw ConfigError("driver.transition", "matrix is not square");
        for (std::size_t j = 0; j < rows.size(); ++j) P(i, j) = rows[i][j];
      }
      c.driver = DriverSpec::markov(P);
    } else {
      throw ConfigError("driver.kind", "expected iid or markov, got '" + kind + "'");
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(kind == "iid" ? "driver.probs" : "driver.transition", e.what());
  }
  if (r.has("driver.alphabet") && r.num<int>("driver.alphabet", 0) != c.driver.alphabet_size)
    throw ConfigError("driver.alphabet", "does not match the size of the law");
  c.env_seed_given = r.has("driver.seed");
  c.env_seed = r.num<std::uint64_t>("driver.seed", 0);

  // family
  c.family_kind = r.str("family.kind", "linear");
  if (c.family_kind != "linear" && c.family_kind != "mp" && c.family_kind != "perturbed" &&
      c.family_kind != "general-linear")
    throw ConfigError("family.kind", "expected linear, mp, perturbed or general-linear");
  c.field_kind = r.str("family.field", "table");
  c.radius = r.num<int>("family.radius", 0);
  if (c.radius < 0) throw ConfigError("family.radius", "negative");
  c.offset = r.num<double>("family.offset", 0.0);
  c.fraction = r.num<double>("family.fraction", 0.5);
  if (!(c.fraction > 0.0 && c.fraction < 1.0)) throw ConfigError("family.fraction", "must lie in (0,1)");
  c.breakpoints = r.rows("family.breakpoints");
  if (c.family_kind == "general-linear") {
    if (c.breakpoints.empty()) throw ConfigError("family.breakpoints", "missing");
    std::vector<double> idx;
    for (std::size_t i = 0; i < c.breakpoints.size(); ++i) idx.push_back(static_cast<double>(i));
    c.values = r.list<double>("family.values", idx);
  } else if (c.field_kind != "geometric-indicator") {
    c.values = r.list<double>("family.values");
    if (c.values.empty()) throw ConfigError("family.values", "missing");
  }
  if (c.field_kind == "table" || c.field_kind == "window-mean") {
    if (static_cast<int>(c.values.size()) < c.driver.alphabet_size)
      throw ConfigError("family.values", "needs one value per symbol of the alphabet");
    if (c.field_kind == "table" && c.radius != 0) throw ConfigError("family.radius", "table fields have radius 0");
  } else if (c.field_kind == "geometric-indicator") {
    c.set = r.list<int>("family.set");
    if (c.set.empty()) throw ConfigError("family.set", "missing");
    for (int s : c.set)
      if (s < 0 || s >= c.driver.alphabet_size) throw ConfigError("family.set", "symbol outside the alphabet");
  } else {
    throw ConfigError("family.field", "expected table, window-mean or geometric-indicator");
  }

  // model
  const std::string pot = r.str("model.potential", "zero");
  if (pot == "zero")
    c.potential.kind = PotentialKind::Zero;
  else if (pot == "smooth")
    c.potential.kind = PotentialKind::Smooth;
  else if (pot == "scaled")
    c.potential.kind = PotentialKind::Scaled;
  else
    throw ConfigError("model.potential", "expected zero, smooth or scaled");
  c.potential.temperature = r.num<double>("model.temperature", 1.0);
  if (!(c.potential.temperature > 0.0)) throw ConfigError("model.temperature", "must be positive");
  c.alpha = r.num<double>("model.alpha", 1.0);
  if (!(c.alpha > 0.0 && c.alpha <= 1.0)) throw ConfigError("model.alpha", "must lie in (0,1]");
  c.N = r.num<int>("model.N", 256);
  if (!valid_grid_size(c.N)) throw ConfigError("model.N", "must be a power of two >= 64");
  c.observable = r.str("model.observable", "");
  if (!c.observable.empty()) {
    try {
      parse_observable(c.observable);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("model.observable", e.what());
    }
  }

  // run
  c.seed = r.num<std::uint64_t>("run.seed", 1);
  c.out = r.str("run.out", "out");
  c.slack = r.num<double>("run.slack", 0.05);
  if (!(c.slack >= 0.0)) throw ConfigError("run.slack", "must be nonnegative");
  c.threads = r.num<int>("run.threads", 1);
  if (c.threads < 1) throw ConfigError("run.threads", "must be at least 1");
  RunParams& p = c.run;
  p.start = r.num<long>("run.start", 0);
  p.n = r.num<int>("run.n", p.n);
  if (p.n < 1) throw ConfigError("run.n", "must be at least 1");
  p.ladder = r.list<int>("run.ladder", {});
  for (int v : p.ladder)
    if (v < 1) throw ConfigError("run.ladder", "entries must be positive");
  p.trials = r.num<int>("run.trials", p.trials);
  if (p.trials < 1) throw ConfigError("run.trials", "must be at least 1");
  p.samples = r.num<int>("run.samples", p.samples);
  if (p.samples < 1) throw ConfigError("run.samples", "must be at least 1");
  p.depth = r.num<int>("run.depth", 0);
  p.a_exponent = r.num<double>("run.a_exponent", p.a_exponent);
  if (!(p.a_exponent > 0.0 && p.a_exponent < 1.0)) throw ConfigError("run.a_exponent", "must lie in (0,1)");
  p.mdp_exponent = r.num<double>("run.mdp_exponent", p.mdp_exponent);
  if (!(p.mdp_exponent > 0.5 && p.mdp_exponent < 1.0)) throw ConfigError("run.mdp_exponent", "must lie in (1/2,1)");
  p.x = r.num<double>("run.x", p.x);
  p.p = r.num<double>("run.p", p.p);
  if (p.p < 0.0) throw ConfigError("run.p", "must be nonnegative (0 means infinity)");
  p.nodes = r.num<int>("run.nodes", p.nodes);
  if (p.nodes < 4) throw ConfigError("run.nodes", "need at least 4");
  p.window_lo = r.num<double>("run.window_lo", p.window_lo);
  p.window_hi = r.num<double>("run.window_hi", p.window_hi);
  if (!(p.window_hi > p.window_lo)) throw ConfigError("run.window_hi", "must exceed run.window_lo");
  p.threshold = r.num<double>("run.threshold", p.threshold);
  p.js = r.list<long>("run.js", p.js);
  p.k_max = r.num<int>("run.k_max", p.k_max);
  if (p.k_max < 1) throw ConfigError("run.k_max", "must be at least 1");
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

ParamField ExperimentConfig::field() const {
  ParamField f;
  if (field_kind == "table")
    f = ParamField::table(values);
  else if (field_kind == "window-mean")
    f = ParamField::window_mean(values, radius);
  else
    f = ParamField::geometric_indicator(set, radius);
  if (offset != 0.0) f.evaluator = [inner = f.evaluator, o = offset](const std::vector<int>& w) { return o + inner(w); };
  return f;
}

Family ExperimentConfig::family() const {
  if (family_kind == "mp") return Family::manneville_pomeau(field());
  if (family_kind == "perturbed") return Family::perturbed(field(), fraction);
  if (family_kind == "general-linear") return Family::general_linear(breakpoints, field());
  return Family::linear(field());
}

Cocycle ExperimentConfig::cocycle(int horizon) const {
  const Family fam = family();
  const int window = fam.field.radius + 2;
  EnvPath path = sample_path(driver, env_seed_given ? env_seed : CounterRng(seed).split(0xe5).key(), horizon, window);
  Observable u;
  if (!observable.empty()) u = parse_observable(observable);
  return Cocycle(std::move(path), fam, potential, N, alpha, std::move(u));
}

}  // namespace rdslab
