#include "lld/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

namespace lld {

using nlohmann::json;

namespace {

void only_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(where + " must be a JSON object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : obj.items())
    if (!ok.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
}

template <class T>
T get_or(const json& obj, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("key '") + key + "' has the wrong type");
  }
}

std::vector<double> unit(std::vector<double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  s = std::sqrt(s);
  if (!(s > 0.0)) throw ConfigError("direction vectors must be nonzero");
  for (double& x : v) x /= s;
  return v;
}

int spec_dim(const SpecConfig& s) {
  if (s.kind == SpecKind::multivariate) return s.atoms.empty() ? 0 : static_cast<int>(s.atoms[0].direction.size());
  return 1;
}

SpecConfig parse_spec(const json& j) {
  only_keys(j, "spec", {"kind", "alpha", "p", "q", "ell", "atoms", "span", "mix_weight", "map", "observable",
                        "transfer"});
  SpecConfig s;
  const auto kind = get_or<std::string>(j, "kind", "scalar");
  if (kind == "scalar") s.kind = SpecKind::scalar;
  else if (kind == "multivariate") s.kind = SpecKind::multivariate;
  else if (kind == "lattice") s.kind = SpecKind::lattice;
  else if (kind == "mixed") s.kind = SpecKind::mixed;
  else if (kind == "dynamics") s.kind = SpecKind::dynamics;
  else throw ConfigError("spec.kind must be scalar, multivariate, lattice, mixed or dynamics");

  if (!j.contains("alpha") && !(s.kind == SpecKind::dynamics && j.contains("observable")))
    throw ConfigError("spec.alpha is required");
  s.alpha = get_or<double>(j, "alpha", 2.0);
  try {
    require_supported_alpha(s.alpha);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  s.p = get_or<double>(j, "p", s.kind == SpecKind::multivariate ? 1.0 : 0.5);
  s.q = get_or<double>(j, "q", s.kind == SpecKind::multivariate ? 0.0 : 0.5);
  if (j.contains("ell")) {
    only_keys(j["ell"], "spec.ell", {"c", "beta"});
    s.ell_c = get_or<double>(j["ell"], "c", 1.0);
    s.ell_beta = get_or<double>(j["ell"], "beta", 0.0);
    if (!(s.ell_c > 0.0)) throw ConfigError("spec.ell.c must be positive");
  }
  if (s.kind == SpecKind::multivariate) {
    if (!j.contains("atoms") || !j["atoms"].is_array() || j["atoms"].empty())
      throw ConfigError("multivariate spec needs a nonempty 'atoms' array");
    for (const auto& a : j["atoms"]) {
      only_keys(a, "spec.atoms[]", {"direction", "weight"});
      Atom atom;
      atom.direction = unit(get_or<std::vector<double>>(a, "direction", {}));
      atom.weight = get_or<double>(a, "weight", 0.0);
      if (!(atom.weight > 0.0)) throw ConfigError("atom weights must be positive");
      if (!s.atoms.empty() && atom.direction.size() != s.atoms[0].direction.size())
        throw ConfigError("atoms must share one dimension");
      s.atoms.push_back(std::move(atom));
    }
  }
  s.span = get_or<int>(j, "span", 1);
  s.mix_weight = get_or<double>(j, "mix_weight", 0.5);
  if (s.kind == SpecKind::dynamics) {
    s.map = get_or<std::string>(j, "map", "gauss");
    if (s.map != "gauss" && s.map != "doubling" && s.map != "afu")
      throw ConfigError("spec.map must be gauss, doubling or afu");
    if (j.contains("observable")) {
      const auto& o = j["observable"];
      only_keys(o, "spec.observable", {"kind", "value", "lo", "hi"});
      s.observable = get_or<std::string>(o, "kind", "power");
      if (s.observable != "power" && s.observable != "indicator")
        throw ConfigError("spec.observable.kind must be power or indicator");
      s.indicator_value = get_or<double>(o, "value", 2.0 * kPi);
      s.indicator_lo = get_or<double>(o, "lo", 0.0);
      s.indicator_hi = get_or<double>(o, "hi", 0.5);
    }
    if (j.contains("transfer")) {
      const auto& t = j["transfer"];
      only_keys(t, "spec.transfer", {"m", "graded_cells", "gauss_exact_branches", "gauss_truncation",
                                     "gauss_group_ratio"});
      s.transfer.m = get_or<int>(t, "m", s.transfer.m);
      s.transfer.graded_cells = get_or<int>(t, "graded_cells", s.transfer.graded_cells);
      s.transfer.gauss_exact_branches = get_or<int>(t, "gauss_exact_branches", s.transfer.gauss_exact_branches);
      s.transfer.gauss_truncation = get_or<long>(t, "gauss_truncation", s.transfer.gauss_truncation);
      s.transfer.gauss_group_ratio = get_or<double>(t, "gauss_group_ratio", s.transfer.gauss_group_ratio);
    }
  } else if (j.contains("map") || j.contains("observable") || j.contains("transfer")) {
    throw ConfigError("map/observable/transfer belong to dynamics specs only");
  }
  return s;
}

GridConfig parse_grid(const json& j, const SpecConfig& spec) {
  only_keys(j, "grid", {"n", "n_log2", "multiples", "multiples_log2", "directions", "both_signs"});
  GridConfig g;
  if (j.contains("n")) {
    g.ns = get_or<std::vector<long>>(j, "n", {});
  } else {
    const auto r = get_or<std::vector<int>>(j, "n_log2", {4, 12});
    if (r.size() != 2 || r[0] < 0 || r[1] < r[0] || r[1] > 40) throw ConfigError("grid.n_log2 must be [lo, hi]");
    g.ns = dyadic_ladder(r[0], r[1]);
  }
  for (long n : g.ns)
    if (n < 1) throw ConfigError("grid.n entries must be positive");
  if (j.contains("multiples")) {
    g.multiples = get_or<std::vector<double>>(j, "multiples", {});
  } else {
    const auto r = get_or<std::vector<int>>(j, "multiples_log2", {-4, 4});
    if (r.size() != 2 || r[1] < r[0]) throw ConfigError("grid.multiples_log2 must be [lo, hi]");
    g.multiples = dyadic_multiples(r[0], r[1]);
  }
  const int d = spec_dim(spec);
  if (j.contains("directions")) {
    for (const auto& v : get_or<std::vector<std::vector<double>>>(j, "directions", {})) {
      if (static_cast<int>(v.size()) != d) throw ConfigError("grid direction dimension does not match the spec");
      g.directions.push_back(unit(v));
    }
  } else if (d == 1) {
    g.directions = {{1.0}};
  } else {
    for (int k = 0; k < 8; ++k) {
      std::vector<double> u(static_cast<std::size_t>(d), 0.0);
      u[0] = std::cos(kPi * k / 4.0);
      u[1] = std::sin(kPi * k / 4.0);
      g.directions.push_back(u);
    }
  }
  const bool one_sided = spec.kind == SpecKind::dynamics && spec.alpha < 1.0;
  g.both_signs = get_or<bool>(j, "both_signs", !one_sided);
  return g;
}

}  // namespace

std::string to_string(SpecKind k) {
  switch (k) {
    case SpecKind::scalar: return "scalar";
    case SpecKind::multivariate: return "multivariate";
    case SpecKind::lattice: return "lattice";
    case SpecKind::mixed: return "mixed";
    case SpecKind::dynamics: return "dynamics";
  }
  return "?";
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string artifact_version() { return "0.1.0"; }

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  only_keys(j, "config", {"name", "spec", "epsilon", "grid", "h", "budget_scale", "seed", "estimator", "samples",
                          "operator_bound", "operator_max_n", "eigencurve", "out_dir"});
  if (!j.contains("spec")) throw ConfigError("config needs a 'spec' block");
  ExperimentConfig c;
  c.name = get_or<std::string>(j, "name", "experiment");
  c.spec = parse_spec(j["spec"]);
  if (j.contains("epsilon")) {
    c.epsilon = get_or<double>(j, "epsilon", 0.0);
    if (!(*c.epsilon > 0.0 && *c.epsilon <= kPi / 4.0)) throw ConfigError("epsilon must lie in (0, pi/4]");
  }
  c.grid = parse_grid(j.value("grid", json::object()), c.spec);
  c.h = get_or<double>(j, "h", 1.0);
  if (!(c.h > 0.0)) throw ConfigError("h must be positive");
  c.budget_scale = get_or<double>(j, "budget_scale", 1.0);
  if (!(c.budget_scale > 0.0)) throw ConfigError("budget_scale must be positive");
  c.seed = get_or<std::uint64_t>(j, "seed", 1);
  const auto est = get_or<std::string>(j, "estimator", "conditional");
  if (est == "conditional") c.estimator = Estimator::conditional;
  else if (est == "plain") c.estimator = Estimator::plain;
  else throw ConfigError("estimator must be conditional or plain");
  c.samples = get_or<long>(j, "samples", 1000);
  c.operator_bound = get_or<bool>(j, "operator_bound", true);
  c.operator_max_n = get_or<long>(j, "operator_max_n", 64);
  if (j.contains("eigencurve")) {
    const auto& e = j["eigencurve"];
    only_keys(e, "eigencurve", {"s_max", "points", "decades"});
    c.eigencurve.s_max = get_or<double>(e, "s_max", c.eigencurve.s_max);
    c.eigencurve.points = get_or<int>(e, "points", c.eigencurve.points);
    c.eigencurve.decades = get_or<double>(e, "decades", c.eigencurve.decades);
    if (c.eigencurve.points < 2 || !(c.eigencurve.s_max > 0.0)) throw ConfigError("eigencurve grid is invalid");
  }
  c.out_dir = get_or<std::string>(j, "out_dir", ".");
  c.hash = fnv1a_hex(j.dump());
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

SlowlyVarying make_ell(const SpecConfig& spec) { return {spec.ell_c, spec.ell_beta}; }

std::shared_ptr<const Law> make_law(const SpecConfig& spec) {
  try {
    switch (spec.kind) {
      case SpecKind::scalar:
        return std::make_shared<ScalarTailSpec>(spec.alpha, spec.p, spec.q, make_ell(spec));
      case SpecKind::multivariate:
        return std::make_shared<MultiTailSpec>(spec.alpha, SpectralMeasure(spec.atoms), make_ell(spec));
      case SpecKind::lattice:
        return std::make_shared<LatticeSpec>(spec.alpha, spec.p, spec.q, spec.span);
      case SpecKind::mixed:
        return std::make_shared<MixedSpec>(LatticeSpec(spec.alpha, spec.p, spec.q, spec.span), spec.mix_weight);
      case SpecKind::dynamics:
        break;
    }
  } catch (const NumericalError&) {
    throw;
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  throw ConfigError("dynamics specs have no i.i.d. law");
}

SlowlyVarying norming_ell(const ExperimentConfig& cfg) {
  if (cfg.spec.kind == SpecKind::dynamics)
    return SlowlyVarying::constant(tail_constant(IntervalMap::by_name(cfg.spec.map)));
  return make_law(cfg.spec)->ell();
}

SweepGrid make_grid(const ExperimentConfig& cfg) {
  SweepGrid g;
  g.ns = cfg.grid.ns;
  g.directions = cfg.grid.directions;
  g.multiples = cfg.grid.multiples;
  return g;
}

TransferModel make_transfer(const SpecConfig& spec) {
  if (spec.kind != SpecKind::dynamics) throw ConfigError("spec is not a dynamics spec");
  const IntervalMap map = IntervalMap::by_name(spec.map);
  if (spec.observable == "indicator")
    return TransferModel(map, Observable::indicator(spec.indicator_value, spec.indicator_lo, spec.indicator_hi),
                         spec.transfer);
  Observable obs = Observable::power(spec.alpha);
  if (spec.alpha > 1.0) obs = obs.centred(invariant_mean(map, obs));
  return TransferModel(map, obs, spec.transfer);
}

}  // namespace lld
