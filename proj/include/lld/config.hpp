#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lld/charfn.hpp"
#include "lld/dyn_sweep.hpp"
#include "lld/heavytail.hpp"
#include "lld/lld_verify.hpp"
#include "lld/transfer.hpp"

namespace lld {

/// Malformed or inconsistent experiment file (CLI exit code 3).
class ConfigError : public DomainError {
 public:
  using DomainError::DomainError;
};

enum class SpecKind { scalar, multivariate, lattice, mixed, dynamics };
std::string to_string(SpecKind k);

struct SpecConfig {
  SpecKind kind = SpecKind::scalar;
  double alpha = 0.5;
  double p = 1.0, q = 0.0;           // scalar and lattice tails
  double ell_c = 1.0, ell_beta = 0.0;
  std::vector<Atom> atoms;           // multivariate
  int span = 1;                      // lattice
  double mix_weight = 0.5;           // mixed: probability of the uniform jitter
  std::string map = "gauss";         // dynamics
  std::string observable = "power";  // power | indicator
  double indicator_value = 0.0, indicator_lo = 0.0, indicator_hi = 0.5;
  TransferOptions transfer;
};

struct GridConfig {
  std::vector<long> ns;
  std::vector<double> multiples;
  std::vector<std::vector<double>> directions;
  bool both_signs = true;
};

struct EigencurveConfig {
  double s_max = 0.25;
  int points = 41;
  double decades = 4.0;
};

/// One experiment per JSON document. Every object is checked against its
/// allowed keys; anything unknown is rejected.
struct ExperimentConfig {
  std::string name;
  SpecConfig spec;
  std::optional<double> epsilon;
  GridConfig grid;
  double h = 1.0;
  double budget_scale = 1.0;
  std::uint64_t seed = 1;
  Estimator estimator = Estimator::conditional;
  long samples = 1000;          // `sample` subcommand
  bool operator_bound = true;   // dyn-sweep
  long operator_max_n = 64;     // exact powering below this n
  EigencurveConfig eigencurve;
  std::string out_dir = ".";
  std::string hash;             // of the canonical document
};

ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

/// FNV-1a 64 of the text, as 16 hex digits.
std::string fnv1a_hex(const std::string& text);
std::string artifact_version();

/// Objects built from a configuration.
std::shared_ptr<const Law> make_law(const SpecConfig& spec);
SlowlyVarying make_ell(const SpecConfig& spec);
/// Tail factor of the norming sequence (lattice spans and dynamics densities included).
SlowlyVarying norming_ell(const ExperimentConfig& cfg);
SweepGrid make_grid(const ExperimentConfig& cfg);

/// Dynamics: the observable centred by its invariant mean when alpha > 1.
TransferModel make_transfer(const SpecConfig& spec);

}  // namespace lld
