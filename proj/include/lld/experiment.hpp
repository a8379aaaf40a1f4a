#pragma once

#include <vector>

#include "lld/config.hpp"
#include "lld/lld_verify.hpp"
#include "lld/transfer.hpp"

namespace lld {

/// Band limit of the smoothing kernel: the configured value, else the largest
/// admissible one for the law (0.25 for dynamics).
double kernel_epsilon(const ExperimentConfig& cfg, const CharFnModel* model);

/// i.i.d. or lattice sweep of a configuration, with the lattice route taken for
/// lattice specs. Per-estimate tallies are appended when `tallies` is set.
LLDReport run_sweep(const ExperimentConfig& cfg, std::vector<MCEstimate>* tallies = nullptr);

/// Birkhoff-sum sweep of a dynamics configuration with a power observable.
LLDReport run_dyn_sweep(const ExperimentConfig& cfg, std::vector<MCEstimate>* tallies = nullptr);

struct EigencurveRun {
  EigencurveFit fit;
  double alpha = 0.0;
  bool centred = false;  // alpha > 1 power observable: derivative at 0 is checked
  bool ok() const;
};

/// Eigencurve of a dynamics configuration; alpha > 1 power observables are
/// recentred by the discrete mean so that lambda'(0) = 0 on the discretisation.
EigencurveRun run_eigencurve(const ExperimentConfig& cfg);

}  // namespace lld
