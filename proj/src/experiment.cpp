#include "lld/experiment.hpp"

#include <cmath>

#include "lld/dyn_sweep.hpp"
#include "lld/smoothing.hpp"

namespace lld {

double kernel_epsilon(const ExperimentConfig& cfg, const CharFnModel* model) {
  if (cfg.epsilon) return *cfg.epsilon;
  if (!model) return 0.25;
  const EllTilde lt(model->law().ell(), model->law().alpha());
  return select_epsilon(*model, lt);
}

LLDReport run_sweep(const ExperimentConfig& cfg, std::vector<MCEstimate>* tallies) {
  if (cfg.spec.kind == SpecKind::dynamics) throw ConfigError("sweep needs an i.i.d. spec; use dyn-sweep");
  const auto law = make_law(cfg.spec);
  const CharFnModel model(law);
  const NormingSeq norm(law->alpha(), law->ell());
  const Envelope env(norm, law->dim());
  const auto kernel = build_kernel(kernel_epsilon(cfg, &model));
  SweepOptions opt;
  opt.h = cfg.h;
  opt.budget_scale = cfg.budget_scale;
  opt.seed = cfg.seed;
  opt.estimator = cfg.estimator;
  opt.both_signs = cfg.grid.both_signs;
  opt.tallies = tallies;
  if (cfg.spec.kind == SpecKind::lattice)
    return lattice_sweep(static_cast<const LatticeSpec&>(*law), model, kernel, env, make_grid(cfg), opt);
  return sweep(*law, model, kernel, env, make_grid(cfg), opt);
}

LLDReport run_dyn_sweep(const ExperimentConfig& cfg, std::vector<MCEstimate>* tallies) {
  if (cfg.spec.kind != SpecKind::dynamics || cfg.spec.observable != "power")
    throw ConfigError("dyn-sweep needs a dynamics spec with a power observable");
  const TransferModel model = make_transfer(cfg.spec);
  const NormingSeq norm(cfg.spec.alpha, norming_ell(cfg));
  const Envelope env(norm, 1);
  const auto kernel = build_kernel(kernel_epsilon(cfg, nullptr));
  BirkhoffOptions opt;
  opt.h = cfg.h;
  opt.budget_scale = cfg.budget_scale;
  opt.seed = cfg.seed;
  opt.estimator = cfg.estimator;
  opt.both_signs = cfg.grid.both_signs;
  opt.with_bound = cfg.operator_bound;
  opt.bound.exact_max_n = cfg.operator_max_n;
  opt.tallies = tallies;
  return birkhoff_lld_sweep(model, kernel, env, make_grid(cfg), opt);
}

bool EigencurveRun::ok() const {
  const bool exponent = std::abs(fit.alpha_hat - alpha) <= 0.1 * alpha;
  return exponent && (!centred || fit.derivative_at_zero < 1e-6);
}

EigencurveRun run_eigencurve(const ExperimentConfig& cfg) {
  TransferModel model = make_transfer(cfg.spec);
  EigencurveRun run;
  run.alpha = model.observable().alpha();
  run.centred = model.observable().kind() == Observable::Kind::power && run.alpha > 1.0;
  if (run.centred) model = model.recentred(model.discrete_mean());
  const auto grid = eigencurve_grid(cfg.eigencurve.s_max, cfg.eigencurve.points, cfg.eigencurve.decades);
  run.fit = eigencurve(model, grid, EllTilde(SlowlyVarying::constant(1.0), run.alpha));
  return run;
}

}  // namespace lld
