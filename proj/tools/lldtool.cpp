// lldtool: batch front end for the local large deviation experiments.

#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "lld/config.hpp"
#include "lld/dyn_sweep.hpp"
#include "lld/experiment.hpp"
#include "lld/lld_verify.hpp"
#include "lld/rng.hpp"
#include "lld/smoothing.hpp"

namespace fs = std::filesystem;
using namespace lld;

namespace {

constexpr int kExitConfig = 3;

struct Flags {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  bool seed_set = false;
  unsigned threads = 0;
  double budget_scale = 0.0;
  bool dump_tallies = false;
  std::vector<std::string> reports;
};

struct Context {
  ExperimentConfig cfg;
  Flags flags;
  std::string out_dir;

  Provenance provenance() const { return {cfg.hash, artifact_version()}; }
  std::string path(const std::string& stem) const { return (fs::path(out_dir) / (cfg.name + "_" + stem)).string(); }
  std::string header() const { return "# lld " + artifact_version() + " config=" + cfg.hash + "\n"; }
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DomainError("cannot write " + path);
  out << text;
}

int run_sample(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  std::ostringstream os;
  os << ctx.header();
  if (cfg.spec.kind == SpecKind::dynamics) {
    const TransferModel model = make_transfer(cfg.spec);
    Rng rng(cfg.seed, 0);
    long moved = 0;
    const auto z = orbit(model.map(), model.invariant_quantile(rng.uniform()), cfg.samples, &moved);
    os << "k,z,v\n";
    for (std::size_t k = 0; k < z.size(); ++k)
      os << k << ',' << format_double(z[k]) << ',' << format_double(model.observable()(z[k])) << '\n';
    if (moved) std::cerr << "orbit: " << moved << " iterates moved off 0\n";
  } else {
    const auto law = make_law(cfg.spec);
    Rng rng(cfg.seed, 0);
    std::vector<double> x(static_cast<std::size_t>(law->dim()));
    for (int j = 1; j <= law->dim(); ++j) os << (j > 1 ? "," : "") << "x_" << j;
    os << '\n';
    for (long i = 0; i < cfg.samples; ++i) {
      law->sample(rng, x);
      for (std::size_t j = 0; j < x.size(); ++j) os << (j ? "," : "") << format_double(x[j]);
      os << '\n';
    }
  }
  write_text(ctx.path("sample.csv"), os.str());
  return 0;
}

int run_norming(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  const NormingSeq norm(cfg.spec.alpha, norming_ell(cfg));
  std::shared_ptr<const Law> law;
  if (cfg.spec.kind != SpecKind::dynamics) law = make_law(cfg.spec);
  const int dim = law ? law->dim() : 1;
  long n_max = 1;
  for (long n : cfg.grid.ns) n_max = std::max(n_max, n);
  std::ostringstream os;
  os << ctx.header() << "n,a_n";
  for (int j = 1; j <= dim; ++j) os << ",b_n" << (dim > 1 ? "_" + std::to_string(j) : "");
  os << '\n';
  for (long n = 1; n <= n_max; n *= 2) {
    os << n << ',' << format_double(norm.a(n));
    const std::vector<double> b = law ? compute_b_n(*law, n) : std::vector<double>{0.0};
    for (double v : b) os << ',' << format_double(v);
    os << '\n';
  }
  write_text(ctx.path("norming.csv"), os.str());
  std::cout << os.str();
  return 0;
}

int run_kernel_check(const Context& ctx) {
  std::unique_ptr<CharFnModel> model;
  if (ctx.cfg.spec.kind != SpecKind::dynamics) model = std::make_unique<CharFnModel>(make_law(ctx.cfg.spec));
  const auto kernel = build_kernel(kernel_epsilon(ctx.cfg, model.get()));
  const auto cert = certify_kernel(kernel);
  std::ostringstream os;
  os << ctx.header() << "quantity,value\n"
     << "epsilon," << format_double(kernel.epsilon()) << '\n'
     << "dilation," << format_double(kernel.dilation()) << '\n'
     << "scale," << format_double(kernel.scale()) << '\n'
     << "min_gamma0_core," << format_double(cert.min_gamma0_core) << '\n'
     << "min_gamma0_wide," << format_double(cert.min_gamma0_wide) << '\n'
     << "parseval_error," << format_double(cert.parseval_error) << '\n'
     << "support_value," << format_double(cert.support_value) << '\n'
     << "c2_drift," << format_double(cert.c2_drift) << '\n'
     << "min_indicator_core," << format_double(cert.min_indicator_core) << '\n'
     << "ok," << (cert.ok() ? 1 : 0) << '\n';
  write_text(ctx.path("kernel.csv"), os.str());
  std::cout << os.str();
  return cert.ok() ? 0 : 1;
}

int run_cf_diagnostics(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  std::ostringstream os;
  os << ctx.header() << "quantity,value\n";
  bool ok = true;
  if (cfg.spec.kind == SpecKind::dynamics) {
    const TransferModel model = make_transfer(cfg.spec);
    const double alpha = model.observable().alpha();
    const double eps = kernel_epsilon(ctx.cfg, nullptr);
    const auto rep = spectral_hypothesis_report(model, eps, alpha, EllTilde(SlowlyVarying::constant(1.0), alpha));
    os << "lambda_at_zero," << format_double(rep.lambda_at_zero) << '\n'
       << "gap_at_zero," << format_double(rep.gap_at_zero) << '\n';
    for (const auto& [h, r] : rep.difference) os << "difference_ratio_h=" << format_double(h) << ',' << format_double(r) << '\n';
    os << "bounded," << (rep.bounded ? 1 : 0) << '\n';
    ok = rep.bounded && rep.gap_at_zero < 1.0;
  } else {
    const auto law = make_law(cfg.spec);
    const CharFnModel model(law);
    const EllTilde lt(law->ell(), law->alpha());
    const double eps = kernel_epsilon(ctx.cfg, &model);
    const auto fit = fit_decay_constant(model, lt, eps);
    os << "epsilon," << format_double(eps) << '\n'
       << "min_c," << format_double(fit.min_c) << '\n'
       << "max_c," << format_double(fit.max_c) << '\n'
       << "limit_c," << format_double(fit.limit_c) << '\n';
    const StableTarget target = StableTarget::for_law(*law);
    const double k = target.k(fit.worst_direction);
    os << "k_worst_direction," << format_double(k) << '\n'
       << "limit_relative_error," << format_double(std::abs(fit.limit_c - k) / k) << '\n';
    if (law->alpha() != 2.0) {
      const auto mod = modulus_report(model, lt, 1.0);
      for (const auto& r : mod.difference) os << "modulus_h=" << format_double(r.h) << ',' << format_double(r.ratio) << '\n';
      for (const auto& r : mod.gradient) os << "gradient_h=" << format_double(r.h) << ',' << format_double(r.ratio) << '\n';
      os << "modulus_bounded," << (mod.bounded ? 1 : 0) << '\n';
    }
    if (law->dim() > 1) {
      const auto nd = nondegeneracy_check(SpectralMeasure(law->stable_atoms()), law->alpha());
      os << "nondegeneracy_min," << format_double(nd.minimum) << '\n';
    }
    ok = fit.holds();
  }
  write_text(ctx.path("cf_diagnostics.csv"), os.str());
  std::cout << os.str();
  return ok ? 0 : 1;
}

void finish_report(const Context& ctx, const LLDReport& rep, const std::string& stem,
                   const std::vector<MCEstimate>& tallies) {
  emit_report(rep, ctx.path(stem + ".csv"), ctx.provenance());
  if (ctx.flags.dump_tallies) dump_tallies(ctx.path(stem + "_tallies.csv"), tallies);
  std::cout << summarize(rep);
}

int run_sweep(const Context& ctx, bool lattice) {
  const auto kind = ctx.cfg.spec.kind;
  if (kind == SpecKind::dynamics) throw ConfigError("sweep needs an i.i.d. spec; use dyn-sweep");
  if (lattice != (kind == SpecKind::lattice))
    throw ConfigError(lattice ? "lattice-sweep needs a lattice spec" : "lattice specs run through lattice-sweep");
  std::vector<MCEstimate> tallies;
  const LLDReport rep = lld::run_sweep(ctx.cfg, &tallies);
  finish_report(ctx, rep, lattice ? "lattice_sweep" : "sweep", tallies);
  return exit_code(rep.verdict);
}

int run_eigencurve(const Context& ctx) {
  const auto run = lld::run_eigencurve(ctx.cfg);
  const auto& fit = run.fit;
  write_text(ctx.path("eigencurve.csv"), eigencurve_csv(fit, "lld " + artifact_version() + " config=" + ctx.cfg.hash));
  std::cout << "alpha_hat " << format_double(fit.alpha_hat) << "\nc " << format_double(fit.c) << "\nresidual "
            << format_double(fit.residual) << (fit.flagged ? " (flagged)" : "") << '\n';
  if (run.centred) std::cout << "derivative_at_zero " << format_double(fit.derivative_at_zero) << '\n';
  return run.ok() ? 0 : 1;
}

int run_dyn_sweep(const Context& ctx) {
  std::vector<MCEstimate> tallies;
  const LLDReport rep = lld::run_dyn_sweep(ctx.cfg, &tallies);
  finish_report(ctx, rep, "dyn_sweep", tallies);
  return exit_code(rep.verdict);
}

int run_report(const Flags& flags) {
  if (flags.reports.empty()) throw ConfigError("report needs one or more CSV paths");
  Verdict worst = Verdict::pass;
  for (const auto& path : flags.reports) {
    LLDReport rep = read_report(path);
    finalize_report(rep);
    std::cout << "== " << path << '\n' << summarize(rep);
    if (rep.verdict == Verdict::fail) worst = Verdict::fail;
    else if (rep.verdict == Verdict::inconclusive && worst == Verdict::pass) worst = Verdict::inconclusive;
  }
  std::cout << "overall " << to_string(worst) << '\n';
  return exit_code(worst);
}

Context make_context(const Flags& flags) {
  if (flags.config.empty()) throw ConfigError("--config is required");
  Context ctx;
  ctx.flags = flags;
  ctx.cfg = load_config(flags.config);
  if (flags.seed_set) ctx.cfg.seed = flags.seed;
  if (flags.budget_scale > 0.0) ctx.cfg.budget_scale *= flags.budget_scale;
  ctx.out_dir = flags.out.empty() ? ctx.cfg.out_dir : flags.out;
  fs::create_directories(ctx.out_dir);
  return ctx;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Local large deviation experiments for heavy-tailed sums and Birkhoff sums"};
  app.require_subcommand(1);
  Flags flags;
  app.add_option("--config", flags.config, "experiment JSON");
  app.add_option("--out", flags.out, "output directory (overrides the config)");
  auto* seed = app.add_option("--seed", flags.seed, "random seed (overrides the config)");
  app.add_option("--threads", flags.threads, "worker thread cap");
  app.add_option("--budget-scale", flags.budget_scale, "multiplies the configured Monte Carlo budget");
  app.add_flag("--dump-tallies", flags.dump_tallies, "write per-substream hit counts");

  const std::vector<std::pair<std::string, std::string>> commands{
      {"sample", "emit raw draws or an orbit"},
      {"norming", "tabulate a_n and b_n"},
      {"kernel-check", "build and certify the smoothing kernel"},
      {"cf-diagnostics", "decay and modulus diagnostics of the characteristic function or twisted operator"},
      {"sweep", "i.i.d. local large deviation sweep"},
      {"lattice-sweep", "lattice local large deviation sweep"},
      {"eigencurve", "leading eigenvalue curve and exponent fit"},
      {"dyn-sweep", "Birkhoff-sum local large deviation sweep"},
      {"report", "re-evaluate and summarise report CSVs"}};
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->fallthrough();
    if (name == "report") sub->add_option("reports", flags.reports, "report CSVs");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }
  flags.seed_set = seed->count() > 0;
  if (flags.threads > 0) set_max_threads(flags.threads);
  const std::string cmd = app.get_subcommands().front()->get_name();

  try {
    if (cmd == "report") return run_report(flags);
    const Context ctx = make_context(flags);
    if (cmd == "sample") return run_sample(ctx);
    if (cmd == "norming") return run_norming(ctx);
    if (cmd == "kernel-check") return run_kernel_check(ctx);
    if (cmd == "cf-diagnostics") return run_cf_diagnostics(ctx);
    if (cmd == "sweep") return run_sweep(ctx, false);
    if (cmd == "lattice-sweep") return run_sweep(ctx, true);
    if (cmd == "eigencurve") return run_eigencurve(ctx);
    if (cmd == "dyn-sweep") return run_dyn_sweep(ctx);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 1;
  } catch (const DomainError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return kExitConfig;
}
