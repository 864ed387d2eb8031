// fpsens: failure probability and sensitivities of linear systems under
// Gaussian excitation.
//
//   fpsens preset --name example1 --case 1 --out ex1.json
//   fpsens reliability --config ex1.json --out-dir out/
//   fpsens sensitivity --config ex1.json --tol 0.1
//   fpsens reference   --config ex1.json --tol 0.02 --nmax 2000000
//
// Exit status: 0 converged, 2 sample cap reached first, 1 error.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11/CLI11.hpp>

#include "fpsens/app/config.hpp"
#include "fpsens/app/presets.hpp"
#include "fpsens/app/report.hpp"
#include "fpsens/app/runner.hpp"

namespace {

struct RunFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  std::optional<std::uint64_t> nmax;
  std::optional<unsigned> workers;
  std::string out_dir = ".";
  std::string format = "csv";
};

void add_run_flags(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("--config", f.config, "JSON run configuration")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", f.seed, "random seed (overrides estimator.seed)");
  cmd->add_option("--tol", f.tol, "target coefficient of variation (overrides estimator.tol)");
  cmd->add_option("--nmax", f.nmax, "sample cap (overrides estimator.n_max)");
  cmd->add_option("--workers", f.workers, "worker threads; 1 is bit-reproducible (default: FPSENS_WORKERS or all cores)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--out-dir", f.out_dir, "directory for estimates, history and run files");
  cmd->add_option("--format", f.format, "estimates file format")->check(CLI::IsMember({"csv", "json"}));
}

int execute(const RunFlags& f, fpsens::app::Method method) {
  using namespace fpsens::app;
  RunConfig cfg = load_config(f.config);
  cfg.estimator.method = method;
  if (f.seed) cfg.estimator.seed = *f.seed;
  if (f.tol) cfg.estimator.tol = *f.tol;
  if (f.nmax) cfg.estimator.n_max = *f.nmax;
  if (!(cfg.estimator.tol > 0.0 && cfg.estimator.tol < 1.0)) throw ConfigError("--tol", "must lie in (0, 1)");
  if (cfg.estimator.n_max < cfg.estimator.min_samples)
    throw ConfigError("--nmax", "must be >= estimator.min_samples");

  const unsigned workers = f.workers ? *f.workers : fpsens::default_worker_count();
  const RunReport report = run(cfg, workers);
  emit(report, f.format == "json" ? Format::json : Format::csv, f.out_dir);

  for (const auto& e : report.estimates)
    std::cout << e.parameter << " = " << format_double(e.value) << "  cov " << format_double(e.cov) << "  n_evals "
              << e.n_evals << (e.converged ? "" : "  (not converged)") << "\n";
  std::cout << "wall time " << report.wall_time_s << " s\n";
  return report.converged() ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Failure probability and its parameter sensitivities for linear systems under Gaussian excitation"};
  app.require_subcommand(1);

  RunFlags rel, sens, ref;
  add_run_flags(app.add_subcommand("reliability", "failure probability (mixture importance sampling)"), rel);
  add_run_flags(app.add_subcommand("sensitivity", "sensitivities by surface decomposition"), sens);
  add_run_flags(app.add_subcommand("reference", "finite-difference importance sampling reference"), ref);

  std::string name, out;
  int which = 1;
  auto* pre = app.add_subcommand("preset", "write a preset configuration");
  pre->add_option("--name", name, "example1, example2 or planar_toy")->required();
  pre->add_option("--case", which, "case number");
  pre->add_option("--out", out, "output file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (app.got_subcommand("preset")) {
      const auto doc = fpsens::app::preset(name, which);
      (void)fpsens::app::parse_config(doc);
      if (out.empty())
        std::cout << doc.dump(2) << "\n";
      else
        fpsens::app::write_text(out, doc.dump(2) + "\n");
      return 0;
    }
    using fpsens::app::Method;
    if (app.got_subcommand("reliability")) return execute(rel, Method::isee);
    if (app.got_subcommand("sensitivity")) return execute(sens, Method::sdm);
    return execute(ref, Method::fdmis);
  } catch (const std::exception& e) {
    std::cerr << "fpsens: " << e.what() << "\n";
    return 1;
  }
}
