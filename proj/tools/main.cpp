#include <CLI11.hpp>

#include <iostream>

#include "allocator.hpp"
#include "commands.hpp"
#include "geoldp/errors.hpp"

int main(int argc, char** argv) {
  using namespace geoldp;
  cli::keep_large_buffers_on_heap();
  CLI::App app{"Monte Carlo and rate-function toolkit for sparse geometric functionals"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 0;
  int workers = 0;
  std::string out_dir;
  bool inject_fault = false;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* opt = sub->add_option("--config", config_path, "experiment configuration (JSON)");
    if (needs_config) opt->required();
    sub->add_option("--seed", seed, "root seed, overrides the config");
    sub->add_option("--workers", workers, "worker threads, overrides the config")->check(CLI::PositiveNumber);
    sub->add_option("--out", out_dir, "output directory, overrides the config");
  };
  auto* simulate = app.add_subcommand("simulate", "replicate a regime grid: means, tails and slope fit");
  auto* rate = app.add_subcommand("rate", "score law, mean vector and rate function on a grid");
  auto* persistence = app.add_subcommand("persistence", "alpha-complex diagram and persistent Betti numbers");
  auto* validate = app.add_subcommand("validate", "oracle-equivalence and invariant suite");
  add_common(simulate, true);
  add_common(rate, true);
  add_common(persistence, true);
  add_common(validate, false);
  validate->add_flag("--inject-isolation-fault", inject_fault,
                     "shift the grid path's isolation radius by one r-unit (mutation canary)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kExitConfig;
  }

  try {
    if (validate->parsed()) {
      cli::ValidateOptions opts;
      if (validate->count("--seed")) opts.seed = seed;
      opts.inject_isolation_fault = inject_fault;
      return cli::cmd_validate(opts, std::cout);
    }
    cli::Config config = cli::load_config(config_path);
    auto* active = app.get_subcommands().front();
    if (active->count("--seed")) config.plan.seed = seed;
    if (active->count("--workers")) config.plan.workers = workers;
    if (active->count("--out")) config.out = out_dir;
    if (simulate->parsed()) return cli::cmd_simulate(config, std::cout);
    if (rate->parsed()) return cli::cmd_rate(config, std::cout);
    return cli::cmd_persistence(config, std::cout);
  } catch (const SparsityViolation& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kExitSparsity;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return cli::kExitConfig;
  } catch (const DomainError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return cli::kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kExitConfig;
  }
}
