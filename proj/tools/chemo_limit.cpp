// chemo_limit: simulations, singular-limit rate sweeps and identity checks.
//
//   chemo_limit simulate       --config run.cfg [--out dir]
//   chemo_limit pes-rates      --config sweep.cfg [--out dir] [--threads n]
//   chemo_limit ids-rates      --config sweep.cfg [--out dir] [--threads n]
//   chemo_limit energy-check   --config run.cfg
//   chemo_limit semigroup-check [--config run.cfg]

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "chemolimit/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Relaxation-limit laboratory for an indirect-signalling chemotaxis system"};
  app.require_subcommand(1);

  chemo::cli::CommandOptions opts;
  std::string out_dir;
  unsigned threads = 0;
  std::uint64_t seed = 0;

  auto add_common = [&](CLI::App* cmd, bool config_required) {
    auto* c = cmd->add_option("--config", opts.config_path, "configuration file");
    if (config_required) c->required();
    cmd->add_option("--out", out_dir, "output directory (overrides output.dir)");
    cmd->add_option("--threads", threads, "worker threads (fallback: CHEMO_LIMIT_THREADS)")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", seed, "seed for randomized initial data");
  };

  auto* simulate = app.add_subcommand("simulate", "run one trajectory, write states.csv and energy.csv");
  auto* pes = app.add_subcommand("pes-rates", "eps -> 0 sweep against the parabolic-elliptic-elliptic limit");
  auto* ids = app.add_subcommand("ids-rates", "(eps, tau) -> 0 sweep against the Keller-Segel limit");
  auto* energy = app.add_subcommand("energy-check", "energy identity defect at dt and dt/2");
  auto* semigroup = app.add_subcommand("semigroup-check", "resolvent from the discrete heat semigroup");
  for (auto* cmd : {simulate, pes, ids, energy}) add_common(cmd, true);
  add_common(semigroup, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : chemo::cli::kConfigError;
  }

  for (auto* cmd : app.get_subcommands()) {
    if (cmd->count("--out")) opts.out_dir = out_dir;
    if (cmd->count("--threads")) opts.threads = threads;
    if (cmd->count("--seed")) opts.seed = seed;
  }

  if (simulate->parsed()) return chemo::cli::cmd_simulate(opts, std::cout, std::cerr);
  if (pes->parsed()) return chemo::cli::cmd_pes_rates(opts, std::cout, std::cerr);
  if (ids->parsed()) return chemo::cli::cmd_ids_rates(opts, std::cout, std::cerr);
  if (energy->parsed()) return chemo::cli::cmd_energy_check(opts, std::cout, std::cerr);
  return chemo::cli::cmd_semigroup_check(opts, std::cout, std::cerr);
}
