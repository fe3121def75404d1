#include <cstdio>
#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "dlab/errors.hpp"
#include "dlab/experiments.hpp"

using namespace dlab;

int main(int argc, char** argv) {
  CLI::App app{"disk impedance experiments"};
  app.require_subcommand(1, 1);
  std::string config_path, out;
  std::uint64_t seed = 0;
  int threads = 0;
  const std::pair<const char*, const char*> commands[] = {
      {"lab", "invariant battery on random chain triples"},
      {"disk-spectrum", "acoustic eigenvalues for random diagonal impedance"},
      {"weyl-fit", "boundary counting function and its exponent"},
      {"criteria", "series, expectation and moment compactness criteria"},
      {"transition", "Monte Carlo Pareto transition"}};
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("config", config_path, "experiment config file");
    sub->add_option("--seed", seed, "override run.seed");
    sub->add_option("--out", out, "output directory");
    sub->add_option("--threads", threads, "override run.threads")->check(CLI::PositiveNumber);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }
  const auto* sub = app.get_subcommands().front();
  try {
    ExperimentConfig cfg = config_path.empty() ? ExperimentConfig{} : ExperimentConfig::load(config_path);
    cfg.command = sub->get_name();
    if (sub->count("--seed")) cfg.run.seed = seed;
    if (sub->count("--threads")) cfg.run.threads = threads;
    std::string dir = out;
    if (dir.empty()) dir = cfg.run.out;
    if (dir.empty()) {
      const char* env = std::getenv("DLAB_OUT");
      dir = env && *env ? env : "dlab_out";
    }
    const RunManifest man = run_command(cfg, dir);
    std::printf("%s: %zu files written to %s\n", man.command.c_str(), man.files.size(), dir.c_str());
    return 0;
  } catch (const InvalidArgument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const InvariantViolation& e) {
    std::fprintf(stderr, "invariant violation: %s\n", e.what());
    return 2;
  } catch (const NumericalFailure& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  } catch (const SpectralPointError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
