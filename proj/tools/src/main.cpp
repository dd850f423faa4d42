#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "coxbo/error.hpp"
#include "coxbo_cli/commands.hpp"
#include "coxbo_cli/ingest.hpp"

namespace {

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> replicates;
  std::string out;
};

void add_flags(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "flat key = value experiment file")->required()->check(CLI::ExistingFile);
  sub->add_option("--seed", f.seed, "base seed; replicate r uses seed + r");
  sub->add_option("--replicates", f.replicates, "number of seeded replicates");
  sub->add_option("--out", f.out, "output path (JSON, or the events CSV for synth)");
}

coxbo::cli::ExperimentConfig load(const Flags& f) {
  auto cfg = coxbo::cli::load_config(f.config);
  if (f.seed) cfg.seed = *f.seed;
  if (f.replicates) cfg.replicates = *f.replicates;
  return cfg;
}

void emit(const coxbo::cli::Json& result, const std::string& out) {
  const std::string text = result.dump(2) + "\n";
  if (out.empty()) {
    std::cout << text;
  } else {
    coxbo::cli::write_atomic(out, text);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MAP inference and Bayesian optimization for Gaussian Cox processes"};
  app.require_subcommand(1);
  Flags flags;
  auto* fit = app.add_subcommand("fit", "fit the posterior intensity to an event set");
  auto* bo = app.add_subcommand("bo", "run the sequential region-selection loop");
  auto* synth = app.add_subcommand("synth", "sample events from a synthetic intensity by thinning");
  auto* metrics = app.add_subcommand("metrics", "score an intensity curve against a known truth");
  for (auto* sub : {fit, bo, synth, metrics}) add_flags(sub, flags);

  CLI11_PARSE(app, argc, argv);

  try {
    if (fit->parsed()) emit(coxbo::cli::cmd_fit(load(flags)), flags.out);
    if (bo->parsed()) emit(coxbo::cli::cmd_bo(load(flags)), flags.out);
    if (synth->parsed()) emit(coxbo::cli::cmd_synth(load(flags), flags.out), "");
    if (metrics->parsed()) emit(coxbo::cli::cmd_metrics(load(flags)), flags.out);
  } catch (const coxbo::Error& e) {
    std::cerr << "error: " << coxbo::category_name(e.category()) << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: internal_error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
