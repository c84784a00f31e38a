#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "netcut/commands.hpp"

namespace {

struct Overrides {
  std::string config = "config.json";
  std::optional<double> deadline_ms;
  std::optional<std::string> estimator;
  std::optional<std::string> granularity;
  std::optional<std::size_t> jobs;
  std::optional<std::string> out;
};

void add_common(CLI::App* sub, Overrides& o) {
  sub->add_option("--config", o.config, "run config JSON")->capture_default_str();
  sub->add_option("--deadline-ms", o.deadline_ms, "latency deadline in ms");
  sub->add_option("--estimator", o.estimator, "profiler, analytical or both")
      ->check(CLI::IsMember({"profiler", "analytical", "both"}));
  sub->add_option("--granularity", o.granularity, "layer or block")->check(CLI::IsMember({"layer", "block"}));
  sub->add_option("--jobs", o.jobs, "worker threads")->check(CLI::PositiveNumber);
  sub->add_option("--out", o.out, "output directory");
}

netcut::RunConfig load(const Overrides& o) {
  auto cfg = netcut::load_config(o.config);
  if (o.deadline_ms) {
    if (!(*o.deadline_ms > 0)) throw netcut::ConfigError("--deadline-ms must be > 0");
    cfg.deadline_ms = o.deadline_ms;
  }
  if (o.estimator) cfg.estimator = netcut::parse_estimator(*o.estimator);
  if (o.granularity) cfg.granularity = netcut::parse_granularity(*o.granularity);
  if (o.jobs) cfg.jobs = *o.jobs;
  if (o.out) cfg.output_dir = std::filesystem::absolute(*o.out).string();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace netcut;
  CLI::App app{"Latency-driven layer removal for pretrained networks"};
  app.set_version_flag("--version", cli::kVersion);
  app.require_subcommand(1);

  Overrides o;
  auto* validate = app.add_subcommand("validate", "load and cross-check every input");
  auto* estimate = app.add_subcommand("estimate", "estimate the latency of one trimmed network");
  auto* explore = app.add_subcommand("explore", "pick the most accurate network that meets the deadline");
  auto* pareto = app.add_subcommand("pareto", "evaluate every blockwise candidate and extract the frontier");
  auto* train = app.add_subcommand("train-model", "tune and train the analytical latency model");
  for (auto* s : {validate, estimate, explore, pareto, train}) add_common(s, o);

  std::string network;
  std::size_t cutpoint = 0;
  std::optional<std::string> truth;
  estimate->add_option("--network", network, "network name")->required();
  estimate->add_option("--cutpoint", cutpoint, "layers removed from the head end")->required();
  estimate->add_option("--ground-truth", truth, "measured latency CSV (network,cutpoint,latency_ms)");
  bool svg = false;
  pareto->add_flag("--svg", svg, "also write an SVG scatter plot");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : cli::kConfigError;
  }

  return cli::guarded(std::cerr, [&] {
    auto cfg = load(o);
    if (validate->parsed()) return cli::cmd_validate(cfg, std::cout, std::cerr);
    if (estimate->parsed()) {
      if (truth) cfg.ground_truth = std::filesystem::absolute(*truth).string();
      return cli::cmd_estimate(cfg, network, cutpoint, std::cout, std::cerr);
    }
    if (explore->parsed()) return cli::cmd_explore(cfg, std::cout, std::cerr);
    if (pareto->parsed()) return cli::cmd_pareto(cfg, svg, std::cout, std::cerr);
    return cli::cmd_train_model(cfg, std::cout, std::cerr);
  });
}
