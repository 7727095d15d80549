#include <iostream>

#include "CLI11.hpp"
#include "lrbs/experiment.hpp"
#include "lrbs/snapshot.hpp"

int main(int argc, char** argv) {
  CLI::App app{"lrbs: logistic branching random systems"};
  app.require_subcommand(1);

  std::string config_path;
  lrbs::ExperimentOptions opt;
  bool dry_run = false;

  for (const auto& name : lrbs::experiment_names()) {
    auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
    sub->add_option("-c,--config", config_path, "config file")->required()->check(CLI::ExistingFile);
    sub->add_option("-o,--out", opt.out_dir, "output directory")->capture_default_str();
    sub->add_flag("--plots", opt.plots, "also write SVG plots");
    sub->add_option("-t,--threads", opt.threads, "worker threads (0 = all cores)")->capture_default_str();
    sub->add_flag("--dry-run", dry_run, "parse the config and print derived constants only");
  }

  CLI11_PARSE(app, argc, argv);
  const auto* sub = app.get_subcommands().front();
  const auto kind = lrbs::parse_experiment_kind(sub->get_name());

  try {
    const auto cfg = lrbs::load_config(config_path, kind);
    std::cout << "experiment = " << sub->get_name() << "\n";
    for (const auto& [k, v] : cfg.echo) std::cout << k << " = " << v << "\n";
    if (dry_run) return 0;
    const auto res = lrbs::run_experiment(cfg, opt);
    for (const auto& f : res.files) std::cout << "wrote " << f << "\n";
    std::cout << res.headline << "\n";
  } catch (const lrbs::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const lrbs::SnapshotError& e) {
    std::cerr << "snapshot error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
