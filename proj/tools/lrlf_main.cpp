#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "lrlf/errors.hpp"
#include "lrlf/pipeline.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Lyapunov-constrained learned filter workbench"};
  app.require_subcommand(1, 1);
  std::string config_path, out_dir;
  std::uint64_t seed = 0;
  bool quick = false;
  for (const char* name : {"train", "evaluate", "compare", "reproduce-paper"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON run configuration")->required();
    sub->add_flag("--quick", quick, "divide policy count, trials and training steps by the quick factor");
    sub->add_option("--seed", seed, "base seed (overrides the config)");
    sub->add_option("--out", out_dir, "output directory (overrides the config)");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    auto cfg = lrlf::load_config(config_path);
    cfg.command = lrlf::command_from_string(app.get_subcommands().front()->get_name());
    if (app.get_subcommands().front()->count("--seed") > 0) {
      cfg.seed = seed;
      cfg.train.seed = seed;
    }
    if (!out_dir.empty()) cfg.out = out_dir;
    cfg.validate();
    lrlf::run_command(cfg, quick);
  } catch (const lrlf::ConfigError& e) {
    std::cerr << "lrlf: configuration error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "lrlf: failed: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
