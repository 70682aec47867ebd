#include "cgauge/commands.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Collision-resolved pressure gauge toolkit"};
  app.set_version_flag("--version", CGAUGE_VERSION);
  app.require_subcommand(1);

  std::string config;
  std::uint64_t seed = 0;
  std::string out_dir;
  if (const char* env = std::getenv("COLLISION_GAUGE_OUT")) out_dir = env;
  if (out_dir.empty()) out_dir = ".";

  for (const char* name : {"spectrum", "snr", "simulate-detect", "infer"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config, "JSON config file")->required();
    sub->add_option("--seed", seed, "Master random seed");
    sub->add_option("--out", out_dir, "Output directory (default: $COLLISION_GAUGE_OUT or .)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  cgauge::commands::Context ctx;
  ctx.out_dir = out_dir;
  for (auto* sub : app.get_subcommands()) {
    if (sub->count("--seed")) ctx.seed = seed;
    return cgauge::commands::run(sub->get_name(), config, ctx, std::cout, std::cerr);
  }
  return 1;
}
