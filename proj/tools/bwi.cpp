#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "bwi/common/error.hpp"
#include "bwi/scenario/config.hpp"
#include "bwi/scenario/pipeline.hpp"
#include "bwi/scenario/world.hpp"

namespace {

int exit_code(const bwi::Error& e) {
  return e.category() == bwi::ErrorCategory::Solver ? 2 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  namespace fs = std::filesystem;
  CLI::App app{"Ballast water regulation impact simulator"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::optional<std::uint64_t> seed;

  auto* run = app.add_subcommand("run", "Run every stage and write a report bundle");
  run->add_option("--config", config_path, "Scenario config file")->required();
  run->add_option("--out", out_dir, "Bundle directory")->required();
  run->add_option("--seed", seed, "Generate the input world from this seed");

  std::string scale_name = "desk";
  std::uint64_t world_seed = 1;
  auto* world = app.add_subcommand("world", "Generate a synthetic input world");
  world->add_option("--scale", scale_name, "tiny, desk or paper_mirror")
      ->check(CLI::IsMember({"tiny", "desk", "paper_mirror"}));
  world->add_option("--seed", world_seed, "World seed")->required();
  world->add_option("--out", out_dir, "Output directory")->required();

  std::string bundle_a, bundle_b;
  auto* compare = app.add_subcommand("compare", "Diff two report bundles of the same world");
  compare->add_option("a", bundle_a, "First bundle")->required();
  compare->add_option("b", bundle_b, "Second bundle")->required();

  std::vector<std::pair<std::string, CLI::App*>> stages;
  for (const auto& [name, fn] : bwi::stage_table()) {
    auto* sub = app.add_subcommand(name, fmt::format("Run the {} stage only", name));
    sub->add_option("--config", config_path, "Scenario config file")->required();
    sub->add_option("--out", out_dir, "Bundle directory")->required();
    stages.emplace_back(name, sub);
  }

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const auto r = bwi::run_pipeline(config_path, out_dir, bwi::RunOptions{seed});
      double total = 0.0;
      for (const auto& t : r.timings) total += t.seconds;
      std::cout << fmt::format("wrote {} (config {}, world {}, {:.2f} s)\n", r.bundle.string(),
                               r.config_hash, r.world_hash, total);
      return 0;
    }
    if (*world) {
      const auto w = bwi::generate_world(world_seed, *bwi::parse_scale(scale_name));
      bwi::write_world(w, out_dir);
      std::cout << fmt::format("wrote {} world to {}\n", scale_name, out_dir);
      return 0;
    }
    if (*compare) {
      std::cout << bwi::render_markdown(bwi::compare_bundles(bundle_a, bundle_b));
      return 0;
    }
    for (const auto& [name, sub] : stages) {
      if (!*sub) continue;
      const auto cfg = bwi::load_config(config_path);
      fs::create_directories(out_dir);
      bwi::run_stage(name, cfg, out_dir);
      return 0;
    }
  } catch (const bwi::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
