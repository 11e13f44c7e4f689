#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "bvf/cli.hpp"
#include "bvf/errors.hpp"

int main(int argc, char** argv) {
  CLI::App app{"bvf: Bayesian validation of forward models with sparse "
               "polynomial-chaos surrogates"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output_dir;
  bool have_seed = false;
  std::uint64_t seed_override = 0;

  auto* run = app.add_subcommand("run", "execute a run configuration");
  run->add_option("config", config_path, "JSON run configuration")->required();
  run->add_option("--out", output_dir, "override output directory");
  run->add_option("--seed", seed_override, "override the run seed")
      ->each([&](const std::string&) { have_seed = true; });

  auto* check = app.add_subcommand("validate-config", "parse and validate a configuration");
  check->add_option("config", config_path, "JSON run configuration")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    bvf::RunConfig cfg = bvf::load_config_file(config_path);
    if (check->parsed()) {
      std::cout << "config ok: mode resolved, all fields valid (hash "
                << cfg.config_hash << ")\n";
      return bvf::kExitOk;
    }
    if (!output_dir.empty()) cfg.output_dir = output_dir;
    if (have_seed) {
      cfg.seed = seed_override;
      cfg.seq.seed = seed_override;
    }
    return bvf::cmd_run(cfg, std::cout);
  } catch (const bvf::config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return bvf::kExitConfig;
  } catch (const bvf::model_failure_error& e) {
    std::cerr << "model failure: " << e.what() << "\n";
    if (!e.captured_output.empty()) std::cerr << e.captured_output << "\n";
    return bvf::kExitModelFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
