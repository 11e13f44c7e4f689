#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "bvf/cli.hpp"
#include "bvf/errors.hpp"
#include "doctest.h"

using namespace bvf;
namespace fs = std::filesystem;

namespace {

nlohmann::json base_space() {
  nlohmann::json space = nlohmann::json::array();
  for (int i = 0; i < 10; ++i)
    space.push_back({{"name", "theta" + std::to_string(i + 1)},
                     {"type", "uniform"},
                     {"params", {{"lower", -5.0}, {"upper", 5.0}}}});
  return space;
}

nlohmann::json benchmark_observations() {
  return {{"values", std::vector<double>(10, 2.0)},
          {"sigmas", std::vector<double>(10, 2.0)}};
}

std::map<std::string, std::string> snapshot_dir(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::ifstream in(entry.path(), std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    files[entry.path().filename().string()] = ss.str();
  }
  return files;
}

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("config validation names the offending field") {
  nlohmann::json cfg = {{"mode", "compare"},
                        {"seed", 1},
                        {"space", base_space()},
                        {"observations", benchmark_observations()},
                        {"models", {{{"kind", "analytic10d"}},
                                    {{"kind", "analytic10d-biased"}}}},
                        {"seq", {{"utility", "entropy2"}}}};
  try {
    parse_config(cfg);
    FAIL("expected config_error");
  } catch (const config_error& e) {
    CHECK(e.field == "seq.utility");
    CHECK(std::string(e.what()).find("entropy2") != std::string::npos);
  }

  SUBCASE("missing seed") {
    cfg.erase("seed");
    cfg["seq"] = {{"utility", "bme"}};
    CHECK_THROWS_WITH_AS(parse_config(cfg), "seed: missing (explicit seeds required)",
                         config_error);
  }
  SUBCASE("unknown mode") {
    cfg["mode"] = "trainx";
    CHECK_THROWS_AS(parse_config(cfg), config_error);
  }
  SUBCASE("compare needs two models") {
    cfg["seq"] = {{"utility", "bme"}};
    cfg["models"] = {{{"kind", "analytic10d"}}};
    try {
      parse_config(cfg);
      FAIL("expected config_error");
    } catch (const config_error& e) {
      CHECK(e.field == "models");
    }
  }
  SUBCASE("bad marginal type points into the space array") {
    cfg["seq"] = {{"utility", "bme"}};
    cfg["space"][3]["type"] = "triangular";
    try {
      parse_config(cfg);
      FAIL("expected config_error");
    } catch (const config_error& e) {
      CHECK(e.field.find("space[3]") != std::string::npos);
    }
  }
}

TEST_CASE("compare mode produces a normalized report") {
  fs::path out = fresh_dir("bvf_cli_compare");
  nlohmann::json cfg_json = {
      {"mode", "compare"},
      {"seed", 20250810},
      {"output_dir", out.string()},
      {"space", base_space()},
      {"observations", benchmark_observations()},
      {"models",
       {{{"kind", "analytic10d"}, {"name", "true_model"}},
        {{"kind", "analytic10d-biased"}, {"bias", 1.0}, {"name", "biased_model"}}}},
      {"validate", {{"n_prior_samples", 4000}, {"n_perturbed", 20}, {"surrogate", false}}}};
  RunConfig cfg = parse_config(cfg_json);
  std::ostringstream log;
  REQUIRE(cmd_run(cfg, log) == kExitOk);

  std::ifstream report_in(out / "report.json");
  REQUIRE(report_in.good());
  nlohmann::json report;
  report_in >> report;
  const auto weights = report["weights"].get<std::vector<double>>();
  REQUIRE(weights.size() == 2);
  CHECK(std::abs(weights[0] + weights[1] - 1.0) < 1e-12);
  CHECK(report["provenance"]["config_hash"] == cfg.config_hash);
  CHECK(fs::exists(out / "tom_hist.csv"));
  CHECK(fs::exists(out / "bme_hist_model0.csv"));
  fs::remove_all(out);
}

TEST_CASE("identical config and seed reruns are byte-identical") {
  fs::path out = fresh_dir("bvf_cli_determinism");
  nlohmann::json cfg_json = {
      {"mode", "seqdesign"},
      {"seed", 99},
      {"output_dir", out.string()},
      {"space",
       {{{"type", "uniform"}, {"params", {{"lower", -1.0}, {"upper", 1.0}}}},
        {{"type", "uniform"}, {"params", {{"lower", -1.0}, {"upper", 1.0}}}}}},
      {"observations",
       {{"values", {0.1, -0.3}}, {"sigmas", {0.5, 0.5}}}},
      {"models", {{{"kind", "identity"}, {"dim", 2}}}},
      {"basis", {{"degree", 1}}},
      {"seq",
       {{"n_init", 5}, {"max_runs", 8}, {"n_candidates", 25}, {"mc", 100},
        {"utility", "dkl"}}}};
  RunConfig cfg = parse_config(cfg_json);
  std::ostringstream log;
  REQUIRE(cmd_run(cfg, log) == kExitOk);
  auto first = snapshot_dir(out);
  REQUIRE(cmd_run(cfg, log) == kExitOk);
  auto second = snapshot_dir(out);
  REQUIRE(first.size() == second.size());
  CHECK(first == second);
  // Trace CSV carries the provenance line.
  CHECK(first.at("trace.csv").find("config_hash=" + cfg.config_hash) != std::string::npos);
  fs::remove_all(out);
}

TEST_CASE("tom mode emits the chi-square summary") {
  fs::path out = fresh_dir("bvf_cli_tom");
  nlohmann::json cfg_json = {{"mode", "tom"},
                             {"seed", 5},
                             {"output_dir", out.string()},
                             {"space", base_space()},
                             {"observations", benchmark_observations()},
                             {"tom", {{"n_draws", 2000}}}};
  std::ostringstream log;
  REQUIRE(cmd_run(parse_config(cfg_json), log) == kExitOk);
  std::ifstream in(out / "tom.json");
  nlohmann::json tom;
  in >> tom;
  CHECK(tom["dof"] == 10);
  CHECK(tom["ks_pass_1pct"].get<bool>());
  fs::remove_all(out);
}

TEST_CASE("train mode writes a loadable surrogate") {
  fs::path out = fresh_dir("bvf_cli_train");
  nlohmann::json cfg_json = {
      {"mode", "train"},
      {"seed", 3},
      {"output_dir", out.string()},
      {"space",
       {{{"type", "uniform"}, {"params", {{"lower", -1.0}, {"upper", 1.0}}}}}},
      {"models", {{{"kind", "identity"}, {"dim", 1}}}},
      {"basis", {{"degree", 1}}},
      {"train", {{"n_train", 12}}}};
  std::ostringstream log;
  REQUIRE(cmd_run(parse_config(cfg_json), log) == kExitOk);
  std::ifstream in(out / "surrogate.json");
  REQUIRE(in.good());
  nlohmann::json sj;
  in >> sj;
  PCESurrogate s = PCESurrogate::from_json(sj);
  Eigen::VectorXd mean, stddev;
  s.predict(Eigen::RowVectorXd::Constant(1, 0.4), mean, stddev);
  CHECK(std::abs(mean(0) - 0.4) < 1e-6);
  CHECK(log.str().find("eps_loo") != std::string::npos);
  fs::remove_all(out);
}

TEST_CASE("validate mode reports a single model against TOM") {
  fs::path out = fresh_dir("bvf_cli_validate");
  nlohmann::json cfg_json = {
      {"mode", "validate"},
      {"seed", 8},
      {"output_dir", out.string()},
      {"space", base_space()},
      {"observations", benchmark_observations()},
      {"models", {{{"kind", "analytic10d"}}}},
      {"validate", {{"n_prior_samples", 2000}, {"n_perturbed", 10}, {"surrogate", false}}}};
  std::ostringstream log;
  REQUIRE(cmd_run(parse_config(cfg_json), log) == kExitOk);
  std::ifstream in(out / "report.json");
  nlohmann::json report;
  in >> report;
  REQUIRE(report["models"].size() == 1);
  CHECK(report["models"][0]["log_bme_perturbed"].size() == 10);
  CHECK(report["weights"][0] == 1.0);
  fs::remove_all(out);
}
