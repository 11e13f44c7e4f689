#ifndef BVF_CLI_HPP
#define BVF_CLI_HPP

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bvf/bayes_val.hpp"
#include "bvf/error_model.hpp"
#include "bvf/input_space.hpp"
#include "bvf/seq_design.hpp"
#include "json.hpp"

namespace bvf {

enum class RunMode { train, seqdesign, validate, compare, tom };

/// One validated run definition, parsed from a JSON config file. Seeds are
/// explicit (no wall-clock defaults); reruns with the same config are
/// byte-identical.
struct RunConfig {
  RunMode mode = RunMode::train;
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  InputSpace space;
  std::vector<nlohmann::json> model_specs;
  std::optional<ObservationSet> observations;
  std::optional<ErrorBudget> budget;
  int degree = 2;

  // train
  int n_train = 50;
  SamplingMethod train_sampling = SamplingMethod::lhs;

  // seqdesign
  SeqConfig seq;

  // validate / compare
  int n_prior_samples = 10000;
  int n_perturbed = 100;
  bool use_surrogate = true;
  std::vector<double> prior_model_weights;  // empty = uniform

  // tom
  int tom_draws = 10000;

  std::string config_hash;  // hex of the canonical config serialization
};

/// Parses and validates; throws config_error naming the offending field.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config_file(const std::string& path);

/// Executes a run; writes artifacts under config.output_dir and prints a
/// short summary. Returns the process exit code (0 ok, 3 model failure).
int cmd_run(const RunConfig& config, std::ostream& log);

/// Exit codes shared with the executable.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitModelFailure = 3;

}  // namespace bvf

#endif
