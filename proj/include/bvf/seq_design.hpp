#ifndef BVF_SEQ_DESIGN_HPP
#define BVF_SEQ_DESIGN_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "bvf/adapters.hpp"
#include "bvf/bayes_val.hpp"
#include "bvf/surrogate.hpp"
#include "json.hpp"

namespace bvf {

enum class UtilityKind { bme, dkl, entropy };

UtilityKind utility_from_string(const std::string& s);
std::string utility_to_string(UtilityKind k);

struct SeqConfig {
  int n_init = 10;
  int n_candidates = 1000;  // candidate pool size per iteration
  int batch = 1;            // points added per iteration
  int max_runs = 50;        // total model evaluations allowed
  double loo_threshold = 0.0;  // stop early once max-output LOO falls below
  UtilityKind utility = UtilityKind::bme;
  int mc = 1000;       // Monte Carlo draws per utility evaluation
  int mc_trace = 0;    // prior draws for the per-iteration evidence trace (0: use mc)
  int degree = 2;      // expansion degree, re-fit each iteration
  std::uint64_t seed = 0;
  FitOptions fit;
};

struct SeqIteration {
  int ed_size = 0;                 // after this enrichment
  Eigen::MatrixXd chosen;          // batch x M, physical coordinates
  std::vector<double> pool_scores;
  double chosen_score = 0.0;
  int chosen_index = -1;           // within the iteration's pool
  double eps_loo = 0.0;            // max over outputs, post retrain
  double log_bme = 0.0;            // surrogate-based evidence estimate
  double dkl = 0.0;
  int fallback_count = 0;          // candidates scored by the BME fallback
};

struct DesignTrace {
  int n_init = 0;
  std::vector<SeqIteration> iterations;
  Eigen::MatrixXd design;     // full enriched design (initial rows first)
  Eigen::MatrixXd responses;

  nlohmann::json to_json() const;
  std::string to_csv(const std::string& provenance_line = {}) const;
};

struct SeqResult {
  PCESurrogate surrogate;
  DesignTrace trace;
  bool aborted = false;       // model failure mid-run; trace holds progress
  std::string error;
};

/// Sequential adaptive experimental design: start from a Latin hypercube
/// design, then repeatedly score a fresh candidate pool with the chosen
/// utility, evaluate the model at the winner(s) and retrain, until the
/// accuracy target or the run budget is reached.
SeqResult run_sequential(ModelAdapter& model, const InputSpace& space,
                         const ObservationSet& data, const ErrorBudget& budget,
                         const SeqConfig& cfg);

/// Scores per utility for one candidate point, sharing a single predictive
/// draw set (identical seeds reproduce identical draws across utilities).
struct UtilityScores {
  double log_bme = 0.0;
  double dkl = 0.0;
  double entropy = 0.0;
  double acceptance_rate = 0.0;
  double post_mean_log_prior = 0.0;  // posterior-mean log predictive density
};

/// Core evaluator on an explicit per-output predictive Gaussian
/// (mean, std) at the candidate; cov_diag is the data-side error
/// covariance. Throws rejection_starvation_error when no draw is accepted.
UtilityScores utility_scores_from_predictive(const Eigen::VectorXd& pred_mean,
                                             const Eigen::VectorXd& pred_std,
                                             const ObservationSet& data,
                                             const Eigen::VectorXd& cov_diag, int mc,
                                             std::uint64_t seed);

/// Expected-evidence utility at a candidate point (log space).
double utility_bme(const PCESurrogate& s, const ObservationSet& data,
                   const ErrorBudget& budget, const Eigen::RowVectorXd& d, int mc,
                   std::uint64_t seed);

/// Information-gain utility (KL divergence of the response posterior from
/// the predictive prior).
double utility_dkl(const PCESurrogate& s, const ObservationSet& data,
                   const ErrorBudget& budget, const Eigen::RowVectorXd& d, int mc,
                   std::uint64_t seed);

/// Information-entropy utility (selection minimizes it).
double utility_entropy(const PCESurrogate& s, const ObservationSet& data,
                       const ErrorBudget& budget, const Eigen::RowVectorXd& d, int mc,
                       std::uint64_t seed);

/// argmax for bme/dkl scores, argmin for entropy; ties resolve to the
/// lowest candidate index. Scores may be -inf but not NaN.
int select_next(const std::vector<double>& scores, UtilityKind kind);

}  // namespace bvf

#endif
