#ifndef BVF_BAYES_VAL_HPP
#define BVF_BAYES_VAL_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "bvf/error_model.hpp"
#include "json.hpp"

namespace bvf {

/// Measured data with per-point Gaussian error standard deviations.
struct ObservationSet {
  Eigen::VectorXd values;
  Eigen::VectorXd sigmas;
  std::vector<std::string> labels;

  ObservationSet() = default;
  ObservationSet(Eigen::VectorXd values, Eigen::VectorXd sigmas,
                 std::vector<std::string> labels = {});

  int size() const { return static_cast<int>(values.size()); }

  nlohmann::json to_json() const;
  static ObservationSet from_json(const nlohmann::json& j);
};

/// Batch predictor: fills per-point predictive means and standard
/// deviations (std may be zero rows for deterministic models).
using BatchPredictor =
    std::function<void(const Eigen::MatrixXd& thetas, Eigen::MatrixXd& mean,
                       Eigen::MatrixXd& std)>;

/// Log of the Gaussian likelihood with diagonal covariance (variances).
double gaussian_loglik(const Eigen::VectorXd& residual, const Eigen::VectorXd& cov_diag);

/// Per-sample log-likelihoods of the data under a predictor, with the
/// error budget (plus the predictor's own std when enabled) forming the
/// diagonal covariance. Chunked and parallel; deterministic.
Eigen::VectorXd pointwise_loglik(const BatchPredictor& predictor,
                                 const Eigen::MatrixXd& prior_samples,
                                 const ObservationSet& data, const ErrorBudget& budget);

/// log of the arithmetic mean of exp(loglik): log-sum-exp minus log n.
/// Returns -inf when all likelihoods underflow; never NaN.
double bme_from_logliks(const Eigen::VectorXd& logliks);

/// Brute-force Monte Carlo model evidence over prior samples.
double bme_mc(const BatchPredictor& predictor, const Eigen::MatrixXd& prior_samples,
              const ObservationSet& data, const ErrorBudget& budget);

/// Posterior draws by rejection against the maximum likelihood ratio.
struct PosteriorSample {
  Eigen::MatrixXd samples;       // accepted rows
  Eigen::VectorXd logliks;       // per accepted row
  std::vector<Eigen::Index> accepted_indices;
  double acceptance_rate = 0.0;
  Eigen::Index source_size = 0;
};

PosteriorSample rejection_posterior(const Eigen::MatrixXd& prior_samples,
                                    const Eigen::VectorXd& logliks, std::uint64_t seed);

/// Information gain from prior to posterior: -log BME + mean accepted
/// log-likelihood. Nonnegative up to Monte Carlo error.
double dkl_post_prior(double log_bme, const PosteriorSample& posterior);

/// Posterior model weights from log evidences and prior model weights
/// (normalized in log space).
Eigen::VectorXd model_weights(const Eigen::VectorXd& log_bmes,
                              const Eigen::VectorXd& prior_weights);

/// Bayes factor between two models with Jeffreys' grade of evidence.
/// Grades use the raw-BF thresholds {1,3,10,100}; factors below 1 grade
/// the evidence against the first model with magnitude 1/BF.
struct BayesFactor {
  double log10_bf = 0.0;
  std::string grade;     // "none" | "anecdotal" | "substantial" | "strong" | "decisive"
  bool against = false;  // grade applies against model k rather than for it
  std::string description() const;
};

BayesFactor bayes_factor(double log_bme_k, double log_bme_l);

/// Theoretically-optimal-model reference: log-BME sample of the observed
/// data against Gaussian-perturbed copies of itself. The weighted squared
/// residual statistic s follows a chi-square law with N_s degrees of
/// freedom, and log-BME = -(N_s/2) ln 2pi - sum ln sigma_i - s/2.
struct TomSample {
  Eigen::VectorXd log_bme;
  Eigen::VectorXd s_stat;
  int dof = 0;
  double log_const = 0.0;  // deterministic part of the log-likelihood
};

TomSample tom_logbme_distribution(const ObservationSet& data, int n_draws,
                                  std::uint64_t seed);

/// Same statistic evaluated on externally supplied perturbed datasets.
TomSample tom_logbme_from(const ObservationSet& data,
                          const std::vector<ObservationSet>& perturbed);

/// n independently perturbed copies of the data (per-point Gaussian noise).
std::vector<ObservationSet> perturb_data(const ObservationSet& data, int n,
                                         std::uint64_t seed);

/// Pooled draws from the predictive distribution under posterior parameter
/// samples: draws_per_theta Gaussian draws per accepted point, stacked to
/// (accepted * draws_per_theta) x n_outputs.
Eigen::MatrixXd posterior_predictive(const PosteriorSample& posterior,
                                     const BatchPredictor& predictor, int draws_per_theta,
                                     std::uint64_t seed);

/// Full model-comparison result.
struct ModelReport {
  std::string name;
  double log_bme = 0.0;
  double dkl = 0.0;
  double posterior_acceptance = 0.0;
  Eigen::VectorXd log_bme_perturbed;  // distribution over perturbed datasets
};

struct ValidationReport {
  std::vector<ModelReport> models;
  Eigen::VectorXd prior_weights;
  Eigen::VectorXd weights;
  std::vector<std::vector<BayesFactor>> bayes_factors;  // [k][l]
  TomSample tom;

  nlohmann::json to_json() const;
};

// Distribution helpers used by the TOM reference and its tests.
double chi2_pdf(double x, int dof);
double chi2_cdf(double x, int dof);

/// Kolmogorov-Smirnov distance of a sample against an analytic CDF.
double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf);

/// Asymptotic critical value of the one-sample KS test.
double ks_critical_value(double alpha, std::size_t n);

/// Numerically stable log(sum(exp(v))).
double log_sum_exp(const Eigen::VectorXd& v);

}  // namespace bvf

#endif
