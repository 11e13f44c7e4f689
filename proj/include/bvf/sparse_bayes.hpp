#ifndef BVF_SPARSE_BAYES_HPP
#define BVF_SPARSE_BAYES_HPP

#include <Eigen/Dense>
#include <vector>

namespace bvf {

struct FitOptions {
  int max_iterations = 300;
  double ml_tolerance = 1e-7;      // stop when |delta log marginal| falls below
  double alpha_ceiling = 1e12;     // precision above which a term counts as pruned
  double beta_scale = 0.1;         // beta0 = 1 / (beta_scale * var(y))
  double add_gain_margin = -1.0;   // evidence a new term must add; < 0 -> ln(P)
  std::vector<int> warm_active;    // optional: active set to start from
  std::vector<double> warm_alpha;  // matching precisions (same length)
};

/// Posterior law of the expansion coefficients for one response: Gaussian
/// N(mean, covariance) restricted to the active terms, plus the optimized
/// hyperparameters. Inactive terms have exactly zero posterior mean.
struct SparseFit {
  Eigen::VectorXd mean;        // length P; zero on inactive terms
  Eigen::MatrixXd covariance;  // |active| x |active|
  std::vector<int> active;     // ascending basis indices
  Eigen::VectorXd alpha;       // per active term
  double beta = 0.0;           // noise precision
  double log_marginal = 0.0;
  std::vector<double> ml_path;  // log marginal likelihood after each sweep
  int n_train = 0;

  std::size_t n_terms() const { return static_cast<std::size_t>(mean.size()); }

  /// Predictive Gaussian at a new point: mean = mu' psi, variance =
  /// 1/beta + psi' Sigma psi (active entries of psi only).
  void predict(const Eigen::VectorXd& psi_row, double& mean_out, double& var_out) const;
};

/// Type-II maximum likelihood fit: sequential add/delete/re-estimate of
/// per-term precisions driven by the exact marginal-likelihood gain, with
/// the noise precision re-estimated each sweep. The marginal likelihood is
/// non-decreasing across sweeps.
SparseFit fit(const Eigen::MatrixXd& design, const Eigen::VectorXd& y,
              const FitOptions& opts = {});

/// Coefficient posterior for fixed hyperparameters: Sigma = (A + beta
/// Psi'Psi)^-1, mu = beta Sigma Psi' y over terms with alpha below the
/// ceiling. alpha = 0 is a flat prior on that term.
SparseFit posterior_given_hyperparameters(const Eigen::MatrixXd& design,
                                          const Eigen::VectorXd& y,
                                          const Eigen::VectorXd& alpha_full, double beta,
                                          double alpha_ceiling = 1e12);

/// Analytic leave-one-out error from hat-matrix leverages of the active
/// design columns. Exact for least-squares coefficients; throws
/// degenerate_leverage_error when some h_i = 1.
double loo_error(const Eigen::MatrixXd& design, const Eigen::VectorXd& y,
                 const SparseFit& fit);

/// Relative validation error over an independent set; model_y are the true
/// responses, surrogate_y the predictions. Throws
/// undefined_denominator_error when the model responses have zero variance.
double validation_error(const Eigen::VectorXd& model_y, const Eigen::VectorXd& surrogate_y);

}  // namespace bvf

#endif
