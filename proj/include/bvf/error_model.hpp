#ifndef BVF_ERROR_MODEL_HPP
#define BVF_ERROR_MODEL_HPP

#include <Eigen/Dense>
#include <string>

#include "json.hpp"

namespace bvf {

/// Independent Gaussian error sources per output; they add in variance.
struct ErrorBudget {
  Eigen::VectorXd measurement_std;     // per output
  Eigen::VectorXd discretization_std;  // per output (may be zero)
  bool include_surrogate_std = true;   // add predictive std at query time

  static ErrorBudget measurement_only(const Eigen::VectorXd& std);

  nlohmann::json to_json() const;
};

/// Total diagonal covariance: sigma_meas^2 + sigma_disc^2 (+ sigma_surr^2
/// when a surrogate std vector is supplied). Throws
/// singular_covariance_error when some diagonal entry is zero.
Eigen::VectorXd assemble_covariance(const ErrorBudget& budget,
                                    const Eigen::VectorXd* surrogate_std = nullptr);

/// Least-squares fit of f_k = f_limit + g h_k^order over >= 2 mesh
/// spacings; the discretization error estimate at mesh k is |g| h_k^order.
struct RichardsonFit {
  double f_limit = 0.0;            // extrapolated exact solution
  double g = 0.0;                  // error-term coefficient
  double order = 1.0;              // assumed observed order of accuracy
  Eigen::VectorXd error_estimate;  // per input mesh
};

RichardsonFit richardson_fit(const Eigen::VectorXd& spacings,
                             const Eigen::VectorXd& solutions, double order = 1.0);

/// Reads a two-column CSV (header "h,f") of a mesh study.
void read_mesh_study_csv(const std::string& path, Eigen::VectorXd& spacings,
                         Eigen::VectorXd& solutions);

}  // namespace bvf

#endif
