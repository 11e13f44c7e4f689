#include "bvf/error_model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "bvf/errors.hpp"

namespace bvf {

ErrorBudget ErrorBudget::measurement_only(const Eigen::VectorXd& std) {
  ErrorBudget b;
  b.measurement_std = std;
  b.discretization_std = Eigen::VectorXd::Zero(std.size());
  return b;
}

nlohmann::json ErrorBudget::to_json() const {
  nlohmann::json j;
  j["measurement_std"] = std::vector<double>(measurement_std.begin(), measurement_std.end());
  j["discretization_std"] =
      std::vector<double>(discretization_std.begin(), discretization_std.end());
  j["include_surrogate_std"] = include_surrogate_std;
  return j;
}

Eigen::VectorXd assemble_covariance(const ErrorBudget& budget,
                                    const Eigen::VectorXd* surrogate_std) {
  const auto n = budget.measurement_std.size();
  if (budget.discretization_std.size() != n)
    throw std::invalid_argument("assemble_covariance: budget dimensions disagree");
  if (surrogate_std && surrogate_std->size() != n)
    throw std::invalid_argument("assemble_covariance: surrogate std dimension mismatch");
  if ((budget.measurement_std.array() < 0).any() ||
      (budget.discretization_std.array() < 0).any())
    throw std::invalid_argument("assemble_covariance: negative standard deviation");

  Eigen::VectorXd var = budget.measurement_std.array().square() +
                        budget.discretization_std.array().square();
  if (surrogate_std && budget.include_surrogate_std)
    var += surrogate_std->array().square().matrix();
  for (Eigen::Index i = 0; i < n; ++i)
    if (!(var(i) > 0.0))
      throw singular_covariance_error("assemble_covariance: zero variance at output " +
                                      std::to_string(i));
  return var;
}

RichardsonFit richardson_fit(const Eigen::VectorXd& spacings,
                             const Eigen::VectorXd& solutions, double order) {
  const auto k = spacings.size();
  if (k < 2) throw std::invalid_argument("richardson_fit: need at least 2 meshes");
  if (solutions.size() != k)
    throw std::invalid_argument("richardson_fit: spacing/solution length mismatch");
  if (!(order >= 1.0)) throw std::invalid_argument("richardson_fit: order must be >= 1");

  Eigen::MatrixXd a(k, 2);
  a.col(0).setOnes();
  for (Eigen::Index i = 0; i < k; ++i) a(i, 1) = std::pow(spacings(i), order);
  // Identical spacings make the two columns collinear.
  if ((a.col(1).array() - a(0, 1)).abs().maxCoeff() < 1e-14 * std::abs(a(0, 1)))
    throw rank_deficient_error("richardson_fit: mesh spacings are not distinct");

  Eigen::Vector2d coef =
      (a.transpose() * a).ldlt().solve(a.transpose() * solutions);
  RichardsonFit fit;
  fit.f_limit = coef(0);
  fit.g = coef(1);
  fit.order = order;
  fit.error_estimate = (std::abs(fit.g) * a.col(1).array()).matrix();
  return fit;
}

void read_mesh_study_csv(const std::string& path, Eigen::VectorXd& spacings,
                         Eigen::VectorXd& solutions) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open mesh study file: " + path);
  std::string line;
  std::vector<double> h, f;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (header) {  // "h,f"
      header = false;
      continue;
    }
    std::istringstream row(line);
    std::string cell;
    if (!std::getline(row, cell, ',')) continue;
    double hv = std::stod(cell);
    if (!std::getline(row, cell, ','))
      throw std::runtime_error("mesh study row missing f column: " + line);
    double fv = std::stod(cell);
    h.push_back(hv);
    f.push_back(fv);
  }
  spacings = Eigen::Map<Eigen::VectorXd>(h.data(), static_cast<Eigen::Index>(h.size()));
  solutions = Eigen::Map<Eigen::VectorXd>(f.data(), static_cast<Eigen::Index>(f.size()));
}

}  // namespace bvf
