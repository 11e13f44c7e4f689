#include "bvf/surrogate.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "bvf/errors.hpp"
#include "bvf/parallel.hpp"

namespace bvf {

PCESurrogate PCESurrogate::train(const InputSpace& space, int degree,
                                 const SampleMatrix& design,
                                 const Eigen::MatrixXd& responses, const FitOptions& opts,
                                 std::vector<std::string> labels,
                                 const PCESurrogate* warm_from) {
  if (responses.rows() != design.rows())
    throw std::invalid_argument("train: response rows do not align with design rows");
  if (responses.cols() < 1) throw std::invalid_argument("train: need at least one output");

  PCESurrogate s;
  s.space_ = space;
  s.basis_ = PCEBasis::build(space, degree);
  s.design_ = design;
  const Eigen::MatrixXd psi = s.basis_.eval_design_matrix(to_standard(space, design));

  const bool warm = warm_from && warm_from->n_outputs() == responses.cols() &&
                    warm_from->basis().size() == s.basis_.size();
  const auto n_out = responses.cols();
  s.fits_.resize(static_cast<std::size_t>(n_out));
  s.loo_.resize(n_out);
  parallel_for(static_cast<std::size_t>(n_out), [&](std::size_t c) {
    const auto col = static_cast<Eigen::Index>(c);
    FitOptions col_opts = opts;
    if (warm) {
      const SparseFit& prev = warm_from->fits()[c];
      col_opts.warm_active = prev.active;
      col_opts.warm_alpha.assign(prev.alpha.begin(), prev.alpha.end());
    }
    s.fits_[c] = fit(psi, responses.col(col), col_opts);
    try {
      s.loo_(col) = loo_error(psi, responses.col(col), s.fits_[c]);
    } catch (const degenerate_leverage_error&) {
      s.loo_(col) = std::numeric_limits<double>::infinity();
    } catch (const undefined_denominator_error&) {
      s.loo_(col) = 0.0;  // constant column, fit is exact
    }
  });

  if (!labels.empty() && static_cast<Eigen::Index>(labels.size()) != n_out)
    throw std::invalid_argument("train: label count does not match outputs");
  if (labels.empty())
    for (Eigen::Index c = 0; c < n_out; ++c) labels.push_back("y" + std::to_string(c));
  s.labels_ = std::move(labels);
  return s;
}

void PCESurrogate::predict(const Eigen::RowVectorXd& theta, Eigen::VectorXd& mean,
                           Eigen::VectorXd& std) const {
  Eigen::MatrixXd m, sd;
  predict_batch(theta, m, sd);
  mean = m.row(0).transpose();
  std = sd.row(0).transpose();
}

void PCESurrogate::predict_batch(const SampleMatrix& thetas, Eigen::MatrixXd& mean,
                                 Eigen::MatrixXd& std) const {
  const Eigen::MatrixXd psi = basis_.eval_design_matrix(to_standard(space_, thetas));
  predict_from_design_rows(psi, mean, std);
}

void PCESurrogate::predict_from_design_rows(const Eigen::MatrixXd& psi,
                                            Eigen::MatrixXd& mean,
                                            Eigen::MatrixXd& std) const {
  const auto n = psi.rows();
  const auto n_out = static_cast<Eigen::Index>(fits_.size());
  mean.resize(n, n_out);
  std.resize(n, n_out);
  for (Eigen::Index c = 0; c < n_out; ++c) {
    const SparseFit& f = fits_[static_cast<std::size_t>(c)];
    const int a = static_cast<int>(f.active.size());
    if (a == 0) {
      mean.col(c).setZero();
      std.col(c).setConstant(std::sqrt(1.0 / f.beta));
      continue;
    }
    Eigen::MatrixXd psi_a(n, a);
    for (int i = 0; i < a; ++i) psi_a.col(i) = psi.col(f.active[i]);
    Eigen::VectorXd mu_a(a);
    for (int i = 0; i < a; ++i) mu_a(i) = f.mean(f.active[i]);
    mean.col(c) = psi_a * mu_a;
    Eigen::MatrixXd q = psi_a * f.covariance;
    Eigen::VectorXd quad = (q.array() * psi_a.array()).rowwise().sum().matrix();
    std.col(c) = (quad.array().max(0.0) + 1.0 / f.beta).sqrt().matrix();
  }
}

BatchPredictor PCESurrogate::predictor() const {
  return [this](const Eigen::MatrixXd& thetas, Eigen::MatrixXd& mean,
                Eigen::MatrixXd& std) { predict_batch(thetas, mean, std); };
}

double PCESurrogate::validation_error_on(const SampleMatrix& x_val,
                                         const Eigen::VectorXd& y_val, int output) const {
  Eigen::MatrixXd mean, std;
  predict_batch(x_val, mean, std);
  return validation_error(y_val, mean.col(output));
}

nlohmann::json PCESurrogate::to_json() const {
  nlohmann::json j;
  j["space"] = space_.to_json();
  j["degree"] = basis_.index_set.degree;
  j["labels"] = labels_;
  nlohmann::json design_rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < design_.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < design_.cols(); ++c) row.push_back(design_(r, c));
    design_rows.push_back(row);
  }
  j["design"] = design_rows;
  nlohmann::json fit_arr = nlohmann::json::array();
  for (std::size_t c = 0; c < fits_.size(); ++c) {
    const SparseFit& f = fits_[c];
    nlohmann::json entry;
    entry["active"] = f.active;
    std::vector<double> mu;
    for (int idx : f.active) mu.push_back(f.mean(idx));
    entry["mu"] = mu;
    entry["alpha"] = std::vector<double>(f.alpha.begin(), f.alpha.end());
    entry["beta"] = f.beta;
    entry["loo"] = std::isfinite(loo_(static_cast<Eigen::Index>(c)))
                       ? nlohmann::json(loo_(static_cast<Eigen::Index>(c)))
                       : nlohmann::json("inf");
    fit_arr.push_back(entry);
  }
  j["fits"] = fit_arr;
  return j;
}

PCESurrogate PCESurrogate::from_json(const nlohmann::json& j) {
  PCESurrogate s;
  s.space_ = InputSpace::from_json(j.at("space"));
  const int degree = j.at("degree").get<int>();
  s.basis_ = PCEBasis::build(s.space_, degree);
  s.labels_ = j.at("labels").get<std::vector<std::string>>();

  const auto& design_rows = j.at("design");
  const auto n = static_cast<Eigen::Index>(design_rows.size());
  s.design_.resize(n, s.space_.dim());
  for (Eigen::Index r = 0; r < n; ++r)
    for (int c = 0; c < s.space_.dim(); ++c)
      s.design_(r, c) = design_rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]
                            .get<double>();

  const Eigen::MatrixXd psi = s.basis_.eval_design_matrix(to_standard(s.space_, s.design_));
  const auto terms = static_cast<Eigen::Index>(s.basis_.size());

  const auto& fit_arr = j.at("fits");
  s.fits_.resize(fit_arr.size());
  s.loo_.resize(static_cast<Eigen::Index>(fit_arr.size()));
  for (std::size_t c = 0; c < fit_arr.size(); ++c) {
    const auto& entry = fit_arr[c];
    SparseFit f;
    f.n_train = static_cast<int>(n);
    f.active = entry.at("active").get<std::vector<int>>();
    auto mu = entry.at("mu").get<std::vector<double>>();
    auto alpha = entry.at("alpha").get<std::vector<double>>();
    f.beta = entry.at("beta").get<double>();
    f.mean = Eigen::VectorXd::Zero(terms);
    f.alpha.resize(static_cast<Eigen::Index>(alpha.size()));
    for (std::size_t i = 0; i < f.active.size(); ++i) {
      f.mean(f.active[i]) = mu[i];
      f.alpha(static_cast<Eigen::Index>(i)) = alpha[i];
    }
    const int a = static_cast<int>(f.active.size());
    if (a > 0) {
      // Rebuild the coefficient covariance from the stored design snapshot
      // and hyperparameters; identical arithmetic to the training path.
      Eigen::MatrixXd phi_a(n, a);
      for (int i = 0; i < a; ++i) phi_a.col(i) = psi.col(f.active[i]);
      Eigen::MatrixXd sigma_inv = f.beta * (phi_a.transpose() * phi_a);
      sigma_inv.diagonal() += f.alpha;
      Eigen::LLT<Eigen::MatrixXd> llt(sigma_inv);
      if (llt.info() != Eigen::Success)
        throw std::runtime_error("surrogate load: stored fit is not positive definite");
      f.covariance = llt.solve(Eigen::MatrixXd::Identity(a, a));
    }
    const auto& loo_json = entry.at("loo");
    s.loo_(static_cast<Eigen::Index>(c)) =
        loo_json.is_string() ? std::numeric_limits<double>::infinity()
                             : loo_json.get<double>();
    s.fits_[c] = std::move(f);
  }
  return s;
}

}  // namespace bvf
