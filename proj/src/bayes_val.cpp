#include "bvf/bayes_val.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "bvf/errors.hpp"
#include "bvf/parallel.hpp"
#include "bvf/rng.hpp"

namespace bvf {

namespace {
constexpr double kLn2Pi = 1.8378770664093454836;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}  // namespace

ObservationSet::ObservationSet(Eigen::VectorXd values_in, Eigen::VectorXd sigmas_in,
                               std::vector<std::string> labels_in)
    : values(std::move(values_in)), sigmas(std::move(sigmas_in)), labels(std::move(labels_in)) {
  if (values.size() < 1)
    throw std::invalid_argument("ObservationSet: need at least one data point");
  if (sigmas.size() != values.size())
    throw std::invalid_argument("ObservationSet: sigma length mismatch");
  if (!(sigmas.array() > 0.0).all())
    throw std::invalid_argument("ObservationSet: error stds must be positive");
}

nlohmann::json ObservationSet::to_json() const {
  nlohmann::json j;
  j["values"] = std::vector<double>(values.begin(), values.end());
  j["sigmas"] = std::vector<double>(sigmas.begin(), sigmas.end());
  if (!labels.empty()) j["labels"] = labels;
  return j;
}

ObservationSet ObservationSet::from_json(const nlohmann::json& j) {
  auto vals = j.at("values").get<std::vector<double>>();
  auto sigs = j.at("sigmas").get<std::vector<double>>();
  std::vector<std::string> labels;
  if (j.contains("labels")) labels = j["labels"].get<std::vector<std::string>>();
  return ObservationSet(
      Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size())),
      Eigen::Map<Eigen::VectorXd>(sigs.data(), static_cast<Eigen::Index>(sigs.size())),
      std::move(labels));
}

double gaussian_loglik(const Eigen::VectorXd& residual, const Eigen::VectorXd& cov_diag) {
  const auto n = residual.size();
  if (cov_diag.size() != n)
    throw std::invalid_argument("gaussian_loglik: dimension mismatch");
  if (!(cov_diag.array() > 0.0).all())
    throw std::invalid_argument("gaussian_loglik: non-positive variance");
  double ll = -0.5 * static_cast<double>(n) * kLn2Pi;
  ll -= 0.5 * cov_diag.array().log().sum();
  ll -= 0.5 * (residual.array().square() / cov_diag.array()).sum();
  return ll;
}

double log_sum_exp(const Eigen::VectorXd& v) {
  double vmax = kNegInf;
  for (Eigen::Index i = 0; i < v.size(); ++i) vmax = std::max(vmax, v(i));
  if (!std::isfinite(vmax)) return kNegInf;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) acc += std::exp(v(i) - vmax);
  return vmax + std::log(acc);
}

Eigen::VectorXd pointwise_loglik(const BatchPredictor& predictor,
                                 const Eigen::MatrixXd& prior_samples,
                                 const ObservationSet& data, const ErrorBudget& budget) {
  const auto n = prior_samples.rows();
  if (n == 0) throw std::invalid_argument("pointwise_loglik: empty sample set");

  Eigen::VectorXd logliks(n);
  const Eigen::Index chunk = 4096;
  const auto n_chunks = static_cast<std::size_t>((n + chunk - 1) / chunk);
  parallel_for(n_chunks, [&](std::size_t ci) {
    const Eigen::Index begin = static_cast<Eigen::Index>(ci) * chunk;
    const Eigen::Index len = std::min(chunk, n - begin);
    Eigen::MatrixXd mean, std_out;
    predictor(prior_samples.middleRows(begin, len), mean, std_out);
    if (mean.cols() != data.size())
      throw std::invalid_argument("pointwise_loglik: predictor output dimension mismatch");
    const bool with_surr = budget.include_surrogate_std && std_out.size() > 0;
    Eigen::VectorXd base_cov;
    if (!with_surr) base_cov = assemble_covariance(budget, nullptr);
    for (Eigen::Index i = 0; i < len; ++i) {
      if (with_surr) {
        Eigen::VectorXd surr = std_out.row(i).transpose();
        logliks(begin + i) = gaussian_loglik(data.values - mean.row(i).transpose(),
                                             assemble_covariance(budget, &surr));
      } else {
        logliks(begin + i) =
            gaussian_loglik(data.values - mean.row(i).transpose(), base_cov);
      }
    }
  });
  return logliks;
}

double bme_from_logliks(const Eigen::VectorXd& logliks) {
  if (logliks.size() == 0) throw std::invalid_argument("bme_from_logliks: empty input");
  const double lse = log_sum_exp(logliks);
  if (!std::isfinite(lse)) return kNegInf;
  return lse - std::log(static_cast<double>(logliks.size()));
}

double bme_mc(const BatchPredictor& predictor, const Eigen::MatrixXd& prior_samples,
              const ObservationSet& data, const ErrorBudget& budget) {
  return bme_from_logliks(pointwise_loglik(predictor, prior_samples, data, budget));
}

PosteriorSample rejection_posterior(const Eigen::MatrixXd& prior_samples,
                                    const Eigen::VectorXd& logliks, std::uint64_t seed) {
  const auto n = prior_samples.rows();
  if (logliks.size() != n)
    throw std::invalid_argument("rejection_posterior: loglik length mismatch");
  double lmax = kNegInf;
  for (Eigen::Index i = 0; i < n; ++i) lmax = std::max(lmax, logliks(i));
  if (!std::isfinite(lmax))
    throw no_posterior_support_error(
        "rejection_posterior: every log-likelihood is -inf");

  Rng rng(seed);
  std::vector<Eigen::Index> accepted;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double u = rng.uniform01();
    if (std::isfinite(logliks(i)) && u < std::exp(logliks(i) - lmax))
      accepted.push_back(i);
  }

  PosteriorSample post;
  post.source_size = n;
  post.acceptance_rate = static_cast<double>(accepted.size()) / static_cast<double>(n);
  post.samples.resize(static_cast<Eigen::Index>(accepted.size()), prior_samples.cols());
  post.logliks.resize(static_cast<Eigen::Index>(accepted.size()));
  for (std::size_t i = 0; i < accepted.size(); ++i) {
    post.samples.row(static_cast<Eigen::Index>(i)) = prior_samples.row(accepted[i]);
    post.logliks(static_cast<Eigen::Index>(i)) = logliks(accepted[i]);
  }
  post.accepted_indices = std::move(accepted);
  return post;
}

double dkl_post_prior(double log_bme, const PosteriorSample& posterior) {
  if (posterior.logliks.size() == 0)
    throw std::invalid_argument("dkl_post_prior: empty posterior");
  return -log_bme + posterior.logliks.mean();
}

Eigen::VectorXd model_weights(const Eigen::VectorXd& log_bmes,
                              const Eigen::VectorXd& prior_weights) {
  const auto k = log_bmes.size();
  if (prior_weights.size() != k)
    throw std::invalid_argument("model_weights: length mismatch");
  if (std::abs(prior_weights.sum() - 1.0) > 1e-9)
    throw std::invalid_argument("model_weights: prior weights must sum to 1");
  Eigen::VectorXd log_post(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    if (!(prior_weights(i) >= 0.0))
      throw std::invalid_argument("model_weights: negative prior weight");
    log_post(i) = prior_weights(i) > 0.0 ? log_bmes(i) + std::log(prior_weights(i)) : kNegInf;
  }
  const double norm = log_sum_exp(log_post);
  if (!std::isfinite(norm))
    throw undefined_weights_error("model_weights: all model evidences are zero");
  Eigen::VectorXd w(k);
  for (Eigen::Index i = 0; i < k; ++i) w(i) = std::exp(log_post(i) - norm);
  return w;
}

std::string BayesFactor::description() const {
  if (grade == "none") return "no evidence either way";
  return grade + " evidence " + (against ? "against" : "for") + " the first model";
}

BayesFactor bayes_factor(double log_bme_k, double log_bme_l) {
  if (!std::isfinite(log_bme_k) || !std::isfinite(log_bme_l))
    throw std::invalid_argument("bayes_factor: log evidences must be finite");
  BayesFactor bf;
  const double ln_bf = log_bme_k - log_bme_l;
  bf.log10_bf = ln_bf / 2.302585092994045684;
  bf.against = ln_bf < 0.0;
  const double magnitude = std::exp(std::abs(ln_bf));
  if (magnitude <= 1.0)
    bf.grade = "none";
  else if (magnitude <= 3.0)
    bf.grade = "anecdotal";
  else if (magnitude <= 10.0)
    bf.grade = "substantial";
  else if (magnitude <= 100.0)
    bf.grade = "strong";
  else
    bf.grade = "decisive";
  return bf;
}

TomSample tom_logbme_from(const ObservationSet& data,
                          const std::vector<ObservationSet>& perturbed) {
  TomSample tom;
  tom.dof = data.size();
  tom.log_const = -0.5 * data.size() * kLn2Pi - data.sigmas.array().log().sum();
  tom.s_stat.resize(static_cast<Eigen::Index>(perturbed.size()));
  tom.log_bme.resize(static_cast<Eigen::Index>(perturbed.size()));
  for (std::size_t i = 0; i < perturbed.size(); ++i) {
    const double s = ((data.values - perturbed[i].values).array() / data.sigmas.array())
                         .square()
                         .sum();
    tom.s_stat(static_cast<Eigen::Index>(i)) = s;
    tom.log_bme(static_cast<Eigen::Index>(i)) = tom.log_const - 0.5 * s;
  }
  return tom;
}

TomSample tom_logbme_distribution(const ObservationSet& data, int n_draws,
                                  std::uint64_t seed) {
  if (n_draws < 1) throw std::invalid_argument("tom_logbme_distribution: n_draws >= 1");
  return tom_logbme_from(data, perturb_data(data, n_draws, seed));
}

std::vector<ObservationSet> perturb_data(const ObservationSet& data, int n,
                                         std::uint64_t seed) {
  if (n < 0) throw std::invalid_argument("perturb_data: n must be >= 0");
  Rng rng(seed);
  std::vector<ObservationSet> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd values = data.values;
    for (Eigen::Index j = 0; j < values.size(); ++j)
      values(j) += data.sigmas(j) * rng.normal();
    out.emplace_back(std::move(values), data.sigmas, data.labels);
  }
  return out;
}

Eigen::MatrixXd posterior_predictive(const PosteriorSample& posterior,
                                     const BatchPredictor& predictor, int draws_per_theta,
                                     std::uint64_t seed) {
  if (posterior.samples.rows() == 0)
    throw std::invalid_argument("posterior_predictive: empty posterior");
  if (draws_per_theta < 1)
    throw std::invalid_argument("posterior_predictive: draws_per_theta >= 1");

  Eigen::MatrixXd mean, std_out;
  predictor(posterior.samples, mean, std_out);
  const auto n = mean.rows();
  const auto n_out = mean.cols();
  const bool stochastic = std_out.size() > 0;

  Rng rng(seed);
  Eigen::MatrixXd pooled(n * draws_per_theta, n_out);
  for (Eigen::Index i = 0; i < n; ++i)
    for (int d = 0; d < draws_per_theta; ++d)
      for (Eigen::Index c = 0; c < n_out; ++c)
        pooled(i * draws_per_theta + d, c) =
            mean(i, c) + (stochastic ? std_out(i, c) * rng.normal() : 0.0);
  return pooled;
}

nlohmann::json ValidationReport::to_json() const {
  nlohmann::json j;
  nlohmann::json model_arr = nlohmann::json::array();
  for (const auto& m : models) {
    nlohmann::json entry;
    entry["name"] = m.name;
    entry["log_bme"] = m.log_bme;
    entry["dkl"] = m.dkl;
    entry["posterior_acceptance"] = m.posterior_acceptance;
    entry["log_bme_perturbed"] =
        std::vector<double>(m.log_bme_perturbed.begin(), m.log_bme_perturbed.end());
    model_arr.push_back(entry);
  }
  j["models"] = model_arr;
  j["prior_weights"] = std::vector<double>(prior_weights.begin(), prior_weights.end());
  j["weights"] = std::vector<double>(weights.begin(), weights.end());
  nlohmann::json bf_arr = nlohmann::json::array();
  for (const auto& row : bayes_factors) {
    nlohmann::json r = nlohmann::json::array();
    for (const auto& bf : row)
      r.push_back({{"log10_bf", bf.log10_bf},
                   {"grade", bf.grade},
                   {"against", bf.against},
                   {"description", bf.description()}});
    bf_arr.push_back(r);
  }
  j["bayes_factors"] = bf_arr;
  if (tom.dof > 0) {
    j["tom"] = {{"dof", tom.dof},
                {"log_const", tom.log_const},
                {"n_draws", tom.log_bme.size()},
                {"log_bme_mean", tom.log_bme.size() ? tom.log_bme.mean() : 0.0},
                {"s_mean", tom.s_stat.size() ? tom.s_stat.mean() : 0.0}};
  }
  return j;
}

namespace {

/// Regularized lower incomplete gamma P(a, x) by series / continued fraction.
double gammp(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw std::domain_error("gammp: invalid arguments");
  if (x == 0.0) return 0.0;
  const double gln = std::lgamma(a);
  if (x < a + 1.0) {
    // Series representation.
    double ap = a, sum = 1.0 / a, del = sum;
    for (int i = 0; i < 500; ++i) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::abs(del) < std::abs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - gln);
  }
  // Continued fraction (modified Lentz).
  const double tiny = 1e-300;
  double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
  for (int i = 1; i < 500; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) break;
  }
  return 1.0 - std::exp(-x + a * std::log(x) - gln) * h;
}

}  // namespace

double chi2_pdf(double x, int dof) {
  if (dof < 1) throw std::invalid_argument("chi2_pdf: dof must be >= 1");
  if (x < 0.0) return 0.0;
  const double k2 = 0.5 * dof;
  if (x == 0.0) return dof == 2 ? 0.5 : (dof == 1 ? std::numeric_limits<double>::infinity() : 0.0);
  return std::exp(-k2 * 0.6931471805599453094 - std::lgamma(k2) + (k2 - 1.0) * std::log(x) -
                  0.5 * x);
}

double chi2_cdf(double x, int dof) {
  if (dof < 1) throw std::invalid_argument("chi2_cdf: dof must be >= 1");
  if (x <= 0.0) return 0.0;
  return gammp(0.5 * dof, 0.5 * x);
}

double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw std::invalid_argument("ks_statistic: empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
  }
  return d;
}

double ks_critical_value(double alpha, std::size_t n) {
  if (!(alpha > 0.0 && alpha < 1.0) || n == 0)
    throw std::invalid_argument("ks_critical_value: invalid arguments");
  return std::sqrt(-0.5 * std::log(alpha / 2.0) / static_cast<double>(n));
}

}  // namespace bvf
