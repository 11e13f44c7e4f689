#include "bvf/seq_design.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "bvf/errors.hpp"
#include "bvf/parallel.hpp"
#include "bvf/rng.hpp"

namespace bvf {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Seed stream labels for substream derivation.
enum : std::uint64_t { kStreamInit = 1, kStreamPool = 2, kStreamCand = 3, kStreamTrace = 4 };
}  // namespace

UtilityKind utility_from_string(const std::string& s) {
  if (s == "bme") return UtilityKind::bme;
  if (s == "dkl") return UtilityKind::dkl;
  if (s == "entropy") return UtilityKind::entropy;
  throw std::invalid_argument("unknown utility '" + s + "' (expected bme|dkl|entropy)");
}

std::string utility_to_string(UtilityKind k) {
  switch (k) {
    case UtilityKind::bme: return "bme";
    case UtilityKind::dkl: return "dkl";
    case UtilityKind::entropy: return "entropy";
  }
  return "?";
}

UtilityScores utility_scores_from_predictive(const Eigen::VectorXd& pred_mean,
                                             const Eigen::VectorXd& pred_std,
                                             const ObservationSet& data,
                                             const Eigen::VectorXd& cov_diag, int mc,
                                             std::uint64_t seed) {
  const auto n_out = pred_mean.size();
  if (pred_std.size() != n_out || data.size() != n_out || cov_diag.size() != n_out)
    throw std::invalid_argument("utility: dimension mismatch");
  if (mc < 1) throw std::invalid_argument("utility: mc must be >= 1");

  Rng rng(seed);
  // Draw the response prior sample and its likelihoods; the same draw set
  // serves every utility so their algebraic couplings hold exactly.
  Eigen::MatrixXd draws(mc, n_out);
  Eigen::VectorXd loglik(mc);
  Eigen::VectorXd log_prior_pdf(mc);
  const double norm_const =
      -0.5 * static_cast<double>(n_out) * 1.8378770664093454836 -
      pred_std.array().max(1e-300).log().sum();
  for (int j = 0; j < mc; ++j) {
    for (Eigen::Index k = 0; k < n_out; ++k)
      draws(j, k) = pred_mean(k) + pred_std(k) * rng.normal();
    loglik(j) = gaussian_loglik(data.values - draws.row(j).transpose(), cov_diag);
    double quad = 0.0;
    for (Eigen::Index k = 0; k < n_out; ++k) {
      const double sd = pred_std(k);
      if (sd > 0.0) {
        const double z = (draws(j, k) - pred_mean(k)) / sd;
        quad += z * z;
      }
    }
    log_prior_pdf(j) = norm_const - 0.5 * quad;
  }

  UtilityScores out;
  out.log_bme = bme_from_logliks(loglik);

  // Rejection sampling over the same draws for the posterior expectations.
  double lmax = loglik.maxCoeff();
  if (!std::isfinite(lmax)) {
    out.acceptance_rate = 0.0;
    out.dkl = kNegInf;
    out.entropy = kNegInf;
    return out;
  }
  double sum_ll = 0.0, sum_prior = 0.0;
  int accepted = 0;
  for (int j = 0; j < mc; ++j) {
    const double u = rng.uniform01();
    if (std::isfinite(loglik(j)) && u < std::exp(loglik(j) - lmax)) {
      ++accepted;
      sum_ll += loglik(j);
      sum_prior += log_prior_pdf(j);
    }
  }
  out.acceptance_rate = static_cast<double>(accepted) / mc;
  if (accepted == 0)
    throw rejection_starvation_error("utility: rejection sampling accepted no draws",
                                     0.0);
  const double post_ll = sum_ll / accepted;
  const double post_prior = sum_prior / accepted;
  out.post_mean_log_prior = post_prior;
  out.dkl = -out.log_bme + post_ll;
  out.entropy = out.log_bme - post_prior - post_ll;
  return out;
}

namespace {

UtilityScores scores_at(const PCESurrogate& s, const ObservationSet& data,
                        const ErrorBudget& budget, const Eigen::RowVectorXd& d, int mc,
                        std::uint64_t seed) {
  Eigen::VectorXd mean, std;
  s.predict(d, mean, std);
  const Eigen::VectorXd cov = assemble_covariance(budget, nullptr);
  return utility_scores_from_predictive(mean, std, data, cov, mc, seed);
}

}  // namespace

double utility_bme(const PCESurrogate& s, const ObservationSet& data,
                   const ErrorBudget& budget, const Eigen::RowVectorXd& d, int mc,
                   std::uint64_t seed) {
  return scores_at(s, data, budget, d, mc, seed).log_bme;
}

double utility_dkl(const PCESurrogate& s, const ObservationSet& data,
                   const ErrorBudget& budget, const Eigen::RowVectorXd& d, int mc,
                   std::uint64_t seed) {
  return scores_at(s, data, budget, d, mc, seed).dkl;
}

double utility_entropy(const PCESurrogate& s, const ObservationSet& data,
                       const ErrorBudget& budget, const Eigen::RowVectorXd& d, int mc,
                       std::uint64_t seed) {
  return scores_at(s, data, budget, d, mc, seed).entropy;
}

int select_next(const std::vector<double>& scores, UtilityKind kind) {
  if (scores.empty()) throw std::invalid_argument("select_next: empty scores");
  const bool minimize = (kind == UtilityKind::entropy);
  int best = 0;
  for (int i = 1; i < static_cast<int>(scores.size()); ++i) {
    if (std::isnan(scores[static_cast<std::size_t>(i)]))
      throw std::invalid_argument("select_next: NaN score");
    const double a = scores[static_cast<std::size_t>(i)];
    const double b = scores[static_cast<std::size_t>(best)];
    if (minimize ? (a < b) : (a > b)) best = i;
  }
  return best;
}

nlohmann::json DesignTrace::to_json() const {
  nlohmann::json j;
  j["n_init"] = n_init;
  nlohmann::json iters = nlohmann::json::array();
  for (const auto& it : iterations) {
    nlohmann::json entry;
    entry["ed_size"] = it.ed_size;
    entry["eps_loo"] = std::isfinite(it.eps_loo) ? nlohmann::json(it.eps_loo)
                                                 : nlohmann::json("inf");
    entry["log_bme"] = it.log_bme;
    entry["dkl"] = it.dkl;
    entry["chosen_index"] = it.chosen_index;
    entry["chosen_score"] = it.chosen_score;
    entry["fallback_count"] = it.fallback_count;
    nlohmann::json pts = nlohmann::json::array();
    for (Eigen::Index r = 0; r < it.chosen.rows(); ++r) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index c = 0; c < it.chosen.cols(); ++c) row.push_back(it.chosen(r, c));
      pts.push_back(row);
    }
    entry["chosen"] = pts;
    entry["pool_scores"] = it.pool_scores;
    iters.push_back(entry);
  }
  j["iterations"] = iters;
  nlohmann::json design_rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < design.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < design.cols(); ++c) row.push_back(design(r, c));
    design_rows.push_back(row);
  }
  j["design"] = design_rows;
  return j;
}

std::string DesignTrace::to_csv(const std::string& provenance_line) const {
  std::ostringstream out;
  if (!provenance_line.empty()) out << "# " << provenance_line << "\n";
  out << "run_count,log_bme,dkl,eps_loo,chosen_score,fallback_count\n";
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  for (const auto& it : iterations) {
    out << it.ed_size << ',' << num(it.log_bme) << ',' << num(it.dkl) << ','
        << num(it.eps_loo) << ',' << num(it.chosen_score) << ',' << it.fallback_count
        << "\n";
  }
  return out.str();
}

namespace {

double max_finite_loo(const PCESurrogate& s) {
  double m = 0.0;
  for (Eigen::Index i = 0; i < s.loo().size(); ++i)
    m = std::max(m, s.loo()(i));  // +inf propagates, which blocks early stop
  return m;
}

void trace_estimates(const PCESurrogate& s, const Eigen::MatrixXd& psi_trace,
                     const ObservationSet& data, const ErrorBudget& budget,
                     std::uint64_t seed, double& log_bme, double& dkl) {
  Eigen::MatrixXd mean, std;
  s.predict_from_design_rows(psi_trace, mean, std);
  const auto n = mean.rows();
  Eigen::VectorXd logliks(n);
  const bool with_surr = budget.include_surrogate_std;
  Eigen::VectorXd base_cov;
  if (!with_surr) base_cov = assemble_covariance(budget, nullptr);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (with_surr) {
      Eigen::VectorXd surr = std.row(i).transpose();
      logliks(i) =
          gaussian_loglik(data.values - mean.row(i).transpose(),
                          assemble_covariance(budget, &surr));
    } else {
      logliks(i) = gaussian_loglik(data.values - mean.row(i).transpose(), base_cov);
    }
  }
  log_bme = bme_from_logliks(logliks);
  double lmax = logliks.maxCoeff();
  if (!std::isfinite(lmax) || !std::isfinite(log_bme)) {
    dkl = 0.0;
    return;
  }
  Rng rng(seed);
  double sum_ll = 0.0;
  int accepted = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (rng.uniform01() < std::exp(logliks(i) - lmax)) {
      ++accepted;
      sum_ll += logliks(i);
    }
  }
  dkl = accepted > 0 ? -log_bme + sum_ll / accepted : 0.0;
}

}  // namespace

SeqResult run_sequential(ModelAdapter& model, const InputSpace& space,
                         const ObservationSet& data, const ErrorBudget& budget,
                         const SeqConfig& cfg) {
  if (cfg.n_init < 1) throw std::invalid_argument("seq: n_init must be >= 1");
  if (cfg.max_runs < cfg.n_init)
    throw std::invalid_argument("seq: max_runs must be >= n_init");
  if (cfg.n_candidates < 1) throw std::invalid_argument("seq: n_candidates must be >= 1");
  if (cfg.batch < 1) throw std::invalid_argument("seq: batch must be >= 1");
  if (cfg.mc < 100) throw std::invalid_argument("seq: mc must be >= 100");
  if (data.size() < 1) throw std::invalid_argument("seq: observation set is empty");

  SeqResult result;
  DesignTrace& trace = result.trace;
  trace.n_init = cfg.n_init;

  trace.design = sample_prior(space, cfg.n_init, SamplingMethod::lhs,
                              derive_seed(cfg.seed, kStreamInit));
  try {
    trace.responses = model.evaluate(trace.design);
  } catch (const model_failure_error& e) {
    result.aborted = true;
    result.error = e.what();
    return result;
  }

  // Fixed prior sample set for the evidence trace; its design-matrix rows
  // are reused across retrainings.
  const int n_trace = cfg.mc_trace > 0 ? cfg.mc_trace : cfg.mc;
  const SampleMatrix trace_samples = sample_prior(
      space, n_trace, SamplingMethod::random, derive_seed(cfg.seed, kStreamTrace));
  const PCEBasis trace_basis = PCEBasis::build(space, cfg.degree);
  const Eigen::MatrixXd psi_trace =
      trace_basis.eval_design_matrix(to_standard(space, trace_samples));

  PCESurrogate surrogate = PCESurrogate::train(space, cfg.degree, trace.design,
                                               trace.responses, cfg.fit);
  double eps = max_finite_loo(surrogate);
  const Eigen::VectorXd cov_diag = assemble_covariance(budget, nullptr);

  int iteration = 0;
  while (static_cast<int>(trace.design.rows()) < cfg.max_runs &&
         eps > cfg.loo_threshold) {
    const int remaining = cfg.max_runs - static_cast<int>(trace.design.rows());
    const int batch = std::min(cfg.batch, remaining);

    const SampleMatrix pool =
        sample_prior(space, cfg.n_candidates, SamplingMethod::lhs,
                     derive_seed(cfg.seed, kStreamPool, static_cast<std::uint64_t>(iteration)));
    Eigen::MatrixXd pool_mean, pool_std;
    surrogate.predict_batch(pool, pool_mean, pool_std);

    std::vector<double> scores(static_cast<std::size_t>(cfg.n_candidates));
    std::vector<char> fallback(static_cast<std::size_t>(cfg.n_candidates), 0);
    parallel_for(static_cast<std::size_t>(cfg.n_candidates), [&](std::size_t c) {
      const std::uint64_t cand_seed =
          derive_seed(derive_seed(cfg.seed, kStreamCand, static_cast<std::uint64_t>(iteration)),
                      static_cast<std::uint64_t>(c));
      UtilityScores u;
      try {
        u = utility_scores_from_predictive(
            pool_mean.row(static_cast<Eigen::Index>(c)).transpose(),
            pool_std.row(static_cast<Eigen::Index>(c)).transpose(), data, cov_diag,
            cfg.mc, cand_seed);
      } catch (const rejection_starvation_error&) {
        u.log_bme = kNegInf;
        u.dkl = kNegInf;
        u.entropy = kNegInf;
        u.acceptance_rate = 0.0;
      }
      double score;
      switch (cfg.utility) {
        case UtilityKind::bme: score = u.log_bme; break;
        case UtilityKind::dkl: score = u.dkl; break;
        case UtilityKind::entropy: score = u.entropy; break;
        default: score = u.log_bme; break;
      }
      // Starved rejection sampling gives no posterior expectation; fall
      // back to the evidence utility for this candidate and flag it.
      if (cfg.utility != UtilityKind::bme && u.acceptance_rate < 1e-3) {
        score = (cfg.utility == UtilityKind::entropy) ? -u.log_bme : u.log_bme;
        fallback[c] = 1;
      }
      scores[c] = score;
    });

    SeqIteration record;
    record.pool_scores = scores;
    record.fallback_count =
        static_cast<int>(std::count(fallback.begin(), fallback.end(), 1));

    // Top `batch` candidates in selection order.
    std::vector<double> remaining_scores = scores;
    record.chosen.resize(batch, space.dim());
    Eigen::MatrixXd new_points(batch, space.dim());
    for (int b = 0; b < batch; ++b) {
      const int pick = select_next(remaining_scores, cfg.utility);
      if (b == 0) {
        record.chosen_index = pick;
        record.chosen_score = remaining_scores[static_cast<std::size_t>(pick)];
      }
      new_points.row(b) = pool.row(pick);
      remaining_scores[static_cast<std::size_t>(pick)] =
          (cfg.utility == UtilityKind::entropy) ? std::numeric_limits<double>::infinity()
                                                : kNegInf;
    }
    record.chosen = new_points;

    Eigen::MatrixXd new_responses;
    try {
      new_responses = model.evaluate(new_points);
    } catch (const model_failure_error& e) {
      result.aborted = true;
      result.error = e.what();
      result.surrogate = std::move(surrogate);
      return result;
    }

    const auto old_rows = trace.design.rows();
    trace.design.conservativeResize(old_rows + batch, Eigen::NoChange);
    trace.design.bottomRows(batch) = new_points;
    trace.responses.conservativeResize(old_rows + batch, Eigen::NoChange);
    trace.responses.bottomRows(batch) = new_responses;

    // Warm-start the refit from the previous active sets.
    surrogate = PCESurrogate::train(space, cfg.degree, trace.design, trace.responses,
                                    cfg.fit, {}, &surrogate);
    eps = max_finite_loo(surrogate);

    record.ed_size = static_cast<int>(trace.design.rows());
    record.eps_loo = eps;
    trace_estimates(surrogate, psi_trace, data, budget,
                    derive_seed(cfg.seed, kStreamTrace, static_cast<std::uint64_t>(iteration)),
                    record.log_bme, record.dkl);
    trace.iterations.push_back(std::move(record));
    ++iteration;
  }

  result.surrogate = std::move(surrogate);
  return result;
}

}  // namespace bvf
