#include "bvf/input_space.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "bvf/errors.hpp"
#include "bvf/rng.hpp"

namespace bvf {

Marginal Marginal::uniform(double lower, double upper) {
  if (!(lower < upper))
    throw std::invalid_argument("uniform marginal requires lower < upper");
  Marginal m;
  m.kind = MarginalKind::uniform;
  m.lower = lower;
  m.upper = upper;
  return m;
}

Marginal Marginal::gaussian(double mean, double stddev) {
  if (!(stddev > 0.0))
    throw std::invalid_argument("gaussian marginal requires std > 0");
  Marginal m;
  m.kind = MarginalKind::gaussian;
  m.mean = mean;
  m.stddev = stddev;
  return m;
}

Marginal Marginal::moments(std::vector<double> raw_moments) {
  if (raw_moments.empty() || std::abs(raw_moments[0] - 1.0) > 1e-12)
    throw std::invalid_argument("moments marginal requires m_0 = 1");
  for (double v : raw_moments)
    if (!std::isfinite(v))
      throw std::invalid_argument("moments marginal requires finite moments");
  Marginal m;
  m.kind = MarginalKind::moments;
  m.raw_moments = std::move(raw_moments);
  return m;
}

bool Marginal::contains(double x) const {
  switch (kind) {
    case MarginalKind::uniform:
      return x >= lower && x <= upper;
    case MarginalKind::gaussian:
    case MarginalKind::moments:
      return std::isfinite(x);
  }
  return false;
}

double Marginal::quantile(double u01) const {
  switch (kind) {
    case MarginalKind::uniform:
      return lower + (upper - lower) * u01;
    case MarginalKind::gaussian:
      return mean + stddev * inverse_normal_cdf(u01);
    case MarginalKind::moments:
      throw std::invalid_argument(
          "sampling from a moments-defined marginal is unsupported");
  }
  return 0.0;
}

double Marginal::to_standard(double x) const {
  if (!contains(x))
    throw std::domain_error("coordinate outside marginal support");
  switch (kind) {
    case MarginalKind::uniform:
      return -1.0 + 2.0 * (x - lower) / (upper - lower);
    case MarginalKind::gaussian:
      return (x - mean) / stddev;
    case MarginalKind::moments:
      return x;
  }
  return 0.0;
}

double Marginal::from_standard(double u) const {
  switch (kind) {
    case MarginalKind::uniform:
      if (u < -1.0 || u > 1.0)
        throw std::domain_error("standard coordinate outside [-1,1]");
      return lower + 0.5 * (u + 1.0) * (upper - lower);
    case MarginalKind::gaussian:
      if (!std::isfinite(u)) throw std::domain_error("non-finite standard coordinate");
      return mean + stddev * u;
    case MarginalKind::moments:
      if (!std::isfinite(u)) throw std::domain_error("non-finite standard coordinate");
      return u;
  }
  return 0.0;
}

nlohmann::json InputSpace::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (int i = 0; i < dim(); ++i) {
    const Marginal& m = marginals[static_cast<std::size_t>(i)];
    nlohmann::json entry;
    entry["name"] = (i < static_cast<int>(names.size()) && !names[i].empty())
                        ? names[i]
                        : ("x" + std::to_string(i + 1));
    switch (m.kind) {
      case MarginalKind::uniform:
        entry["type"] = "uniform";
        entry["params"] = {{"lower", m.lower}, {"upper", m.upper}};
        break;
      case MarginalKind::gaussian:
        entry["type"] = "gaussian";
        entry["params"] = {{"mean", m.mean}, {"std", m.stddev}};
        break;
      case MarginalKind::moments:
        entry["type"] = "moments";
        entry["params"] = {{"moments", m.raw_moments}};
        break;
    }
    arr.push_back(entry);
  }
  return arr;
}

InputSpace InputSpace::from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.empty())
    throw config_error("space", "must be a nonempty array of marginals");
  InputSpace space;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& entry = j[i];
    const std::string where = "space[" + std::to_string(i) + "]";
    if (!entry.contains("type")) throw config_error(where + ".type", "missing");
    const std::string type = entry["type"].get<std::string>();
    const auto& params = entry.contains("params") ? entry["params"] : nlohmann::json::object();
    try {
      if (type == "uniform") {
        space.marginals.push_back(Marginal::uniform(params.at("lower").get<double>(),
                                                    params.at("upper").get<double>()));
      } else if (type == "gaussian") {
        space.marginals.push_back(Marginal::gaussian(params.at("mean").get<double>(),
                                                     params.at("std").get<double>()));
      } else if (type == "moments") {
        space.marginals.push_back(
            Marginal::moments(params.at("moments").get<std::vector<double>>()));
      } else {
        throw config_error(where + ".type",
                           "unknown marginal type '" + type +
                               "' (expected uniform|gaussian|moments)");
      }
    } catch (const nlohmann::json::exception& e) {
      throw config_error(where + ".params", e.what());
    } catch (const std::invalid_argument& e) {
      throw config_error(where + ".params", e.what());
    }
    space.names.push_back(entry.contains("name") ? entry["name"].get<std::string>()
                                                 : "x" + std::to_string(i + 1));
  }
  return space;
}

SampleMatrix sample_prior(const InputSpace& space, int n, SamplingMethod method,
                          std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample_prior: n must be >= 1");
  const int m = space.dim();
  if (m < 1) throw std::invalid_argument("sample_prior: empty input space");

  SampleMatrix out(n, m);
  Rng rng(seed);
  if (method == SamplingMethod::random) {
    for (int i = 0; i < n; ++i)
      for (int d = 0; d < m; ++d)
        out(i, d) = space.marginals[d].quantile(rng.uniform01());
  } else {
    // One sample per stratum per dimension, independently permuted.
    std::vector<int> perm(static_cast<std::size_t>(n));
    for (int d = 0; d < m; ++d) {
      std::iota(perm.begin(), perm.end(), 0);
      rng.shuffle(perm);
      for (int i = 0; i < n; ++i) {
        double u = (perm[i] + rng.uniform01()) / n;
        out(i, d) = space.marginals[d].quantile(u);
      }
    }
  }
  return out;
}

SampleMatrix to_standard(const InputSpace& space, const SampleMatrix& x) {
  if (x.cols() != space.dim())
    throw std::invalid_argument("to_standard: column count does not match space dimension");
  SampleMatrix u(x.rows(), x.cols());
  for (int i = 0; i < x.rows(); ++i)
    for (int d = 0; d < x.cols(); ++d) u(i, d) = space.marginals[d].to_standard(x(i, d));
  return u;
}

SampleMatrix from_standard(const InputSpace& space, const SampleMatrix& u) {
  if (u.cols() != space.dim())
    throw std::invalid_argument("from_standard: column count does not match space dimension");
  SampleMatrix x(u.rows(), u.cols());
  for (int i = 0; i < u.rows(); ++i)
    for (int d = 0; d < u.cols(); ++d) x(i, d) = space.marginals[d].from_standard(u(i, d));
  return x;
}

}  // namespace bvf
