#ifndef BVF_INPUT_SPACE_HPP
#define BVF_INPUT_SPACE_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace bvf {

/// Rows are sample points, columns are input coordinates (physical units).
using SampleMatrix = Eigen::MatrixXd;

enum class MarginalKind { uniform, gaussian, moments };

/// One independent prior marginal. Uniform and Gaussian marginals are fully
/// parametric; a moments marginal is defined only through its raw moment
/// sequence m_0..m_K (m_0 = 1) and supports basis construction but not
/// sampling.
struct Marginal {
  MarginalKind kind = MarginalKind::uniform;
  double lower = 0.0, upper = 1.0;   // uniform
  double mean = 0.0, stddev = 1.0;   // gaussian
  std::vector<double> raw_moments;   // moments

  static Marginal uniform(double lower, double upper);
  static Marginal gaussian(double mean, double stddev);
  static Marginal moments(std::vector<double> raw_moments);

  bool contains(double x) const;

  /// Inverse CDF; throws std::invalid_argument for moments marginals.
  double quantile(double u01) const;

  /// Isoprobabilistic map to the reference coordinate of the marginal's
  /// polynomial family: uniform -> [-1,1] affine, gaussian -> standard
  /// normal. Moments marginals use the identity (their basis is built on
  /// the raw physical moments). Throws std::domain_error out of support.
  double to_standard(double x) const;
  double from_standard(double u) const;
};

/// Ordered list of independent marginals: the prior P(theta) over the
/// uncertain inputs and, equivalently, the design space for new runs.
struct InputSpace {
  std::vector<Marginal> marginals;
  std::vector<std::string> names;  // optional; sized like marginals or empty

  int dim() const { return static_cast<int>(marginals.size()); }

  nlohmann::json to_json() const;
  static InputSpace from_json(const nlohmann::json& j);
};

enum class SamplingMethod { random, lhs };

/// Draws n prior samples, i.i.d. (random) or Latin hypercube stratified
/// (lhs). Deterministic for a fixed seed. n = 0 is invalid.
SampleMatrix sample_prior(const InputSpace& space, int n, SamplingMethod method,
                          std::uint64_t seed);

/// Elementwise isoprobabilistic maps over a sample matrix (and inverse).
SampleMatrix to_standard(const InputSpace& space, const SampleMatrix& x);
SampleMatrix from_standard(const InputSpace& space, const SampleMatrix& u);

}  // namespace bvf

#endif
