#ifndef BVF_POLY_BASIS_HPP
#define BVF_POLY_BASIS_HPP

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "bvf/input_space.hpp"
#include "json.hpp"

namespace bvf {

/// Total-degree truncation set: all multi-indices alpha in N^M with
/// |alpha| <= p, graded-lexicographically ordered (ascending total degree,
/// then ascending lexicographic within a degree). Cardinality C(M+p, p).
struct MultiIndexSet {
  int dim = 0;
  int degree = 0;
  std::vector<std::vector<int>> indices;

  std::size_t size() const { return indices.size(); }
};

MultiIndexSet build_truncation(int dim, int degree);

/// Exact binomial C(n, k) in double precision (n small).
double binomial(int n, int k);

enum class PolyFamily { legendre, hermite, apc };

/// Univariate polynomials orthonormal with respect to one marginal.
/// Classical families (Legendre for uniform on [-1,1], probabilists'
/// Hermite for the standard normal) evaluate through their three-term
/// recurrences; data-driven (apc) bases store explicit monomial
/// coefficients obtained from raw moments.
class UnivariateBasis {
public:
  static UnivariateBasis legendre(int degree);
  static UnivariateBasis hermite(int degree);

  /// Orthonormal basis for the measure implied by raw moments m_0..m_K,
  /// built by modified Gram-Schmidt (with re-orthogonalization) on
  /// monomials under the moment inner product <x^a, x^b> = m_{a+b}.
  /// Requires K >= 2*degree; throws ill_posed_moments_error when the
  /// Hankel moment matrix is not positive definite.
  static UnivariateBasis from_moments(std::span<const double> raw_moments, int degree);

  PolyFamily family() const { return family_; }
  int degree() const { return degree_; }

  /// Value of the orthonormal polynomial of degree j; psi_0 == 1.
  double eval(int j, double u) const;

  /// Fills out[0..degree] with psi_0(u)..psi_degree(u).
  void eval_all(double u, double* out) const;

  /// apc only: monomial coefficients of psi_j (constant term first).
  const Eigen::MatrixXd& coefficients() const { return coeffs_; }

private:
  UnivariateBasis(PolyFamily f, int degree) : family_(f), degree_(degree) {}
  PolyFamily family_;
  int degree_;
  Eigen::MatrixXd coeffs_;  // (degree+1) x (degree+1), rows = psi_j, apc only
};

/// Multivariate tensor-product basis over a truncation set; one univariate
/// family per input dimension, chosen from the marginal kind.
struct PCEBasis {
  std::vector<UnivariateBasis> univariate;
  MultiIndexSet index_set;

  static PCEBasis build(const InputSpace& space, int degree);

  int dim() const { return index_set.dim; }
  std::size_t size() const { return index_set.size(); }

  /// Design matrix over standardized samples: entry (n,i) = Psi_{alpha_i}(u_n).
  Eigen::MatrixXd eval_design_matrix(const Eigen::MatrixXd& u_samples) const;

  /// Single standardized point -> one design-matrix row.
  Eigen::VectorXd eval_row(const Eigen::RowVectorXd& u) const;

  nlohmann::json to_json() const;
};

/// Gauss quadrature rules normalized to probability measures (weights sum
/// to 1): Legendre for uniform on [-1,1], Hermite for the standard normal.
/// Golub-Welsch via the symmetric Jacobi matrix.
struct QuadRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};
QuadRule gauss_legendre(int n);
QuadRule gauss_hermite(int n);

}  // namespace bvf

#endif
