#include "bvf/poly_basis.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bvf/errors.hpp"

namespace bvf {

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return std::round(r);
}

namespace {

void enumerate_indices(int dim, int budget, std::vector<int>& current,
                       std::vector<std::vector<int>>& out) {
  if (static_cast<int>(current.size()) == dim) {
    out.push_back(current);
    return;
  }
  for (int a = 0; a <= budget; ++a) {
    current.push_back(a);
    enumerate_indices(dim, budget - a, current, out);
    current.pop_back();
  }
}

int total_degree(const std::vector<int>& alpha) {
  int s = 0;
  for (int a : alpha) s += a;
  return s;
}

}  // namespace

MultiIndexSet build_truncation(int dim, int degree) {
  if (dim < 1) throw std::invalid_argument("build_truncation: dim must be >= 1");
  if (degree < 0) throw std::invalid_argument("build_truncation: degree must be >= 0");
  MultiIndexSet set;
  set.dim = dim;
  set.degree = degree;
  std::vector<int> current;
  enumerate_indices(dim, degree, current, set.indices);
  std::stable_sort(set.indices.begin(), set.indices.end(),
                   [](const std::vector<int>& a, const std::vector<int>& b) {
                     int da = total_degree(a), db = total_degree(b);
                     if (da != db) return da < db;
                     return a < b;
                   });
  return set;
}

UnivariateBasis UnivariateBasis::legendre(int degree) {
  if (degree < 0) throw std::invalid_argument("legendre: degree must be >= 0");
  return UnivariateBasis(PolyFamily::legendre, degree);
}

UnivariateBasis UnivariateBasis::hermite(int degree) {
  if (degree < 0) throw std::invalid_argument("hermite: degree must be >= 0");
  return UnivariateBasis(PolyFamily::hermite, degree);
}

UnivariateBasis UnivariateBasis::from_moments(std::span<const double> raw_moments,
                                              int degree) {
  if (degree < 0) throw std::invalid_argument("from_moments: degree must be >= 0");
  if (static_cast<int>(raw_moments.size()) < 2 * degree + 1)
    throw std::invalid_argument("from_moments: need moments m_0..m_{2p}");
  if (std::abs(raw_moments[0] - 1.0) > 1e-12)
    throw std::invalid_argument("from_moments: m_0 must equal 1");

  const int n = degree + 1;
  Eigen::MatrixXd hankel(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) hankel(a, b) = raw_moments[a + b];

  auto dot = [&](const Eigen::VectorXd& c, const Eigen::VectorXd& d) {
    return c.dot(hankel * d);
  };

  // Modified Gram-Schmidt on monomials in the moment inner product, with a
  // second orthogonalization pass; the Hankel matrix is Hilbert-like and
  // loses roughly two digits per degree.
  Eigen::MatrixXd coeffs = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
    v(j) = 1.0;
    for (int pass = 0; pass < 2; ++pass)
      for (int k = 0; k < j; ++k) v -= dot(v, coeffs.row(k).transpose()) * coeffs.row(k).transpose();
    double norm2 = dot(v, v);
    if (!(norm2 > 1e-13 * std::abs(hankel(j, j))) || !std::isfinite(norm2))
      throw ill_posed_moments_error(
          "moment sequence is not positive definite at degree " + std::to_string(j));
    coeffs.row(j) = v.transpose() / std::sqrt(norm2);
  }

  UnivariateBasis basis(PolyFamily::apc, degree);
  basis.coeffs_ = std::move(coeffs);
  return basis;
}

double UnivariateBasis::eval(int j, double u) const {
  if (j < 0 || j > degree_)
    throw std::invalid_argument("univariate eval: degree out of range");
  // Small fixed-size stack buffer would need degree bound; heap is fine here.
  std::vector<double> buf(static_cast<std::size_t>(degree_) + 1);
  eval_all(u, buf.data());
  return buf[static_cast<std::size_t>(j)];
}

void UnivariateBasis::eval_all(double u, double* out) const {
  const int p = degree_;
  switch (family_) {
    case PolyFamily::legendre: {
      // P_j via (j+1) P_{j+1} = (2j+1) u P_j - j P_{j-1}; psi_j = sqrt(2j+1) P_j.
      double pm = 1.0, pc = u;
      out[0] = 1.0;
      if (p >= 1) out[1] = std::sqrt(3.0) * u;
      for (int j = 1; j < p; ++j) {
        double pn = ((2 * j + 1) * u * pc - j * pm) / (j + 1);
        out[j + 1] = std::sqrt(2.0 * (j + 1) + 1.0) * pn;
        pm = pc;
        pc = pn;
      }
      break;
    }
    case PolyFamily::hermite: {
      // He_{j+1} = u He_j - j He_{j-1}; psi_j = He_j / sqrt(j!).
      double hm = 1.0, hc = u, fact = 1.0;
      out[0] = 1.0;
      if (p >= 1) out[1] = u;
      for (int j = 1; j < p; ++j) {
        double hn = u * hc - j * hm;
        fact *= (j + 1);
        out[j + 1] = hn / std::sqrt(fact);
        hm = hc;
        hc = hn;
      }
      break;
    }
    case PolyFamily::apc: {
      double power = 1.0;
      std::vector<double> monomials(static_cast<std::size_t>(p) + 1);
      for (int k = 0; k <= p; ++k) {
        monomials[static_cast<std::size_t>(k)] = power;
        power *= u;
      }
      for (int j = 0; j <= p; ++j) {
        double s = 0.0;
        for (int k = 0; k <= j; ++k) s += coeffs_(j, k) * monomials[static_cast<std::size_t>(k)];
        out[j] = s;
      }
      break;
    }
  }
}

PCEBasis PCEBasis::build(const InputSpace& space, int degree) {
  PCEBasis basis;
  basis.index_set = build_truncation(space.dim(), degree);
  basis.univariate.reserve(space.marginals.size());
  for (const Marginal& m : space.marginals) {
    switch (m.kind) {
      case MarginalKind::uniform:
        basis.univariate.push_back(UnivariateBasis::legendre(degree));
        break;
      case MarginalKind::gaussian:
        basis.univariate.push_back(UnivariateBasis::hermite(degree));
        break;
      case MarginalKind::moments:
        basis.univariate.push_back(UnivariateBasis::from_moments(m.raw_moments, degree));
        break;
    }
  }
  return basis;
}

Eigen::MatrixXd PCEBasis::eval_design_matrix(const Eigen::MatrixXd& u_samples) const {
  const int m = dim();
  if (u_samples.cols() != m)
    throw std::invalid_argument("eval_design_matrix: sample dimension mismatch");
  const int n = static_cast<int>(u_samples.rows());
  const int p = index_set.degree;
  const auto terms = static_cast<Eigen::Index>(index_set.size());

  Eigen::MatrixXd psi(n, terms);
  std::vector<double> table(static_cast<std::size_t>(m) * (p + 1));
  for (int row = 0; row < n; ++row) {
    for (int d = 0; d < m; ++d)
      univariate[d].eval_all(u_samples(row, d), &table[static_cast<std::size_t>(d) * (p + 1)]);
    for (Eigen::Index i = 0; i < terms; ++i) {
      double prod = 1.0;
      const std::vector<int>& alpha = index_set.indices[static_cast<std::size_t>(i)];
      for (int d = 0; d < m; ++d) {
        const int a = alpha[static_cast<std::size_t>(d)];
        if (a != 0) prod *= table[static_cast<std::size_t>(d) * (p + 1) + a];
      }
      psi(row, i) = prod;
    }
  }
  return psi;
}

Eigen::VectorXd PCEBasis::eval_row(const Eigen::RowVectorXd& u) const {
  return eval_design_matrix(u).row(0).transpose();
}

nlohmann::json PCEBasis::to_json() const {
  nlohmann::json j;
  j["dim"] = index_set.dim;
  j["degree"] = index_set.degree;
  j["terms"] = index_set.size();
  nlohmann::json fams = nlohmann::json::array();
  for (const auto& b : univariate) {
    switch (b.family()) {
      case PolyFamily::legendre: fams.push_back("legendre"); break;
      case PolyFamily::hermite: fams.push_back("hermite"); break;
      case PolyFamily::apc: fams.push_back("apc"); break;
    }
  }
  j["families"] = fams;
  return j;
}

namespace {

QuadRule golub_welsch(const Eigen::VectorXd& offdiag) {
  const int n = static_cast<int>(offdiag.size()) + 1;
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i + 1 < n; ++i) {
    jacobi(i, i + 1) = offdiag(i);
    jacobi(i + 1, i) = offdiag(i);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
  QuadRule rule;
  rule.nodes = solver.eigenvalues();
  rule.weights = solver.eigenvectors().row(0).transpose().array().square();
  return rule;
}

}  // namespace

QuadRule gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
  Eigen::VectorXd b(n - 1);
  for (int j = 1; j < n; ++j) b(j - 1) = j / std::sqrt(4.0 * j * j - 1.0);
  return golub_welsch(b);
}

QuadRule gauss_hermite(int n) {
  if (n < 1) throw std::invalid_argument("gauss_hermite: n must be >= 1");
  Eigen::VectorXd b(n - 1);
  for (int j = 1; j < n; ++j) b(j - 1) = std::sqrt(static_cast<double>(j));
  return golub_welsch(b);
}

}  // namespace bvf
