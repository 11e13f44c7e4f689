#ifndef BVF_SURROGATE_HPP
#define BVF_SURROGATE_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "bvf/bayes_val.hpp"
#include "bvf/input_space.hpp"
#include "bvf/poly_basis.hpp"
#include "bvf/sparse_bayes.hpp"
#include "json.hpp"

namespace bvf {

/// Multi-output expansion surrogate: one sparse coefficient posterior per
/// output column over a shared basis and experimental design. Immutable
/// once trained; prediction is pure and thread-safe.
class PCESurrogate {
public:
  /// Empty surrogate; only assignment and destruction are valid.
  PCESurrogate() = default;

  /// Trains one fit per response column. Rows of responses align with
  /// design rows (physical coordinates). A zero-variance column yields a
  /// constant surrogate for that column. warm_from, when given, seeds each
  /// column fit with the previous active set (a retraining shortcut; the
  /// result still satisfies the converged fit contract).
  static PCESurrogate train(const InputSpace& space, int degree,
                            const SampleMatrix& design, const Eigen::MatrixXd& responses,
                            const FitOptions& opts = {},
                            std::vector<std::string> labels = {},
                            const PCESurrogate* warm_from = nullptr);

  int n_outputs() const { return static_cast<int>(fits_.size()); }
  int dim() const { return space_.dim(); }
  const InputSpace& space() const { return space_; }
  const PCEBasis& basis() const { return basis_; }
  const SampleMatrix& design() const { return design_; }
  const std::vector<SparseFit>& fits() const { return fits_; }
  const std::vector<std::string>& labels() const { return labels_; }

  /// Per-output analytic leave-one-out errors of the training fits
  /// (+inf where the leverage is degenerate).
  const Eigen::VectorXd& loo() const { return loo_; }

  /// Per-output predictive Gaussian at one parameter point. Throws
  /// std::domain_error outside the prior support.
  void predict(const Eigen::RowVectorXd& theta, Eigen::VectorXd& mean,
               Eigen::VectorXd& std) const;

  /// Batched prediction; rows of thetas are points.
  void predict_batch(const SampleMatrix& thetas, Eigen::MatrixXd& mean,
                     Eigen::MatrixXd& std) const;

  /// Prediction from pre-evaluated design-matrix rows (avoids re-evaluating
  /// the basis when the same points are queried across retrainings).
  void predict_from_design_rows(const Eigen::MatrixXd& psi, Eigen::MatrixXd& mean,
                                Eigen::MatrixXd& std) const;

  /// Batch predictor closure for evidence integrals.
  BatchPredictor predictor() const;

  nlohmann::json to_json() const;
  static PCESurrogate from_json(const nlohmann::json& j);

  /// Relative validation error of one output against an independent set.
  double validation_error_on(const SampleMatrix& x_val, const Eigen::VectorXd& y_val,
                             int output) const;

private:
  InputSpace space_;
  PCEBasis basis_;
  SampleMatrix design_;  // training snapshot, physical coordinates
  std::vector<SparseFit> fits_;
  std::vector<std::string> labels_;
  Eigen::VectorXd loo_;
};

}  // namespace bvf

#endif
