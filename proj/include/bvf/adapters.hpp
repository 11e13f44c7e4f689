#ifndef BVF_ADAPTERS_HPP
#define BVF_ADAPTERS_HPP

#include <Eigen/Dense>
#include <memory>
#include <string>

#include "json.hpp"

namespace bvf {

/// Forward-model interface: rows of theta in, one response row per point
/// out. Implementations must be deterministic in theta.
class ModelAdapter {
public:
  virtual ~ModelAdapter() = default;
  virtual int n_outputs() const = 0;
  virtual std::string name() const = 0;
  virtual Eigen::MatrixXd evaluate(const Eigen::MatrixXd& thetas) = 0;
};

/// Ten-parameter nonlinear benchmark evaluated on a time grid. Closed form;
/// pure and bit-deterministic.
Eigen::MatrixXd eval_analytic10d(const Eigen::MatrixXd& thetas, const Eigen::VectorXd& t_grid);

/// Default benchmark grid t_k = k for k = 1..10.
Eigen::VectorXd default_t_grid();

class Analytic10dAdapter final : public ModelAdapter {
public:
  /// time_bias != 0 yields a structurally perturbed variant whose output
  /// gains an extra time_bias * t_k trend; used as a wrong pseudo-model
  /// in model-comparison studies.
  explicit Analytic10dAdapter(Eigen::VectorXd t_grid = default_t_grid(),
                              double time_bias = 0.0);
  int n_outputs() const override { return static_cast<int>(t_grid_.size()); }
  std::string name() const override;
  Eigen::MatrixXd evaluate(const Eigen::MatrixXd& thetas) override;

private:
  Eigen::VectorXd t_grid_;
  double time_bias_;
};

/// y = theta, one output per input dimension.
class IdentityAdapter final : public ModelAdapter {
public:
  explicit IdentityAdapter(int dim) : dim_(dim) {}
  int n_outputs() const override { return dim_; }
  std::string name() const override { return "identity"; }
  Eigen::MatrixXd evaluate(const Eigen::MatrixXd& thetas) override { return thetas; }

private:
  int dim_;
};

/// Runs an external command per batch of parameter points, exchanging CSV
/// files: the command is invoked as `command <input.csv> <output.csv>` and
/// must exit 0 after writing one output row per input row. Results are
/// cached on disk keyed by (command, parameter row), so repeated points
/// never relaunch the process.
class ExternalAdapter final : public ModelAdapter {
public:
  ExternalAdapter(std::string command, std::string workdir, std::string cache_dir,
                  int n_outputs);
  int n_outputs() const override { return n_outputs_; }
  std::string name() const override { return "external:" + command_; }
  Eigen::MatrixXd evaluate(const Eigen::MatrixXd& thetas) override;

  /// Number of subprocess launches performed by this instance.
  int launches() const { return launches_; }

private:
  std::string command_;
  std::string workdir_;
  std::string cache_dir_;
  int n_outputs_;
  int launches_ = 0;
};

/// Builds an adapter from a JSON model spec ({"kind": ..., ...}).
std::unique_ptr<ModelAdapter> make_adapter(const nlohmann::json& spec);

/// CSV cell format shared by the subprocess protocol and the cache: 17
/// significant digits, '.' decimal, ',' separator.
std::string format_csv_number(double v);

}  // namespace bvf

#endif
