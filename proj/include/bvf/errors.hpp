#ifndef BVF_ERRORS_HPP
#define BVF_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace bvf {

/// Raised when a moment sequence does not define a valid (positive) measure,
/// i.e. its Hankel matrix fails to be positive definite at the requested degree.
class ill_posed_moments_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Raised when a leave-one-out leverage h_i reaches 1 (interpolatory point).
class degenerate_leverage_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Raised when a relative error denominator (response variance) is zero.
class undefined_denominator_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Raised when every candidate log-likelihood is -inf and no posterior exists.
class no_posterior_support_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Raised when rejection sampling accepts zero draws.
class rejection_starvation_error : public std::runtime_error {
public:
  rejection_starvation_error(const std::string& what, double acceptance_rate)
      : std::runtime_error(what), acceptance_rate(acceptance_rate) {}
  double acceptance_rate;
};

/// Raised when model weights cannot be normalized (all evidences are zero).
class undefined_weights_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Raised when an assembled covariance has a zero diagonal entry.
class singular_covariance_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Raised when a least-squares system has no unique solution.
class rank_deficient_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Raised when an external forward model exits nonzero; carries its output.
class model_failure_error : public std::runtime_error {
public:
  model_failure_error(const std::string& what, std::string captured = {})
      : std::runtime_error(what), captured_output(std::move(captured)) {}
  std::string captured_output;
};

/// Raised when an external model violates the CSV exchange protocol.
class protocol_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Raised by config parsing/validation; names the offending field.
class config_error : public std::runtime_error {
public:
  config_error(std::string field_path, const std::string& what)
      : std::runtime_error(field_path + ": " + what), field(std::move(field_path)) {}
  std::string field;
};

}  // namespace bvf

#endif
