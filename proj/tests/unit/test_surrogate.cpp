#include <cmath>

#include "bvf/adapters.hpp"
#include "bvf/surrogate.hpp"
#include "doctest.h"

using namespace bvf;

namespace {
InputSpace identity_space(int dim) {
  InputSpace s;
  for (int i = 0; i < dim; ++i) s.marginals.push_back(Marginal::uniform(-1.0, 1.0));
  return s;
}
}  // namespace

TEST_CASE("identity model is reproduced exactly by a degree-1 surrogate") {
  InputSpace space = identity_space(1);
  SampleMatrix design = sample_prior(space, 10, SamplingMethod::lhs, 17);
  Eigen::MatrixXd responses = design;  // y = theta
  PCESurrogate s = PCESurrogate::train(space, 1, design, responses);

  SampleMatrix held_out = sample_prior(space, 20, SamplingMethod::random, 18);
  Eigen::MatrixXd mean, stddev;
  s.predict_batch(held_out, mean, stddev);
  for (int i = 0; i < held_out.rows(); ++i)
    CHECK(std::abs(mean(i, 0) - held_out(i, 0)) < 1e-6);
}

TEST_CASE("constant output column becomes a constant surrogate") {
  InputSpace space = identity_space(2);
  SampleMatrix design = sample_prior(space, 25, SamplingMethod::lhs, 3);
  Eigen::MatrixXd responses(25, 2);
  responses.col(0) = design.col(0);
  responses.col(1).setConstant(-3.5);
  PCESurrogate s = PCESurrogate::train(space, 2, design, responses);

  Eigen::VectorXd mean, stddev;
  s.predict(Eigen::RowVectorXd::Constant(2, 0.3), mean, stddev);
  CHECK(mean(1) == doctest::Approx(-3.5).epsilon(1e-8));
  CHECK(s.fits()[1].active == std::vector<int>{0});
}

TEST_CASE("surrogate loo delegates to the sparse-fit formula") {
  InputSpace space = identity_space(2);
  SampleMatrix design = sample_prior(space, 30, SamplingMethod::lhs, 5);
  Eigen::MatrixXd responses(30, 1);
  responses.col(0) =
      design.col(0).array().square() + 0.5 * design.col(1).array();
  PCESurrogate s = PCESurrogate::train(space, 2, design, responses);
  Eigen::MatrixXd psi = s.basis().eval_design_matrix(to_standard(space, design));
  CHECK(s.loo()(0) ==
        doctest::Approx(loo_error(psi, responses.col(0), s.fits()[0])).epsilon(1e-14));
}

TEST_CASE("predict_all composes per-output sparse predictions") {
  InputSpace space = identity_space(3);
  SampleMatrix design = sample_prior(space, 40, SamplingMethod::lhs, 8);
  Eigen::MatrixXd responses(40, 2);
  responses.col(0) = design.col(0).array() * design.col(1).array();
  responses.col(1) = design.col(2);
  PCESurrogate s = PCESurrogate::train(space, 2, design, responses);

  Eigen::RowVectorXd theta = Eigen::RowVectorXd::Constant(3, 0.25);
  Eigen::VectorXd mean, stddev;
  s.predict(theta, mean, stddev);

  Eigen::VectorXd psi = s.basis().eval_row(to_standard(space, theta).row(0));
  for (int c = 0; c < 2; ++c) {
    double m = 0, v = 0;
    s.fits()[static_cast<std::size_t>(c)].predict(psi, m, v);
    CHECK(mean(c) == doctest::Approx(m).epsilon(1e-12));
    CHECK(stddev(c) == doctest::Approx(std::sqrt(v)).epsilon(1e-12));
    // Noise floor from the predictive variance formula.
    CHECK(stddev(c) >=
          std::sqrt(1.0 / s.fits()[static_cast<std::size_t>(c)].beta) - 1e-15);
  }
}

TEST_CASE("batched prediction equals pointwise prediction") {
  InputSpace space = identity_space(2);
  SampleMatrix design = sample_prior(space, 30, SamplingMethod::lhs, 31);
  Eigen::MatrixXd responses(30, 1);
  responses.col(0) = design.col(0).array().cube();
  PCESurrogate s = PCESurrogate::train(space, 3, design, responses);

  SampleMatrix pts = sample_prior(space, 100, SamplingMethod::random, 32);
  Eigen::MatrixXd mean_b, std_b;
  s.predict_batch(pts, mean_b, std_b);
  for (int i = 0; i < 100; ++i) {
    Eigen::VectorXd m, sd;
    s.predict(pts.row(i), m, sd);
    CHECK(m(0) == mean_b(i, 0));
    CHECK(sd(0) == std_b(i, 0));
  }
}

TEST_CASE("out-of-support query raises a domain error") {
  InputSpace space = identity_space(1);
  SampleMatrix design = sample_prior(space, 10, SamplingMethod::lhs, 2);
  PCESurrogate s = PCESurrogate::train(space, 1, design, design);
  Eigen::VectorXd mean, stddev;
  CHECK_THROWS_AS(s.predict(Eigen::RowVectorXd::Constant(1, 2.0), mean, stddev),
                  std::domain_error);
}

TEST_CASE("training validates row alignment") {
  InputSpace space = identity_space(1);
  SampleMatrix design = sample_prior(space, 10, SamplingMethod::lhs, 2);
  Eigen::MatrixXd responses(9, 1);
  responses.setZero();
  CHECK_THROWS_AS(PCESurrogate::train(space, 1, design, responses),
                  std::invalid_argument);
}

TEST_CASE("retraining reproduces fits bit-for-bit") {
  InputSpace space = identity_space(2);
  SampleMatrix design = sample_prior(space, 35, SamplingMethod::lhs, 21);
  Eigen::MatrixXd responses(35, 1);
  responses.col(0) = design.col(0).array().square() - design.col(1).array();
  PCESurrogate a = PCESurrogate::train(space, 2, design, responses);
  PCESurrogate b = PCESurrogate::train(space, 2, design, responses);
  CHECK(a.fits()[0].mean == b.fits()[0].mean);
  CHECK(a.fits()[0].beta == b.fits()[0].beta);
  CHECK(a.fits()[0].active == b.fits()[0].active);
}

TEST_CASE("surrogate JSON round-trip preserves predictions") {
  InputSpace space = identity_space(2);
  SampleMatrix design = sample_prior(space, 30, SamplingMethod::lhs, 41);
  Eigen::MatrixXd responses(30, 2);
  responses.col(0) = design.col(0).array() * 2.0 + 1.0;
  responses.col(1) = design.col(1).array().square();
  PCESurrogate s = PCESurrogate::train(space, 2, design, responses);
  PCESurrogate loaded = PCESurrogate::from_json(s.to_json());

  SampleMatrix pts = sample_prior(space, 50, SamplingMethod::random, 42);
  Eigen::MatrixXd m1, s1, m2, s2;
  s.predict_batch(pts, m1, s1);
  loaded.predict_batch(pts, m2, s2);
  CHECK((m1 - m2).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((s1 - s2).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(loaded.loo()(0) == s.loo()(0));
}

TEST_CASE("joint likelihood factorizes over outputs") {
  // The downstream Gaussian likelihood of a multi-output prediction is the
  // sum of per-output terms: the independence assumption in code.
  Eigen::VectorXd residual(3), cov(3);
  residual << 0.5, -1.0, 2.0;
  cov << 1.0, 4.0, 0.25;
  double sum = 0.0;
  for (int i = 0; i < 3; ++i)
    sum += gaussian_loglik(residual.segment(i, 1), cov.segment(i, 1));
  CHECK(gaussian_loglik(residual, cov) == doctest::Approx(sum).epsilon(1e-14));
}
