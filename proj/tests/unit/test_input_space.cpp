#include <algorithm>
#include <cmath>

#include "bvf/errors.hpp"
#include "bvf/input_space.hpp"
#include "bvf/rng.hpp"
#include "doctest.h"

using namespace bvf;

namespace {
InputSpace make_1d_uniform(double lo, double hi) {
  InputSpace s;
  s.marginals.push_back(Marginal::uniform(lo, hi));
  return s;
}
}  // namespace

TEST_CASE("lhs places one sample per stratum") {
  auto space = make_1d_uniform(0.0, 1.0);
  SampleMatrix x = sample_prior(space, 4, SamplingMethod::lhs, 7);
  REQUIRE(x.rows() == 4);
  std::vector<double> v(x.col(0).begin(), x.col(0).end());
  std::sort(v.begin(), v.end());
  CHECK(v[0] >= 0.0);
  CHECK(v[0] < 0.25);
  CHECK(v[1] >= 0.25);
  CHECK(v[1] < 0.5);
  CHECK(v[2] >= 0.5);
  CHECK(v[2] < 0.75);
  CHECK(v[3] >= 0.75);
  CHECK(v[3] <= 1.0);
}

TEST_CASE("lhs stratification holds per dimension in higher dimensions") {
  InputSpace space;
  space.marginals.push_back(Marginal::uniform(0.0, 1.0));
  space.marginals.push_back(Marginal::uniform(-2.0, 2.0));
  space.marginals.push_back(Marginal::gaussian(1.0, 0.5));
  const int n = 16;
  SampleMatrix x = sample_prior(space, n, SamplingMethod::lhs, 123);
  // Mapping each coordinate back through its marginal CDF must put exactly
  // one point in each of the n equiprobable strata.
  for (int d = 0; d < 2; ++d) {
    std::vector<double> u;
    for (int i = 0; i < n; ++i) {
      const Marginal& m = space.marginals[static_cast<std::size_t>(d)];
      u.push_back((x(i, d) - m.lower) / (m.upper - m.lower));
    }
    std::sort(u.begin(), u.end());
    for (int i = 0; i < n; ++i) {
      CHECK(u[static_cast<std::size_t>(i)] >= static_cast<double>(i) / n);
      CHECK(u[static_cast<std::size_t>(i)] <= static_cast<double>(i + 1) / n);
    }
  }
}

TEST_CASE("sampling is deterministic in the seed") {
  auto space = make_1d_uniform(0.0, 1.0);
  SampleMatrix a = sample_prior(space, 10, SamplingMethod::lhs, 7);
  SampleMatrix b = sample_prior(space, 10, SamplingMethod::lhs, 7);
  CHECK(a == b);
  SampleMatrix c = sample_prior(space, 10, SamplingMethod::lhs, 8);
  CHECK(a != c);
}

TEST_CASE("random sampling matches the uniform law moments") {
  const double lo = 1e-13, hi = 1e-11;
  auto space = make_1d_uniform(lo, hi);
  const int n = 1000;
  SampleMatrix x = sample_prior(space, n, SamplingMethod::random, 42);
  CHECK((x.array() >= lo).all());
  CHECK((x.array() <= hi).all());
  const double mean = x.col(0).mean();
  const double expect = 0.5 * (lo + hi);
  const double sd = (hi - lo) / std::sqrt(12.0);
  CHECK(std::abs(mean - expect) < 3.0 * sd / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("sample_prior rejects n = 0") {
  auto space = make_1d_uniform(0.0, 1.0);
  CHECK_THROWS_AS(sample_prior(space, 0, SamplingMethod::random, 1),
                  std::invalid_argument);
}

TEST_CASE("standardization maps bounds and midpoint") {
  const double lo = 1e-13, hi = 1e-11;
  Marginal m = Marginal::uniform(lo, hi);
  CHECK(m.from_standard(0.0) == doctest::Approx(5.05e-12).epsilon(1e-14));
  CHECK(m.to_standard(lo) == doctest::Approx(-1.0));
  CHECK(m.to_standard(hi) == doctest::Approx(1.0));
}

TEST_CASE("standardization round-trips to 1e-12 relative") {
  InputSpace space;
  space.marginals.push_back(Marginal::uniform(1e-13, 1e-11));
  space.marginals.push_back(Marginal::gaussian(3.0, 2.0));
  SampleMatrix x = sample_prior(space, 100, SamplingMethod::random, 5);
  SampleMatrix back = from_standard(space, to_standard(space, x));
  for (int i = 0; i < x.rows(); ++i)
    for (int d = 0; d < x.cols(); ++d)
      CHECK(std::abs(back(i, d) - x(i, d)) <= 1e-12 * std::abs(x(i, d)));
}

TEST_CASE("standardized uniform samples have mean 0 and variance 1/3") {
  auto space = make_1d_uniform(-4.0, 10.0);
  const int n = 20000;
  SampleMatrix u = to_standard(space, sample_prior(space, n, SamplingMethod::random, 9));
  const double mean = u.col(0).mean();
  const double var = (u.col(0).array() - mean).square().sum() / n;
  // 3-sigma Monte Carlo bands: sd(mean) = sqrt(1/3/n), sd(var) ~ sqrt(4/45/n).
  CHECK(std::abs(mean) < 3.0 * std::sqrt(1.0 / 3.0 / n));
  CHECK(std::abs(var - 1.0 / 3.0) < 3.0 * std::sqrt(4.0 / 45.0 / n));
}

TEST_CASE("out-of-support coordinates raise domain errors") {
  auto space = make_1d_uniform(0.0, 1.0);
  SampleMatrix bad(1, 1);
  bad << 1.5;
  CHECK_THROWS_AS(to_standard(space, bad), std::domain_error);
  SampleMatrix bad_u(1, 1);
  bad_u << -1.0001;
  CHECK_THROWS_AS(from_standard(space, bad_u), std::domain_error);
}

TEST_CASE("marginal invariants are enforced") {
  CHECK_THROWS_AS(Marginal::uniform(1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(Marginal::gaussian(0.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(Marginal::moments({0.5, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(Marginal::moments({}), std::invalid_argument);
}

TEST_CASE("moments marginals cannot be sampled") {
  InputSpace space;
  space.marginals.push_back(Marginal::moments({1.0, 0.0, 1.0 / 3.0}));
  CHECK_THROWS_AS(sample_prior(space, 3, SamplingMethod::random, 1),
                  std::invalid_argument);
}

TEST_CASE("gaussian lhs respects equiprobable strata") {
  InputSpace space;
  space.marginals.push_back(Marginal::gaussian(0.0, 1.0));
  const int n = 8;
  SampleMatrix x = sample_prior(space, n, SamplingMethod::lhs, 3);
  std::vector<double> v(x.col(0).begin(), x.col(0).end());
  std::sort(v.begin(), v.end());
  for (int i = 0; i + 1 < n; ++i) {
    // Stratum boundaries are normal quantiles at i/n.
    const double boundary = inverse_normal_cdf(static_cast<double>(i + 1) / n);
    CHECK(v[static_cast<std::size_t>(i)] <= boundary);
    CHECK(v[static_cast<std::size_t>(i + 1)] >= boundary);
  }
}

TEST_CASE("input space JSON round-trip") {
  InputSpace space;
  space.marginals.push_back(Marginal::uniform(1e-13, 1e-11));
  space.marginals.push_back(Marginal::gaussian(2.0, 0.5));
  space.marginals.push_back(Marginal::moments({1.0, 0.0, 1.0 / 3.0, 0.0, 0.2}));
  space.names = {"perm", "depth", "misc"};
  InputSpace back = InputSpace::from_json(space.to_json());
  REQUIRE(back.dim() == 3);
  CHECK(back.marginals[0].kind == MarginalKind::uniform);
  CHECK(back.marginals[0].lower == space.marginals[0].lower);
  CHECK(back.marginals[1].stddev == 0.5);
  CHECK(back.marginals[2].raw_moments == space.marginals[2].raw_moments);
  CHECK(back.names[0] == "perm");
}

TEST_CASE("inverse normal CDF agrees with erf") {
  for (double p : {1e-9, 0.001, 0.3, 0.5, 0.9, 0.999999}) {
    const double x = inverse_normal_cdf(p);
    const double back = 0.5 * std::erfc(-x / std::sqrt(2.0));
    CHECK(std::abs(back - p) < 1e-13);
  }
  CHECK(inverse_normal_cdf(0.5) == doctest::Approx(0.0).epsilon(1e-15));
}
