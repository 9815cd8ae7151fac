#include <doctest.h>

#include <boost/math/distributions/normal.hpp>

#include <cmath>

#include "oracles.hpp"
#include "roundcount/errors.hpp"
#include "roundcount/estimation.hpp"
#include "roundcount/inference.hpp"

using namespace roundcount;

namespace {

// E and Var of U2 - r U1 over the joint lattice of two independent rounded Poissons.
oracle::Moments joint_enumeration(const ExcessDeathsDesign& d) {
  const auto p1 = oracle::enumerate_u(CountModel::poisson(d.theta), d.n1, 200);
  const auto p2 = oracle::enumerate_u(CountModel::poisson(d.theta + d.beta), d.n2, 200);
  const double r = static_cast<double>(d.n2) / static_cast<double>(d.n1);
  double mean = 0.0;
  for (const auto& [u1, a] : p1)
    for (const auto& [u2, b] : p2) mean += (static_cast<double>(u2) - r * static_cast<double>(u1)) * a * b;
  double var = 0.0;
  for (const auto& [u1, a] : p1)
    for (const auto& [u2, b] : p2) {
      const double dev = static_cast<double>(u2) - r * static_cast<double>(u1) - mean;
      var += dev * dev * a * b;
    }
  return {mean, var};
}

std::vector<double> phi0_grid() {
  std::vector<double> g;
  for (int k = 2; k <= 18; ++k) g.push_back(k / 20.0);
  return g;
}

}  // namespace

TEST_CASE("excess point estimates") {
  CHECK(excess_point_estimates(14, 14, 7, 7).xi == 0.0);
  CHECK(excess_point_estimates(7, 28, 7, 14).xi == 14.0);
  const ExcessPointEstimate e = excess_point_estimates(2, 6, 2, 2);
  CHECK(e.xi_mle == doctest::Approx(std::sqrt(30.0) - std::sqrt(2.0)).epsilon(1e-9));
  CHECK_THROWS_AS(excess_point_estimates(3, 4, 2, 2), DomainError);
}

TEST_CASE("excess moments without rounding") {
  for (double theta : {0.5, 4.0, 20.0})
    for (double beta : {-0.2, 0.0, 3.0}) {
      const ExcessMoments m = excess_moments({1, 1, theta, beta});
      CHECK(m.mean_xi == doctest::Approx(beta).epsilon(1e-12).scale(1e-12));
      CHECK(m.var_xi == doctest::Approx(beta + 2 * theta).epsilon(1e-12));
      CHECK(m.mean_xi_star == doctest::Approx(beta).scale(1e-12));
      CHECK(m.var_xi_star == doctest::Approx(beta + 2 * theta));
    }
}

TEST_CASE("excess moments match joint enumeration") {
  for (std::int64_t n1 : {1, 2, 3, 5, 6})
    for (std::int64_t n2 : {1, 2, 4, 6})
      for (double theta : {0.7, 5.0, 18.0})
        for (double beta : {-0.5, 2.0, 11.0}) {
          const ExcessDeathsDesign d{n1, n2, theta, beta};
          CAPTURE(n1);
          CAPTURE(n2);
          CAPTURE(theta);
          CAPTURE(beta);
          const auto ref = joint_enumeration(d);
          const ExcessMoments m = excess_moments(d);
          CHECK(std::abs(m.mean_xi - ref.mean) < 1e-9);
          CHECK(std::abs(m.var_xi - ref.variance) < 1e-9);
        }
}

TEST_CASE("variance inflation at half-integer means") {
  // θ = n (I + 1/2) puts the latent mean on a rounding boundary.
  const ExcessDeathsDesign d{4, 4, 3.5 * 4, 0.0};
  const ExcessMoments m = excess_moments(d);
  CHECK(m.var_xi > m.var_xi_star);
  const auto ref = joint_enumeration(d);
  CHECK(ref.variance > m.var_xi_star);
}

TEST_CASE("excess design validation") {
  CHECK_THROWS_AS(excess_moments({0, 1, 1.0, 0.0}), DomainError);
  CHECK_THROWS_AS(excess_moments({1, 1, 2.0, -2.0}), DomainError);
  CHECK_THROWS_AS(excess_moments({1, 1, -1.0, 3.0}), DomainError);
}

TEST_CASE("significance modes round-trip") {
  for (auto m : {SignificanceMode::ExactY, SignificanceMode::MisspecifiedU, SignificanceMode::BinnedU})
    CHECK(parse_significance_mode(to_string(m)) == m);
}

TEST_CASE("exact-Y true level by direct summation") {
  const std::int64_t m = 40;
  const std::int64_t n = 3;
  const double alpha = 0.05;
  SignificanceSpec spec{m, n, {0.2, 0.45, 0.7}, alpha, SignificanceMode::ExactY};
  const SignificanceCurve c = true_significance(spec);
  const double z = boost::math::quantile(boost::math::normal(), 1.0 - alpha / 2);
  for (std::size_t i = 0; i < spec.phi0_grid.size(); ++i) {
    const double phi0 = spec.phi0_grid[i];
    const double mu = m * n * phi0;
    const double sd = std::sqrt(m * n * phi0 * (1 - phi0));
    double ref = 0.0;
    for (std::int64_t y = 0; y <= m * n; ++y)
      if (std::abs(y - mu) / sd >= z) ref += oracle::binomial_pmf(m * n, phi0, y);
    CHECK(c.true_level[i] == doctest::Approx(ref).epsilon(1e-10));
  }
}

TEST_CASE("misspecified U reduces to exact Y when n = 1") {
  SignificanceSpec spec{300, 1, phi0_grid(), 0.05, SignificanceMode::ExactY};
  const auto exact = true_significance(spec);
  spec.mode = SignificanceMode::MisspecifiedU;
  const auto mis = true_significance(spec);
  CHECK(exact.true_level == mis.true_level);
}

TEST_CASE("binned test is conservative and monotone in alpha") {
  for (double phi0 : {0.1, 0.37, 0.5, 0.8})
    for (std::int64_t n : {1, 4, 31}) {
      double prev_level = 0.0;
      std::optional<std::int64_t> prev_lo;
      std::optional<std::int64_t> prev_hi;
      for (double alpha : {0.01, 0.05, 0.1, 0.2}) {
        const BinnedTestResult r = binned_binomial_test(0, 50, n, phi0, alpha);
        CHECK(r.true_level <= alpha);
        CHECK(r.true_level >= prev_level);
        // Raising α never shrinks the rejection region.
        if (prev_lo) CHECK((r.lower_critical && *r.lower_critical >= *prev_lo));
        if (prev_hi) CHECK((r.upper_critical && *r.upper_critical <= *prev_hi));
        prev_level = r.true_level;
        prev_lo = r.lower_critical;
        prev_hi = r.upper_critical;
      }
    }
}

TEST_CASE("binned test at n = 1 is the equal-tail exact binomial test") {
  const std::int64_t trials = 25;
  const double phi0 = 0.3;
  const double alpha = 0.05;
  const BinnedTestResult r = binned_binomial_test(0, trials, 1, phi0, alpha);
  double lower = 0.0;
  std::int64_t c1 = -1;
  for (std::int64_t y = 0; y <= trials; ++y) {
    lower += oracle::binomial_pmf(trials, phi0, y);
    if (lower > alpha / 2) break;
    c1 = y;
  }
  double upper = 0.0;
  std::int64_t c2 = trials + 1;
  for (std::int64_t y = trials; y >= 0; --y) {
    upper += oracle::binomial_pmf(trials, phi0, y);
    if (upper > alpha / 2) break;
    c2 = y;
  }
  CHECK(r.lower_critical.value_or(-1) == c1);
  CHECK(r.upper_critical.value_or(trials + 1) == c2);
  CHECK(binned_binomial_test(c1, trials, 1, phi0, alpha).reject);
  CHECK_FALSE(binned_binomial_test(c1 + 1, trials, 1, phi0, alpha).reject);
  CHECK(binned_binomial_test(c2, trials, 1, phi0, alpha).reject);
}

TEST_CASE("significance domain errors") {
  CHECK_THROWS_AS(true_significance({10, 2, {0.0}, 0.05, SignificanceMode::ExactY}), DomainError);
  CHECK_THROWS_AS(true_significance({10, 2, {1.0}, 0.05, SignificanceMode::MisspecifiedU}), DomainError);
  CHECK_THROWS_AS(true_significance({10, 2, {0.5}, 1.0, SignificanceMode::ExactY}), DomainError);
  CHECK_THROWS_AS(binned_binomial_test(3, 10, 2, 0.5, 0.05), DomainError);
}

TEST_CASE("grid ordering of true levels") {
  // ExactY level is a probability; BinnedU level never exceeds α.
  for (double alpha : {0.01, 0.05, 0.1}) {
    const auto y = true_significance({500, 31, phi0_grid(), alpha, SignificanceMode::ExactY});
    const auto b = true_significance({500, 31, phi0_grid(), alpha, SignificanceMode::BinnedU});
    for (std::size_t i = 0; i < y.true_level.size(); ++i) {
      CHECK(y.true_level[i] >= 0.0);
      CHECK(y.true_level[i] <= 1.0);
      CHECK(b.true_level[i] <= alpha);
    }
  }
}
