#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "roundcount/errors.hpp"
#include "roundcount/estimation.hpp"

using namespace roundcount;

TEST_CASE("closed-form Poisson MLE values") {
  CHECK(poisson_mle_closed(2, 2).value == std::sqrt(2.0));
  CHECK(poisson_mle_closed(6, 2).value == std::sqrt(30.0));
  CHECK(poisson_mle_closed(0, 2).value == 0.0);
  CHECK(poisson_mle_closed(3, 3).value == doctest::Approx(std::cbrt(24.0)).epsilon(1e-15));
  CHECK(poisson_mle_closed(0, 4).value == doctest::Approx(1.0).epsilon(1e-15));
  // n = 1: θ̂ = u.
  for (std::int64_t u = 1; u < 30; ++u) CHECK(poisson_mle_closed(u, 1).value == static_cast<double>(u));
  // u = 0 with n = 5: factors 1, 2.
  CHECK(poisson_mle_closed(0, 5).value == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
}

TEST_CASE("numeric Poisson MLE matches a golden-section maximizer") {
  for (std::int64_t n : {2, 3, 4, 5, 8})
    for (std::int64_t k = 1; k <= 12; ++k) {
      const std::int64_t u = k * n;
      CAPTURE(n);
      CAPTURE(u);
      const double ref = oracle::golden_max([&](double t) { return oracle::poisson_u_loglik(t, u, n); }, 1e-6,
                                            static_cast<double>(u + 3 * n), 1e-12);
      const Estimate e = numeric_mle(CountModel::poisson(1.0), u, RoundingScheme{n, TieRule::HalfUp});
      CHECK(e.converged);
      CHECK(e.value == doctest::Approx(ref).epsilon(1e-5));
      CHECK(e.loglik_at_optimum >= oracle::poisson_u_loglik(ref, u, n) - 1e-12);
    }
}

TEST_CASE("numeric binomial and negative binomial MLEs maximize the binned likelihood") {
  const CountModel families[] = {CountModel::binomial(30, 0.5), CountModel::binomial(8, 0.5),
                                 CountModel::negative_binomial(5.0, 0.5), CountModel::negative_binomial(1.3, 0.5)};
  for (const auto& fam : families)
    for (std::int64_t n : {1, 2, 3, 5})
      for (std::int64_t k = 1; k <= 5; ++k) {
        const std::int64_t u = k * n;
        if (fam.family() == Family::Binomial && u > fam.trials()) continue;
        CAPTURE(fam.describe());
        CAPTURE(n);
        CAPTURE(u);
        const RoundingScheme scheme{n, TieRule::HalfUp};
        const auto loglik = [&](double p) {
          const auto ref = oracle::enumerate_u(fam.with_free_parameter(p), n, fam.family() == Family::Binomial
                                                                                  ? fam.trials()
                                                                                  : 4000);
          const auto it = ref.find(u);
          return it == ref.end() ? -INFINITY : std::log(it->second);
        };
        const double ref = oracle::golden_max(loglik, 1e-9, 1.0 - 1e-9, 1e-10);
        const Estimate e = numeric_mle(fam, u, scheme);
        CHECK(e.value == doctest::Approx(ref).epsilon(1e-4).scale(1e-6));
        CHECK(e.loglik_at_optimum >= loglik(ref) - 1e-9);
      }
}

TEST_CASE("edge maxima return the edge") {
  const RoundingScheme two{2, TieRule::HalfUp};
  CHECK(numeric_mle(CountModel::binomial(6, 0.5), 0, two).value == 0.0);
  CHECK(numeric_mle(CountModel::binomial(6, 0.5), 6, two).value == 1.0);
  CHECK(numeric_mle(CountModel::binomial(6, 0.5), 6, RoundingScheme{1, TieRule::HalfUp}).value == 1.0);
  CHECK(numeric_mle(CountModel::negative_binomial(3.0, 0.5), 0, RoundingScheme{1, TieRule::HalfUp}).value == 1.0);
  // Poisson u = 0 reports the closed form.
  CHECK(numeric_mle(CountModel::poisson(1.0), 0, RoundingScheme{6, TieRule::HalfUp}).value ==
        poisson_mle_closed(0, 6).value);
}

TEST_CASE("numeric MLE domain errors") {
  const RoundingScheme three{3, TieRule::HalfUp};
  CHECK_THROWS_AS(numeric_mle(CountModel::poisson(1.0), 4, three), DomainError);
  CHECK_THROWS_AS(numeric_mle(CountModel::poisson(1.0), -3, three), DomainError);
  CHECK_THROWS_AS(numeric_mle(CountModel::binomial(4, 0.5), 9, three), NoMaximumError);
}

TEST_CASE("exact MSE equals a direct sum") {
  const auto m = CountModel::poisson(3.0);
  const RoundingScheme scheme{4, TieRule::HalfUp};
  const EstimatorMap identity = [](std::int64_t u) { return static_cast<double>(u); };
  double ref = 0.0;
  for (std::int64_t y = 0; y < 200; ++y) {
    const double p = oracle::poisson_pmf(3.0, y);
    if (p > 1e-10) ref += std::pow(static_cast<double>(oracle::round_half_up(y, 4)) - 3.0, 2) * p;
  }
  CHECK(exact_mse(identity, m, scheme, 3.0) == doctest::Approx(ref).epsilon(1e-14));
  CHECK(exact_mse(identity, m, scheme, 3.0, false) == doctest::Approx(3.0).epsilon(1e-8));
}

TEST_CASE("MLE cache memoizes") {
  MleCache cache(CountModel::poisson(1.0), RoundingScheme{5, TieRule::HalfUp});
  const double a = cache(10);
  const double b = cache(10);
  CHECK(a == b);
  CHECK(cache.size() == 1);
  cache(15);
  CHECK(cache.size() == 2);
}

TEST_CASE("MSE ratio is exactly one without rounding") {
  const std::vector<double> thetas{0.1, 0.5, 2.0, 7.0};
  const std::vector<double> phis{0.05, 0.3, 0.5, 0.9};
  const std::vector<std::int64_t> one{1};
  for (const double v : mse_ratio_curve(Family::Poisson, thetas, one).psi) CHECK(v == 1.0);
  for (const double v : mse_ratio_curve(Family::Binomial, phis, one).psi) CHECK(v == 1.0);
  for (const double v : mse_ratio_curve(Family::NegativeBinomial, phis, one).psi) CHECK(v == 1.0);
}

TEST_CASE("MSE ratio layout is row-major over n") {
  const std::vector<double> thetas{1.0, 4.0};
  const std::vector<std::int64_t> ns{1, 3};
  const MseRatioCurve c = mse_ratio_curve(Family::Poisson, thetas, ns);
  REQUIRE(c.psi.size() == 4);
  CHECK(c.psi[0] == 1.0);
  CHECK(c.psi[1] == 1.0);
  MleCache mle(CountModel::poisson(1.0), RoundingScheme{3, TieRule::HalfUp});
  const double expect = exact_mse([&](std::int64_t u) { return mle(u); }, CountModel::poisson(4.0),
                                  RoundingScheme{3, TieRule::HalfUp}, 4.0);
  CHECK(c.mse_rounded[3] == expect);
}

TEST_CASE("estimator kinds") {
  for (EstimatorKind k : {EstimatorKind::U, EstimatorKind::ClosedMle, EstimatorKind::NumericMle})
    CHECK(parse_estimator(to_string(k)) == k);
  const RoundingScheme two{2, TieRule::HalfUp};
  CHECK(apply_estimator(EstimatorKind::U, CountModel::binomial(10, 0.5), two, 4) == 0.4);
  CHECK(apply_estimator(EstimatorKind::U, CountModel::negative_binomial(5.0, 0.5), two, 5) == 0.5);
  CHECK_THROWS_AS(apply_estimator(EstimatorKind::ClosedMle, CountModel::binomial(10, 0.5), two, 4), DomainError);
}

TEST_CASE("Monte Carlo MSE agrees with the exact MSE") {
  const auto m = CountModel::poisson(2.0);
  const RoundingScheme scheme{2, TieRule::HalfUp};
  const EstimatorKind kinds[] = {EstimatorKind::U, EstimatorKind::ClosedMle};
  const auto mc = monte_carlo_mse(m, scheme, kinds, 50000, 1234);
  const double exact_u = exact_mse([](std::int64_t u) { return static_cast<double>(u); }, m, scheme, 2.0);
  const double exact_mle = exact_mse([](std::int64_t u) { return poisson_mle_closed(u, 2).value; }, m, scheme, 2.0);
  CHECK(std::abs(mc[0].mse - exact_u) < 4 * mc[0].standard_error);
  CHECK(std::abs(mc[1].mse - exact_mle) < 4 * mc[1].standard_error);
}

TEST_CASE("Monte Carlo MSE does not depend on the worker count") {
  const auto m = CountModel::poisson(6.0);
  const RoundingScheme scheme{3, TieRule::HalfUp};
  const EstimatorKind kinds[] = {EstimatorKind::U, EstimatorKind::NumericMle};
  const auto a = monte_carlo_mse(m, scheme, kinds, 20000, 99, 1);
  const auto b = monte_carlo_mse(m, scheme, kinds, 20000, 99, 4);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].mse == b[i].mse);
    CHECK(a[i].standard_error == b[i].standard_error);
  }
}

TEST_CASE("unsupported estimators are flagged, not dropped") {
  const EstimatorKind kinds[] = {EstimatorKind::ClosedMle, EstimatorKind::U};
  const auto r = monte_carlo_mse(CountModel::binomial(10, 0.3), RoundingScheme{2, TieRule::HalfUp}, kinds, 100, 1);
  REQUIRE(r.size() == 2);
  CHECK_FALSE(r[0].ok);
  CHECK(std::isnan(r[0].mse));
  CHECK(r[1].ok);
}
