#pragma once

// Two applications of the rounded proxy: excess counts between a baseline and
// a follow-up period, and tests on a binomial success probability.

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "roundcount/rounding.hpp"

namespace roundcount {

/// Baseline days X ~ Poisson(θ) over n1 days, follow-up Y ~ Poisson(θ+β) over n2 days.
struct ExcessDeathsDesign {
  std::int64_t n1 = 1;
  std::int64_t n2 = 1;
  double theta = 1.0;
  double beta = 0.0;

  void validate() const;
};

struct ExcessPointEstimate {
  double xi = 0.0;
  double xi_mle = 0.0;
};

/// ξ = u2 - (n2/n1) u1, and the same contrast between MLEs of θ+β and θ.
ExcessPointEstimate excess_point_estimates(std::int64_t u1, std::int64_t u2, std::int64_t n1,
                                           std::int64_t n2);

struct ExcessMoments {
  double mean_xi = 0.0;
  double var_xi = 0.0;
  /// Unrounded contrast ξ* = Y - (n2/n1) X.
  double mean_xi_star = 0.0;
  double var_xi_star = 0.0;
  double imag_residual = 0.0;
};

ExcessMoments excess_moments(const ExcessDeathsDesign& design);

enum class SignificanceMode { ExactY, MisspecifiedU, BinnedU };

std::string_view to_string(SignificanceMode mode);
SignificanceMode parse_significance_mode(std::string_view name);

struct SignificanceSpec {
  std::int64_t m = 500;
  std::int64_t n = 31;
  std::vector<double> phi0_grid;
  double alpha = 0.05;
  SignificanceMode mode = SignificanceMode::ExactY;
};

struct SignificanceCurve {
  SignificanceSpec spec;
  std::vector<double> true_level;
};

/// Exact probability under H0: φ = φ0 that the test rejects.
///
/// ExactY and MisspecifiedU use the normal test |T| >= z_{α/2} with
/// T = (w - mnφ0) / sqrt(mnφ0(1-φ0)), applied to W = Y or W = U. BinnedU
/// uses binned_binomial_test's equal-tail region on the pmf of U.
SignificanceCurve true_significance(const SignificanceSpec& spec);

struct BinnedTestResult {
  bool reject = false;
  double true_level = 0.0;
  /// Largest u with P(U <= u) <= α/2, if any.
  std::optional<std::int64_t> lower_critical;
  /// Smallest u with P(U >= u) <= α/2, if any.
  std::optional<std::int64_t> upper_critical;
};

/// Equal-tail exact test of φ = φ0 on U from Binomial(mn, φ) counts.
BinnedTestResult binned_binomial_test(std::int64_t u, std::int64_t m, std::int64_t n, double phi0,
                                      double alpha);

/// Rejection region and level for a tabulated pmf; `u` may be any value.
BinnedTestResult binned_test_on_pmf(const RoundedPmf& pmf, std::int64_t u, double alpha);

}  // namespace roundcount
