#include "roundcount/inference.hpp"

#include <boost/math/distributions/normal.hpp>

#include <cmath>
#include <string>

#include "roundcount/errors.hpp"
#include "roundcount/estimation.hpp"

namespace roundcount {

namespace {

void require_lattice(std::int64_t u, std::int64_t n, const char* name) {
  if (n < 1) throw DomainError(std::string(name) + ": group size must be >= 1");
  if (u < 0 || u % n != 0)
    throw DomainError(std::string(name) + ": value must be a non-negative multiple of its group size");
}

void require_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
}

void require_phi0(double phi0) {
  if (!(phi0 > 0.0 && phi0 < 1.0)) throw DomainError("phi0 must lie strictly inside (0, 1)");
}

RoundedPmf binomial_u_pmf(std::int64_t m, std::int64_t n, double phi0) {
  return rounded_pmf(CountModel::binomial(m * n, phi0), RoundingScheme{n, TieRule::HalfUp});
}

}  // namespace

void ExcessDeathsDesign::validate() const {
  if (n1 < 1 || n2 < 1) throw DomainError("n1 and n2 must be >= 1");
  if (!(theta > 0.0) || !std::isfinite(theta)) throw DomainError("theta must be positive");
  if (!(theta + beta > 0.0) || !std::isfinite(beta)) throw DomainError("theta + beta must be positive");
}

ExcessPointEstimate excess_point_estimates(std::int64_t u1, std::int64_t u2, std::int64_t n1,
                                           std::int64_t n2) {
  require_lattice(u1, n1, "u1");
  require_lattice(u2, n2, "u2");
  const double ratio = static_cast<double>(n2) / static_cast<double>(n1);
  ExcessPointEstimate est;
  est.xi = static_cast<double>(u2) - ratio * static_cast<double>(u1);
  const CountModel poisson = CountModel::poisson(1.0);
  const double after = numeric_mle(poisson, u2, RoundingScheme{n2, TieRule::HalfUp}).value;
  const double before = numeric_mle(poisson, u1, RoundingScheme{n1, TieRule::HalfUp}).value;
  est.xi_mle = after - ratio * before;
  return est;
}

ExcessMoments excess_moments(const ExcessDeathsDesign& design) {
  design.validate();
  const double ratio = static_cast<double>(design.n2) / static_cast<double>(design.n1);
  const MomentReport before = rounded_moments_poisson(design.theta, design.n1);
  const MomentReport after = rounded_moments_poisson(design.theta + design.beta, design.n2);
  ExcessMoments out;
  out.mean_xi = after.mean - ratio * before.mean;
  out.var_xi = after.variance + ratio * ratio * before.variance;
  out.mean_xi_star = design.beta + design.theta * (1.0 - ratio);
  out.var_xi_star = design.beta + design.theta * (1.0 + ratio * ratio);
  out.imag_residual = std::max(before.imag_residual, after.imag_residual);
  return out;
}

std::string_view to_string(SignificanceMode mode) {
  switch (mode) {
    case SignificanceMode::ExactY:
      return "exact-y";
    case SignificanceMode::MisspecifiedU:
      return "misspecified-u";
    case SignificanceMode::BinnedU:
      return "binned-u";
  }
  return "unknown";
}

SignificanceMode parse_significance_mode(std::string_view name) {
  if (name == "exact-y") return SignificanceMode::ExactY;
  if (name == "misspecified-u") return SignificanceMode::MisspecifiedU;
  if (name == "binned-u") return SignificanceMode::BinnedU;
  throw DomainError("unknown significance mode '" + std::string(name) + "'");
}

BinnedTestResult binned_test_on_pmf(const RoundedPmf& pmf, std::int64_t u, double alpha) {
  require_alpha(alpha);
  const double half = 0.5 * alpha;
  const auto size = static_cast<std::int64_t>(pmf.probs.size());
  BinnedTestResult out;

  double lower_mass = 0.0;
  double cumulative = 0.0;
  for (std::int64_t k = 0; k < size; ++k) {
    cumulative += pmf.probs[k];
    if (cumulative > half) break;
    out.lower_critical = k * pmf.n;
    lower_mass = cumulative;
  }
  // Mass beyond the tabulation sits in the upper tail.
  double upper_mass = 0.0;
  cumulative = pmf.truncation_mass;
  for (std::int64_t k = size - 1; k >= 0; --k) {
    cumulative += pmf.probs[k];
    if (cumulative > half) break;
    out.upper_critical = k * pmf.n;
    upper_mass = cumulative;
  }
  out.true_level = lower_mass + upper_mass;
  out.reject = (out.lower_critical && u <= *out.lower_critical) ||
               (out.upper_critical && u >= *out.upper_critical);
  return out;
}

BinnedTestResult binned_binomial_test(std::int64_t u, std::int64_t m, std::int64_t n, double phi0,
                                      double alpha) {
  if (m < 1) throw DomainError("m must be >= 1");
  require_lattice(u, n, "u");
  require_phi0(phi0);
  return binned_test_on_pmf(binomial_u_pmf(m, n, phi0), u, alpha);
}

SignificanceCurve true_significance(const SignificanceSpec& spec) {
  if (spec.m < 1 || spec.n < 1) throw DomainError("m and n must be >= 1");
  require_alpha(spec.alpha);
  if (spec.phi0_grid.empty()) throw DomainError("phi0 grid must be non-empty");
  for (const double phi0 : spec.phi0_grid) require_phi0(phi0);

  const boost::math::normal standard;
  const double z = boost::math::quantile(boost::math::complement(standard, 0.5 * spec.alpha));
  const double trials = static_cast<double>(spec.m * spec.n);

  SignificanceCurve curve;
  curve.spec = spec;
  curve.true_level.reserve(spec.phi0_grid.size());
  for (const double phi0 : spec.phi0_grid) {
    if (spec.mode == SignificanceMode::BinnedU) {
      curve.true_level.push_back(binned_test_on_pmf(binomial_u_pmf(spec.m, spec.n, phi0), 0, spec.alpha).true_level);
      continue;
    }
    const std::int64_t group = spec.mode == SignificanceMode::ExactY ? 1 : spec.n;
    const RoundedPmf pmf = rounded_pmf(CountModel::binomial(spec.m * spec.n, phi0),
                                       RoundingScheme{group, TieRule::HalfUp});
    const double centre = trials * phi0;
    const double scale = std::sqrt(trials * phi0 * (1.0 - phi0));
    double level = pmf.truncation_mass;
    for (std::size_t k = 0; k < pmf.probs.size(); ++k) {
      const double w = static_cast<double>(static_cast<std::int64_t>(k) * pmf.n);
      if (std::abs(w - centre) / scale >= z) level += pmf.probs[k];
    }
    curve.true_level.push_back(std::min(1.0, level));
  }
  return curve;
}

}  // namespace roundcount
