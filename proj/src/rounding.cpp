#include "roundcount/rounding.hpp"

#include <boost/math/special_functions/sin_pi.hpp>
#include <boost/math/special_functions/cos_pi.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "roundcount/errors.hpp"

namespace roundcount {

namespace {

using cplx = std::complex<double>;

cplx ipow(cplx base, std::int64_t exponent) {
  cplx result{1.0, 0.0};
  while (exponent > 0) {
    if (exponent & 1) result *= base;
    base *= base;
    exponent >>= 1;
  }
  return result;
}

cplx unit_pi(double turns_of_pi) {
  return {boost::math::cos_pi(turns_of_pi), boost::math::sin_pi(turns_of_pi)};
}

void require_half_up(const RoundingScheme& scheme, const char* what) {
  if (scheme.tie_rule != TieRule::HalfUp)
    throw DomainError(std::string(what) + " is only defined for round-half-up tie breaking");
}

double log_add(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

// Realize complex E(U), Var(U) and enforce the residual/variance invariants.
MomentReport realize(cplx mean, cplx variance, std::int64_t n) {
  MomentReport report;
  report.mean = mean.real();
  report.variance = variance.real();
  report.imag_residual = std::max(std::abs(mean.imag()), std::abs(variance.imag()));
  if (!(report.imag_residual <= kImagResidualLimit)) {
    std::ostringstream msg;
    msg << "moment series did not realize: imaginary residual " << report.imag_residual
        << " exceeds " << kImagResidualLimit << " (n=" << n << ")";
    throw NumericalError(msg.str());
  }
  if (report.variance < 0.0) {
    const double nd = static_cast<double>(n);
    if (report.variance < -kImagResidualLimit * (1.0 + nd * nd))
      throw NumericalError("moment series produced a negative variance");
    report.variance = 0.0;
  }
  return report;
}

// Σ a(j) G/(1-ω^j) and Σ a(j) (G'/(ω^j (1-ω^j)) - G/(1-ω^j)^2) over j = 1..n-1,
// with G and G' evaluated at 1/ω^j by the supplied callable.
template <typename PgfPair>
MomentReport series_moments(const RootsOfUnityTable& table, double mean_y, double var_y,
                            PgfPair&& pgf_at_inverse_root) {
  const std::int64_t n = table.n();
  cplx first{0.0, 0.0};
  cplx second{0.0, 0.0};
  for (std::int64_t j = 1; j < n; ++j) {
    const cplx w = table.omega_pow()[j];
    const cplx a = table.coeff_a()[j];
    const cplx one_minus = 1.0 - w;
    const auto [g, g_prime] = pgf_at_inverse_root(j, std::conj(w));
    first += a * g / one_minus;
    second += a * (g_prime / (w * one_minus) - g / (one_minus * one_minus));
  }
  const double nd = static_cast<double>(n);
  const cplx mean = mean_y + 0.5 * (2.0 * table.offset_r() - 1.0) + first;
  const cplx variance =
      var_y + (nd * nd - 1.0) / 12.0 - (2.0 * mean_y - 1.0) * first - first * first + 2.0 * second;
  return realize(mean, variance, n);
}

}  // namespace

std::string_view to_string(TieRule rule) {
  return rule == TieRule::HalfUp ? "half-up" : "half-even";
}

TieRule parse_tie_rule(std::string_view name) {
  if (name == "half-up" || name == "halfup") return TieRule::HalfUp;
  if (name == "half-even" || name == "halfeven") return TieRule::HalfEven;
  throw DomainError("unknown tie rule '" + std::string(name) + "'");
}

void RoundingScheme::validate() const {
  if (n < 1) throw DomainError("group size n must be >= 1");
}

RootsOfUnityTable::RootsOfUnityTable(std::int64_t n) : n_(n), offset_r_(n % 2 == 0 ? 1.0 : 0.5) {
  if (n < 1) throw DomainError("group size n must be >= 1");
  omega_pow_.reserve(static_cast<std::size_t>(n));
  coeff_a_.reserve(static_cast<std::size_t>(n));
  const double nd = static_cast<double>(n);
  for (std::int64_t j = 0; j < n; ++j) {
    const double jd = static_cast<double>(j);
    omega_pow_.push_back(unit_pi(2.0 * jd / nd));
    const double sign = (j % 2 == 0) ? 1.0 : -1.0;
    if (n % 2 == 0)
      coeff_a_.emplace_back(sign, 0.0);
    else
      coeff_a_.push_back(sign * unit_pi(jd / nd));  // (-1)^j ω^{j/2}
  }
}

std::int64_t RootsOfUnityTable::prefactor_exponent() const noexcept {
  return n_ % 2 == 0 ? n_ / 2 - 1 : (n_ - 1) / 2;
}

double RoundedPmf::at(std::int64_t u) const noexcept {
  if (u < 0 || u % n != 0) return 0.0;
  const std::int64_t k = u / n;
  if (k >= static_cast<std::int64_t>(probs.size())) return 0.0;
  return probs[static_cast<std::size_t>(k)];
}

std::int64_t round_to_nearest(double x, TieRule rule) {
  if (!(x >= 0.0) || !std::isfinite(x)) throw DomainError("round_to_nearest expects a finite x >= 0");
  const double down = std::floor(x);
  const double frac = x - down;
  auto k = static_cast<std::int64_t>(down);
  if (frac > 0.5) return k + 1;
  if (frac < 0.5) return k;
  if (rule == TieRule::HalfUp) return k + 1;
  return (k % 2 == 0) ? k : k + 1;
}

std::int64_t round_ratio(std::int64_t y, std::int64_t n, TieRule rule) {
  if (n < 1) throw DomainError("group size n must be >= 1");
  if (y < 0) throw DomainError("round_ratio expects y >= 0");
  const std::int64_t q = y / n;
  const std::int64_t twice_rem = 2 * (y % n);
  if (twice_rem > n) return q + 1;
  if (twice_rem < n) return q;
  if (rule == TieRule::HalfUp) return q + 1;
  return (q % 2 == 0) ? q : q + 1;
}

IndexHelpers index_helpers(std::int64_t u, std::int64_t n) {
  if (n < 1) throw DomainError("group size n must be >= 1");
  if (u < 0 || u % n != 0) throw DomainError("u must be a non-negative multiple of n");
  const std::int64_t g = (u == 0) ? n / 2 : 0;
  // ceil(u - n/2): u - n/2 for even n, u - (n-1)/2 for odd n
  const std::int64_t h = u - n / 2;
  return {g, h};
}

BlockRange block_range(std::int64_t k, const RoundingScheme& scheme) {
  scheme.validate();
  if (k < 0) throw DomainError("support index must be non-negative");
  const std::int64_t n = scheme.n;
  const std::int64_t u = k * n;
  if (scheme.tie_rule == TieRule::HalfEven && n % 2 == 0) {
    if (k % 2 == 0) return {std::max<std::int64_t>(0, u - n / 2), u + n / 2};
    return {u - n / 2 + 1, u + n / 2 - 1};
  }
  // q = 0..n-1-g(u) over y = h(u) + q + g(u)
  const auto [g, h] = index_helpers(u, n);
  return {h + g, h + n - 1};
}

RoundedPmf rounded_pmf(const CountModel& model, const RoundingScheme& scheme, double tail_eps) {
  scheme.validate();
  const std::int64_t y_max = support_bound(model, tail_eps);
  const std::int64_t k_max = round_ratio(y_max, scheme.n, scheme.tie_rule);

  RoundedPmf out;
  out.n = scheme.n;
  out.probs.reserve(static_cast<std::size_t>(k_max + 1));
  std::int64_t last_hi = -1;
  for (std::int64_t k = 0; k <= k_max; ++k) {
    const BlockRange block = block_range(k, scheme);
    double sum = 0.0;
    for (std::int64_t y = block.lo; y <= block.hi; ++y) sum += pmf(model, y);
    out.probs.push_back(sum);
    last_hi = block.hi;
  }
  out.truncation_mass = upper_tail(model, last_hi);
  return out;
}

double rounded_log_likelihood(const CountModel& model, std::int64_t u, const RoundingScheme& scheme) {
  scheme.validate();
  if (u < 0 || u % scheme.n != 0) throw DomainError("u must be a non-negative multiple of n");
  const BlockRange block = block_range(u / scheme.n, scheme);
  std::int64_t hi = block.hi;
  if (const auto max = model.max_support()) hi = std::min(hi, *max);
  double acc = -std::numeric_limits<double>::infinity();
  for (std::int64_t y = block.lo; y <= hi; ++y) acc = log_add(acc, log_pmf(model, y));
  return acc;
}

std::complex<double> rounded_pgf(const CountModel& model, const RoundingScheme& scheme,
                                 std::complex<double> s) {
  scheme.validate();
  require_half_up(scheme, "the closed-form pgf of U");
  if (!(std::abs(s) <= 1.0 + kPgfSlack)) throw DomainError("rounded_pgf expects |s| <= 1");
  const RootsOfUnityTable table(scheme.n);
  for (const cplx& w : table.omega_pow()) {
    if (std::abs(s - w) <= kPoleGuard)
      throw NearRootOfUnityError(
          "s is within the pole guard of a root of unity; use rounded_pgf_series on a "
          "tabulated pmf instead");
  }
  const std::int64_t exponent = table.prefactor_exponent();
  if (exponent > 0 && std::abs(s) <= kPoleGuard)
    throw NearRootOfUnityError(
        "s is within the pole guard of the origin; use rounded_pgf_series on a tabulated pmf "
        "instead");

  cplx sum{0.0, 0.0};
  for (std::int64_t j = 0; j < scheme.n; ++j) {
    const cplx w = table.omega_pow()[j];
    sum += table.coeff_a()[j] * pgf(model, s * std::conj(w)) / (s - w);
  }
  const double nd = static_cast<double>(scheme.n);
  return (ipow(s, scheme.n) - 1.0) / (nd * ipow(s, exponent)) * sum;
}

std::complex<double> rounded_pgf_series(const RoundedPmf& pmf, std::complex<double> s) {
  // Horner in t = s^n over the index k.
  const cplx t = ipow(s, pmf.n);
  cplx acc{0.0, 0.0};
  for (auto it = pmf.probs.rbegin(); it != pmf.probs.rend(); ++it) acc = acc * t + *it;
  return acc;
}

MomentReport rounded_moments_series(const CountModel& model, const RoundingScheme& scheme) {
  scheme.validate();
  require_half_up(scheme, "the moment series of U");
  const RootsOfUnityTable table(scheme.n);
  return series_moments(table, model.mean(), model.variance(), [&](std::int64_t, cplx at) {
    return std::pair{pgf(model, at), pgf_derivative(model, at)};
  });
}

MomentReport rounded_moments_poisson(double theta, std::int64_t n) {
  const CountModel model = CountModel::poisson(theta);
  const RootsOfUnityTable table(n);
  return series_moments(table, model.mean(), model.variance(), [&](std::int64_t, cplx at) {
    const cplx g = std::exp(theta * (at - 1.0));
    return std::pair{g, theta * g};
  });
}

MomentReport rounded_moments_binomial(std::int64_t trials, double phi, std::int64_t n) {
  if (n < 1) throw DomainError("group size n must be >= 1");
  if (trials % n != 0)
    throw DomainError("binomial closed form requires trials to be a multiple of n (N = m n)");
  const CountModel model = CountModel::binomial(trials, phi);
  const RootsOfUnityTable table(n);
  const double nd_trials = static_cast<double>(trials);
  return series_moments(table, model.mean(), model.variance(), [&](std::int64_t, cplx at) {
    const cplx base = (1.0 - phi) + phi * at;
    if (base == 0.0) return std::pair{cplx{0.0}, cplx{trials == 1 ? phi : 0.0}};
    const cplx log_base = std::log(base);
    const cplx g = std::exp(nd_trials * log_base);
    const cplx g_prime = nd_trials * phi * std::exp((nd_trials - 1.0) * log_base);
    return std::pair{g, g_prime};
  });
}

MomentReport moments_from_pmf(const RoundedPmf& pmf) {
  const double nd = static_cast<double>(pmf.n);
  double mean = 0.0;
  for (std::size_t k = 0; k < pmf.probs.size(); ++k)
    mean += static_cast<double>(k) * nd * pmf.probs[k];
  double variance = 0.0;
  for (std::size_t k = 0; k < pmf.probs.size(); ++k) {
    const double d = static_cast<double>(k) * nd - mean;
    variance += d * d * pmf.probs[k];
  }
  return {mean, variance, 0.0};
}

CountSampler::CountSampler(const CountModel& model) : n_(1) {
  const std::int64_t top = support_bound(model, 1e-17);
  cum_.reserve(static_cast<std::size_t>(top) + 1);
  for (std::int64_t k = 0; k <= top; ++k) cum_.push_back(cdf(model, k));
  // Above the table the remaining mass is below one ulp of 1.
  cum_.back() = 1.0;
}

CountSampler::CountSampler(const CountModel& model, const RoundingScheme& scheme) : CountSampler(model) {
  scheme.validate();
  n_ = scheme.n;
  tie_rule_ = scheme.tie_rule;
}

std::int64_t CountSampler::count(double uniform01) const noexcept {
  const auto it = std::upper_bound(cum_.begin(), cum_.end(), uniform01);
  return static_cast<std::int64_t>(it - cum_.begin());
}

std::int64_t CountSampler::rounded(double uniform01) const {
  return n_ * round_ratio(count(uniform01), n_, tie_rule_);
}

std::int64_t sample_count(const CountModel& model, double uniform01) {
  return CountSampler(model).count(uniform01);
}

std::int64_t sample_u(const CountModel& model, const RoundingScheme& scheme, SplitMix64& rng) {
  return CountSampler(model, scheme).rounded(rng.uniform01());
}

double asymptotic_mle_mean(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("lambda must be positive");
  const double small_lambda_limit = 1.0 / (2.0 * std::numbers::e);
  // (v0 - 1/2) exp((v0 - 1/2)(1/(v0 - 1/2) + 1) log(1/(v0 - 1/2) + 1) - 1)
  const auto branch = [](double v0) {
    const double c = v0 - 0.5;
    return c * std::exp((1.0 + c) * std::log1p(1.0 / c) - 1.0);
  };
  if (lambda < 0.5) return small_lambda_limit;
  const double whole = std::floor(lambda);
  if (lambda - whole == 0.5) {
    const double lower = whole == 0.0 ? small_lambda_limit : branch(whole);
    return 0.5 * (lower + branch(whole + 1.0));
  }
  return branch(std::floor(lambda + 0.5));
}

}  // namespace roundcount
