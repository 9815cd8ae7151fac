#pragma once

// Latent count distributions of Y: Poisson, binomial and negative binomial.
//
// The negative binomial counts failures before `size` successes, each trial
// succeeding with probability `prob`:
//   P(Y=k) = Gamma(k+size) / (Gamma(size) k!) * prob^size * (1-prob)^k.

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace roundcount {

enum class Family { Poisson, Binomial, NegativeBinomial };

std::string_view to_string(Family family);
Family parse_family(std::string_view name);

inline constexpr double kDefaultTailEps = 1e-12;
inline constexpr double kMseTailEps = 1e-10;
/// Tolerated excess of |s| over 1 when evaluating a pgf.
inline constexpr double kPgfSlack = 1e-9;

class CountModel {
 public:
  static CountModel poisson(double theta);
  static CountModel binomial(std::int64_t trials, double prob);
  static CountModel negative_binomial(double size, double prob);

  Family family() const noexcept { return family_; }
  double theta() const noexcept { return theta_; }
  std::int64_t trials() const noexcept { return trials_; }
  double prob() const noexcept { return prob_; }
  double nb_size() const noexcept { return nb_size_; }

  /// The parameter inference targets: θ for Poisson, φ otherwise.
  double free_parameter() const noexcept;
  /// Copy with the free parameter replaced; structural parameters are kept.
  CountModel with_free_parameter(double value) const;

  double mean() const noexcept;
  double variance() const noexcept;
  /// Largest attainable value, if the support is bounded.
  std::optional<std::int64_t> max_support() const noexcept;

  std::string describe() const;

  friend bool operator==(const CountModel&, const CountModel&) = default;

 private:
  CountModel() = default;
  Family family_ = Family::Poisson;
  double theta_ = 1.0;
  std::int64_t trials_ = 1;
  double prob_ = 0.5;
  double nb_size_ = 1.0;
};

/// log P(Y=k); -infinity outside the support.
double log_pmf(const CountModel& model, std::int64_t k);
double pmf(const CountModel& model, std::int64_t k);
/// P(Y <= k).
double cdf(const CountModel& model, std::int64_t k);
/// P(Y > k), computed directly from the incomplete gamma/beta functions.
double upper_tail(const CountModel& model, std::int64_t k);

std::complex<double> pgf(const CountModel& model, std::complex<double> s);
std::complex<double> pgf_derivative(const CountModel& model, std::complex<double> s);

/// Smallest k_max with P(Y > k_max) < tail_eps; N for the binomial.
std::int64_t support_bound(const CountModel& model, double tail_eps = kDefaultTailEps);

/// Most probable value of Y (the smaller one when two values tie).
std::int64_t mode(const CountModel& model);

/// Sensitivity of the cdf to the free parameter.
///
/// d/dparam P(Y <= k) = sign * exp(log_cdf_sensitivity(model, k)), with
/// sign = cdf_sensitivity_sign(model). Returns -infinity when the derivative
/// vanishes identically (k < 0, or k >= N for the binomial).
double log_cdf_sensitivity(const CountModel& model, std::int64_t k);
int cdf_sensitivity_sign(Family family) noexcept;

}  // namespace roundcount
