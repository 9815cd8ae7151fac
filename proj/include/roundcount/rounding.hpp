#pragma once

// The rounded-average proxy U = n * [Y / n] of a latent count Y.
//
// Support values u are always multiples of n; internally they are keyed by the
// integer index k = u / n.

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "roundcount/count_dists.hpp"
#include "roundcount/random.hpp"

namespace roundcount {

enum class TieRule { HalfUp, HalfEven };

std::string_view to_string(TieRule rule);
TieRule parse_tie_rule(std::string_view name);

struct RoundingScheme {
  std::int64_t n = 1;
  TieRule tie_rule = TieRule::HalfUp;

  /// Throws DomainError unless n >= 1.
  void validate() const;
};

/// ω^j = exp(2πij/n), a(j) and r for a fixed group size n.
class RootsOfUnityTable {
 public:
  explicit RootsOfUnityTable(std::int64_t n);

  std::int64_t n() const noexcept { return n_; }
  std::span<const std::complex<double>> omega_pow() const noexcept { return omega_pow_; }
  std::span<const std::complex<double>> coeff_a() const noexcept { return coeff_a_; }
  /// 1 for even n, 1/2 for odd n.
  double offset_r() const noexcept { return offset_r_; }
  /// The integer exponent n/2 - r of s in the pgf prefactor.
  std::int64_t prefactor_exponent() const noexcept;

 private:
  std::int64_t n_;
  std::vector<std::complex<double>> omega_pow_;
  std::vector<std::complex<double>> coeff_a_;
  double offset_r_;
};

struct RoundedPmf {
  std::int64_t n = 1;
  /// probs[k] = P(U = k n).
  std::vector<double> probs;
  /// Upper bound on the probability of support points beyond probs.
  double truncation_mass = 0.0;

  /// P(U = u); zero off the lattice or past the tabulation.
  double at(std::int64_t u) const noexcept;
  std::int64_t max_u() const noexcept {
    return static_cast<std::int64_t>(probs.size() - 1) * n;
  }
};

struct MomentReport {
  double mean = 0.0;
  double variance = 0.0;
  /// Largest imaginary part dropped when realizing the complex series.
  double imag_residual = 0.0;
};

inline constexpr double kImagResidualLimit = 1e-9;
inline constexpr double kPoleGuard = 1e-6;

/// Nearest integer to a non-negative real. Floating ties are taken at face
/// value; use round_ratio for exact rational ties.
std::int64_t round_to_nearest(double x, TieRule rule);

/// [y / n] with the tie decided exactly on the integers (2 (y mod n) == n).
std::int64_t round_ratio(std::int64_t y, std::int64_t n, TieRule rule);

struct IndexHelpers {
  std::int64_t g;
  std::int64_t h;
};

/// Block offsets: g(u) = floor(n/2) at u = 0 and 0 otherwise,
/// h(u) = ceil(u - n/2).
IndexHelpers index_helpers(std::int64_t u, std::int64_t n);

/// Inclusive range of latent values y with n [y/n] = k n; lo is clipped at 0.
struct BlockRange {
  std::int64_t lo;
  std::int64_t hi;
};
BlockRange block_range(std::int64_t k, const RoundingScheme& scheme);

RoundedPmf rounded_pmf(const CountModel& model, const RoundingScheme& scheme,
                       double tail_eps = kDefaultTailEps);

/// log P(U = u) by log-sum-exp over the block of latent values.
double rounded_log_likelihood(const CountModel& model, std::int64_t u,
                              const RoundingScheme& scheme);

/// Closed-form pgf of U (round half up only). Throws NearRootOfUnityError
/// within kPoleGuard of any ω^j or, for n >= 3, of the origin.
std::complex<double> rounded_pgf(const CountModel& model, const RoundingScheme& scheme,
                                 std::complex<double> s);

/// Σ P(U=u) s^u over a tabulated pmf; valid everywhere on the unit disk.
std::complex<double> rounded_pgf_series(const RoundedPmf& pmf, std::complex<double> s);

/// E(U), Var(U) by the roots-of-unity series using the model's pgf and its
/// derivative. Round half up only.
MomentReport rounded_moments_series(const CountModel& model, const RoundingScheme& scheme);

/// Poisson closed form; e^{-θ} e^{θ/ω^j} is fused into exp(θ(1/ω^j - 1)).
MomentReport rounded_moments_poisson(double theta, std::int64_t n);

/// Binomial closed form; requires trials to be a multiple of n.
MomentReport rounded_moments_binomial(std::int64_t trials, double phi, std::int64_t n);

/// Mean and variance summed directly over a tabulated pmf.
MomentReport moments_from_pmf(const RoundedPmf& pmf);

/// Inversion sampler over a table of P(Y <= k); one uniform per variate.
class CountSampler {
 public:
  explicit CountSampler(const CountModel& model);
  CountSampler(const CountModel& model, const RoundingScheme& scheme);

  /// Smallest k with u < P(Y <= k).
  std::int64_t count(double uniform01) const noexcept;
  /// n [Y/n] for the Y that count() returns.
  std::int64_t rounded(double uniform01) const;

 private:
  std::vector<double> cum_;
  std::int64_t n_ = 1;
  TieRule tie_rule_ = TieRule::HalfUp;
};

/// Draw Y by inversion and return n [Y/n]. Builds a CountSampler per call;
/// reuse one for repeated draws.
std::int64_t sample_u(const CountModel& model, const RoundingScheme& scheme, SplitMix64& rng);

/// Inverse-cdf transform of a single uniform in [0, 1).
std::int64_t sample_count(const CountModel& model, double uniform01);

/// Large-n limit of E(θ̂)/n for Poisson(nλ) counts.
double asymptotic_mle_mean(double lambda);

}  // namespace roundcount
