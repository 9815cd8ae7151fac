#include "roundcount/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "roundcount/errors.hpp"
#include "roundcount/random.hpp"

namespace roundcount {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kPoissonLowerEdge = 1e-8;
constexpr int kMaxBisections = 200;

// Sign of d/dparam P(lo <= Y <= hi) = sign * (e^{L(hi)} - e^{L(lo-1)}).
int likelihood_slope_sign(const CountModel& model, std::int64_t lo, std::int64_t hi) {
  const double upper = log_cdf_sensitivity(model, hi);
  const double lower = log_cdf_sensitivity(model, lo - 1);
  if (upper == lower) return 0;
  const int direction = upper > lower ? 1 : -1;
  return cdf_sensitivity_sign(model.family()) * direction;
}

struct Bracket {
  double lo;
  double hi;
};

}  // namespace

Estimate poisson_mle_closed(std::int64_t u, std::int64_t n) {
  const auto [g, h] = index_helpers(u, n);
  constexpr std::uint64_t kExactLimit = std::uint64_t{1} << 53;
  double log_sum = 0.0;
  std::int64_t count = 0;
  // Product kept exactly while it fits in a double's mantissa.
  std::uint64_t product = 1;
  bool exact = true;
  for (std::int64_t q = 0; q <= n - 1 - g; ++q) {
    const std::int64_t factor = h + g + q;
    if (factor <= 0) continue;
    log_sum += std::log(static_cast<double>(factor));
    ++count;
    const auto f = static_cast<std::uint64_t>(factor);
    if (exact && product <= kExactLimit / f)
      product *= f;
    else
      exact = false;
  }
  Estimate est;
  est.method = EstimateMethod::ClosedForm;
  est.converged = true;
  if (count == 0) {
    est.value = 0.0;
    est.loglik_at_optimum = 0.0;  // supremum P(U=u) -> 1 as θ -> 0
    return est;
  }
  if (exact && count <= 2) {
    const auto p = static_cast<double>(product);
    est.value = count == 1 ? p : std::sqrt(p);
  } else {
    est.value = std::exp(log_sum / static_cast<double>(count));
  }
  est.loglik_at_optimum =
      rounded_log_likelihood(CountModel::poisson(est.value), u, RoundingScheme{n, TieRule::HalfUp});
  return est;
}

Estimate numeric_mle(const CountModel& family, std::int64_t u, const RoundingScheme& scheme) {
  scheme.validate();
  if (u < 0 || u % scheme.n != 0) throw DomainError("u must be a non-negative multiple of n");
  const BlockRange block = block_range(u / scheme.n, scheme);
  std::int64_t hi = block.hi;
  if (family.family() == Family::Binomial) {
    hi = std::min(hi, family.trials());
    if (block.lo > family.trials())
      throw NoMaximumError("P(U=u) is zero for every success probability: u exceeds the support");
  }

  const bool poisson = family.family() == Family::Poisson;
  const double ud = static_cast<double>(u);
  const double nd = static_cast<double>(scheme.n);
  // Poisson searches t = log θ; the other families search φ directly.
  Bracket bracket = poisson ? Bracket{std::log(kPoissonLowerEdge),
                                      std::log(ud + nd + 10.0 * std::sqrt(ud + 1.0))}
                            : Bracket{0.0, 1.0};
  const auto to_param = [&](double x) { return poisson ? std::exp(x) : x; };
  const auto model_at = [&](double x) { return family.with_free_parameter(to_param(x)); };

  const double start_lo = bracket.lo;
  const double start_hi = bracket.hi;
  for (int i = 0; i < kMaxBisections; ++i) {
    const double mid = 0.5 * (bracket.lo + bracket.hi);
    if (mid <= bracket.lo || mid >= bracket.hi) break;
    const int slope = likelihood_slope_sign(model_at(mid), block.lo, hi);
    if (slope > 0)
      bracket.lo = mid;
    else if (slope < 0)
      bracket.hi = mid;
    else {
      bracket.lo = bracket.hi = mid;
      break;
    }
  }

  Estimate est;
  est.method = EstimateMethod::Numeric;
  const double width = to_param(bracket.hi) - to_param(bracket.lo);
  est.converged = width <= kMleTolerance;
  const double span = start_hi - start_lo;
  const bool at_lower_edge = bracket.hi - start_lo <= 1e-12 * span;
  const bool at_upper_edge = start_hi - bracket.lo <= 1e-12 * span;

  if (at_lower_edge) {
    if (poisson) {
      // Supremum sits at θ -> 0; report the closed form's convention for this u.
      const Estimate closed = poisson_mle_closed(u, scheme.n);
      est.value = closed.value;
    } else {
      est.value = 0.0;
    }
  } else if (at_upper_edge) {
    est.value = to_param(start_hi);
    if (poisson) est.converged = false;  // bracket too narrow
  } else {
    est.value = to_param(0.5 * (bracket.lo + bracket.hi));
  }

  const double eval_at = poisson ? std::max(est.value, kPoissonLowerEdge) : est.value;
  if (family.family() == Family::NegativeBinomial && eval_at == 0.0) {
    est.loglik_at_optimum = kNegInf;
  } else {
    est.loglik_at_optimum = rounded_log_likelihood(family.with_free_parameter(eval_at), u, scheme);
  }
  if (est.loglik_at_optimum == kNegInf)
    throw NoMaximumError("likelihood is zero throughout the search bracket");
  return est;
}

double exact_mse(const EstimatorMap& estimator, const CountModel& model,
                 const RoundingScheme& scheme, double true_param, bool rounded, double threshold) {
  scheme.validate();
  const std::int64_t k_max = support_bound(model, threshold);
  double total = 0.0;
  for (std::int64_t k = 0; k <= k_max; ++k) {
    const double p = pmf(model, k);
    if (!(p > threshold)) continue;
    const std::int64_t arg = rounded ? scheme.n * round_ratio(k, scheme.n, scheme.tie_rule) : k;
    const double err = estimator(arg) - true_param;
    total += err * err * p;
  }
  return total;
}

MleCache::MleCache(CountModel family, RoundingScheme scheme)
    : family_(std::move(family)), scheme_(scheme) {}

double MleCache::operator()(std::int64_t u) {
  if (const auto it = values_.find(u); it != values_.end()) return it->second;
  const double value = numeric_mle(family_, u, scheme_).value;
  values_.emplace(u, value);
  return value;
}

MseRatioCurve mse_ratio_curve(Family family, std::span<const double> param_grid,
                              std::span<const std::int64_t> n_list,
                              const MseRatioSettings& settings) {
  if (param_grid.empty() || n_list.empty()) throw DomainError("parameter grid and n list must be non-empty");
  MseRatioCurve curve;
  curve.family = family;
  curve.n_list.assign(n_list.begin(), n_list.end());
  curve.param_grid.assign(param_grid.begin(), param_grid.end());

  for (const std::int64_t n : n_list) {
    if (n < 1) throw DomainError("group size n must be >= 1");
    const auto model_for = [&](double param) {
      switch (family) {
        case Family::Poisson:
          return CountModel::poisson(param);
        case Family::Binomial:
          return CountModel::binomial(settings.trials_per_measurement * n, param);
        case Family::NegativeBinomial:
          return CountModel::negative_binomial(settings.nb_size, param);
      }
      throw DomainError("unknown family");
    };
    // The estimator maps depend only on the structural parameters, not on ν.
    const CountModel structure = model_for(family == Family::Poisson ? 1.0 : 0.5);
    MleCache rounded_mle(structure, RoundingScheme{n, TieRule::HalfUp});
    MleCache plain_mle(structure, RoundingScheme{1, TieRule::HalfUp});
    const EstimatorMap rounded_map = [&](std::int64_t u) { return rounded_mle(u); };
    const EstimatorMap plain_map = [&](std::int64_t y) { return plain_mle(y); };

    for (const double param : param_grid) {
      const CountModel model = model_for(param);
      const double num =
          exact_mse(rounded_map, model, RoundingScheme{n, TieRule::HalfUp}, param, true, settings.threshold);
      const double den =
          exact_mse(plain_map, model, RoundingScheme{1, TieRule::HalfUp}, param, true, settings.threshold);
      curve.mse_rounded.push_back(num);
      curve.mse_unrounded.push_back(den);
      curve.psi.push_back(num / den);
    }
  }
  return curve;
}

std::string_view to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::U:
      return "U";
    case EstimatorKind::ClosedMle:
      return "closed-mle";
    case EstimatorKind::NumericMle:
      return "numeric-mle";
  }
  return "unknown";
}

EstimatorKind parse_estimator(std::string_view name) {
  if (name == "U" || name == "u") return EstimatorKind::U;
  if (name == "closed-mle") return EstimatorKind::ClosedMle;
  if (name == "numeric-mle") return EstimatorKind::NumericMle;
  throw DomainError("unknown estimator '" + std::string(name) + "'");
}

double apply_estimator(EstimatorKind kind, const CountModel& model, const RoundingScheme& scheme,
                       std::int64_t u) {
  switch (kind) {
    case EstimatorKind::U: {
      const double ud = static_cast<double>(u);
      switch (model.family()) {
        case Family::Poisson:
          return ud;
        case Family::Binomial:
          return ud / static_cast<double>(model.trials());
        case Family::NegativeBinomial:
          return model.nb_size() / (model.nb_size() + ud);
      }
      break;
    }
    case EstimatorKind::ClosedMle:
      if (model.family() != Family::Poisson)
        throw DomainError("closed-form MLE is only available for the Poisson family");
      return poisson_mle_closed(u, scheme.n).value;
    case EstimatorKind::NumericMle:
      return numeric_mle(model, u, scheme).value;
  }
  throw DomainError("unknown estimator");
}

std::vector<McMse> monte_carlo_mse(const CountModel& model, const RoundingScheme& scheme,
                                   std::span<const EstimatorKind> estimators, std::int64_t reps,
                                   std::uint64_t seed, unsigned workers) {
  scheme.validate();
  if (reps < 1) throw DomainError("reps must be >= 1");
  const auto count = static_cast<std::size_t>(reps);
  std::vector<std::int64_t> draws(count);

  const CountSampler sampler(model, scheme);
  const auto fill = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      SplitMix64 rng = rng_substream(seed, i);
      draws[i] = sampler.rounded(rng.uniform01());
    }
  };
  workers = std::max(1u, workers);
  if (workers == 1 || count < 2 * workers) {
    fill(0, count);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (count + workers - 1) / workers;
    for (std::size_t begin = 0; begin < count; begin += chunk)
      pool.emplace_back(fill, begin, std::min(count, begin + chunk));
  }

  std::vector<std::int64_t> distinct(draws);
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

  const double target = model.free_parameter();
  std::vector<McMse> results;
  for (const EstimatorKind kind : estimators) {
    McMse out;
    out.estimator = kind;
    std::map<std::int64_t, double> values;
    try {
      for (const std::int64_t u : distinct) values.emplace(u, apply_estimator(kind, model, scheme, u));
    } catch (const std::exception& e) {
      out.ok = false;
      out.status = e.what();
      out.mse = std::numeric_limits<double>::quiet_NaN();
      out.standard_error = std::numeric_limits<double>::quiet_NaN();
      results.push_back(out);
      continue;
    }
    // Welford over squared errors, in replicate order.
    double mean = 0.0;
    double m2 = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
      const double err = values.at(draws[i]) - target;
      const double sq = err * err;
      const double delta = sq - mean;
      mean += delta / static_cast<double>(i + 1);
      m2 += delta * (sq - mean);
    }
    out.mse = mean;
    out.standard_error =
        count > 1 ? std::sqrt(m2 / static_cast<double>(count - 1) / static_cast<double>(count)) : 0.0;
    results.push_back(out);
  }
  return results;
}

}  // namespace roundcount
