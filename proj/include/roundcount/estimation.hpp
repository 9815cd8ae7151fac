#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "roundcount/count_dists.hpp"
#include "roundcount/rounding.hpp"

namespace roundcount {

enum class EstimateMethod { ClosedForm, Numeric };

struct Estimate {
  double value = 0.0;
  EstimateMethod method = EstimateMethod::ClosedForm;
  double loglik_at_optimum = 0.0;
  bool converged = true;
};

/// Closed-form Poisson MLE of θ from u: the geometric mean of the positive
/// factors ceil(u - n/2) + g(u) + q, q = 0..n-1-g(u); zero if none are positive.
Estimate poisson_mle_closed(std::int64_t u, std::int64_t n);

inline constexpr double kMleTolerance = 1e-9;

/// Maximizes log P(U=u) over the family's free parameter (θ, or φ with the
/// structural parameters of `family` held fixed). The parameter value carried
/// by `family` is ignored.
///
/// The search is a bracketed bisection on the sign of d/dparam P(U=u), which is
/// unimodal for all three families. Poisson brackets log θ over
/// [log 1e-8, log(u + n + 10 sqrt(u+1))]; φ lives on [0, 1]. A Poisson
/// maximum at the lower edge (u = 0) reports poisson_mle_closed.
Estimate numeric_mle(const CountModel& family, std::int64_t u, const RoundingScheme& scheme);

using EstimatorMap = std::function<double(std::int64_t)>;

/// Σ over latent k with P(Y=k) > threshold of (T(u(k)) - ν)^2 P(Y=k), where
/// u(k) = n [k/n] (or k itself when `rounded` is false).
double exact_mse(const EstimatorMap& estimator, const CountModel& model,
                 const RoundingScheme& scheme, double true_param, bool rounded = true,
                 double threshold = kMseTailEps);

/// Memoized numeric_mle over the support lattice of one scheme.
class MleCache {
 public:
  MleCache(CountModel family, RoundingScheme scheme);
  double operator()(std::int64_t u);
  std::size_t size() const noexcept { return values_.size(); }

 private:
  CountModel family_;
  RoundingScheme scheme_;
  std::map<std::int64_t, double> values_;
};

struct MseRatioCurve {
  Family family = Family::Poisson;
  std::vector<std::int64_t> n_list;
  std::vector<double> param_grid;
  // Row-major over (n, param): index = i_n * param_grid.size() + i_param.
  std::vector<double> mse_rounded;
  std::vector<double> mse_unrounded;
  std::vector<double> psi;
};

/// Structural parameters for ψ curves. Binomial uses N = trials_per_measurement * n.
struct MseRatioSettings {
  std::int64_t trials_per_measurement = 2;
  double nb_size = 5.0;
  double threshold = kMseTailEps;
};

MseRatioCurve mse_ratio_curve(Family family, std::span<const double> param_grid,
                              std::span<const std::int64_t> n_list,
                              const MseRatioSettings& settings = {});

enum class EstimatorKind { U, ClosedMle, NumericMle };

std::string_view to_string(EstimatorKind kind);
EstimatorKind parse_estimator(std::string_view name);

struct McMse {
  EstimatorKind estimator = EstimatorKind::U;
  double mse = 0.0;
  double standard_error = 0.0;
  /// False when the estimator is not defined for the family.
  bool ok = true;
  std::string status = "ok";
};

/// Estimate of the free parameter from U for the given estimator kind.
/// U-based plug-ins: U (Poisson), U / N (binomial), size / (size + U) (NB).
double apply_estimator(EstimatorKind kind, const CountModel& model, const RoundingScheme& scheme,
                       std::int64_t u);

/// Monte Carlo MSE of each estimator against the model's free parameter.
/// Replicate i draws from rng_substream(seed, i); results are accumulated in
/// replicate order, so they do not depend on `workers`.
std::vector<McMse> monte_carlo_mse(const CountModel& model, const RoundingScheme& scheme,
                                   std::span<const EstimatorKind> estimators, std::int64_t reps,
                                   std::uint64_t seed, unsigned workers = 1);

}  // namespace roundcount
