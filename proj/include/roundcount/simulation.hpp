#pragma once

// Seeded Monte Carlo MSE experiments over a (param, n) grid.

#include <cstdint>
#include <string>
#include <vector>

#include "roundcount/estimation.hpp"
#include "roundcount/table.hpp"

namespace roundcount {

inline constexpr std::uint64_t kDefaultSeed = 20200925;

struct ExperimentConfig {
  std::uint64_t seed = kDefaultSeed;
  std::int64_t reps = 50000;
  Family family = Family::Poisson;
  /// λ per measurement (θ = nλ) for Poisson; φ for the other families.
  std::vector<double> param_grid;
  std::vector<std::int64_t> n_list;
  std::vector<EstimatorKind> estimators{EstimatorKind::U, EstimatorKind::NumericMle};
  /// Binomial counts use N = trials_per_measurement * n.
  std::int64_t trials_per_measurement = 2;
  double nb_size = 5.0;
  TieRule tie_rule = TieRule::HalfUp;
  unsigned workers = 1;

  void validate() const;
  /// Latent model for one grid cell.
  CountModel model_for(double param, std::int64_t n) const;
};

struct ResultRow {
  Family family = Family::Poisson;
  double param = 0.0;
  std::int64_t n = 1;
  EstimatorKind estimator = EstimatorKind::U;
  /// Target of estimation: θ = nλ for Poisson, φ otherwise.
  double target = 0.0;
  double mse = 0.0;
  double mc_standard_error = 0.0;
  std::int64_t reps = 0;
  std::uint64_t seed = 0;
  std::string status = "ok";

  friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

struct ResultTable {
  std::vector<ResultRow> rows;

  Table to_table() const;
  static ResultTable from_csv(const CsvDocument& doc);
};

/// Seed of grid cell `index` (param-major, then n). Replicate i of the cell
/// draws from rng_substream(cell_seed(seed, index), i).
std::uint64_t cell_seed(std::uint64_t seed, std::uint64_t index) noexcept;

ResultTable run_mse_experiment(const ExperimentConfig& config);

}  // namespace roundcount
