#include "roundcount/simulation.hpp"

#include <cmath>

#include "roundcount/errors.hpp"
#include "roundcount/random.hpp"

namespace roundcount {

void ExperimentConfig::validate() const {
  if (reps < 1) throw DomainError("reps must be >= 1");
  if (param_grid.empty()) throw DomainError("parameter grid must be non-empty");
  if (n_list.empty()) throw DomainError("n list must be non-empty");
  if (estimators.empty()) throw DomainError("at least one estimator is required");
  for (const std::int64_t n : n_list)
    if (n < 1) throw DomainError("group size n must be >= 1");
  if (trials_per_measurement < 1) throw DomainError("trials per measurement must be >= 1");
  if (!(nb_size > 0.0)) throw DomainError("negative binomial size must be positive");
  for (const double p : param_grid) (void)model_for(p, n_list.front());
}

CountModel ExperimentConfig::model_for(double param, std::int64_t n) const {
  switch (family) {
    case Family::Poisson:
      return CountModel::poisson(param * static_cast<double>(n));
    case Family::Binomial:
      return CountModel::binomial(trials_per_measurement * n, param);
    case Family::NegativeBinomial:
      return CountModel::negative_binomial(nb_size, param);
  }
  throw DomainError("unknown family");
}

std::uint64_t cell_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  SplitMix64 rng = rng_substream(seed, ~index);
  return rng();
}

ResultTable run_mse_experiment(const ExperimentConfig& config) {
  config.validate();
  ResultTable table;
  std::uint64_t index = 0;
  for (const double param : config.param_grid) {
    for (const std::int64_t n : config.n_list) {
      const CountModel model = config.model_for(param, n);
      const RoundingScheme scheme{n, config.tie_rule};
      const auto results = monte_carlo_mse(model, scheme, config.estimators, config.reps,
                                           cell_seed(config.seed, index++), config.workers);
      for (const McMse& r : results) {
        ResultRow row;
        row.family = config.family;
        row.param = param;
        row.n = n;
        row.estimator = r.estimator;
        row.target = model.free_parameter();
        row.mse = r.mse;
        row.mc_standard_error = r.standard_error;
        row.reps = config.reps;
        row.seed = config.seed;
        row.status = r.status;
        table.rows.push_back(std::move(row));
      }
    }
  }
  return table;
}

Table ResultTable::to_table() const {
  Table t;
  t.columns = {"family", "param", "n", "estimator", "target", "mse", "mc_standard_error", "reps", "seed",
               "status"};
  for (const ResultRow& r : rows) {
    t.add_row({std::string(to_string(r.family)), r.param, r.n, std::string(to_string(r.estimator)),
               r.target, r.mse, r.mc_standard_error, r.reps, std::to_string(r.seed), r.status});
  }
  return t;
}

ResultTable ResultTable::from_csv(const CsvDocument& doc) {
  const std::size_t c_family = doc.column("family");
  const std::size_t c_param = doc.column("param");
  const std::size_t c_n = doc.column("n");
  const std::size_t c_est = doc.column("estimator");
  const std::size_t c_target = doc.column("target");
  const std::size_t c_mse = doc.column("mse");
  const std::size_t c_se = doc.column("mc_standard_error");
  const std::size_t c_reps = doc.column("reps");
  const std::size_t c_seed = doc.column("seed");
  const std::size_t c_status = doc.column("status");
  ResultTable table;
  for (const auto& f : doc.rows) {
    ResultRow r;
    r.family = parse_family(f[c_family]);
    r.param = parse_real(f[c_param]);
    r.n = parse_int(f[c_n]);
    r.estimator = parse_estimator(f[c_est]);
    r.target = parse_real(f[c_target]);
    r.mse = parse_real(f[c_mse]);
    r.mc_standard_error = parse_real(f[c_se]);
    r.reps = parse_int(f[c_reps]);
    r.seed = std::stoull(f[c_seed]);
    r.status = f[c_status];
    table.rows.push_back(std::move(r));
  }
  return table;
}

}  // namespace roundcount
