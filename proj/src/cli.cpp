#include "roundcount/cli.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <numbers>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

#include "roundcount/errors.hpp"
#include "roundcount/estimation.hpp"
#include "roundcount/inference.hpp"
#include "roundcount/rounding.hpp"
#include "roundcount/simulation.hpp"
#include "roundcount/table.hpp"

namespace roundcount::cli {

namespace {

constexpr const char* kVersion = "0.1.0";

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// k / denom for k = first..last; exact decimal grids without accumulated drift.
std::vector<double> decimal_grid(int first, int last, int denom) {
  std::vector<double> out;
  for (int k = first; k <= last; ++k) out.push_back(static_cast<double>(k) / denom);
  return out;
}

template <typename T>
std::string join(const std::vector<T>& values) {
  std::string s;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) s += ',';
    if constexpr (std::is_floating_point_v<T>)
      s += format_real(values[i]);
    else if constexpr (std::is_same_v<T, std::string>)
      s += values[i];
    else
      s += std::to_string(values[i]);
  }
  return s;
}

struct Common {
  std::string format = "csv";
  std::string out;
  std::string preset;
};

struct ModelFlags {
  std::string dist = "poisson";
  double theta = 2.0;
  std::int64_t trials = 20;
  double phi = 0.5;
  double size = 5.0;
};

struct Invocation {
  CLI::App* sub = nullptr;
  Common common;
  std::function<Table()> run;
};

void add_common(CLI::App* sub, Common& c, std::vector<std::string> presets) {
  sub->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  sub->add_option("--out", c.out, "Write the table to this file instead of stdout");
  if (!presets.empty())
    sub->add_option("--preset", c.preset, "Named preset fig1..fig6; explicit flags still win")
        ->check(CLI::IsMember(presets));
}

void add_model(CLI::App* sub, ModelFlags& m, bool with_parameter) {
  sub->add_option("--dist", m.dist, "poisson | binomial | negbinomial")
      ->check(CLI::IsMember({"poisson", "binomial", "negbinomial"}));
  if (with_parameter) {
    sub->add_option("--theta", m.theta, "Poisson mean of Y")->check(CLI::PositiveNumber);
    sub->add_option("--phi", m.phi, "Success probability")->check(CLI::Range(0.0, 1.0));
  }
  sub->add_option("--trials", m.trials, "Binomial trials N of Y")->check(CLI::PositiveNumber);
  sub->add_option("--size", m.size, "Negative binomial size (successes)")->check(CLI::PositiveNumber);
}

CountModel build_model(const ModelFlags& m) {
  switch (parse_family(m.dist)) {
    case Family::Poisson:
      return CountModel::poisson(m.theta);
    case Family::Binomial:
      return CountModel::binomial(m.trials, m.phi);
    case Family::NegativeBinomial:
      return CountModel::negative_binomial(m.size, m.phi);
  }
  throw DomainError("unknown family");
}

void echo_model(Table& t, const ModelFlags& m, bool with_parameter) {
  t.config.emplace_back("dist", m.dist);
  const Family f = parse_family(m.dist);
  if (f == Family::Poisson && with_parameter) t.config.emplace_back("theta", format_real(m.theta));
  if (f == Family::Binomial) t.config.emplace_back("trials", std::to_string(m.trials));
  if (f == Family::NegativeBinomial) t.config.emplace_back("size", format_real(m.size));
  if (f != Family::Poisson && with_parameter) t.config.emplace_back("phi", format_real(m.phi));
}

Table start_table(const std::string& command, const Common& c) {
  Table t;
  t.config.emplace_back("roundcount", kVersion);
  t.config.emplace_back("command", command);
  t.config.emplace_back("preset", c.preset.empty() ? "none" : c.preset);
  return t;
}

void require_preset(const Common& c, std::initializer_list<const char*> allowed, const std::string& command) {
  if (c.preset.empty()) return;
  for (const char* p : allowed)
    if (c.preset == p) return;
  throw UsageError("preset " + c.preset + " does not apply to " + command);
}

std::uint64_t default_seed() {
  const char* env = std::getenv(kSeedEnv);
  if (env == nullptr || *env == '\0') return kDefaultSeed;
  std::uint64_t value = 0;
  const std::string text(env);
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    throw UsageError(std::string(kSeedEnv) + " must be an unsigned 64-bit integer, got '" + text + "'");
  return value;
}

void emit(const Table& t, const Common& c, std::ostream& out) {
  if (c.out.empty()) {
    c.format == "json" ? write_json(t, out) : write_csv(t, out);
    return;
  }
  std::ofstream file(c.out, std::ios::binary | std::ios::trunc);
  if (!file) throw std::runtime_error("cannot open output file '" + c.out + "'");
  c.format == "json" ? write_json(t, file) : write_csv(t, file);
  if (!file) throw std::runtime_error("failed writing output file '" + c.out + "'");
}

void error_line(std::ostream& err, const std::string& kind, const std::string& message, int code) {
  nlohmann::ordered_json j;
  j["status"] = "error";
  j["kind"] = kind;
  j["exit_code"] = code;
  j["message"] = message;
  err << j.dump() << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Inference for counts reported as rounded per-measurement averages"};
  app.name("roundcount");
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  std::vector<Invocation> invocations;
  invocations.reserve(10);
  auto make = [&](const std::string& name, const std::string& help) -> Invocation& {
    invocations.push_back(Invocation{app.add_subcommand(name, help), {}, {}});
    return invocations.back();
  };

  // pmf ----------------------------------------------------------------------
  ModelFlags pmf_model;
  std::vector<std::int64_t> pmf_n{1};
  std::string pmf_tie = "half-up";
  double pmf_eps = kDefaultTailEps;
  {
    Invocation& inv = make("pmf", "Tabulate P(U = u)");
    add_common(inv.sub, inv.common, {"fig1"});
    add_model(inv.sub, pmf_model, true);
    auto* n_opt = inv.sub->add_option("--n", pmf_n, "Group size(s)")->delimiter(',')->check(CLI::PositiveNumber);
    inv.sub->add_option("--tie", pmf_tie, "half-up | half-even")->check(CLI::IsMember({"half-up", "half-even"}));
    inv.sub->add_option("--tail-eps", pmf_eps, "Truncate once P(Y > k) drops below this")
        ->check(CLI::Range(1e-300, 0.5));
    auto* theta_opt = inv.sub->get_option("--theta");
    auto* dist_opt = inv.sub->get_option("--dist");
    const Common& c = inv.common;
    inv.run = [&, n_opt, theta_opt, dist_opt] {
      require_preset(c, {"fig1"}, "pmf");
      if (c.preset == "fig1") {
        if (!dist_opt->count()) pmf_model.dist = "poisson";
        if (!theta_opt->count()) pmf_model.theta = 2.0;
        if (!n_opt->count()) pmf_n = {1, 3, 10};
      }
      Table t = start_table("pmf", c);
      echo_model(t, pmf_model, true);
      t.config.emplace_back("n", join(pmf_n));
      t.config.emplace_back("tie", pmf_tie);
      t.config.emplace_back("tail_eps", format_real(pmf_eps));
      const CountModel model = build_model(pmf_model);
      const bool several = pmf_n.size() > 1;
      t.columns = several ? std::vector<std::string>{"n", "u", "prob"} : std::vector<std::string>{"u", "prob"};
      for (const std::int64_t n : pmf_n) {
        const RoundedPmf p = rounded_pmf(model, RoundingScheme{n, parse_tie_rule(pmf_tie)}, pmf_eps);
        for (std::size_t k = 0; k < p.probs.size(); ++k) {
          const std::int64_t u = static_cast<std::int64_t>(k) * n;
          if (several)
            t.add_row({n, u, p.probs[k]});
          else
            t.add_row({u, p.probs[k]});
        }
      }
      return t;
    };
  }

  // pgf-check ----------------------------------------------------------------
  ModelFlags pgf_model;
  std::int64_t pgf_n = 3;
  std::int64_t pgf_points = 50;
  {
    Invocation& inv = make("pgf-check", "Compare the closed-form pgf of U with its tabulated series");
    add_common(inv.sub, inv.common, {});
    add_model(inv.sub, pgf_model, true);
    inv.sub->add_option("--n", pgf_n, "Group size")->check(CLI::PositiveNumber);
    inv.sub->add_option("--points", pgf_points, "Number of evaluation points")->check(CLI::Range(1, 100000));
    const Common& c = inv.common;
    inv.run = [&] {
      Table t = start_table("pgf-check", c);
      echo_model(t, pgf_model, true);
      t.config.emplace_back("n", std::to_string(pgf_n));
      t.config.emplace_back("points", std::to_string(pgf_points));
      const CountModel model = build_model(pgf_model);
      const RoundingScheme scheme{pgf_n, TieRule::HalfUp};
      const RoundedPmf tab = rounded_pmf(model, scheme, 1e-16);
      t.columns = {"s_re", "s_im", "closed_re", "closed_im", "series_re", "series_im", "abs_diff"};
      // Golden-angle spiral over 0.05 <= |s| <= 0.95, away from the unit circle and the origin.
      constexpr double kGoldenTurn = 0.38196601125010515;
      for (std::int64_t j = 0; j < pgf_points; ++j) {
        const double radius = 0.05 + 0.9 * (static_cast<double>(j) + 0.5) / static_cast<double>(pgf_points);
        const double turn = std::fmod(static_cast<double>(j) * kGoldenTurn, 1.0);
        const std::complex<double> s = std::polar(radius, 2.0 * std::numbers::pi * turn);
        const auto closed = rounded_pgf(model, scheme, s);
        const auto series = rounded_pgf_series(tab, s);
        t.add_row({s.real(), s.imag(), closed.real(), closed.imag(), series.real(), series.imag(),
                   std::abs(closed - series)});
      }
      return t;
    };
  }

  // moments ------------------------------------------------------------------
  ModelFlags mom_model;
  std::int64_t mom_n = 2;
  std::string mom_tie = "half-up";
  {
    Invocation& inv = make("moments", "E(U) and Var(U) by series, closed form and enumeration");
    add_common(inv.sub, inv.common, {});
    add_model(inv.sub, mom_model, true);
    inv.sub->add_option("--n", mom_n, "Group size")->check(CLI::PositiveNumber);
    inv.sub->add_option("--tie", mom_tie, "half-up | half-even")->check(CLI::IsMember({"half-up", "half-even"}));
    const Common& c = inv.common;
    inv.run = [&] {
      Table t = start_table("moments", c);
      echo_model(t, mom_model, true);
      t.config.emplace_back("n", std::to_string(mom_n));
      t.config.emplace_back("tie", mom_tie);
      const CountModel model = build_model(mom_model);
      const RoundingScheme scheme{mom_n, parse_tie_rule(mom_tie)};
      t.columns = {"method", "mean", "variance", "imag_residual"};
      t.add_row({std::string("latent-y"), model.mean(), model.variance(), 0.0});
      if (scheme.tie_rule == TieRule::HalfUp) {
        const MomentReport s = rounded_moments_series(model, scheme);
        t.add_row({std::string("series"), s.mean, s.variance, s.imag_residual});
        if (model.family() == Family::Poisson) {
          const MomentReport p = rounded_moments_poisson(model.theta(), mom_n);
          t.add_row({std::string("closed"), p.mean, p.variance, p.imag_residual});
        } else if (model.family() == Family::Binomial && model.trials() % mom_n == 0) {
          const MomentReport b = rounded_moments_binomial(model.trials(), model.prob(), mom_n);
          t.add_row({std::string("closed"), b.mean, b.variance, b.imag_residual});
        }
      }
      const MomentReport e = moments_from_pmf(rounded_pmf(model, scheme, 1e-16));
      t.add_row({std::string("enumeration"), e.mean, e.variance, 0.0});
      return t;
    };
  }

  // mle ----------------------------------------------------------------------
  ModelFlags mle_model;
  std::vector<std::int64_t> mle_u;
  std::int64_t mle_n = 2;
  std::string mle_method = "both";
  {
    Invocation& inv = make("mle", "Maximum likelihood estimates from observed u");
    add_common(inv.sub, inv.common, {});
    add_model(inv.sub, mle_model, false);
    inv.sub->add_option("--u", mle_u, "Observed value(s) of U")->delimiter(',')->required()->check(
        CLI::NonNegativeNumber);
    inv.sub->add_option("--n", mle_n, "Group size")->check(CLI::PositiveNumber);
    inv.sub->add_option("--method", mle_method, "closed | numeric | both")
        ->check(CLI::IsMember({"closed", "numeric", "both"}));
    const Common& c = inv.common;
    inv.run = [&] {
      Table t = start_table("mle", c);
      echo_model(t, mle_model, false);
      t.config.emplace_back("u", join(mle_u));
      t.config.emplace_back("n", std::to_string(mle_n));
      t.config.emplace_back("method", mle_method);
      const CountModel family = build_model(mle_model);
      const RoundingScheme scheme{mle_n, TieRule::HalfUp};
      const bool want_closed = mle_method != "numeric";
      const bool want_numeric = mle_method != "closed";
      if (want_closed && family.family() != Family::Poisson && mle_method == "closed")
        throw UsageError("the closed-form MLE exists only for --dist poisson");
      t.columns = {"u", "n", "method", "estimate", "loglik", "converged"};
      for (const std::int64_t u : mle_u) {
        if (u % mle_n != 0) throw DomainError("u=" + std::to_string(u) + " is not a multiple of n");
        if (want_closed && family.family() == Family::Poisson) {
          const Estimate e = poisson_mle_closed(u, mle_n);
          t.add_row({u, mle_n, std::string("closed"), e.value, e.loglik_at_optimum, std::int64_t{e.converged}});
        }
        if (want_numeric) {
          const Estimate e = numeric_mle(family, u, scheme);
          t.add_row({u, mle_n, std::string("numeric"), e.value, e.loglik_at_optimum, std::int64_t{e.converged}});
        }
      }
      return t;
    };
  }

  // Shared by mse-exact and mse-sim.
  struct GridFlags {
    std::string dist = "poisson";
    std::vector<double> params;
    std::vector<std::int64_t> n_list{2};
    std::vector<std::string> estimators{"U", "numeric-mle"};
    std::int64_t trials_per_measurement = 2;
    double nb_size = 5.0;
  };
  const auto add_grid = [](CLI::App* sub, GridFlags& g) {
    std::map<std::string, CLI::Option*> opts;
    opts["dist"] = sub->add_option("--dist", g.dist, "poisson | binomial | negbinomial")
                       ->check(CLI::IsMember({"poisson", "binomial", "negbinomial"}));
    opts["param"] = sub->add_option("--param", g.params, "λ per measurement (Poisson) or φ")
                        ->delimiter(',')
                        ->check(CLI::PositiveNumber);
    opts["n"] = sub->add_option("--n", g.n_list, "Group size(s)")->delimiter(',')->check(CLI::PositiveNumber);
    opts["estimator"] = sub->add_option("--estimator", g.estimators, "U | closed-mle | numeric-mle")
                            ->delimiter(',')
                            ->check(CLI::IsMember({"U", "closed-mle", "numeric-mle"}));
    sub->add_option("--trials-per-measurement", g.trials_per_measurement, "Binomial N = this * n")
        ->check(CLI::PositiveNumber);
    sub->add_option("--nb-size", g.nb_size, "Negative binomial size")->check(CLI::PositiveNumber);
    return opts;
  };
  const auto echo_grid = [](Table& t, const GridFlags& g) {
    t.config.emplace_back("dist", g.dist);
    t.config.emplace_back("param", join(g.params));
    t.config.emplace_back("n", join(g.n_list));
    t.config.emplace_back("estimator", join(g.estimators));
    t.config.emplace_back("trials_per_measurement", std::to_string(g.trials_per_measurement));
    t.config.emplace_back("nb_size", format_real(g.nb_size));
  };
  const auto parse_estimators = [](const GridFlags& g) {
    std::vector<EstimatorKind> out;
    for (const auto& name : g.estimators) out.push_back(parse_estimator(name));
    return out;
  };

  // mse-exact ----------------------------------------------------------------
  GridFlags exact_grid;
  exact_grid.params = {0.5};
  double exact_threshold = kMseTailEps;
  {
    Invocation& inv = make("mse-exact", "MSE of estimators by exact summation over Y");
    add_common(inv.sub, inv.common, {});
    add_grid(inv.sub, exact_grid);
    inv.sub->add_option("--threshold", exact_threshold, "Skip latent values with P(Y=y) <= this")
        ->check(CLI::Range(0.0, 0.5));
    const Common& c = inv.common;
    inv.run = [&] {
      Table t = start_table("mse-exact", c);
      echo_grid(t, exact_grid);
      t.config.emplace_back("threshold", format_real(exact_threshold));
      ExperimentConfig shape;
      shape.family = parse_family(exact_grid.dist);
      shape.trials_per_measurement = exact_grid.trials_per_measurement;
      shape.nb_size = exact_grid.nb_size;
      const auto kinds = parse_estimators(exact_grid);
      t.columns = {"family", "param", "n", "estimator", "target", "mse", "status"};
      for (const double param : exact_grid.params) {
        for (const std::int64_t n : exact_grid.n_list) {
          const CountModel model = shape.model_for(param, n);
          const RoundingScheme scheme{n, TieRule::HalfUp};
          for (const EstimatorKind kind : kinds) {
            std::string status = "ok";
            double mse = std::nan("");
            try {
              MleCache cache(model, scheme);
              const EstimatorMap map = [&](std::int64_t u) {
                return kind == EstimatorKind::NumericMle ? cache(u) : apply_estimator(kind, model, scheme, u);
              };
              mse = exact_mse(map, model, scheme, model.free_parameter(), true, exact_threshold);
            } catch (const DomainError& e) {
              status = std::string("unsupported: ") + e.what();
            }
            t.add_row({exact_grid.dist, param, n, std::string(to_string(kind)), model.free_parameter(), mse,
                       status});
          }
        }
      }
      return t;
    };
  }

  // mse-sim ------------------------------------------------------------------
  GridFlags sim_grid;
  sim_grid.params = {0.5};
  std::int64_t sim_reps = 50000;
  std::uint64_t sim_seed = 0;
  unsigned sim_workers = 1;
  std::string sim_tie = "half-up";
  CLI::Option* sim_seed_opt = nullptr;
  {
    Invocation& inv = make("mse-sim", "Monte Carlo MSE of estimators over a (param, n) grid");
    add_common(inv.sub, inv.common, {"fig2", "fig3"});
    auto opts = add_grid(inv.sub, sim_grid);
    auto* reps_opt = inv.sub->add_option("--reps", sim_reps, "Replicates per cell")->check(CLI::PositiveNumber);
    sim_seed_opt = inv.sub->add_option("--seed", sim_seed, std::string("Master seed (default: $") + kSeedEnv +
                                                               " or " + std::to_string(kDefaultSeed) + ")");
    inv.sub->add_option("--workers", sim_workers, "Sampling threads; results do not depend on it")
        ->check(CLI::Range(1u, 256u));
    inv.sub->add_option("--tie", sim_tie, "half-up | half-even")->check(CLI::IsMember({"half-up", "half-even"}));
    const Common& c = inv.common;
    inv.run = [&, opts, reps_opt] {
      require_preset(c, {"fig2", "fig3"}, "mse-sim");
      if (!c.preset.empty()) {
        if (!opts.at("dist")->count()) sim_grid.dist = "poisson";
        if (!opts.at("estimator")->count()) sim_grid.estimators = {"U", "closed-mle"};
        if (!reps_opt->count()) sim_reps = 50000;
      }
      if (c.preset == "fig2") {
        if (!opts.at("param")->count()) sim_grid.params = decimal_grid(1, 80, 20);
        if (!opts.at("n")->count()) sim_grid.n_list = {2, 5, 10, 25, 50};
      } else if (c.preset == "fig3") {
        if (!opts.at("param")->count()) sim_grid.params = {0.1, 0.2, 0.5, 1.0, 1.5, 2.0, 2.5};
        if (!opts.at("n")->count()) sim_grid.n_list = {1, 2, 5, 10, 25, 50, 100, 200};
      }
      if (!sim_seed_opt->count()) sim_seed = default_seed();
      ExperimentConfig config;
      config.seed = sim_seed;
      config.reps = sim_reps;
      config.family = parse_family(sim_grid.dist);
      config.param_grid = sim_grid.params;
      config.n_list = sim_grid.n_list;
      config.estimators = parse_estimators(sim_grid);
      config.trials_per_measurement = sim_grid.trials_per_measurement;
      config.nb_size = sim_grid.nb_size;
      config.tie_rule = parse_tie_rule(sim_tie);
      config.workers = sim_workers;
      Table t = start_table("mse-sim", c);
      echo_grid(t, sim_grid);
      t.config.emplace_back("reps", std::to_string(sim_reps));
      t.config.emplace_back("seed", std::to_string(sim_seed));
      t.config.emplace_back("tie", sim_tie);
      Table body = run_mse_experiment(config).to_table();
      t.columns = std::move(body.columns);
      t.rows = std::move(body.rows);
      return t;
    };
  }

  // mse-ratio ----------------------------------------------------------------
  std::string ratio_dist = "poisson";
  std::vector<double> ratio_params;
  std::vector<std::int64_t> ratio_n{1};
  MseRatioSettings ratio_settings;
  {
    Invocation& inv = make("mse-ratio", "ψ(ν, n): MSE of the MLE from U over MSE of the MLE from Y");
    add_common(inv.sub, inv.common, {"fig6"});
    inv.sub->add_option("--dist", ratio_dist, "poisson | binomial | negbinomial")
        ->check(CLI::IsMember({"poisson", "binomial", "negbinomial"}));
    inv.sub->add_option("--param", ratio_params, "θ (Poisson) or φ grid; default depends on --dist")
        ->delimiter(',')
        ->check(CLI::PositiveNumber);
    auto* n_opt = inv.sub->add_option("--n", ratio_n, "Group size(s)")->delimiter(',')->check(CLI::PositiveNumber);
    inv.sub->add_option("--trials-per-measurement", ratio_settings.trials_per_measurement, "Binomial N = this * n")
        ->check(CLI::PositiveNumber);
    inv.sub->add_option("--nb-size", ratio_settings.nb_size, "Negative binomial size")->check(CLI::PositiveNumber);
    inv.sub->add_option("--threshold", ratio_settings.threshold, "Skip latent values with P(Y=y) <= this")
        ->check(CLI::Range(0.0, 0.5));
    const Common& c = inv.common;
    inv.run = [&, n_opt] {
      require_preset(c, {"fig6"}, "mse-ratio");
      if (c.preset == "fig6" && !n_opt->count()) ratio_n = {1, 2, 5, 10, 25};
      const Family family = parse_family(ratio_dist);
      if (ratio_params.empty())
        ratio_params = family == Family::Poisson ? decimal_grid(1, 200, 10) : decimal_grid(1, 19, 20);
      Table t = start_table("mse-ratio", c);
      t.config.emplace_back("dist", ratio_dist);
      t.config.emplace_back("param", join(ratio_params));
      t.config.emplace_back("n", join(ratio_n));
      t.config.emplace_back("trials_per_measurement", std::to_string(ratio_settings.trials_per_measurement));
      t.config.emplace_back("nb_size", format_real(ratio_settings.nb_size));
      t.config.emplace_back("threshold", format_real(ratio_settings.threshold));
      const MseRatioCurve curve = mse_ratio_curve(family, ratio_params, ratio_n, ratio_settings);
      t.columns = {"family", "n", "param", "mse_rounded", "mse_unrounded", "psi"};
      std::size_t idx = 0;
      for (const std::int64_t n : curve.n_list)
        for (const double p : curve.param_grid) {
          t.add_row({ratio_dist, n, p, curve.mse_rounded[idx], curve.mse_unrounded[idx], curve.psi[idx]});
          ++idx;
        }
      return t;
    };
  }

  // binned-test --------------------------------------------------------------
  std::int64_t bt_u = 0;
  std::int64_t bt_m = 500;
  std::int64_t bt_n = 31;
  double bt_phi0 = 0.5;
  double bt_alpha = 0.05;
  {
    Invocation& inv = make("binned-test", "Equal-tail exact test of φ = φ0 on U");
    add_common(inv.sub, inv.common, {});
    inv.sub->add_option("--u", bt_u, "Observed U")->required()->check(CLI::NonNegativeNumber);
    inv.sub->add_option("--m", bt_m, "Trials per measurement")->check(CLI::PositiveNumber);
    inv.sub->add_option("--n", bt_n, "Group size")->check(CLI::PositiveNumber);
    inv.sub->add_option("--phi0", bt_phi0, "Null success probability")->check(CLI::Range(0.0, 1.0));
    inv.sub->add_option("--alpha", bt_alpha, "Nominal level")->check(CLI::Range(0.0, 1.0));
    const Common& c = inv.common;
    inv.run = [&] {
      Table t = start_table("binned-test", c);
      t.config.emplace_back("u", std::to_string(bt_u));
      t.config.emplace_back("m", std::to_string(bt_m));
      t.config.emplace_back("n", std::to_string(bt_n));
      t.config.emplace_back("phi0", format_real(bt_phi0));
      t.config.emplace_back("alpha", format_real(bt_alpha));
      const BinnedTestResult r = binned_binomial_test(bt_u, bt_m, bt_n, bt_phi0, bt_alpha);
      t.columns = {"u", "reject", "true_level", "lower_critical", "upper_critical"};
      const auto crit = [](const std::optional<std::int64_t>& v) -> Cell {
        return v ? Cell{*v} : Cell{std::string("none")};
      };
      t.add_row({bt_u, std::int64_t{r.reject}, r.true_level, crit(r.lower_critical), crit(r.upper_critical)});
      return t;
    };
  }

  // true-significance --------------------------------------------------------
  std::int64_t ts_m = 500;
  std::int64_t ts_n = 31;
  std::vector<double> ts_phi0 = decimal_grid(2, 18, 20);
  std::vector<double> ts_alpha{0.05};
  std::vector<std::string> ts_modes{"exact-y"};
  {
    Invocation& inv = make("true-significance", "Exact size of tests on φ over a φ0 grid");
    add_common(inv.sub, inv.common, {"fig4", "fig5"});
    inv.sub->add_option("--m", ts_m, "Trials per measurement")->check(CLI::PositiveNumber);
    inv.sub->add_option("--n", ts_n, "Group size")->check(CLI::PositiveNumber);
    inv.sub->add_option("--phi0", ts_phi0, "Null success probabilities")->delimiter(',')->check(CLI::Range(0.0, 1.0));
    auto* alpha_opt =
        inv.sub->add_option("--alpha", ts_alpha, "Nominal level(s)")->delimiter(',')->check(CLI::Range(0.0, 1.0));
    auto* mode_opt = inv.sub->add_option("--mode", ts_modes, "exact-y | misspecified-u | binned-u")
                         ->delimiter(',')
                         ->check(CLI::IsMember({"exact-y", "misspecified-u", "binned-u"}));
    const Common& c = inv.common;
    inv.run = [&, alpha_opt, mode_opt] {
      require_preset(c, {"fig4", "fig5"}, "true-significance");
      if (!c.preset.empty() && !alpha_opt->count()) ts_alpha = {0.01, 0.05, 0.1};
      if (c.preset == "fig4" && !mode_opt->count()) ts_modes = {"exact-y", "misspecified-u"};
      if (c.preset == "fig5" && !mode_opt->count()) ts_modes = {"binned-u"};
      Table t = start_table("true-significance", c);
      t.config.emplace_back("m", std::to_string(ts_m));
      t.config.emplace_back("n", std::to_string(ts_n));
      t.config.emplace_back("phi0", join(ts_phi0));
      t.config.emplace_back("alpha", join(ts_alpha));
      t.config.emplace_back("mode", join(ts_modes));
      t.columns = {"mode", "alpha", "phi0", "true_level"};
      for (const auto& mode : ts_modes)
        for (const double alpha : ts_alpha) {
          SignificanceSpec spec;
          spec.m = ts_m;
          spec.n = ts_n;
          spec.phi0_grid = ts_phi0;
          spec.alpha = alpha;
          spec.mode = parse_significance_mode(mode);
          const SignificanceCurve curve = true_significance(spec);
          for (std::size_t i = 0; i < ts_phi0.size(); ++i)
            t.add_row({mode, alpha, ts_phi0[i], curve.true_level[i]});
        }
      return t;
    };
  }

  // excess-deaths ------------------------------------------------------------
  ExcessDeathsDesign ed;
  ed.n1 = 7;
  ed.n2 = 7;
  ed.theta = 10.0;
  ed.beta = 0.0;
  std::int64_t ed_u1 = 0;
  std::int64_t ed_u2 = 0;
  {
    Invocation& inv = make("excess-deaths", "Moments and point estimates of the excess-count contrast");
    add_common(inv.sub, inv.common, {});
    inv.sub->add_option("--n1", ed.n1, "Baseline days")->check(CLI::PositiveNumber);
    inv.sub->add_option("--n2", ed.n2, "Follow-up days")->check(CLI::PositiveNumber);
    inv.sub->add_option("--theta", ed.theta, "Baseline Poisson mean θ")->check(CLI::PositiveNumber);
    inv.sub->add_option("--beta", ed.beta, "Excess β (θ + β > 0)");
    auto* u1_opt = inv.sub->add_option("--u1", ed_u1, "Observed baseline U1")->check(CLI::NonNegativeNumber);
    auto* u2_opt = inv.sub->add_option("--u2", ed_u2, "Observed follow-up U2")->check(CLI::NonNegativeNumber);
    u1_opt->needs(u2_opt);
    u2_opt->needs(u1_opt);
    const Common& c = inv.common;
    inv.run = [&, u1_opt] {
      Table t = start_table("excess-deaths", c);
      t.config.emplace_back("n1", std::to_string(ed.n1));
      t.config.emplace_back("n2", std::to_string(ed.n2));
      t.config.emplace_back("theta", format_real(ed.theta));
      t.config.emplace_back("beta", format_real(ed.beta));
      const bool observed = u1_opt->count() > 0;
      if (observed) {
        t.config.emplace_back("u1", std::to_string(ed_u1));
        t.config.emplace_back("u2", std::to_string(ed_u2));
      }
      t.columns = {"quantity", "value"};
      const ExcessMoments mom = excess_moments(ed);
      t.add_row({std::string("mean_xi"), mom.mean_xi});
      t.add_row({std::string("var_xi"), mom.var_xi});
      t.add_row({std::string("mean_xi_star"), mom.mean_xi_star});
      t.add_row({std::string("var_xi_star"), mom.var_xi_star});
      t.add_row({std::string("imag_residual"), mom.imag_residual});
      if (observed) {
        const ExcessPointEstimate est = excess_point_estimates(ed_u1, ed_u2, ed.n1, ed.n2);
        t.add_row({std::string("xi"), est.xi});
        t.add_row({std::string("xi_mle"), est.xi_mle});
      }
      return t;
    };
  }

  std::vector<const char*> argv{"roundcount"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    error_line(err, "usage", e.what(), kExitUsage);
    return kExitUsage;
  }

  for (Invocation& inv : invocations) {
    if (!inv.sub->parsed()) continue;
    try {
      emit(inv.run(), inv.common, out);
      return kExitOk;
    } catch (const UsageError& e) {
      error_line(err, "usage", e.what(), kExitUsage);
      return kExitUsage;
    } catch (const DomainError& e) {
      error_line(err, "domain", e.what(), kExitUsage);
      return kExitUsage;
    } catch (const NumericalError& e) {
      error_line(err, "numerical", e.what(), kExitNumerical);
      return kExitNumerical;
    } catch (const std::exception& e) {
      error_line(err, "runtime", e.what(), kExitNumerical);
      return kExitNumerical;
    }
  }
  error_line(err, "usage", "no subcommand given", kExitUsage);
  return kExitUsage;
}

}  // namespace roundcount::cli
