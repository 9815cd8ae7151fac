#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "roundcount/cli.hpp"
#include "roundcount/errors.hpp"
#include "roundcount/estimation.hpp"
#include "roundcount/inference.hpp"
#include "roundcount/rounding.hpp"
#include "roundcount/simulation.hpp"

namespace py = pybind11;
using namespace roundcount;

namespace {

CountModel make_model(const std::string& dist, double theta, std::int64_t trials, double prob, double size) {
  switch (parse_family(dist)) {
    case Family::Poisson:
      return CountModel::poisson(theta);
    case Family::Binomial:
      return CountModel::binomial(trials, prob);
    case Family::NegativeBinomial:
      return CountModel::negative_binomial(size, prob);
  }
  throw DomainError("unknown family");
}

RoundingScheme make_scheme(std::int64_t n, const std::string& tie) { return {n, parse_tie_rule(tie)}; }

py::dict moments_dict(const MomentReport& r) {
  py::dict d;
  d["mean"] = r.mean;
  d["variance"] = r.variance;
  d["imag_residual"] = r.imag_residual;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Exact distributions and inference for the rounded count proxy U = n [Y / n].";

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  auto numerical = py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
  py::register_exception<NearRootOfUnityError>(m, "NearRootOfUnityError", numerical.ptr());
  py::register_exception<NoMaximumError>(m, "NoMaximumError", numerical.ptr());

  py::class_<CountModel>(m, "CountModel")
      .def(py::init(&make_model), py::arg("dist") = "poisson", py::arg("theta") = 1.0, py::arg("trials") = 1,
           py::arg("prob") = 0.5, py::arg("size") = 1.0)
      .def_property_readonly("family", [](const CountModel& c) { return std::string(to_string(c.family())); })
      .def_property_readonly("mean", &CountModel::mean)
      .def_property_readonly("variance", &CountModel::variance)
      .def("__repr__", &CountModel::describe);

  m.def(
      "rounded_pmf",
      [](const CountModel& model, std::int64_t n, const std::string& tie, double tail_eps) {
        const RoundedPmf p = rounded_pmf(model, make_scheme(n, tie), tail_eps);
        std::vector<std::int64_t> support(p.probs.size());
        for (std::size_t k = 0; k < support.size(); ++k) support[k] = static_cast<std::int64_t>(k) * n;
        return py::make_tuple(support, p.probs, p.truncation_mass);
      },
      py::arg("model"), py::arg("n"), py::arg("tie") = "half-up", py::arg("tail_eps") = kDefaultTailEps,
      "Return (u values, probabilities, truncation mass).");

  m.def(
      "rounded_pgf",
      [](const CountModel& model, std::int64_t n, std::complex<double> s) {
        return rounded_pgf(model, make_scheme(n, "half-up"), s);
      },
      py::arg("model"), py::arg("n"), py::arg("s"));

  m.def(
      "moments_series",
      [](const CountModel& model, std::int64_t n, const std::string& tie) {
        return moments_dict(rounded_moments_series(model, make_scheme(n, tie)));
      },
      py::arg("model"), py::arg("n"), py::arg("tie") = "half-up");
  m.def(
      "moments_poisson", [](double theta, std::int64_t n) { return moments_dict(rounded_moments_poisson(theta, n)); },
      py::arg("theta"), py::arg("n"));
  m.def(
      "moments_binomial",
      [](std::int64_t trials, double phi, std::int64_t n) {
        return moments_dict(rounded_moments_binomial(trials, phi, n));
      },
      py::arg("trials"), py::arg("phi"), py::arg("n"));

  m.def(
      "mle_closed", [](std::int64_t u, std::int64_t n) { return poisson_mle_closed(u, n).value; }, py::arg("u"),
      py::arg("n"));
  m.def(
      "mle_numeric",
      [](const CountModel& family, std::int64_t u, std::int64_t n, const std::string& tie) {
        return numeric_mle(family, u, make_scheme(n, tie)).value;
      },
      py::arg("family"), py::arg("u"), py::arg("n"), py::arg("tie") = "half-up");
  m.def("asymptotic_mle_mean", &asymptotic_mle_mean, py::arg("lam"));

  m.def(
      "mse_ratio",
      [](const std::string& dist, const std::vector<double>& grid, const std::vector<std::int64_t>& ns) {
        const MseRatioCurve c = mse_ratio_curve(parse_family(dist), grid, ns);
        py::dict d;
        d["mse_rounded"] = c.mse_rounded;
        d["mse_unrounded"] = c.mse_unrounded;
        d["psi"] = c.psi;
        return d;
      },
      py::arg("dist"), py::arg("grid"), py::arg("n_list"), "Row-major over (n, grid).");

  m.def(
      "monte_carlo_mse",
      [](const CountModel& model, std::int64_t n, const std::vector<std::string>& estimators, std::int64_t reps,
         std::uint64_t seed, unsigned workers) {
        std::vector<EstimatorKind> kinds;
        for (const auto& e : estimators) kinds.push_back(parse_estimator(e));
        py::dict out;
        for (const McMse& r : monte_carlo_mse(model, make_scheme(n, "half-up"), kinds, reps, seed, workers))
          out[py::str(std::string(to_string(r.estimator)))] = py::make_tuple(r.mse, r.standard_error, r.status);
        return out;
      },
      py::arg("model"), py::arg("n"), py::arg("estimators"), py::arg("reps"), py::arg("seed") = kDefaultSeed,
      py::arg("workers") = 1u, "Return {estimator: (mse, standard error, status)}.");

  m.def(
      "true_significance",
      [](std::int64_t trials, std::int64_t n, const std::vector<double>& phi0, double alpha,
         const std::string& mode) {
        return true_significance({trials, n, phi0, alpha, parse_significance_mode(mode)}).true_level;
      },
      py::arg("m"), py::arg("n"), py::arg("phi0"), py::arg("alpha"), py::arg("mode"));

  m.def(
      "binned_test",
      [](std::int64_t u, std::int64_t trials, std::int64_t n, double phi0, double alpha) {
        const BinnedTestResult r = binned_binomial_test(u, trials, n, phi0, alpha);
        py::dict d;
        d["reject"] = r.reject;
        d["true_level"] = r.true_level;
        d["lower_critical"] = r.lower_critical;
        d["upper_critical"] = r.upper_critical;
        return d;
      },
      py::arg("u"), py::arg("m"), py::arg("n"), py::arg("phi0"), py::arg("alpha"));

  m.def(
      "excess_moments",
      [](std::int64_t n1, std::int64_t n2, double theta, double beta) {
        const ExcessMoments e = excess_moments({n1, n2, theta, beta});
        py::dict d;
        d["mean_xi"] = e.mean_xi;
        d["var_xi"] = e.var_xi;
        d["mean_xi_star"] = e.mean_xi_star;
        d["var_xi_star"] = e.var_xi_star;
        return d;
      },
      py::arg("n1"), py::arg("n2"), py::arg("theta"), py::arg("beta"));

  m.def(
      "cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out;
        std::ostringstream err;
        const int code = cli::run(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Run a roundcount subcommand in process; return (exit code, stdout, stderr).");
}
