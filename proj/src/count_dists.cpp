#include "roundcount/count_dists.hpp"

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/negative_binomial.hpp>
#include <boost/math/distributions/poisson.hpp>
#include <boost/math/special_functions/beta.hpp>

#include <cmath>
#include <limits>
#include <sstream>

#include "roundcount/errors.hpp"

namespace roundcount {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// Below this the Boost pdf is replaced by the lgamma formula, which keeps
// resolving log-probabilities that would underflow as doubles.
constexpr double kPdfFloor = 1e-290;

double lgamma_log_pmf(const CountModel& model, std::int64_t k) {
  const double kd = static_cast<double>(k);
  switch (model.family()) {
    case Family::Poisson:
      return kd * std::log(model.theta()) - model.theta() - std::lgamma(kd + 1.0);
    case Family::Binomial: {
      const double n = static_cast<double>(model.trials());
      return std::lgamma(n + 1.0) - std::lgamma(kd + 1.0) - std::lgamma(n - kd + 1.0) +
             kd * std::log(model.prob()) + (n - kd) * std::log1p(-model.prob());
    }
    case Family::NegativeBinomial: {
      const double r = model.nb_size();
      return std::lgamma(kd + r) - std::lgamma(r) - std::lgamma(kd + 1.0) +
             r * std::log(model.prob()) + kd * std::log1p(-model.prob());
    }
  }
  return kNegInf;
}

double boost_pdf(const CountModel& model, std::int64_t k) {
  const double kd = static_cast<double>(k);
  switch (model.family()) {
    case Family::Poisson:
      return boost::math::pdf(boost::math::poisson_distribution<>(model.theta()), kd);
    case Family::Binomial:
      return boost::math::pdf(
          boost::math::binomial_distribution<>(static_cast<double>(model.trials()), model.prob()),
          kd);
    case Family::NegativeBinomial:
      return boost::math::pdf(
          boost::math::negative_binomial_distribution<>(model.nb_size(), model.prob()), kd);
  }
  return 0.0;
}

// Degenerate parameter values where Y is a point mass.
std::optional<std::int64_t> point_mass(const CountModel& model) {
  switch (model.family()) {
    case Family::Poisson:
      return std::nullopt;
    case Family::Binomial:
      if (model.prob() == 0.0) return 0;
      if (model.prob() == 1.0) return model.trials();
      return std::nullopt;
    case Family::NegativeBinomial:
      if (model.prob() == 1.0) return 0;
      return std::nullopt;
  }
  return std::nullopt;
}

void check_pgf_argument(std::complex<double> s) {
  if (!(std::abs(s) <= 1.0 + kPgfSlack)) {
    std::ostringstream msg;
    msg << "pgf argument |s| = " << std::abs(s) << " exceeds 1 + " << kPgfSlack;
    throw DomainError(msg.str());
  }
}

}  // namespace

std::string_view to_string(Family family) {
  switch (family) {
    case Family::Poisson:
      return "poisson";
    case Family::Binomial:
      return "binomial";
    case Family::NegativeBinomial:
      return "negbinomial";
  }
  return "unknown";
}

Family parse_family(std::string_view name) {
  if (name == "poisson") return Family::Poisson;
  if (name == "binomial") return Family::Binomial;
  if (name == "negbinomial" || name == "negative-binomial" || name == "nbinom")
    return Family::NegativeBinomial;
  throw DomainError("unknown distribution family '" + std::string(name) + "'");
}

CountModel CountModel::poisson(double theta) {
  if (!(theta > 0.0) || !std::isfinite(theta))
    throw DomainError("Poisson mean theta must be a positive finite number");
  CountModel m;
  m.family_ = Family::Poisson;
  m.theta_ = theta;
  return m;
}

CountModel CountModel::binomial(std::int64_t trials, double prob) {
  if (trials < 1) throw DomainError("binomial trials N must be >= 1");
  if (!(prob >= 0.0 && prob <= 1.0)) throw DomainError("binomial prob must lie in [0, 1]");
  CountModel m;
  m.family_ = Family::Binomial;
  m.trials_ = trials;
  m.prob_ = prob;
  return m;
}

CountModel CountModel::negative_binomial(double size, double prob) {
  if (!(size > 0.0) || !std::isfinite(size))
    throw DomainError("negative binomial size must be a positive finite number");
  if (!(prob > 0.0 && prob <= 1.0)) throw DomainError("negative binomial prob must lie in (0, 1]");
  CountModel m;
  m.family_ = Family::NegativeBinomial;
  m.nb_size_ = size;
  m.prob_ = prob;
  return m;
}

double CountModel::free_parameter() const noexcept {
  return family_ == Family::Poisson ? theta_ : prob_;
}

CountModel CountModel::with_free_parameter(double value) const {
  switch (family_) {
    case Family::Poisson:
      return poisson(value);
    case Family::Binomial:
      return binomial(trials_, value);
    case Family::NegativeBinomial:
      return negative_binomial(nb_size_, value);
  }
  return *this;
}

double CountModel::mean() const noexcept {
  switch (family_) {
    case Family::Poisson:
      return theta_;
    case Family::Binomial:
      return static_cast<double>(trials_) * prob_;
    case Family::NegativeBinomial:
      return nb_size_ * (1.0 - prob_) / prob_;
  }
  return 0.0;
}

double CountModel::variance() const noexcept {
  switch (family_) {
    case Family::Poisson:
      return theta_;
    case Family::Binomial:
      return static_cast<double>(trials_) * prob_ * (1.0 - prob_);
    case Family::NegativeBinomial:
      return nb_size_ * (1.0 - prob_) / (prob_ * prob_);
  }
  return 0.0;
}

std::optional<std::int64_t> CountModel::max_support() const noexcept {
  if (family_ == Family::Binomial) return trials_;
  if (family_ == Family::NegativeBinomial && prob_ == 1.0) return 0;
  return std::nullopt;
}

std::string CountModel::describe() const {
  std::ostringstream out;
  out.precision(17);
  switch (family_) {
    case Family::Poisson:
      out << "poisson(theta=" << theta_ << ")";
      break;
    case Family::Binomial:
      out << "binomial(N=" << trials_ << ", phi=" << prob_ << ")";
      break;
    case Family::NegativeBinomial:
      out << "negbinomial(size=" << nb_size_ << ", prob=" << prob_ << ")";
      break;
  }
  return out.str();
}

double log_pmf(const CountModel& model, std::int64_t k) {
  if (k < 0) return kNegInf;
  if (const auto max = model.max_support(); max && k > *max) return kNegInf;
  if (const auto at = point_mass(model)) return k == *at ? 0.0 : kNegInf;
  const double p = boost_pdf(model, k);
  if (p > kPdfFloor) return std::log(p);
  return lgamma_log_pmf(model, k);
}

double pmf(const CountModel& model, std::int64_t k) {
  if (k < 0) return 0.0;
  if (const auto max = model.max_support(); max && k > *max) return 0.0;
  if (const auto at = point_mass(model)) return k == *at ? 1.0 : 0.0;
  return boost_pdf(model, k);
}

double cdf(const CountModel& model, std::int64_t k) {
  if (k < 0) return 0.0;
  if (const auto max = model.max_support(); max && k >= *max) return 1.0;
  if (const auto at = point_mass(model)) return k >= *at ? 1.0 : 0.0;
  const double kd = static_cast<double>(k);
  switch (model.family()) {
    case Family::Poisson:
      return boost::math::cdf(boost::math::poisson_distribution<>(model.theta()), kd);
    case Family::Binomial:
      return boost::math::cdf(
          boost::math::binomial_distribution<>(static_cast<double>(model.trials()), model.prob()),
          kd);
    case Family::NegativeBinomial:
      return boost::math::cdf(
          boost::math::negative_binomial_distribution<>(model.nb_size(), model.prob()), kd);
  }
  return 0.0;
}

double upper_tail(const CountModel& model, std::int64_t k) {
  if (k < 0) return 1.0;
  if (const auto max = model.max_support(); max && k >= *max) return 0.0;
  if (const auto at = point_mass(model)) return k >= *at ? 0.0 : 1.0;
  const double kd = static_cast<double>(k);
  using boost::math::complement;
  switch (model.family()) {
    case Family::Poisson:
      return boost::math::cdf(complement(boost::math::poisson_distribution<>(model.theta()), kd));
    case Family::Binomial:
      return boost::math::cdf(complement(
          boost::math::binomial_distribution<>(static_cast<double>(model.trials()), model.prob()),
          kd));
    case Family::NegativeBinomial:
      return boost::math::cdf(complement(
          boost::math::negative_binomial_distribution<>(model.nb_size(), model.prob()), kd));
  }
  return 0.0;
}

std::complex<double> pgf(const CountModel& model, std::complex<double> s) {
  check_pgf_argument(s);
  switch (model.family()) {
    case Family::Poisson:
      return std::exp(model.theta() * (s - 1.0));
    case Family::Binomial: {
      const std::complex<double> base = (1.0 - model.prob()) + model.prob() * s;
      if (base == 0.0) return 0.0;
      return std::exp(static_cast<double>(model.trials()) * std::log(base));
    }
    case Family::NegativeBinomial: {
      const double p = model.prob();
      if (p == 1.0) return 1.0;
      // Re(1 - (1-p)s) >= p > 0 on the closed unit disk, so the principal
      // logarithm is the analytic branch.
      return std::exp(model.nb_size() * (std::log(p) - std::log(1.0 - (1.0 - p) * s)));
    }
  }
  return 0.0;
}

std::complex<double> pgf_derivative(const CountModel& model, std::complex<double> s) {
  check_pgf_argument(s);
  switch (model.family()) {
    case Family::Poisson:
      return model.theta() * std::exp(model.theta() * (s - 1.0));
    case Family::Binomial: {
      const auto n = model.trials();
      const double phi = model.prob();
      const std::complex<double> base = (1.0 - phi) + phi * s;
      if (n == 1) return phi;
      if (base == 0.0) return 0.0;
      return static_cast<double>(n) * phi * std::exp(static_cast<double>(n - 1) * std::log(base));
    }
    case Family::NegativeBinomial: {
      const double p = model.prob();
      if (p == 1.0) return 0.0;
      const std::complex<double> denom = 1.0 - (1.0 - p) * s;
      return pgf(model, s) * model.nb_size() * (1.0 - p) / denom;
    }
  }
  return 0.0;
}

std::int64_t support_bound(const CountModel& model, double tail_eps) {
  if (!(tail_eps > 0.0 && tail_eps < 1.0)) throw DomainError("tail_eps must lie in (0, 1)");
  if (model.family() == Family::Binomial) return model.trials();
  if (upper_tail(model, 0) < tail_eps) return 0;
  std::int64_t lo = 0;  // invariant: upper_tail(lo) >= tail_eps
  std::int64_t hi = std::max<std::int64_t>(mode(model), 1);
  while (upper_tail(model, hi) >= tail_eps) {
    lo = hi;
    hi = 2 * hi + 1;
  }
  while (hi - lo > 1) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    if (upper_tail(model, mid) < tail_eps)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

std::int64_t mode(const CountModel& model) {
  switch (model.family()) {
    case Family::Poisson:
      return static_cast<std::int64_t>(std::floor(model.theta()));
    case Family::Binomial: {
      const auto m = static_cast<std::int64_t>(
          std::floor(static_cast<double>(model.trials() + 1) * model.prob()));
      return std::min(m, model.trials());
    }
    case Family::NegativeBinomial: {
      const double r = model.nb_size();
      if (r <= 1.0) return 0;
      return static_cast<std::int64_t>(std::floor((r - 1.0) * (1.0 - model.prob()) / model.prob()));
    }
  }
  return 0;
}

double log_cdf_sensitivity(const CountModel& model, std::int64_t k) {
  if (k < 0) return kNegInf;
  switch (model.family()) {
    case Family::Poisson:
      // d/dθ P(Y<=k) = -P(Y=k)
      return log_pmf(model, k);
    case Family::Binomial: {
      // d/dφ P(Y<=k) = -N P(Y'=k), Y' ~ binomial(N-1, φ)
      const auto n = model.trials();
      if (k >= n) return kNegInf;
      if (n == 1) return 0.0;
      return std::log(static_cast<double>(n)) +
             log_pmf(CountModel::binomial(n - 1, model.prob()), k);
    }
    case Family::NegativeBinomial: {
      // P(Y<=k) = I_p(size, k+1); d/dp = p^(size-1) (1-p)^k / B(size, k+1)
      const double r = model.nb_size();
      const double p = model.prob();
      const double kd = static_cast<double>(k);
      if (p > 0.0 && p < 1.0) {
        const double d = boost::math::ibeta_derivative(r, kd + 1.0, p);
        if (d > kPdfFloor) return std::log(d);
      }
      const double log_beta = std::lgamma(r) + std::lgamma(kd + 1.0) - std::lgamma(r + kd + 1.0);
      const double log_p_term = (r == 1.0) ? 0.0 : (r - 1.0) * std::log(p);
      const double log_q_term = (k == 0) ? 0.0 : kd * std::log1p(-p);
      return log_p_term + log_q_term - log_beta;
    }
  }
  return kNegInf;
}

int cdf_sensitivity_sign(Family family) noexcept {
  return family == Family::NegativeBinomial ? +1 : -1;
}

}  // namespace roundcount
