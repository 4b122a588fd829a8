#include "sparsedp/core_model.hpp"

#include <algorithm>
#include <limits>

#include <fmt/format.h>

namespace sparsedp {

DataMatrix::DataMatrix(Matrix values, std::vector<std::string> attribute_names)
    : y(std::move(values)), names(std::move(attribute_names)) {}

void DataMatrix::validate() const {
  if (n() < 2)
    throw std::invalid_argument(fmt::format("data needs at least 2 samples, got {}", n()));
  if (p() < 1)
    throw std::invalid_argument("data needs at least 1 attribute");
  if (!names.empty() && names.size() != p())
    throw std::invalid_argument("attribute name count does not match column count");
  for (std::size_t i = 0; i < n(); ++i)
    for (std::size_t j = 0; j < p(); ++j)
      if (!std::isfinite(y(i, j)))
        throw std::invalid_argument(fmt::format("non-finite value at sample {}, attribute {}", i, j));
}

void Hyperparams::validate() const {
  auto check = [](double v, const char *name) {
    if (!(std::isfinite(v) && v > 0.0))
      throw std::invalid_argument(fmt::format("hyperparameter {} must be positive, got {}", name, v));
  };
  if (!std::isfinite(mu0))
    throw std::invalid_argument("hyperparameter mu0 must be finite");
  check(sigma0_sq, "sigma0_sq");
  check(alpha0, "alpha0");
  check(beta0, "beta0");
  check(eta_shape, "eta_shape");
  check(eta_rate, "eta_rate");
  check(conc_shape, "conc_shape");
  check(conc_rate, "conc_rate");
  check(a, "a");
  check(b, "b");
  check(c, "c");
  check(d, "d");
}

Hyperparams default_hyperparams(const DataMatrix &data) {
  data.validate();
  const std::size_t n = data.n();
  const std::size_t p = data.p();

  std::vector<double> col_mean(p, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < p; ++j)
      col_mean[j] += data(i, j);
  for (auto &m : col_mean)
    m /= static_cast<double>(n);

  double grand = 0.0;
  for (double m : col_mean)
    grand += m;
  grand /= static_cast<double>(p);

  double spread = 0.0;
  for (double m : col_mean)
    spread += (m - grand) * (m - grand);
  spread /= static_cast<double>(p);

  if (!(spread > 0.0))
    throw DegenerateDataError("attribute means have zero spread; base-measure variance would be 0");

  Hyperparams hp;
  hp.mu0 = grand;
  hp.sigma0_sq = spread;
  return hp;
}

double log_normal_pdf(double x, double mean, double variance) {
  if (!(variance > 0.0))
    throw std::domain_error("log_normal_pdf: variance must be positive");
  return log_normal_pdf_unchecked(x, mean, variance);
}

double log_inv_gamma_pdf(double x, double shape, double rate) {
  if (!(x > 0.0 && shape > 0.0 && rate > 0.0))
    throw std::domain_error("log_inv_gamma_pdf: arguments must be positive");
  return shape * std::log(rate) - std::lgamma(shape) - (shape + 1.0) * std::log(x) - rate / x;
}

double log_gamma_pdf(double x, double shape, double rate) {
  if (!(x > 0.0 && shape > 0.0 && rate > 0.0))
    throw std::domain_error("log_gamma_pdf: arguments must be positive");
  return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

double log_beta_fn(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

double log_beta_pdf(double x, double a, double b) {
  if (!(x > 0.0 && x < 1.0))
    throw std::domain_error("log_beta_pdf: x must lie in (0,1)");
  if (!(a > 0.0 && b > 0.0))
    throw std::domain_error("log_beta_pdf: shape parameters must be positive");
  return (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - log_beta_fn(a, b);
}

double log_sum_exp(std::span<const double> v) noexcept {
  double mx = -std::numeric_limits<double>::infinity();
  for (double x : v)
    mx = std::max(mx, x);
  if (!std::isfinite(mx))
    return mx;
  double s = 0.0;
  for (double x : v)
    s += std::exp(x - mx);
  return mx + std::log(s);
}

double normalize_log_weights(std::span<double> v) noexcept {
  const double z = log_sum_exp(v);
  for (auto &x : v)
    x = std::exp(x - z);
  return z;
}

} // namespace sparsedp
