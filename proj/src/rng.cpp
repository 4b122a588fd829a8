#include "sparsedp/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "sparsedp/core_model.hpp"

namespace sparsedp {

double Rng::uniform() {
  // 53 random bits, shifted off zero.
  for (;;) {
    const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    if (u > 0.0)
      return u;
  }
}

double Rng::normal(double mean, double variance) {
  std::normal_distribution<double> dist(mean, std::sqrt(variance));
  return dist(engine_);
}

double Rng::gamma(double shape, double rate) {
  std::gamma_distribution<double> dist(shape, 1.0 / rate);
  return dist(engine_);
}

double Rng::log_gamma_unit(double shape) {
  if (shape >= 1.0) {
    std::gamma_distribution<double> dist(shape, 1.0);
    return std::log(dist(engine_));
  }
  // G(shape) = G(shape + 1) * U^(1/shape)
  std::gamma_distribution<double> dist(shape + 1.0, 1.0);
  const double g = dist(engine_);
  return std::log(g) + std::log(uniform()) / shape;
}

double Rng::inv_gamma(double shape, double rate) {
  return rate * std::exp(-log_gamma_unit(shape));
}

double Rng::beta(double a, double b) {
  const double lx = log_gamma_unit(a);
  const double ly = log_gamma_unit(b);
  const double m = std::max(lx, ly);
  const double r = std::exp(lx - m) / (std::exp(lx - m) + std::exp(ly - m));
  constexpr double lo = std::numeric_limits<double>::min();
  constexpr double hi = 1.0 - std::numeric_limits<double>::epsilon() / 2.0;
  return std::clamp(r, lo, hi);
}

bool Rng::bernoulli(double prob) { return uniform() < prob; }

std::size_t Rng::uniform_index(std::size_t n) {
  std::uniform_int_distribution<std::size_t> dist(0, n - 1);
  return dist(engine_);
}

std::size_t Rng::categorical_log(std::span<double> log_w, const WeightSite &site) {
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < log_w.size(); ++k) {
    const double v = log_w[k];
    if (std::isnan(v) || v == std::numeric_limits<double>::infinity())
      throw SamplerError(fmt::format("{}: non-finite log weight {} for option {} (index {}, {})",
                                     site.step, v, k, site.first, site.second));
    mx = std::max(mx, v);
  }
  if (!std::isfinite(mx))
    throw SamplerError(fmt::format("{}: all log weights are -inf (index {}, {})", site.step,
                                   site.first, site.second));
  double total = 0.0;
  for (auto &v : log_w) {
    v = std::exp(v - mx);
    total += v;
  }
  const double target = uniform() * total;
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t k = 0; k < log_w.size(); ++k) {
    if (log_w[k] > 0.0)
      last_positive = k;
    acc += log_w[k];
    if (target < acc) {
      for (auto &v : log_w)
        v /= total;
      return k;
    }
  }
  for (auto &v : log_w)
    v /= total;
  return last_positive;
}

std::size_t Rng::categorical(std::span<const double> w) {
  double total = 0.0;
  for (double v : w)
    total += v;
  const double target = uniform() * total;
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    if (w[k] > 0.0)
      last_positive = k;
    acc += w[k];
    if (target < acc)
      return k;
  }
  return last_positive;
}

} // namespace sparsedp
