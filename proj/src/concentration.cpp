#include "sparsedp/concentration.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "sparsedp/core_model.hpp"

namespace sparsedp {

double concentration_mixture_weight(std::size_t k, std::size_t n, GammaPrior prior, double log_x) noexcept {
  const double num = prior.shape + static_cast<double>(k) - 1.0;
  return num / (num + static_cast<double>(n) * (prior.rate - log_x));
}

double update_concentration(double conc, std::size_t k, std::size_t n, GammaPrior prior, Rng &rng) {
  if (k == 0 || n == 0)
    throw std::logic_error("update_concentration: needs at least one cluster and one item");
  const double log_x = std::log(rng.beta(conc + 1.0, static_cast<double>(n)));
  const double w = concentration_mixture_weight(k, n, prior, log_x);
  const double rate = prior.rate - log_x;
  const double shape = prior.shape + static_cast<double>(k) - (rng.uniform() < w ? 0.0 : 1.0);
  return rng.gamma(shape, rate);
}

// For C partitions sharing concentration g, with k_c blocks over m_c items,
//   p(g | partitions) ∝ g^(s-1) e^(-r g) prod_c g^(k_c) Gamma(g) / Gamma(g + m_c).
// Writing Gamma(g)/Gamma(g+m) = (g+m) / (g Gamma(m)) * ∫ x^g (1-x)^(m-1) dx and
// adding one x_c ~ Beta(g+1, m_c) per partition gives
//   p(g | x) ∝ g^(S-1) prod_c (g + m_c) e^(-R g),  S = s + K - C,  R = r - sum log x_c.
// Expanding the product, the coefficient of g^t is the elementary symmetric
// polynomial e_(C-t)(m_1..m_C), so p(g | x) is a mixture of Gamma(S + t, R)
// for t = 0..C with weights e_(C-t) Gamma(S+t) / R^(S+t). With C = 1 this is
// exactly the single-partition two-component mixture.
std::vector<double> shared_concentration_log_weights(std::span<const CrpCounts> parts, GammaPrior prior,
                                                     std::span<const double> log_x) {
  const std::size_t c = parts.size();
  constexpr double ninf = -std::numeric_limits<double>::infinity();
  std::vector<double> log_e(c + 1, ninf); // log e_t
  log_e[0] = 0.0;
  double total_k = 0.0;
  double rate = prior.rate;
  for (std::size_t q = 0; q < c; ++q) {
    const double lm = std::log(static_cast<double>(parts[q].items));
    for (std::size_t t = q + 1; t >= 1; --t) {
      const double add = log_e[t - 1] + lm;
      const double cur = log_e[t];
      if (cur == ninf) {
        log_e[t] = add;
      } else {
        const double mx = std::max(cur, add);
        log_e[t] = mx + std::log(std::exp(cur - mx) + std::exp(add - mx));
      }
    }
    total_k += static_cast<double>(parts[q].clusters);
    rate -= log_x[q];
  }
  const double base_shape = prior.shape + total_k - static_cast<double>(c);
  std::vector<double> out(c + 1);
  for (std::size_t t = 0; t <= c; ++t) {
    const double sh = base_shape + static_cast<double>(t);
    out[t] = log_e[c - t] + std::lgamma(sh) - sh * std::log(rate);
  }
  return out;
}

double update_shared_concentration(double conc, std::span<const CrpCounts> parts, GammaPrior prior, Rng &rng) {
  std::vector<CrpCounts> used;
  for (const auto &pc : parts)
    if (pc.items > 0) {
      if (pc.clusters == 0)
        throw std::logic_error("update_shared_concentration: items without clusters");
      used.push_back(pc);
    }
  if (used.empty())
    return rng.gamma(prior.shape, prior.rate);

  std::vector<double> log_x(used.size());
  double rate = prior.rate;
  double total_k = 0.0;
  for (std::size_t q = 0; q < used.size(); ++q) {
    log_x[q] = std::log(rng.beta(conc + 1.0, static_cast<double>(used[q].items)));
    rate -= log_x[q];
    total_k += static_cast<double>(used[q].clusters);
  }
  auto lw = shared_concentration_log_weights(used, prior, log_x);
  const std::size_t t = rng.categorical_log(lw, {"step 7 (shared concentration)"});
  const double shape = prior.shape + total_k - static_cast<double>(used.size()) + static_cast<double>(t);
  return rng.gamma(shape, rate);
}

} // namespace sparsedp
