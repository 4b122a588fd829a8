#pragma once

#include "sparsedp/core_model.hpp"
#include "sparsedp/model_state.hpp"
#include "sparsedp/rng.hpp"

namespace sparsedp {

/// Marginal prior probability a*rho/(a+b) that a mean component is nonzero
/// once pi is integrated out.
[[nodiscard]] inline double slab_probability(double rho, const Hyperparams &hp) noexcept {
  return hp.a * rho / (hp.a + hp.b);
}

/// Posterior probability that pi_cj = 0 exactly given mu_cj = 0:
///   (1 - rho) / ((1 - rho) + rho * b / (a + b)).
[[nodiscard]] double pi_spike_probability(double rho, const Hyperparams &hp) noexcept;

/// Draws pi_cj from its conditional given whether mu_cj is nonzero and rho_j.
[[nodiscard]] double draw_pi(bool mean_nonzero, double rho, const Hyperparams &hp, Rng &rng);

/// Redraws the whole pi row of every live sample cluster.
void update_pi(ModelState &state, const Hyperparams &hp, Rng &rng);

/// Beta(c + included, d + k - included) draw for rho_j.
[[nodiscard]] double draw_rho(std::size_t k, std::size_t included, const Hyperparams &hp, Rng &rng);
void update_rho(ModelState &state, const Hyperparams &hp, Rng &rng);

struct InvGammaParams {
  double shape;
  double rate;
};

/// Conditional of eta^2 given every distinct nonzero value across clusters.
/// Each inner cluster contributes its single atom once.
[[nodiscard]] InvGammaParams eta_sq_posterior(const ModelState &state, const Hyperparams &hp);
void update_eta_sq(ModelState &state, const Hyperparams &hp, Rng &rng);

} // namespace sparsedp
