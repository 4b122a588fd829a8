#include "sparsedp/sparsity.hpp"

namespace sparsedp {

double pi_spike_probability(double rho, const Hyperparams &hp) noexcept {
  const double spike = 1.0 - rho;
  const double slab = rho * hp.b / (hp.a + hp.b);
  return spike / (spike + slab);
}

double draw_pi(bool mean_nonzero, double rho, const Hyperparams &hp, Rng &rng) {
  if (mean_nonzero)
    return rng.beta(hp.a + 1.0, hp.b);
  if (rng.uniform() < pi_spike_probability(rho, hp))
    return 0.0;
  return rng.beta(hp.a, hp.b + 1.0);
}

void update_pi(ModelState &state, const Hyperparams &hp, Rng &rng) {
  const std::size_t p = state.p();
  for (ClusterId c : state.clusters.live_ids()) {
    SampleCluster &sc = state.clusters.value(c);
    sc.pi.resize(p);
    for (std::size_t j = 0; j < p; ++j)
      sc.pi[j] = draw_pi(!sc.mean.is_zero(j), state.rho[j], hp, rng);
  }
}

double draw_rho(std::size_t k, std::size_t included, const Hyperparams &hp, Rng &rng) {
  const auto kk = static_cast<double>(k);
  const auto in = static_cast<double>(included);
  return rng.beta(hp.c + in, hp.d + kk - in);
}

void update_rho(ModelState &state, const Hyperparams &hp, Rng &rng) {
  const auto ids = state.clusters.live_ids();
  for (std::size_t j = 0; j < state.p(); ++j) {
    std::size_t included = 0;
    for (ClusterId c : ids)
      if (state.clusters.value(c).pi[j] > 0.0)
        ++included;
    state.rho[j] = draw_rho(ids.size(), included, hp, rng);
  }
}

InvGammaParams eta_sq_posterior(const ModelState &state, const Hyperparams &hp) {
  double count = 0.0;
  double sq = 0.0;
  for (ClusterId c : state.clusters.live_ids()) {
    const auto &inner = state.clusters.value(c).mean.inner;
    for (ClusterId k : inner.live_ids()) {
      const double v = inner.value(k);
      count += 1.0;
      sq += v * v;
    }
  }
  return {hp.eta_shape + count / 2.0, hp.eta_rate + sq / 2.0};
}

void update_eta_sq(ModelState &state, const Hyperparams &hp, Rng &rng) {
  const auto post = eta_sq_posterior(state, hp);
  state.eta_sq = rng.inv_gamma(post.shape, post.rate);
}

} // namespace sparsedp
