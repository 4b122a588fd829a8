#include "sparsedp/chain.hpp"

#include <stdexcept>

#include <fmt/format.h>

#include "sparsedp/baseline.hpp"
#include "sparsedp/concentration.hpp"
#include "sparsedp/sparsity.hpp"

namespace sparsedp {

void ChainConfig::validate() const {
  if (iterations == 0)
    throw std::invalid_argument("chain config: iterations must be positive");
  if (thin == 0)
    throw std::invalid_argument("chain config: thin must be positive");
  if (burn_in >= iterations)
    throw std::invalid_argument(
        fmt::format("chain config: burn_in ({}) must be smaller than iterations ({})", burn_in, iterations));
  for (const auto *v : {&fixed_alpha, &fixed_gamma})
    if (v->has_value() && !(**v > 0.0 && std::isfinite(**v)))
      throw std::invalid_argument("chain config: fixed concentrations must be positive and finite");
}

Matrix TraceRecord::fitted_matrix() const {
  Matrix out(assignments.size(), baseline.size());
  for (std::size_t i = 0; i < assignments.size(); ++i)
    for (std::size_t j = 0; j < baseline.size(); ++j)
      out(i, j) = fitted(i, j);
  return out;
}

TraceRecord make_record(const ModelState &state, std::size_t iteration, const RecordSet &what) {
  TraceRecord r;
  r.iteration = iteration;
  r.k = state.num_clusters();
  r.unique_baseline_means = state.baseline_mean.num_clusters();
  r.eta_sq = state.eta_sq;
  r.tau = state.tau;
  r.alpha = state.alpha;
  r.beta = state.beta;
  r.gamma = state.gamma;
  if (what.rho)
    r.rho = state.rho;

  const std::size_t n = state.n();
  const std::size_t p = state.p();
  std::vector<int> canon(state.clusters.capacity(), -1);
  std::vector<ClusterId> order;
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    const ClusterId c = state.clusters.cluster_of(i);
    if (canon[c] < 0) {
      canon[c] = static_cast<int>(order.size());
      order.push_back(c);
    }
    labels[i] = canon[c];
  }
  if (what.assignments)
    r.assignments = std::move(labels);
  if (what.pi)
    r.pi = Matrix(order.size(), p);
  if (what.mu_matrix) {
    r.shift = Matrix(order.size(), p);
    r.baseline = state.baseline_means();
  }
  for (std::size_t k = 0; k < order.size(); ++k) {
    const SampleCluster &sc = state.clusters.value(order[k]);
    for (std::size_t j = 0; j < p; ++j) {
      if (what.pi)
        r.pi(k, j) = sc.pi[j];
      if (what.mu_matrix)
        r.shift(k, j) = sc.mean.component(j);
    }
  }
  return r;
}

ModelState init_state(const DataMatrix &data, const Hyperparams &hp, const ChainConfig &cfg, Rng &rng) {
  data.validate();
  hp.validate();
  const std::size_t n = data.n();
  const std::size_t p = data.p();
  ModelState s;
  s.baseline_mean = Partition<double>(p);
  s.baseline_var = Partition<double>(p);
  for (std::size_t j = 0; j < p; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      mean += data(i, j);
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      var += (data(i, j) - mean) * (data(i, j) - mean);
    var /= static_cast<double>(n - 1);
    if (!(var > 0.0))
      throw DegenerateDataError(fmt::format("attribute {} is constant across samples", j));
    s.baseline_mean.attach_new(j, mean);
    s.baseline_var.attach_new(j, var);
  }

  s.rho.assign(p, hp.c / (hp.c + hp.d));
  s.eta_sq = hp.eta_rate / (hp.eta_shape + 1.0);
  const double conc = hp.conc_shape / hp.conc_rate;
  s.tau = s.beta = conc;
  s.alpha = cfg.fixed_alpha.value_or(conc);
  s.gamma = cfg.fixed_gamma.value_or(conc);

  auto fresh_cluster = [&] {
    SampleCluster sc{ClusterMeanVector(p), std::vector<double>(p)};
    for (std::size_t j = 0; j < p; ++j)
      sc.pi[j] = draw_pi(false, s.rho[j], hp, rng);
    return sc;
  };
  s.clusters = Partition<SampleCluster>(n);
  if (cfg.init_mode == InitMode::AllOneCluster) {
    const ClusterId c = s.clusters.attach_new(0, fresh_cluster());
    for (std::size_t i = 1; i < n; ++i)
      s.clusters.attach(i, c);
  } else {
    for (std::size_t i = 0; i < n; ++i)
      s.clusters.attach_new(i, fresh_cluster());
  }
  s.validate();
  return s;
}

void update_concentrations(ModelState &state, const Hyperparams &hp, const ChainConfig &cfg, Rng &rng) {
  const GammaPrior prior{hp.conc_shape, hp.conc_rate};
  const std::size_t p = state.p();
  state.tau = update_concentration(state.tau, state.num_clusters(), state.n(), prior, rng);
  state.alpha = cfg.fixed_alpha ? *cfg.fixed_alpha
                                : update_concentration(state.alpha, state.baseline_mean.num_clusters(), p, prior, rng);
  state.beta = update_concentration(state.beta, state.baseline_var.num_clusters(), p, prior, rng);
  if (cfg.fixed_gamma) {
    state.gamma = *cfg.fixed_gamma;
  } else {
    std::vector<CrpCounts> parts;
    for (ClusterId c : state.clusters.live_ids()) {
      const ClusterMeanVector &m = state.clusters.value(c).mean;
      parts.push_back({m.inner_cluster_count(), m.nonzero_count()});
    }
    state.gamma = update_shared_concentration(state.gamma, parts, prior, rng);
  }
}

void sweep(ModelState &state, const DataMatrix &data, const Hyperparams &hp, const ChainConfig &cfg, Rng &rng,
           std::size_t iteration, ClusterMoveStats *stats) {
  const char *step = "";
  auto run = [&](const char *name, auto &&fn) {
    step = name;
    fn();
    if (cfg.validate_each_step)
      state.validate();
  };
  try {
    run("step 1", [&] { update_baseline_means(state, data, hp, rng); });
    run("step 2", [&] { update_baseline_vars(state, data, hp, rng); });
    run("step 3", [&] { update_pi(state, hp, rng); });
    run("step 4", [&] { update_rho(state, hp, rng); });
    run("step 5", [&] {
      ClusterSampler cs(state, data, hp, cfg.proposal);
      cs.sweep(rng, stats);
    });
    run("step 6", [&] { update_eta_sq(state, hp, rng); });
    run("step 7", [&] { update_concentrations(state, hp, cfg, rng); });
  } catch (const SamplerError &e) {
    throw SamplerError(fmt::format("iteration {}: {}", iteration, e.what()));
  } catch (const std::logic_error &e) {
    throw std::logic_error(fmt::format("iteration {}, {}: {}", iteration, step, e.what()));
  }
}

ClusterMoveStats run_chain_streaming(const DataMatrix &data, const Hyperparams &hp, const ChainConfig &cfg,
                                     const TraceObserver &observer) {
  cfg.validate();
  Rng rng(cfg.seed);
  ModelState state = init_state(data, hp, cfg, rng);
  ClusterMoveStats stats;
  for (std::size_t t = 1; t <= cfg.iterations; ++t) {
    sweep(state, data, hp, cfg, rng, t, &stats);
    if (t > cfg.burn_in && (t - cfg.burn_in) % cfg.thin == 0)
      observer(make_record(state, t, cfg.record));
  }
  return stats;
}

ChainTrace run_chain(const DataMatrix &data, const Hyperparams &hp, const ChainConfig &cfg) {
  ChainTrace trace;
  trace.records.reserve(cfg.trace_length());
  trace.moves = run_chain_streaming(data, hp, cfg, [&](const TraceRecord &r) { trace.records.push_back(r); });
  return trace;
}

} // namespace sparsedp
