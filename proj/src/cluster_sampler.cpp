#include "sparsedp/cluster_sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "sparsedp/kernels.hpp"
#include "sparsedp/sparsity.hpp"

namespace sparsedp {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Precision a member component contributes to its inner value's posterior.
// x_k averages n_c observations of variance sigma_k^2, hence n_c/sigma_k^2.
// Building with SPARSEDP_LITERAL_INNER_PRECISION drops the n_c factor.
inline double member_precision(double count, double var) noexcept {
#ifdef SPARSEDP_LITERAL_INNER_PRECISION
  (void)count;
  return 1.0 / var;
#else
  return count / var;
#endif
}

struct InnerStats {
  double precision = 0.0;
  double weighted = 0.0;
};

// Fills log weights for placing component j (already detached from `inner`)
// given the other components. Option order: spike, live inner clusters in
// ascending id order, new. Returns the prior-only parts through `log_prior`
// when non-null.
void fill_component_weights(const Partition<double> &inner, const std::vector<InnerStats> &stats,
                            const MeanContext *ctx, const InnerModel &m, std::size_t j,
                            std::size_t nonzero_others, std::vector<ClusterId> &targets,
                            std::vector<double> &log_w, std::vector<double> *log_prior) {
  targets.clear();
  log_w.clear();
  if (log_prior)
    log_prior->clear();
  const double w = m.a * m.rho[j] / (m.a + m.b);
  const double pred = ctx ? m.vars[j] / ctx->count : 0.0;
  const double xj = ctx ? ctx->x[j] : 0.0;

  auto push = [&](ClusterId t, double lp, double lik) {
    targets.push_back(t);
    log_w.push_back(lp + lik);
    if (log_prior)
      log_prior->push_back(lp);
  };

  push(kSpike, std::log1p(-w), ctx ? log_normal_pdf_unchecked(xj, 0.0, pred) : 0.0);
  if (w > 0.0) {
    const double lw = std::log(w);
    const double denom = static_cast<double>(nonzero_others) + m.gamma;
    for (ClusterId id : inner.live_ids()) {
      const double lp = lw + std::log(static_cast<double>(inner.count(id)) / denom);
      double lik = 0.0;
      if (ctx) {
        const double v = 1.0 / m.eta_sq + stats[id].precision;
        lik = log_normal_pdf_unchecked(xj, stats[id].weighted / v, 1.0 / v + pred);
      }
      push(id, lp, lik);
    }
    push(kUnassigned, lw + std::log(m.gamma / denom),
         ctx ? log_normal_pdf_unchecked(xj, 0.0, m.eta_sq + pred) : 0.0);
  }
}

void add_member(std::vector<InnerStats> &stats, ClusterId id, const MeanContext *ctx,
                const InnerModel &m, std::size_t j) {
  if (static_cast<std::size_t>(id) >= stats.size())
    stats.resize(static_cast<std::size_t>(id) + 1);
  if (!ctx)
    return;
  const double prec = member_precision(ctx->count, m.vars[j]);
  stats[id].precision += prec;
  stats[id].weighted += prec * ctx->x[j];
}

// The sequential recursion shared by generation and replay. In replay mode
// `given` supplies every choice and value; arithmetic is identical in both
// modes, so replaying a generated proposal reproduces its scores exactly.
SequentialProposal sequential_pass(const ClusterMeanVector *given, const MeanContext *ctx,
                                   const InnerModel &m, Rng *rng) {
  const std::size_t p = m.vars.size();
  SequentialProposal out;
  Partition<double> inner(p);
  std::vector<InnerStats> stats;
  std::vector<ClusterId> creation_order;
  std::vector<ClusterId> pass_id_of_given(given ? given->inner.capacity() : 0, kUnassigned);
  SequentialScore &sc = out.score;

  std::vector<ClusterId> targets;
  std::vector<double> log_w;
  std::vector<double> log_prior;
  std::size_t nonzero = 0;

  for (std::size_t j = 0; j < p; ++j) {
    fill_component_weights(inner, stats, ctx, m, j, nonzero, targets, log_w, &log_prior);
    const double lse = log_sum_exp(log_w);
    std::size_t k = 0;
    if (given) {
      const ClusterId gid = given->inner.cluster_of(j);
      if (gid == kSpike) {
        k = 0;
      } else if (targets.size() == 1) {
        // Slab component where the slab has zero prior mass.
        sc.log_q_discrete = sc.log_q0_discrete = kNegInf;
        out.log_q = out.log_q0 = kNegInf;
        return out;
      } else if (pass_id_of_given[gid] == kUnassigned) {
        k = targets.size() - 1;
      } else {
        const ClusterId pid = pass_id_of_given[gid];
        for (k = 1; targets[k] != pid; ++k) {
        }
      }
    } else {
      std::vector<double> probs = log_w;
      k = rng->categorical_log(probs, {"sequential proposal", -1, static_cast<long>(j)});
    }
    sc.log_q_discrete += log_w[k] - lse;
    sc.log_q0_discrete += log_prior[k];

    const ClusterId t = targets[k];
    if (t == kSpike) {
      inner.attach_spike(j);
    } else {
      ClusterId id = t;
      if (t == kUnassigned) {
        id = inner.attach_new(j, 0.0);
        creation_order.push_back(id);
        if (given)
          pass_id_of_given[given->inner.cluster_of(j)] = id;
      } else {
        inner.attach(j, id);
      }
      add_member(stats, id, ctx, m, j);
      ++nonzero;
    }
  }

  const double prior_sd2 = m.eta_sq;
  for (ClusterId id : creation_order) {
    double mean = 0.0;
    double var = prior_sd2;
    if (ctx) {
      const double v = 1.0 / m.eta_sq + stats[id].precision;
      mean = stats[id].weighted / v;
      var = 1.0 / v;
    }
    double value;
    if (given) {
      value = given->inner.value(given->inner.cluster_of(inner.members(id).front()));
    } else {
      value = rng->normal(mean, var);
    }
    inner.value(id) = value;
    sc.log_q_values += log_normal_pdf_unchecked(value, mean, var);
    sc.log_q0_values += log_normal_pdf_unchecked(value, 0.0, prior_sd2);
  }

  out.mean.inner = std::move(inner);
  out.log_q = sc.log_q();
  out.log_q0 = sc.log_q0();
  return out;
}

} // namespace

InnerModel inner_model(const ModelState &state, std::span<const double> vars, const Hyperparams &hp) {
  return InnerModel{vars, state.rho, state.eta_sq, state.gamma, hp.a, hp.b};
}

SequentialProposal sequential_sample_mean(const MeanContext *context, const InnerModel &model, Rng &rng) {
  return sequential_pass(nullptr, context, model, &rng);
}

SequentialScore score_sequential(const ClusterMeanVector &mean, const MeanContext *context,
                                 const InnerModel &model) {
  return sequential_pass(&mean, context, model, nullptr).score;
}

double eval_log_q(const ClusterMeanVector &mean, const MeanContext &context, const InnerModel &model) {
  return sequential_pass(&mean, &context, model, nullptr).log_q;
}

double eval_log_q0(const ClusterMeanVector &mean, const InnerModel &model) {
  return sequential_pass(&mean, nullptr, model, nullptr).log_q0;
}

double likelihood_log_f(std::span<const double> y_row, std::span<const double> shift,
                        std::span<const double> baseline, std::span<const double> vars) {
  double s = 0.0;
  for (std::size_t j = 0; j < y_row.size(); ++j)
    s += log_normal_pdf_unchecked(y_row[j], baseline[j] + shift[j], vars[j]);
  return s;
}

double birth_log_ratio(double tau, std::size_t n, double log_f_new, double log_f_old, double log_q0,
                       double log_q) noexcept {
  return std::log(tau) - std::log(static_cast<double>(n - 1)) + (log_f_new - log_f_old) + (log_q0 - log_q);
}

double death_log_ratio(double tau, std::size_t n, double log_f_new, double log_f_old, double log_q,
                       double log_q0) noexcept {
  return std::log(static_cast<double>(n - 1)) - std::log(tau) + (log_f_new - log_f_old) + (log_q - log_q0);
}

// ---------------------------------------------------------------------------

ClusterSampler::ClusterSampler(ModelState &state, const DataMatrix &data, const Hyperparams &hp,
                               ProposalKind proposal)
    : state_(state), data_(data), hp_(hp), proposal_(proposal), baseline_(state.baseline_means()),
      vars_(state.baseline_vars()), model_(inner_model(state, vars_, hp)) {
  dense_.resize(state.clusters.capacity());
  for (ClusterId c : state.clusters.live_ids())
    refresh_dense(c);
}

const std::vector<double> &ClusterSampler::dense(ClusterId c) const { return dense_.at(c); }

void ClusterSampler::refresh_dense(ClusterId c) {
  if (static_cast<std::size_t>(c) >= dense_.size())
    dense_.resize(static_cast<std::size_t>(c) + 1);
  dense_[c] = state_.clusters.value(c).mean.dense();
}

double ClusterSampler::log_f(std::size_t i, ClusterId c) const {
  return likelihood_log_f(data_.y.row(i), dense(c), baseline_, vars_);
}

MeanContext ClusterSampler::sample_context(std::size_t i) const {
  MeanContext ctx;
  ctx.count = 1.0;
  ctx.x.resize(data_.p());
  const auto yr = data_.y.row(i);
  for (std::size_t j = 0; j < data_.p(); ++j)
    ctx.x[j] = yr[j] - baseline_[j];
  return ctx;
}

MeanContext ClusterSampler::cluster_context(ClusterId c) const {
  MeanContext ctx;
  ctx.x.assign(data_.p(), 0.0);
  const auto members = state_.clusters.members(c);
  for (std::size_t i : members) {
    const auto yr = data_.y.row(i);
    for (std::size_t j = 0; j < data_.p(); ++j)
      ctx.x[j] += yr[j] - baseline_[j];
  }
  ctx.count = static_cast<double>(members.size());
  for (auto &v : ctx.x)
    v /= ctx.count;
  return ctx;
}

namespace {
void check_ratio(double lr, const char *what, std::size_t i) {
  if (std::isnan(lr) || lr == std::numeric_limits<double>::infinity())
    throw SamplerError(fmt::format("step 5(a) ({}): non-finite log acceptance ratio {} for sample {}",
                                   what, lr, i));
}
} // namespace

MoveOutcome ClusterSampler::mh_birth_move(std::size_t i, Rng &rng) {
  auto &part = state_.clusters;
  const ClusterId own = part.cluster_of(i);
  if (part.count(own) == 1)
    throw std::logic_error("mh_birth_move: sample is a singleton");
  const std::size_t n = state_.n();

  const MeanContext ctx = sample_context(i);
  SequentialProposal prop =
      sequential_sample_mean(proposal_ == ProposalKind::Sequential ? &ctx : nullptr, model_, rng);
  const std::vector<double> shift = prop.mean.dense();
  const double lf_new = likelihood_log_f(data_.y.row(i), shift, baseline_, vars_);
  const double lf_old = log_f(i, own);

  MoveOutcome out;
  out.attempted = true;
  out.log_ratio = birth_log_ratio(state_.tau, n, lf_new, lf_old, prop.log_q0, prop.log_q);
  check_ratio(out.log_ratio, "birth", i);
  if (std::log(rng.uniform()) < out.log_ratio) {
    out.accepted = true;
    SampleCluster sc;
    sc.mean = std::move(prop.mean);
    sc.pi.resize(data_.p());
    for (std::size_t j = 0; j < data_.p(); ++j)
      sc.pi[j] = draw_pi(!sc.mean.is_zero(j), state_.rho[j], hp_, rng);
    part.detach(i);
    const ClusterId id = part.attach_new(i, std::move(sc));
    if (static_cast<std::size_t>(id) >= dense_.size())
      dense_.resize(static_cast<std::size_t>(id) + 1);
    dense_[id] = shift;
  }
  return out;
}

MoveOutcome ClusterSampler::mh_death_move(std::size_t i, Rng &rng) {
  auto &part = state_.clusters;
  const ClusterId own = part.cluster_of(i);
  if (part.count(own) != 1)
    throw std::logic_error("mh_death_move: sample is not a singleton");
  const std::size_t n = state_.n();

  std::vector<ClusterId> ids;
  std::vector<double> weights;
  for (ClusterId c : part.live_ids())
    if (c != own) {
      ids.push_back(c);
      weights.push_back(static_cast<double>(part.count(c)));
    }
  const ClusterId target = ids[rng.categorical(weights)];

  const ClusterMeanVector &mean = part.value(own).mean;
  double log_q;
  double log_q0;
  if (proposal_ == ProposalKind::Sequential) {
    const MeanContext ctx = sample_context(i);
    const SequentialScore s = score_sequential(mean, &ctx, model_);
    log_q = s.log_q();
    log_q0 = s.log_q0();
  } else {
    log_q = log_q0 = eval_log_q0(mean, model_);
  }
  const double lf_new = log_f(i, target);
  const double lf_old = log_f(i, own);

  MoveOutcome out;
  out.attempted = true;
  out.log_ratio = death_log_ratio(state_.tau, n, lf_new, lf_old, log_q, log_q0);
  check_ratio(out.log_ratio, "death", i);
  if (std::log(rng.uniform()) < out.log_ratio) {
    out.accepted = true;
    part.detach(i);
    part.attach(i, target);
  }
  return out;
}

MoveOutcome ClusterSampler::mh_move(std::size_t i, Rng &rng) {
  const ClusterId own = state_.clusters.cluster_of(i);
  return state_.clusters.count(own) == 1 ? mh_death_move(i, rng) : mh_birth_move(i, rng);
}

std::vector<std::pair<ClusterId, double>> ClusterSampler::reassign_weights(std::size_t i) const {
  const auto &part = state_.clusters;
  const ClusterId own = part.cluster_of(i);
  std::vector<std::pair<ClusterId, double>> out;
  for (ClusterId c : part.live_ids()) {
    const int cnt = part.count(c) - (c == own ? 1 : 0);
    if (cnt == 0)
      continue;
    out.emplace_back(c, std::log(static_cast<double>(cnt)) + log_f(i, c));
  }
  return out;
}

ClusterId ClusterSampler::gibbs_reassign(std::size_t i, Rng &rng) {
  auto &part = state_.clusters;
  const ClusterId own = part.cluster_of(i);
  if (part.count(own) == 1)
    throw std::logic_error("gibbs_reassign: sample is a singleton");
  const auto w = reassign_weights(i);
  std::vector<double> lw(w.size());
  for (std::size_t k = 0; k < w.size(); ++k)
    lw[k] = w[k].second;
  const ClusterId target = w[rng.categorical_log(lw, {"step 5(b) (reassignment)", static_cast<long>(i)})].first;
  if (target != own) {
    part.detach(i);
    part.attach(i, target);
  }
  return target;
}

std::vector<AssignmentOption> ClusterSampler::component_weights(ClusterId c, const MeanContext &ctx,
                                                                std::size_t j) const {
  Partition<double> inner = state_.clusters.value(c).mean.inner;
  inner.detach(j);
  std::vector<InnerStats> stats(inner.capacity());
  for (std::size_t k = 0; k < inner.items(); ++k) {
    const ClusterId id = inner.cluster_of(k);
    if (id >= 0)
      add_member(stats, id, &ctx, model_, k);
  }
  const std::size_t nonzero_others = inner.items() - 1 - inner.spike_count();
  std::vector<ClusterId> targets;
  std::vector<double> lw;
  fill_component_weights(inner, stats, &ctx, model_, j, nonzero_others, targets, lw, nullptr);
  std::vector<AssignmentOption> out(targets.size());
  for (std::size_t k = 0; k < targets.size(); ++k)
    out[k] = {targets[k], lw[k]};
  return out;
}

void ClusterSampler::gibbs_update_cluster_mean(ClusterId c, Rng &rng) {
  gibbs_update_cluster_mean(c, cluster_context(c), rng);
}

void ClusterSampler::gibbs_update_cluster_mean(ClusterId c, const MeanContext &ctx, Rng &rng) {
  Partition<double> &inner = state_.clusters.value(c).mean.inner;
  const std::size_t p = inner.items();
  std::vector<InnerStats> stats(inner.capacity());
  for (std::size_t k = 0; k < p; ++k) {
    const ClusterId id = inner.cluster_of(k);
    if (id >= 0)
      add_member(stats, id, &ctx, model_, k);
  }

  std::vector<ClusterId> targets;
  std::vector<double> lw;
  for (std::size_t j = 0; j < p; ++j) {
    const ClusterId from = inner.cluster_of(j);
    const double prec = member_precision(ctx.count, vars_[j]);
    const auto det = inner.detach(j);
    if (from >= 0) {
      if (det.removed) {
        stats[from] = {};
      } else {
        stats[from].precision -= prec;
        stats[from].weighted -= prec * ctx.x[j];
      }
    }
    const std::size_t nonzero_others = p - 1 - inner.spike_count();
    fill_component_weights(inner, stats, &ctx, model_, j, nonzero_others, targets, lw, nullptr);
    const std::size_t k = rng.categorical_log(lw, {"step 5(c) (mean component)", c, static_cast<long>(j)});
    const ClusterId t = targets[k];
    if (t == kSpike) {
      inner.attach_spike(j);
    } else if (t == kUnassigned) {
      const double v = 1.0 / model_.eta_sq + prec;
      const ClusterId id = inner.attach_new(j, prec * ctx.x[j] / v);
      if (static_cast<std::size_t>(id) >= stats.size())
        stats.resize(static_cast<std::size_t>(id) + 1);
      stats[id] = {};
      add_member(stats, id, &ctx, model_, j);
    } else {
      inner.attach(j, t);
      add_member(stats, t, &ctx, model_, j);
    }
  }

  for (ClusterId id : inner.live_ids()) {
    const double v = 1.0 / model_.eta_sq + stats[id].precision;
    inner.value(id) = rng.normal(stats[id].weighted / v, 1.0 / v);
  }
  refresh_dense(c);
}

void ClusterSampler::sweep(Rng &rng, ClusterMoveStats *stats) {
  auto &part = state_.clusters;
  const std::size_t n = state_.n();

  for (std::size_t i = 0; i < n; ++i) {
    const bool singleton = part.count(part.cluster_of(i)) == 1;
    const MoveOutcome mv = mh_move(i, rng);
    if (stats) {
      if (singleton) {
        ++stats->death_attempts;
        stats->death_accepts += mv.accepted ? 1 : 0;
      } else {
        ++stats->birth_attempts;
        stats->birth_accepts += mv.accepted ? 1 : 0;
      }
    }
  }

  // Cluster means are fixed while samples are reassigned, so the likelihood
  // table is computed once.
  {
    const auto ids = part.live_ids();
    Matrix means(ids.size(), data_.p());
    for (std::size_t k = 0; k < ids.size(); ++k) {
      const auto &d = dense(ids[k]);
      std::copy(d.begin(), d.end(), means.row(k).begin());
    }
    std::vector<double> loglik(ids.size());
    std::vector<double> lw;
    for (std::size_t i = 0; i < n; ++i) {
      const ClusterId own = part.cluster_of(i);
      if (part.count(own) == 1)
        continue;
      kernels::parallel::row_log_likelihoods(data_.y.row(i), baseline_, vars_, means, loglik);
      lw.resize(ids.size());
      for (std::size_t k = 0; k < ids.size(); ++k) {
        const int cnt = part.count(ids[k]) - (ids[k] == own ? 1 : 0);
        lw[k] = cnt > 0 ? std::log(static_cast<double>(cnt)) + loglik[k] : kNegInf;
      }
      const ClusterId target = ids[rng.categorical_log(lw, {"step 5(b) (reassignment)", static_cast<long>(i)})];
      if (target != own) {
        part.detach(i);
        part.attach(i, target);
      }
    }
  }

  {
    const auto ids = part.live_ids();
    std::vector<int> dense_of(part.capacity(), -1);
    for (std::size_t k = 0; k < ids.size(); ++k)
      dense_of[ids[k]] = static_cast<int>(k);
    std::vector<int> row_cluster(n);
    std::vector<int> sizes(ids.size(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      row_cluster[i] = dense_of[part.cluster_of(i)];
      ++sizes[row_cluster[i]];
    }
    Matrix xbar(ids.size(), data_.p());
    kernels::parallel::cluster_column_means(data_.y, baseline_, row_cluster, xbar);
    for (std::size_t k = 0; k < ids.size(); ++k) {
      MeanContext ctx;
      ctx.x.assign(xbar.row(k).begin(), xbar.row(k).end());
      ctx.count = static_cast<double>(sizes[k]);
      gibbs_update_cluster_mean(ids[k], ctx, rng);
    }
  }

  update_pi(state_, hp_, rng);
}

} // namespace sparsedp
