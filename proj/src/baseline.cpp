#include "sparsedp/baseline.hpp"

#include <cmath>

#include "sparsedp/kernels.hpp"

namespace sparsedp {

DenseClusters dense_clusters(const ModelState &state) {
  DenseClusters out;
  out.ids = state.clusters.live_ids();
  const std::size_t p = state.p();
  out.means = Matrix(out.ids.size(), p);
  std::vector<int> dense_of(state.clusters.capacity(), -1);
  for (std::size_t k = 0; k < out.ids.size(); ++k) {
    dense_of[out.ids[k]] = static_cast<int>(k);
    state.clusters.value(out.ids[k]).mean.dense_into(out.means.row(k));
  }
  out.row_cluster.resize(state.n());
  for (std::size_t i = 0; i < state.n(); ++i)
    out.row_cluster[i] = dense_of[state.clusters.cluster_of(i)];
  return out;
}

// ---------------------------------------------------------------------------
// baseline means

BaselineMeanUpdater::BaselineMeanUpdater(ModelState &state, const DataMatrix &data,
                                         const Hyperparams &hp)
    : state_(state), hp_(hp), n_(static_cast<double>(data.n())), rbar_(data.p()),
      vars_(state.baseline_vars()) {
  const DenseClusters dc = dense_clusters(state);
  kernels::parallel::residual_column_sums(data.y, dc.row_cluster, dc.means, rbar_);
  for (auto &r : rbar_)
    r /= n_;
  stats_.resize(state.baseline_mean.capacity());
  for (std::size_t j = 0; j < data.p(); ++j) {
    Stats &s = stats_[state.baseline_mean.cluster_of(j)];
    s.precision += n_ / vars_[j];
    s.weighted += n_ * rbar_[j] / vars_[j];
  }
}

BaselineMeanUpdater::Stats &BaselineMeanUpdater::stats_for(ClusterId c) {
  if (static_cast<std::size_t>(c) >= stats_.size())
    stats_.resize(static_cast<std::size_t>(c) + 1);
  return stats_[c];
}

std::pair<double, double> BaselineMeanUpdater::value_posterior(ClusterId c) const {
  const Stats &s = stats_[c];
  const double v = 1.0 / hp_.sigma0_sq + s.precision;
  const double u = (hp_.mu0 / hp_.sigma0_sq + s.weighted) / v;
  return {u, 1.0 / v};
}

std::vector<AssignmentOption> BaselineMeanUpdater::assignment_weights(std::size_t j) const {
  const auto &part = state_.baseline_mean;
  const ClusterId own = part.cluster_of(j);
  const double own_prec = n_ / vars_[j];
  const double own_weighted = n_ * rbar_[j] / vars_[j];
  const double pred_var = vars_[j] / n_;

  std::vector<AssignmentOption> out;
  out.reserve(part.num_clusters() + 1);
  for (ClusterId c : part.live_ids()) {
    int count = part.count(c);
    double prec = stats_[c].precision;
    double weighted = stats_[c].weighted;
    if (c == own) {
      --count;
      prec -= own_prec;
      weighted -= own_weighted;
    }
    if (count == 0)
      continue;
    const double v = 1.0 / hp_.sigma0_sq + prec;
    const double u = (hp_.mu0 / hp_.sigma0_sq + weighted) / v;
    out.push_back({c, std::log(static_cast<double>(count)) +
                          log_normal_pdf_unchecked(rbar_[j], u, 1.0 / v + pred_var)});
  }
  out.push_back({kUnassigned, std::log(state_.alpha) +
                                  log_normal_pdf_unchecked(rbar_[j], hp_.mu0, hp_.sigma0_sq + pred_var)});
  return out;
}

ClusterId BaselineMeanUpdater::update_assignment(std::size_t j, Rng &rng) {
  auto options = assignment_weights(j);
  std::vector<double> lw(options.size());
  for (std::size_t k = 0; k < options.size(); ++k)
    lw[k] = options[k].log_weight;
  const std::size_t pick = rng.categorical_log(lw, {"step 1 (baseline mean assignment)", static_cast<long>(j)});
  const ClusterId target = options[pick].target;

  auto &part = state_.baseline_mean;
  const double own_prec = n_ / vars_[j];
  const double own_weighted = n_ * rbar_[j] / vars_[j];
  const ClusterId from = part.cluster_of(j);
  if (target == from)
    return from;

  const auto detached = part.detach(j);
  if (detached.removed) {
    stats_[from] = {};
  } else {
    stats_[from].precision -= own_prec;
    stats_[from].weighted -= own_weighted;
  }
  ClusterId to = target;
  if (target == kUnassigned) {
    // Placeholder; the value is redrawn by resample_values.
    const double v = 1.0 / hp_.sigma0_sq + own_prec;
    to = part.attach_new(j, (hp_.mu0 / hp_.sigma0_sq + own_weighted) / v);
    stats_for(to) = {own_prec, own_weighted};
  } else {
    part.attach(j, target);
    Stats &s = stats_for(to);
    s.precision += own_prec;
    s.weighted += own_weighted;
  }
  return to;
}

void BaselineMeanUpdater::update_all_assignments(Rng &rng) {
  for (std::size_t j = 0; j < rbar_.size(); ++j)
    update_assignment(j, rng);
}

void BaselineMeanUpdater::resample_values(Rng &rng) {
  auto &part = state_.baseline_mean;
  for (ClusterId c : part.live_ids()) {
    const auto [u, var] = value_posterior(c);
    part.value(c) = rng.normal(u, var);
  }
}

// ---------------------------------------------------------------------------
// baseline variances

BaselineVarUpdater::BaselineVarUpdater(ModelState &state, const DataMatrix &data,
                                       const Hyperparams &hp)
    : state_(state), hp_(hp), n_(static_cast<double>(data.n())), ss_(data.p()) {
  const DenseClusters dc = dense_clusters(state);
  const auto base = state.baseline_means();
  kernels::parallel::centered_column_sq_sums(data.y, base, dc.row_cluster, dc.means, ss_);
  stats_.resize(state.baseline_var.capacity(), 0.0);
  for (std::size_t j = 0; j < data.p(); ++j)
    stats_[state.baseline_var.cluster_of(j)] += ss_[j];
}

double &BaselineVarUpdater::stat_for(ClusterId c) {
  if (static_cast<std::size_t>(c) >= stats_.size())
    stats_.resize(static_cast<std::size_t>(c) + 1, 0.0);
  return stats_[c];
}

namespace {
// log of  v^u / Gamma(u) * Gamma(u + n/2) / (v + ss/2)^(u + n/2)
double log_ig_marginal(double u, double v, double n, double ss) {
  const double h = n / 2.0;
  return u * std::log(v) - std::lgamma(u) + std::lgamma(u + h) - (u + h) * std::log(v + ss / 2.0);
}
} // namespace

std::pair<double, double> BaselineVarUpdater::value_posterior(ClusterId c) const {
  const double count = state_.baseline_var.count(c);
  return {hp_.alpha0 + count * n_ / 2.0, hp_.beta0 + stats_[c] / 2.0};
}

std::vector<AssignmentOption> BaselineVarUpdater::assignment_weights(std::size_t j) const {
  const auto &part = state_.baseline_var;
  const ClusterId own = part.cluster_of(j);
  std::vector<AssignmentOption> out;
  out.reserve(part.num_clusters() + 1);
  for (ClusterId c : part.live_ids()) {
    int count = part.count(c);
    double ss = stats_[c];
    if (c == own) {
      --count;
      ss -= ss_[j];
    }
    if (count == 0)
      continue;
    const double u = hp_.alpha0 + count * n_ / 2.0;
    const double v = hp_.beta0 + ss / 2.0;
    out.push_back({c, std::log(static_cast<double>(count)) + log_ig_marginal(u, v, n_, ss_[j])});
  }
  out.push_back({kUnassigned, std::log(state_.beta) + log_ig_marginal(hp_.alpha0, hp_.beta0, n_, ss_[j])});
  return out;
}

ClusterId BaselineVarUpdater::update_assignment(std::size_t j, Rng &rng) {
  auto options = assignment_weights(j);
  std::vector<double> lw(options.size());
  for (std::size_t k = 0; k < options.size(); ++k)
    lw[k] = options[k].log_weight;
  const std::size_t pick = rng.categorical_log(lw, {"step 2 (baseline variance assignment)", static_cast<long>(j)});
  const ClusterId target = options[pick].target;

  auto &part = state_.baseline_var;
  const ClusterId from = part.cluster_of(j);
  if (target == from)
    return from;
  const auto detached = part.detach(j);
  if (detached.removed)
    stats_[from] = 0.0;
  else
    stats_[from] -= ss_[j];
  ClusterId to = target;
  if (target == kUnassigned) {
    const double shape = hp_.alpha0 + n_ / 2.0;
    to = part.attach_new(j, (hp_.beta0 + ss_[j] / 2.0) / (shape + 1.0));
    stat_for(to) = ss_[j];
  } else {
    part.attach(j, target);
    stat_for(to) += ss_[j];
  }
  return to;
}

void BaselineVarUpdater::update_all_assignments(Rng &rng) {
  for (std::size_t j = 0; j < ss_.size(); ++j)
    update_assignment(j, rng);
}

void BaselineVarUpdater::resample_values(Rng &rng) {
  auto &part = state_.baseline_var;
  for (ClusterId c : part.live_ids()) {
    const auto [shape, rate] = value_posterior(c);
    part.value(c) = rng.inv_gamma(shape, rate);
  }
}

void update_baseline_means(ModelState &state, const DataMatrix &data, const Hyperparams &hp, Rng &rng) {
  BaselineMeanUpdater upd(state, data, hp);
  upd.update_all_assignments(rng);
  upd.resample_values(rng);
}

void update_baseline_vars(ModelState &state, const DataMatrix &data, const Hyperparams &hp, Rng &rng) {
  BaselineVarUpdater upd(state, data, hp);
  upd.update_all_assignments(rng);
  upd.resample_values(rng);
}

} // namespace sparsedp
