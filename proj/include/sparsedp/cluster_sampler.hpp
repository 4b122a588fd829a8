#pragma once

#include <span>
#include <vector>

#include "sparsedp/core_model.hpp"
#include "sparsedp/model_state.hpp"
#include "sparsedp/rng.hpp"

namespace sparsedp {

/// How the mean of a newborn cluster is proposed.
enum class ProposalKind {
  Sequential, ///< component-by-component, conditioned on the sample
  Prior,      ///< straight from the (pi-marginalized) prior
};

/// Data summary a cluster mean is proposed or updated against: x_j is the
/// average of (y_ij - mu_j) over the n_c member samples.
struct MeanContext {
  std::vector<double> x;
  double count = 1.0;
};

/// Everything the inner (within-cluster) model of a mean vector depends on.
struct InnerModel {
  std::span<const double> vars; ///< sigma_j^2
  std::span<const double> rho;
  double eta_sq;
  double gamma;
  double a;
  double b;
};

[[nodiscard]] InnerModel inner_model(const ModelState &state, std::span<const double> vars,
                                     const Hyperparams &hp);

/// Log density pieces of a mean vector under the sequential proposal (q) and
/// under the prior (q0). The discrete parts score the spike/inner-partition
/// choices, the value parts score the distinct slab values.
struct SequentialScore {
  double log_q_discrete = 0.0;
  double log_q_values = 0.0;
  double log_q0_discrete = 0.0;
  double log_q0_values = 0.0;

  [[nodiscard]] double log_q() const noexcept { return log_q_discrete + log_q_values; }
  [[nodiscard]] double log_q0() const noexcept { return log_q0_discrete + log_q0_values; }
};

struct SequentialProposal {
  ClusterMeanVector mean;
  double log_q = 0.0;
  double log_q0 = 0.0;
  SequentialScore score;
};

/// Draws a mean vector component by component. Component j is put in the
/// spike, joined to an inner cluster opened by an earlier component, or opened
/// as a new inner cluster, with weights
///   spike: (1 - w_j) N(x_j | 0, s_j^2/n_c)
///   join:  w_j n_c'/(m + gamma) N(x_j | u_c', 1/v_c' + s_j^2/n_c)
///   new:   w_j gamma/(m + gamma) N(x_j | 0, eta^2 + s_j^2/n_c)
/// where w_j = a rho_j/(a+b), m counts earlier nonzero components, and
/// (u_c', 1/v_c') is the posterior of inner value c' from its earlier members
/// with per-member precision n_c/s_k^2. Distinct values are then drawn from
/// their full conjugate posteriors in order of creation.
///
/// With a null context the likelihood factors are dropped and values are
/// drawn from N(0, eta^2), which samples the prior itself (log_q equals log_q0 up to rounding).
[[nodiscard]] SequentialProposal sequential_sample_mean(const MeanContext *context, const InnerModel &model,
                                                        Rng &rng);

/// Replays the sequential recursion on an existing mean vector. For a freshly
/// generated proposal this reproduces its scores bit for bit.
[[nodiscard]] SequentialScore score_sequential(const ClusterMeanVector &mean, const MeanContext *context,
                                               const InnerModel &model);

[[nodiscard]] double eval_log_q(const ClusterMeanVector &mean, const MeanContext &context,
                                const InnerModel &model);
[[nodiscard]] double eval_log_q0(const ClusterMeanVector &mean, const InnerModel &model);

/// sum_j log N(y_j | baseline_j + shift_j, vars_j)
[[nodiscard]] double likelihood_log_f(std::span<const double> y_row, std::span<const double> shift,
                                      std::span<const double> baseline, std::span<const double> vars);

/// log acceptance ratio for opening a new cluster for a non-singleton sample.
[[nodiscard]] double birth_log_ratio(double tau, std::size_t n, double log_f_new, double log_f_old,
                                     double log_q0, double log_q) noexcept;
/// log acceptance ratio for folding a singleton into an existing cluster.
[[nodiscard]] double death_log_ratio(double tau, std::size_t n, double log_f_new, double log_f_old,
                                     double log_q, double log_q0) noexcept;

struct MoveOutcome {
  bool attempted = false;
  bool accepted = false;
  double log_ratio = 0.0;
};

struct ClusterMoveStats {
  std::size_t birth_attempts = 0;
  std::size_t birth_accepts = 0;
  std::size_t death_attempts = 0;
  std::size_t death_accepts = 0;
};

/// Sample-cluster moves and cluster-mean Gibbs updates. Holds the baseline
/// means and variances fixed for its lifetime.
class ClusterSampler {
public:
  ClusterSampler(ModelState &state, const DataMatrix &data, const Hyperparams &hp,
                 ProposalKind proposal = ProposalKind::Sequential);

  /// Metropolis-Hastings proposal of a fresh cluster for sample i, which
  /// must not be a singleton.
  MoveOutcome mh_birth_move(std::size_t i, Rng &rng);
  /// Metropolis-Hastings proposal to fold singleton sample i into an existing
  /// cluster chosen with probability n_c/(n-1).
  MoveOutcome mh_death_move(std::size_t i, Rng &rng);
  /// Birth or death depending on whether i is a singleton.
  MoveOutcome mh_move(std::size_t i, Rng &rng);

  /// Log weights over live clusters (ascending id) for reassigning
  /// non-singleton sample i: log n_{-i,c} + log F(y_i; mu_c).
  [[nodiscard]] std::vector<std::pair<ClusterId, double>> reassign_weights(std::size_t i) const;
  ClusterId gibbs_reassign(std::size_t i, Rng &rng);

  /// Context (x, n_c) for the current members of cluster c.
  [[nodiscard]] MeanContext cluster_context(ClusterId c) const;

  /// Log weights for component j of cluster c's mean: spike first, then each
  /// live inner cluster other than j's own singleton (ascending id), then new.
  /// Computed as if j were removed from the inner partition.
  [[nodiscard]] std::vector<AssignmentOption> component_weights(ClusterId c, const MeanContext &ctx,
                                                                     std::size_t j) const;
  void gibbs_update_cluster_mean(ClusterId c, Rng &rng);
  void gibbs_update_cluster_mean(ClusterId c, const MeanContext &ctx, Rng &rng);

  /// Full sample-cluster step: births/deaths for every sample, then Gibbs
  /// reassignment of every non-singleton, then a Gibbs update of every
  /// cluster mean, then a fresh pi draw for every cluster.
  void sweep(Rng &rng, ClusterMoveStats *stats = nullptr);

  [[nodiscard]] double log_f(std::size_t i, ClusterId c) const;
  [[nodiscard]] const InnerModel &model() const noexcept { return model_; }
  [[nodiscard]] std::span<const double> baseline() const noexcept { return baseline_; }
  [[nodiscard]] std::span<const double> vars() const noexcept { return vars_; }
  [[nodiscard]] MeanContext sample_context(std::size_t i) const;

private:
  const std::vector<double> &dense(ClusterId c) const;
  void refresh_dense(ClusterId c);

  ModelState &state_;
  const DataMatrix &data_;
  const Hyperparams &hp_;
  ProposalKind proposal_;
  std::vector<double> baseline_;
  std::vector<double> vars_;
  InnerModel model_;
  std::vector<std::vector<double>> dense_; // by cluster slot
};

} // namespace sparsedp
