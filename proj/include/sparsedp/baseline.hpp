#pragma once

#include <vector>

#include "sparsedp/core_model.hpp"
#include "sparsedp/model_state.hpp"
#include "sparsedp/rng.hpp"

namespace sparsedp {

/// DP-clustered update of the attribute baseline means mu_j.
///
/// Works on the residuals r_ij = y_ij - mu_{c_i j}, which do not change during
/// this step. Cluster values are integrated out for the assignment moves and
/// redrawn afterwards. Per-cluster sufficient statistics
///   precision  P_c = sum_{k in c} n / sigma_k^2
///   weighted   S_c = sum_{k in c} n rbar_k / sigma_k^2
/// are maintained incrementally as attributes move.
class BaselineMeanUpdater {
public:
  BaselineMeanUpdater(ModelState &state, const DataMatrix &data, const Hyperparams &hp);

  /// Unnormalized log weights for reassigning attribute j, computed as if j
  /// were removed from its cluster. Existing clusters come first in ascending
  /// id order; the new-cluster option is last.
  [[nodiscard]] std::vector<AssignmentOption> assignment_weights(std::size_t j) const;

  ClusterId update_assignment(std::size_t j, Rng &rng);
  void update_all_assignments(Rng &rng);
  void resample_values(Rng &rng);

  /// Posterior (mean, variance) of the value of cluster c given its members.
  [[nodiscard]] std::pair<double, double> value_posterior(ClusterId c) const;
  [[nodiscard]] double residual_mean(std::size_t j) const { return rbar_[j]; }

private:
  struct Stats {
    double precision = 0.0;
    double weighted = 0.0;
  };
  Stats &stats_for(ClusterId c);

  ModelState &state_;
  const Hyperparams &hp_;
  double n_;
  std::vector<double> rbar_;
  std::vector<double> vars_;
  std::vector<Stats> stats_; // indexed by cluster slot
};

/// DP-clustered update of the attribute baseline variances sigma_j^2, using
/// z_ij = y_ij - mu_j - mu_{c_i j}. Per cluster the statistic is the summed
/// squared residual over its member attributes.
class BaselineVarUpdater {
public:
  BaselineVarUpdater(ModelState &state, const DataMatrix &data, const Hyperparams &hp);

  [[nodiscard]] std::vector<AssignmentOption> assignment_weights(std::size_t j) const;
  ClusterId update_assignment(std::size_t j, Rng &rng);
  void update_all_assignments(Rng &rng);
  void resample_values(Rng &rng);

  /// Inverse-gamma (shape, rate) posterior of cluster c.
  [[nodiscard]] std::pair<double, double> value_posterior(ClusterId c) const;
  [[nodiscard]] double sq_sum(std::size_t j) const { return ss_[j]; }

private:
  double &stat_for(ClusterId c);

  ModelState &state_;
  const Hyperparams &hp_;
  double n_;
  std::vector<double> ss_;
  std::vector<double> stats_; // indexed by cluster slot
};

/// Step 1: assignments for j = 0..p-1 in ascending order, then all values.
void update_baseline_means(ModelState &state, const DataMatrix &data, const Hyperparams &hp, Rng &rng);
/// Step 2: assignments for j = 0..p-1 in ascending order, then all values.
void update_baseline_vars(ModelState &state, const DataMatrix &data, const Hyperparams &hp, Rng &rng);

/// Dense view of the sample clusters used by the data kernels.
struct DenseClusters {
  std::vector<ClusterId> ids; ///< live ids, ascending
  std::vector<int> row_cluster; ///< dense index per sample
  Matrix means; ///< K x p mean shifts
};
[[nodiscard]] DenseClusters dense_clusters(const ModelState &state);

} // namespace sparsedp
