#pragma once

#include <string>
#include <vector>

#include "sparsedp/partition.hpp"

namespace sparsedp {

/// Mean shift of one sample cluster. Components in the spike are exactly zero;
/// the remaining components are grouped by an inner partition whose payloads
/// are the distinct nonzero values.
struct ClusterMeanVector {
  Partition<double> inner;

  ClusterMeanVector() = default;
  /// All-zero mean over p components.
  explicit ClusterMeanVector(std::size_t p);

  [[nodiscard]] std::size_t p() const noexcept { return inner.items(); }
  [[nodiscard]] double component(std::size_t j) const;
  [[nodiscard]] bool is_zero(std::size_t j) const { return inner.cluster_of(j) == kSpike; }
  [[nodiscard]] std::vector<double> dense() const;
  void dense_into(std::span<double> out) const;
  [[nodiscard]] std::size_t nonzero_count() const noexcept { return inner.items() - inner.spike_count(); }
  [[nodiscard]] std::size_t inner_cluster_count() const noexcept { return inner.num_clusters(); }

  void validate() const;

  bool operator==(const ClusterMeanVector &) const = default;
};

/// Payload of a sample cluster: its mean shift and its row of inclusion
/// probabilities.
struct SampleCluster {
  ClusterMeanVector mean;
  std::vector<double> pi;

  bool operator==(const SampleCluster &) const = default;
};

/// Complete latent state of one chain.
struct ModelState {
  Partition<double> baseline_mean; ///< over attributes, payload mu_c
  Partition<double> baseline_var;  ///< over attributes, payload sigma^2_c
  Partition<SampleCluster> clusters; ///< over samples
  std::vector<double> rho;
  double eta_sq = 1.0;
  double tau = 1.0;
  double alpha = 1.0;
  double beta = 1.0;
  double gamma = 1.0;

  [[nodiscard]] std::size_t n() const noexcept { return clusters.items(); }
  [[nodiscard]] std::size_t p() const noexcept { return rho.size(); }
  [[nodiscard]] std::size_t num_clusters() const noexcept { return clusters.num_clusters(); }

  [[nodiscard]] double mean_of(std::size_t j) const { return baseline_mean.value(baseline_mean.cluster_of(j)); }
  [[nodiscard]] double var_of(std::size_t j) const { return baseline_var.value(baseline_var.cluster_of(j)); }
  [[nodiscard]] std::vector<double> baseline_means() const;
  [[nodiscard]] std::vector<double> baseline_vars() const;

  /// Throws std::logic_error naming the first violated invariant.
  void validate() const;

  [[nodiscard]] std::string to_json() const;
  [[nodiscard]] static ModelState from_json(const std::string &text);

  bool operator==(const ModelState &) const = default;
};

} // namespace sparsedp
