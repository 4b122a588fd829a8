#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "sparsedp/cluster_sampler.hpp"
#include "sparsedp/core_model.hpp"
#include "sparsedp/model_state.hpp"
#include "sparsedp/rng.hpp"

namespace sparsedp {

enum class InitMode { AllOneCluster, AllSingletons };

/// Which per-iteration quantities a trace keeps. Scalars (K, concentrations,
/// eta^2) are always kept.
struct RecordSet {
  bool rho = true;
  bool pi = true;
  bool mu_matrix = true;
  bool assignments = true;
};

struct ChainConfig {
  std::size_t iterations = 50000;
  std::size_t burn_in = 10000;
  std::size_t thin = 1;
  std::uint64_t seed = 1;
  InitMode init_mode = InitMode::AllOneCluster;
  RecordSet record;
  ProposalKind proposal = ProposalKind::Sequential;
  /// Hold alpha / gamma at a fixed value instead of sampling them.
  std::optional<double> fixed_alpha;
  std::optional<double> fixed_gamma;
  /// Run the full state validator after every step (slow; for testing).
  bool validate_each_step = false;

  /// Throws std::invalid_argument unless iterations, thin > 0 and
  /// burn_in < iterations.
  void validate() const;
  [[nodiscard]] std::size_t trace_length() const noexcept { return (iterations - burn_in) / thin; }
};

/// One recorded iteration. Cluster-indexed rows use canonical labels: clusters
/// are numbered 0..K-1 in order of their lowest-index member.
struct TraceRecord {
  std::size_t iteration = 0; ///< 1-based sweep number
  std::size_t k = 0;
  std::vector<int> assignments; ///< canonical label per sample
  std::vector<double> rho;
  Matrix pi;            ///< K x p
  Matrix shift;         ///< K x p cluster mean shifts mu_cj
  std::vector<double> baseline; ///< mu_j
  std::size_t unique_baseline_means = 0;
  double eta_sq = 0.0;
  double tau = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;

  /// Fitted mean mu_j + mu_{c_i j}; needs mu_matrix and assignments recorded.
  [[nodiscard]] double fitted(std::size_t i, std::size_t j) const {
    return baseline[j] + shift(static_cast<std::size_t>(assignments[i]), j);
  }
  [[nodiscard]] Matrix fitted_matrix() const;
  bool operator==(const TraceRecord &) const = default;
};

struct ChainTrace {
  std::vector<TraceRecord> records;
  ClusterMoveStats moves;
  bool operator==(const ChainTrace &o) const { return records == o.records; }
};

[[nodiscard]] TraceRecord make_record(const ModelState &state, std::size_t iteration, const RecordSet &what);

/// Starting state: every attribute in its own baseline cluster at its sample
/// mean and variance, samples grouped per the init mode with zero mean shifts,
/// pi from its conditional, rho = c/(c+d), eta^2 at its prior mode and the
/// concentrations at their prior means.
[[nodiscard]] ModelState init_state(const DataMatrix &data, const Hyperparams &hp, const ChainConfig &cfg,
                                    Rng &rng);

/// One full sweep of steps 1 to 7. SamplerErrors are rethrown with the
/// iteration number prepended.
void sweep(ModelState &state, const DataMatrix &data, const Hyperparams &hp, const ChainConfig &cfg, Rng &rng,
           std::size_t iteration, ClusterMoveStats *stats = nullptr);

/// Step 7 alone.
void update_concentrations(ModelState &state, const Hyperparams &hp, const ChainConfig &cfg, Rng &rng);

using TraceObserver = std::function<void(const TraceRecord &)>;

/// Runs a chain, handing every recorded iteration to `observer` instead of
/// storing it. Returns the move statistics.
ClusterMoveStats run_chain_streaming(const DataMatrix &data, const Hyperparams &hp, const ChainConfig &cfg,
                                     const TraceObserver &observer);

[[nodiscard]] ChainTrace run_chain(const DataMatrix &data, const Hyperparams &hp, const ChainConfig &cfg);

} // namespace sparsedp
