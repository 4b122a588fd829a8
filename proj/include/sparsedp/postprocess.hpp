#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "sparsedp/chain.hpp"
#include "sparsedp/simgen.hpp"

namespace sparsedp {

struct KPosterior {
  std::map<std::size_t, double> mass; ///< K -> posterior frequency
  std::size_t mode = 0;               ///< smallest K among the most frequent
};

/// Throws std::invalid_argument on an empty trace.
[[nodiscard]] KPosterior k_posterior(std::span<const TraceRecord> records);
[[nodiscard]] KPosterior k_posterior(const std::map<std::size_t, std::size_t> &counts);

/// Minimum-cost perfect matching on a square cost matrix. Returns col[row].
/// Ties are broken towards lower indices, so the result is deterministic.
[[nodiscard]] std::vector<int> min_cost_assignment(const Matrix &cost);

/// Online label alignment for iterations sharing the same K. Each call
/// matches the iteration's K cluster mean vectors to a running reference (the
/// average of all previously aligned iterations) by squared distance, then
/// folds the aligned means into the reference.
class Relabeler {
public:
  Relabeler(std::size_t k, std::size_t p);

  /// perm[r] is the reference label given to row r of `means` (K x p).
  std::vector<int> align(const Matrix &means);
  /// Matching cost sum_r ||means_r - reference_perm[r]||^2 of the last align.
  [[nodiscard]] double last_cost() const noexcept { return last_cost_; }
  [[nodiscard]] const Matrix &reference() const noexcept { return ref_; }
  [[nodiscard]] std::size_t count() const noexcept { return count_; }

  /// Folds in another reference built from `count` iterations, already
  /// permuted to this labelling.
  void absorb(const Matrix &other_reference, std::size_t count);

private:
  Matrix ref_;
  std::size_t count_ = 0;
  double last_cost_ = 0.0;
};

/// Label-aligned summary of the iterations with a fixed K.
struct RelabeledSummary {
  std::size_t k = 0;
  std::vector<std::size_t> iterations; ///< indices into the trace
  std::vector<std::vector<int>> permutations; ///< per iteration: canonical label -> aligned label
  std::vector<double> costs;  ///< matching cost per iteration
  Matrix pi_mean;     ///< K x p
  Matrix mean_mean;   ///< K x p fitted cluster means mu_j + mu_cj
  Matrix membership;  ///< n x K posterior allocation probabilities
};

/// Throws std::invalid_argument if no record has K clusters or a needed
/// quantity was not recorded.
[[nodiscard]] RelabeledSummary relabel_conditional_on_K(std::span<const TraceRecord> records, std::size_t k);

/// {j : max_c pi_mean(c, j) > threshold}, ascending.
[[nodiscard]] std::vector<std::size_t> select_attributes(const Matrix &pi_mean, double threshold = 0.5);

/// Posterior mean of mu_j + mu_{c_i j} over the records with K clusters.
[[nodiscard]] Matrix posterior_mean_fitted(std::span<const TraceRecord> records, std::size_t k);

/// Mean of (mu_hat_ij - truth_ij)^2 over all samples i and j in `restrict`.
[[nodiscard]] double mse_fitted_means(const Matrix &mu_hat, const SimTruth &truth,
                                      std::span<const std::size_t> restrict);

/// n x n pairwise co-clustering frequencies.
[[nodiscard]] Matrix coclustering(std::span<const TraceRecord> records);

/// Everything the command line reports about a run.
struct PosteriorSummary {
  std::size_t records = 0;
  KPosterior k;
  std::vector<double> rho_mean;
  Matrix coclustering;
  RelabeledSummary modal;  ///< at the modal K (iteration lists left empty)
  Matrix mu_hat;           ///< n x p, conditional on the modal K
  std::vector<std::size_t> selected;
  std::vector<int> allocation; ///< argmax of modal.membership per sample
};

/// Streaming version of the summaries above; memory does not grow with the
/// number of iterations.
class PosteriorAccumulator {
public:
  PosteriorAccumulator(std::size_t n, std::size_t p);

  void add(const TraceRecord &r);
  /// Merges the summaries of another chain on the same data. Clusters are
  /// matched through the per-K references.
  void merge(const PosteriorAccumulator &other);

  [[nodiscard]] std::size_t records() const noexcept { return records_; }
  [[nodiscard]] const std::map<std::size_t, std::size_t> &k_counts() const noexcept { return k_counts_; }
  [[nodiscard]] PosteriorSummary summarize(double threshold = 0.5) const;

private:
  struct PerK {
    Relabeler relabeler;
    Matrix pi_sum;
    Matrix mean_sum;
    Matrix membership;
    Matrix fitted_sum;
    std::size_t count = 0;
    PerK(std::size_t k, std::size_t n, std::size_t p)
        : relabeler(k, p), pi_sum(k, p), mean_sum(k, p), membership(n, k), fitted_sum(n, p) {}
  };

  std::size_t n_;
  std::size_t p_;
  std::size_t records_ = 0;
  std::map<std::size_t, std::size_t> k_counts_;
  std::vector<double> rho_sum_;
  Matrix cocluster_;
  std::map<std::size_t, PerK> per_k_;
};

} // namespace sparsedp
