#pragma once

#include <span>

#include "sparsedp/matrix.hpp"

// Data-parallel sweeps over the n x p data matrix.
//
// Every kernel exists twice: `serial` is the reference, `parallel` distributes
// independent output elements over OpenMP threads. Each output element is
// accumulated in the same order in both versions, so results are
// bit-identical for any thread count. In all kernels `row_cluster[i]` is the
// dense cluster index (0..K-1) of sample i and `means` is the K x p matrix of
// cluster mean shifts.

namespace sparsedp::kernels {

namespace serial {

/// out[j] = sum_i (y_ij - means(row_cluster[i], j))
void residual_column_sums(const Matrix &y, std::span<const int> row_cluster, const Matrix &means,
                          std::span<double> out);

/// out[j] = sum_i (y_ij - baseline[j] - means(row_cluster[i], j))^2
void centered_column_sq_sums(const Matrix &y, std::span<const double> baseline,
                             std::span<const int> row_cluster, const Matrix &means,
                             std::span<double> out);

/// out(c, j) = mean over samples i in cluster c of (y_ij - baseline[j]).
/// `out` must be K x p; rows of empty clusters are set to 0.
void cluster_column_means(const Matrix &y, std::span<const double> baseline,
                          std::span<const int> row_cluster, Matrix &out);

/// out[c] = sum_j log N(y_row[j] | baseline[j] + means(c, j), vars[j])
void row_log_likelihoods(std::span<const double> y_row, std::span<const double> baseline,
                         std::span<const double> vars, const Matrix &means, std::span<double> out);

/// acc(i, k) += 1 when samples i and k share a label.
void accumulate_coclustering(std::span<const int> labels, Matrix &acc);

} // namespace serial

namespace parallel {

void residual_column_sums(const Matrix &y, std::span<const int> row_cluster, const Matrix &means,
                          std::span<double> out);
void centered_column_sq_sums(const Matrix &y, std::span<const double> baseline,
                             std::span<const int> row_cluster, const Matrix &means,
                             std::span<double> out);
void cluster_column_means(const Matrix &y, std::span<const double> baseline,
                          std::span<const int> row_cluster, Matrix &out);
void row_log_likelihoods(std::span<const double> y_row, std::span<const double> baseline,
                         std::span<const double> vars, const Matrix &means, std::span<double> out);
void accumulate_coclustering(std::span<const int> labels, Matrix &acc);

} // namespace parallel

/// Number of threads the parallel kernels may use (1 without OpenMP).
int max_threads() noexcept;

} // namespace sparsedp::kernels
