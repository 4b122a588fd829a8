#include "sparsedp/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "sparsedp/core_model.hpp"

namespace sparsedp::kernels {

namespace {
// Below this many element updates the thread fork costs more than it saves.
constexpr std::size_t kParallelMinWork = 1 << 14;
} // namespace

int max_threads() noexcept {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

namespace serial {

void residual_column_sums(const Matrix &y, std::span<const int> row_cluster, const Matrix &means,
                          std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t i = 0; i < y.rows(); ++i) {
    const auto yr = y.row(i);
    const auto mr = means.row(static_cast<std::size_t>(row_cluster[i]));
    for (std::size_t j = 0; j < y.cols(); ++j)
      out[j] += yr[j] - mr[j];
  }
}

void centered_column_sq_sums(const Matrix &y, std::span<const double> baseline,
                             std::span<const int> row_cluster, const Matrix &means,
                             std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t i = 0; i < y.rows(); ++i) {
    const auto yr = y.row(i);
    const auto mr = means.row(static_cast<std::size_t>(row_cluster[i]));
    for (std::size_t j = 0; j < y.cols(); ++j) {
      const double z = yr[j] - baseline[j] - mr[j];
      out[j] += z * z;
    }
  }
}

void cluster_column_means(const Matrix &y, std::span<const double> baseline,
                          std::span<const int> row_cluster, Matrix &out) {
  std::fill(out.data().begin(), out.data().end(), 0.0);
  std::vector<int> sizes(out.rows(), 0);
  for (std::size_t i = 0; i < y.rows(); ++i) {
    const auto c = static_cast<std::size_t>(row_cluster[i]);
    ++sizes[c];
    const auto yr = y.row(i);
    auto orow = out.row(c);
    for (std::size_t j = 0; j < y.cols(); ++j)
      orow[j] += yr[j] - baseline[j];
  }
  for (std::size_t c = 0; c < out.rows(); ++c)
    if (sizes[c] > 0)
      for (auto &v : out.row(c))
        v /= static_cast<double>(sizes[c]);
}

void row_log_likelihoods(std::span<const double> y_row, std::span<const double> baseline,
                         std::span<const double> vars, const Matrix &means, std::span<double> out) {
  for (std::size_t c = 0; c < means.rows(); ++c) {
    const auto mr = means.row(c);
    double s = 0.0;
    for (std::size_t j = 0; j < y_row.size(); ++j)
      s += log_normal_pdf_unchecked(y_row[j], baseline[j] + mr[j], vars[j]);
    out[c] = s;
  }
}

void accumulate_coclustering(std::span<const int> labels, Matrix &acc) {
  const std::size_t n = labels.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k)
      if (labels[i] == labels[k])
        acc(i, k) += 1.0;
}

} // namespace serial

namespace parallel {

void residual_column_sums(const Matrix &y, std::span<const int> row_cluster, const Matrix &means,
                          std::span<double> out) {
  const auto n = static_cast<long>(y.rows());
  const auto p = static_cast<long>(y.cols());
#pragma omp parallel for schedule(static) if (static_cast<std::size_t>(n * p) > kParallelMinWork)
  for (long j = 0; j < p; ++j) {
    double s = 0.0;
    for (long i = 0; i < n; ++i)
      s += y(i, j) - means(row_cluster[i], j);
    out[j] = s;
  }
}

void centered_column_sq_sums(const Matrix &y, std::span<const double> baseline,
                             std::span<const int> row_cluster, const Matrix &means,
                             std::span<double> out) {
  const auto n = static_cast<long>(y.rows());
  const auto p = static_cast<long>(y.cols());
#pragma omp parallel for schedule(static) if (static_cast<std::size_t>(n * p) > kParallelMinWork)
  for (long j = 0; j < p; ++j) {
    double s = 0.0;
    for (long i = 0; i < n; ++i) {
      const double z = y(i, j) - baseline[j] - means(row_cluster[i], j);
      s += z * z;
    }
    out[j] = s;
  }
}

void cluster_column_means(const Matrix &y, std::span<const double> baseline,
                          std::span<const int> row_cluster, Matrix &out) {
  const auto n = static_cast<long>(y.rows());
  const auto p = static_cast<long>(y.cols());
  const auto k = out.rows();
  std::vector<int> sizes(k, 0);
  for (long i = 0; i < n; ++i)
    ++sizes[static_cast<std::size_t>(row_cluster[i])];
#pragma omp parallel if (static_cast<std::size_t>(n * p) > kParallelMinWork)
  {
    std::vector<double> acc(k);
#pragma omp for schedule(static)
    for (long j = 0; j < p; ++j) {
      std::fill(acc.begin(), acc.end(), 0.0);
      for (long i = 0; i < n; ++i)
        acc[static_cast<std::size_t>(row_cluster[i])] += y(i, j) - baseline[j];
      for (std::size_t c = 0; c < k; ++c)
        out(c, j) = sizes[c] > 0 ? acc[c] / static_cast<double>(sizes[c]) : 0.0;
    }
  }
}

void row_log_likelihoods(std::span<const double> y_row, std::span<const double> baseline,
                         std::span<const double> vars, const Matrix &means, std::span<double> out) {
  const auto k = static_cast<long>(means.rows());
  const std::size_t p = y_row.size();
#pragma omp parallel for schedule(static) if (k * p > kParallelMinWork)
  for (long c = 0; c < k; ++c) {
    double s = 0.0;
    for (std::size_t j = 0; j < p; ++j)
      s += log_normal_pdf_unchecked(y_row[j], baseline[j] + means(c, j), vars[j]);
    out[c] = s;
  }
}

void accumulate_coclustering(std::span<const int> labels, Matrix &acc) {
  const auto n = static_cast<long>(labels.size());
#pragma omp parallel for schedule(static) if (static_cast<std::size_t>(n * n) > kParallelMinWork)
  for (long i = 0; i < n; ++i)
    for (long k = 0; k < n; ++k)
      if (labels[i] == labels[k])
        acc(i, k) += 1.0;
}

} // namespace parallel

} // namespace sparsedp::kernels
