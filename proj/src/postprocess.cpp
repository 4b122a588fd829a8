#include "sparsedp/postprocess.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

#include "sparsedp/kernels.hpp"

namespace sparsedp {

namespace {

void require_full(const TraceRecord &r, std::size_t n, std::size_t p) {
  if (r.assignments.size() != n || r.baseline.size() != p || r.shift.rows() != r.k || r.shift.cols() != p ||
      r.pi.rows() != r.k || r.pi.cols() != p)
    throw std::invalid_argument(
        fmt::format("postprocess: iteration {} lacks assignments, pi or mean shifts", r.iteration));
}

Matrix cluster_means(const TraceRecord &r) {
  Matrix m(r.k, r.baseline.size());
  for (std::size_t c = 0; c < r.k; ++c)
    for (std::size_t j = 0; j < r.baseline.size(); ++j)
      m(c, j) = r.baseline[j] + r.shift(c, j);
  return m;
}

Matrix distance_cost(const Matrix &rows, const Matrix &ref) {
  const std::size_t k = rows.rows();
  Matrix cost(k, k);
  for (std::size_t r = 0; r < k; ++r)
    for (std::size_t l = 0; l < k; ++l) {
      double s = 0.0;
      for (std::size_t j = 0; j < rows.cols(); ++j) {
        const double d = rows(r, j) - ref(l, j);
        s += d * d;
      }
      cost(r, l) = s;
    }
  return cost;
}

template <class Acc> void add_aligned(Acc &acc, const TraceRecord &r, std::span<const int> perm) {
  const std::size_t p = r.baseline.size();
  for (std::size_t c = 0; c < r.k; ++c) {
    const auto l = static_cast<std::size_t>(perm[c]);
    for (std::size_t j = 0; j < p; ++j) {
      acc.pi_sum(l, j) += r.pi(c, j);
      acc.mean_sum(l, j) += r.baseline[j] + r.shift(c, j);
    }
  }
  for (std::size_t i = 0; i < r.assignments.size(); ++i)
    acc.membership(i, static_cast<std::size_t>(perm[static_cast<std::size_t>(r.assignments[i])])) += 1.0;
}

void divide(Matrix &m, double d) {
  for (double &v : m.data())
    v /= d;
}

} // namespace

KPosterior k_posterior(const std::map<std::size_t, std::size_t> &counts) {
  std::size_t total = 0;
  for (const auto &[k, c] : counts)
    total += c;
  if (total == 0)
    throw std::invalid_argument("k_posterior: empty trace");
  KPosterior out;
  std::size_t best = 0;
  for (const auto &[k, c] : counts) {
    if (c == 0)
      continue;
    out.mass[k] = static_cast<double>(c) / static_cast<double>(total);
    if (c > best) {
      best = c;
      out.mode = k;
    }
  }
  return out;
}

KPosterior k_posterior(std::span<const TraceRecord> records) {
  std::map<std::size_t, std::size_t> counts;
  for (const auto &r : records)
    ++counts[r.k];
  return k_posterior(counts);
}

// Shortest augmenting path version of the Hungarian method with row and
// column potentials, O(k^3).
std::vector<int> min_cost_assignment(const Matrix &cost) {
  const std::size_t k = cost.rows();
  if (cost.cols() != k)
    throw std::invalid_argument("min_cost_assignment: cost matrix must be square");
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(k + 1, 0.0), v(k + 1, 0.0);
  std::vector<std::size_t> match(k + 1, 0), way(k + 1, 0); // match[col] = row, 1-based
  for (std::size_t row = 1; row <= k; ++row) {
    match[0] = row;
    std::size_t col0 = 0;
    std::vector<double> minv(k + 1, inf);
    std::vector<char> used(k + 1, 0);
    do {
      used[col0] = 1;
      const std::size_t r0 = match[col0];
      double delta = inf;
      std::size_t col1 = 0;
      for (std::size_t col = 1; col <= k; ++col) {
        if (used[col])
          continue;
        const double cur = cost(r0 - 1, col - 1) - u[r0] - v[col];
        if (cur < minv[col]) {
          minv[col] = cur;
          way[col] = col0;
        }
        if (minv[col] < delta) {
          delta = minv[col];
          col1 = col;
        }
      }
      if (col1 == 0)
        throw std::invalid_argument("min_cost_assignment: costs must be finite");
      for (std::size_t col = 0; col <= k; ++col) {
        if (used[col]) {
          u[match[col]] += delta;
          v[col] -= delta;
        } else {
          minv[col] -= delta;
        }
      }
      col0 = col1;
    } while (match[col0] != 0);
    do {
      const std::size_t col1 = way[col0];
      match[col0] = match[col1];
      col0 = col1;
    } while (col0 != 0);
  }
  std::vector<int> out(k);
  for (std::size_t col = 1; col <= k; ++col)
    out[match[col] - 1] = static_cast<int>(col - 1);
  return out;
}

Relabeler::Relabeler(std::size_t k, std::size_t p) : ref_(k, p) {}

std::vector<int> Relabeler::align(const Matrix &means) {
  if (means.rows() != ref_.rows() || means.cols() != ref_.cols())
    throw std::invalid_argument("Relabeler::align: shape mismatch");
  std::vector<int> perm(means.rows());
  if (count_ == 0) {
    std::iota(perm.begin(), perm.end(), 0);
    ref_ = means;
    count_ = 1;
    last_cost_ = 0.0;
    return perm;
  }
  const Matrix cost = distance_cost(means, ref_);
  perm = min_cost_assignment(cost);
  last_cost_ = 0.0;
  ++count_;
  const double w = 1.0 / static_cast<double>(count_);
  for (std::size_t r = 0; r < means.rows(); ++r) {
    const auto l = static_cast<std::size_t>(perm[r]);
    last_cost_ += cost(r, l);
    for (std::size_t j = 0; j < means.cols(); ++j)
      ref_(l, j) += (means(r, j) - ref_(l, j)) * w;
  }
  return perm;
}

void Relabeler::absorb(const Matrix &other_reference, std::size_t count) {
  if (count == 0)
    return;
  if (count_ == 0) {
    ref_ = other_reference;
    count_ = count;
    return;
  }
  const double total = static_cast<double>(count_ + count);
  const double a = static_cast<double>(count_) / total;
  const double b = static_cast<double>(count) / total;
  for (std::size_t x = 0; x < ref_.data().size(); ++x)
    ref_.data()[x] = a * ref_.data()[x] + b * other_reference.data()[x];
  count_ += count;
}

RelabeledSummary relabel_conditional_on_K(std::span<const TraceRecord> records, std::size_t k) {
  RelabeledSummary out;
  out.k = k;
  std::size_t n = 0, p = 0;
  for (std::size_t t = 0; t < records.size(); ++t)
    if (records[t].k == k) {
      n = records[t].assignments.size();
      p = records[t].baseline.size();
      break;
    }
  if (n == 0)
    throw std::invalid_argument(fmt::format("relabel_conditional_on_K: no iterations with K = {}", k));

  Relabeler relabeler(k, p);
  out.pi_mean = Matrix(k, p);
  out.mean_mean = Matrix(k, p);
  out.membership = Matrix(n, k);
  struct Sums {
    Matrix &pi_sum;
    Matrix &mean_sum;
    Matrix &membership;
  } sums{out.pi_mean, out.mean_mean, out.membership};
  for (std::size_t t = 0; t < records.size(); ++t) {
    const TraceRecord &r = records[t];
    if (r.k != k)
      continue;
    require_full(r, n, p);
    auto perm = relabeler.align(cluster_means(r));
    add_aligned(sums, r, perm);
    out.iterations.push_back(t);
    out.costs.push_back(relabeler.last_cost());
    out.permutations.push_back(std::move(perm));
  }
  const auto f = static_cast<double>(out.iterations.size());
  divide(out.pi_mean, f);
  divide(out.mean_mean, f);
  divide(out.membership, f);
  return out;
}

std::vector<std::size_t> select_attributes(const Matrix &pi_mean, double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0))
    throw std::invalid_argument("select_attributes: threshold must be in (0, 1]");
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < pi_mean.cols(); ++j) {
    double best = 0.0;
    for (std::size_t c = 0; c < pi_mean.rows(); ++c)
      best = std::max(best, pi_mean(c, j));
    if (best > threshold)
      out.push_back(j);
  }
  return out;
}

Matrix posterior_mean_fitted(std::span<const TraceRecord> records, std::size_t k) {
  Matrix sum;
  std::size_t used = 0;
  for (const auto &r : records) {
    if (r.k != k)
      continue;
    if (used == 0)
      sum = Matrix(r.assignments.size(), r.baseline.size());
    if (r.assignments.size() != sum.rows() || r.baseline.size() != sum.cols() || r.shift.rows() != r.k)
      throw std::invalid_argument(
          fmt::format("posterior_mean_fitted: iteration {} lacks assignments or mean shifts", r.iteration));
    for (std::size_t i = 0; i < sum.rows(); ++i)
      for (std::size_t j = 0; j < sum.cols(); ++j)
        sum(i, j) += r.fitted(i, j);
    ++used;
  }
  if (used == 0)
    throw std::invalid_argument(fmt::format("posterior_mean_fitted: no iterations with K = {}", k));
  divide(sum, static_cast<double>(used));
  return sum;
}

double mse_fitted_means(const Matrix &mu_hat, const SimTruth &truth, std::span<const std::size_t> restrict) {
  if (mu_hat.rows() != truth.mu.rows() || mu_hat.cols() != truth.mu.cols())
    throw std::invalid_argument("mse_fitted_means: shape mismatch");
  if (restrict.empty())
    throw std::invalid_argument("mse_fitted_means: empty attribute set");
  double s = 0.0;
  for (std::size_t i = 0; i < mu_hat.rows(); ++i)
    for (std::size_t j : restrict) {
      if (j >= mu_hat.cols())
        throw std::out_of_range(fmt::format("mse_fitted_means: attribute {} out of range", j));
      const double d = mu_hat(i, j) - truth.mu(i, j);
      s += d * d;
    }
  return s / static_cast<double>(mu_hat.rows() * restrict.size());
}

Matrix coclustering(std::span<const TraceRecord> records) {
  if (records.empty())
    throw std::invalid_argument("coclustering: empty trace");
  const std::size_t n = records.front().assignments.size();
  Matrix acc(n, n);
  for (const auto &r : records) {
    if (r.assignments.size() != n)
      throw std::invalid_argument(fmt::format("coclustering: iteration {} lacks assignments", r.iteration));
    kernels::parallel::accumulate_coclustering(r.assignments, acc);
  }
  divide(acc, static_cast<double>(records.size()));
  return acc;
}

PosteriorAccumulator::PosteriorAccumulator(std::size_t n, std::size_t p)
    : n_(n), p_(p), rho_sum_(p, 0.0), cocluster_(n, n) {}

void PosteriorAccumulator::add(const TraceRecord &r) {
  require_full(r, n_, p_);
  if (r.rho.size() != p_)
    throw std::invalid_argument(fmt::format("postprocess: iteration {} lacks rho", r.iteration));
  ++records_;
  ++k_counts_[r.k];
  for (std::size_t j = 0; j < p_; ++j)
    rho_sum_[j] += r.rho[j];
  kernels::parallel::accumulate_coclustering(r.assignments, cocluster_);

  auto it = per_k_.try_emplace(r.k, r.k, n_, p_).first;
  PerK &acc = it->second;
  const auto perm = acc.relabeler.align(cluster_means(r));
  add_aligned(acc, r, perm);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < p_; ++j)
      acc.fitted_sum(i, j) += r.fitted(i, j);
  ++acc.count;
}

void PosteriorAccumulator::merge(const PosteriorAccumulator &other) {
  if (other.n_ != n_ || other.p_ != p_)
    throw std::invalid_argument("PosteriorAccumulator::merge: shape mismatch");
  records_ += other.records_;
  for (const auto &[k, c] : other.k_counts_)
    k_counts_[k] += c;
  for (std::size_t j = 0; j < p_; ++j)
    rho_sum_[j] += other.rho_sum_[j];
  for (std::size_t x = 0; x < cocluster_.data().size(); ++x)
    cocluster_.data()[x] += other.cocluster_.data()[x];

  for (const auto &[k, theirs] : other.per_k_) {
    auto [it, fresh] = per_k_.try_emplace(k, k, n_, p_);
    PerK &mine = it->second;
    std::vector<int> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    if (!fresh && mine.count > 0)
      perm = min_cost_assignment(distance_cost(theirs.relabeler.reference(), mine.relabeler.reference()));
    Matrix ref(k, p_);
    for (std::size_t r = 0; r < k; ++r) {
      const auto l = static_cast<std::size_t>(perm[r]);
      for (std::size_t j = 0; j < p_; ++j) {
        ref(l, j) = theirs.relabeler.reference()(r, j);
        mine.pi_sum(l, j) += theirs.pi_sum(r, j);
        mine.mean_sum(l, j) += theirs.mean_sum(r, j);
      }
      for (std::size_t i = 0; i < n_; ++i)
        mine.membership(i, l) += theirs.membership(i, r);
    }
    mine.relabeler.absorb(ref, theirs.relabeler.count());
    for (std::size_t x = 0; x < mine.fitted_sum.data().size(); ++x)
      mine.fitted_sum.data()[x] += theirs.fitted_sum.data()[x];
    mine.count += theirs.count;
  }
}

PosteriorSummary PosteriorAccumulator::summarize(double threshold) const {
  PosteriorSummary s;
  s.records = records_;
  s.k = k_posterior(k_counts_);
  const auto f = static_cast<double>(records_);
  s.rho_mean = rho_sum_;
  for (double &v : s.rho_mean)
    v /= f;
  s.coclustering = cocluster_;
  divide(s.coclustering, f);

  const PerK &acc = per_k_.at(s.k.mode);
  const auto g = static_cast<double>(acc.count);
  s.modal.k = s.k.mode;
  s.modal.pi_mean = acc.pi_sum;
  s.modal.mean_mean = acc.mean_sum;
  s.modal.membership = acc.membership;
  s.mu_hat = acc.fitted_sum;
  divide(s.modal.pi_mean, g);
  divide(s.modal.mean_mean, g);
  divide(s.modal.membership, g);
  divide(s.mu_hat, g);
  s.selected = select_attributes(s.modal.pi_mean, threshold);
  s.allocation.resize(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < s.modal.k; ++c)
      if (s.modal.membership(i, c) > s.modal.membership(i, best))
        best = c;
    s.allocation[i] = static_cast<int>(best);
  }
  return s;
}

} // namespace sparsedp
