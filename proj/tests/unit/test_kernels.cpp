#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include <omp.h>

#include "sparsedp/core_model.hpp"
#include "sparsedp/kernels.hpp"

using namespace sparsedp;

namespace {
struct Fixture {
  std::size_t n = 37, p = 211, k = 5;
  Matrix y{n, p}, means{k, p};
  std::vector<double> baseline, vars;
  std::vector<int> rows;
  Fixture() {
    std::mt19937_64 eng(2024);
    std::normal_distribution<double> z(0.0, 1.0);
    for (double &v : y.data())
      v = z(eng);
    for (double &v : means.data())
      v = z(eng) * 0.3;
    for (std::size_t j = 0; j < p; ++j) {
      baseline.push_back(z(eng));
      vars.push_back(0.1 + std::abs(z(eng)));
    }
    for (std::size_t i = 0; i < n; ++i)
      rows.push_back(static_cast<int>(eng() % (k - 1))); // cluster k-1 stays empty
  }
};
} // namespace

TEST_CASE("parallel kernels are bit-identical to the serial reference") {
  Fixture f;
  omp_set_num_threads(4);
  std::vector<double> a(f.p), b(f.p);
  kernels::serial::residual_column_sums(f.y, f.rows, f.means, a);
  kernels::parallel::residual_column_sums(f.y, f.rows, f.means, b);
  CHECK(a == b);

  kernels::serial::centered_column_sq_sums(f.y, f.baseline, f.rows, f.means, a);
  kernels::parallel::centered_column_sq_sums(f.y, f.baseline, f.rows, f.means, b);
  CHECK(a == b);

  Matrix ma(f.k, f.p), mb(f.k, f.p);
  kernels::serial::cluster_column_means(f.y, f.baseline, f.rows, ma);
  kernels::parallel::cluster_column_means(f.y, f.baseline, f.rows, mb);
  CHECK(ma == mb);

  std::vector<double> la(f.k), lb(f.k);
  kernels::serial::row_log_likelihoods(f.y.row(3), f.baseline, f.vars, f.means, la);
  kernels::parallel::row_log_likelihoods(f.y.row(3), f.baseline, f.vars, f.means, lb);
  CHECK(la == lb);

  Matrix ca(f.n, f.n), cb(f.n, f.n);
  kernels::serial::accumulate_coclustering(f.rows, ca);
  kernels::parallel::accumulate_coclustering(f.rows, cb);
  CHECK(ca == cb);
  omp_set_num_threads(1);
}

TEST_CASE("kernels match naive loops") {
  Fixture f;
  std::vector<double> out(f.p);
  kernels::serial::residual_column_sums(f.y, f.rows, f.means, out);
  for (std::size_t j = 0; j < f.p; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < f.n; ++i)
      s += f.y(i, j) - f.means(f.rows[i], j);
    CHECK(out[j] == doctest::Approx(s).epsilon(1e-12));
  }

  kernels::serial::centered_column_sq_sums(f.y, f.baseline, f.rows, f.means, out);
  for (std::size_t j = 0; j < f.p; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < f.n; ++i) {
      const double d = f.y(i, j) - f.baseline[j] - f.means(f.rows[i], j);
      s += d * d;
    }
    CHECK(out[j] == doctest::Approx(s).epsilon(1e-12));
  }

  Matrix m(f.k, f.p, 99.0);
  kernels::serial::cluster_column_means(f.y, f.baseline, f.rows, m);
  for (std::size_t c = 0; c < f.k; ++c)
    for (std::size_t j = 0; j < f.p; ++j) {
      double s = 0.0;
      int cnt = 0;
      for (std::size_t i = 0; i < f.n; ++i)
        if (f.rows[i] == static_cast<int>(c)) {
          s += f.y(i, j) - f.baseline[j];
          ++cnt;
        }
      CHECK(m(c, j) == doctest::Approx(cnt ? s / cnt : 0.0).epsilon(1e-12));
    }

  std::vector<double> ll(f.k);
  kernels::serial::row_log_likelihoods(f.y.row(5), f.baseline, f.vars, f.means, ll);
  for (std::size_t c = 0; c < f.k; ++c) {
    double s = 0.0;
    for (std::size_t j = 0; j < f.p; ++j)
      s += log_normal_pdf(f.y(5, j), f.baseline[j] + f.means(c, j), f.vars[j]);
    CHECK(ll[c] == doctest::Approx(s).epsilon(1e-12));
  }

  Matrix co(f.n, f.n);
  kernels::serial::accumulate_coclustering(f.rows, co);
  kernels::serial::accumulate_coclustering(f.rows, co);
  for (std::size_t i = 0; i < f.n; ++i)
    for (std::size_t l = 0; l < f.n; ++l)
      CHECK(co(i, l) == (f.rows[i] == f.rows[l] ? 2.0 : 0.0));
}
