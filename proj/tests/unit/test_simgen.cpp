#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "sparsedp/simgen.hpp"

using namespace sparsedp;

namespace {
std::vector<std::size_t> range(std::size_t a, std::size_t b) {
  std::vector<std::size_t> v(b - a);
  std::iota(v.begin(), v.end(), a);
  return v;
}
} // namespace

TEST_CASE("example 1 truth") {
  const auto [d, t] = gen_example1(1);
  CHECK(d.n() == 20);
  CHECK(d.p() == 200);
  CHECK(t.relevant == range(0, 15));
  for (std::size_t i = 0; i < 20; ++i)
    CHECK(t.labels[i] == static_cast<int>(i / 5));
  const double col1[4] = {0.25, 0.1, -0.1, -0.25};
  for (std::size_t i = 0; i < 20; ++i) {
    for (std::size_t j = 0; j < 5; ++j)
      CHECK(t.mu(i, j) == col1[i / 5]);
    for (std::size_t j = 5; j < 10; ++j)
      CHECK(t.mu(i, j) == (i < 5 ? 0.2 : 0.0));
    for (std::size_t j = 10; j < 15; ++j)
      CHECK(t.mu(i, j) == (i >= 15 ? -0.15 : 0.0));
    for (std::size_t j = 15; j < 200; ++j)
      CHECK(t.mu(i, j) == 0.0);
  }
  for (std::size_t j = 0; j < 200; ++j)
    CHECK(t.sigma[j] == (j < 15 ? 0.1 : 0.05));
  CHECK(d.names.front() == "x1");
  CHECK(d.names.back() == "x200");
}

TEST_CASE("example 2 truth") {
  const auto [d, t] = gen_example2(1);
  CHECK(d.p() == 1000);
  CHECK(t.relevant == range(0, 15));
  for (std::size_t i = 0; i < 20; ++i)
    for (std::size_t j = 15; j < 1000; ++j)
      CHECK(t.mu(i, j) == 0.0);
}

TEST_CASE("example 3 truth") {
  const auto [d, t] = gen_example3(1);
  CHECK(d.n() == 20);
  CHECK(d.p() == 50);
  CHECK(t.relevant == range(0, 10));
  std::vector<int> sizes(4, 0);
  for (int l : t.labels)
    ++sizes[l];
  CHECK(sizes == std::vector<int>{3, 3, 7, 7});
  for (std::size_t i = 0; i < 20; ++i)
    for (std::size_t j = 0; j < 10; ++j)
      CHECK(t.mu(i, j) == (t.labels[i] + 1) / 4.0);
}

TEST_CASE("example 4 truth") {
  const auto [d, t] = gen_example4(1);
  CHECK(t.mu(0, 49) == 1.0);
  CHECK(t.mu(10, 49) == 0.0);
  CHECK(t.mu(0, 24) == t.mu(10, 24));
  CHECK(t.relevant == range(0, 50));
  int first = 0;
  for (int l : t.labels)
    first += l == 0;
  CHECK(first == 10);
}

TEST_CASE("generators are pure in the seed") {
  for (int ex = 1; ex <= 4; ++ex) {
    const auto a = gen_example(ex, 9);
    const auto b = gen_example(ex, 9);
    const auto c = gen_example(ex, 10);
    CHECK(a.data.y == b.data.y);
    CHECK(!(a.data.y == c.data.y));
  }
  CHECK_THROWS_AS((void)gen_example(5, 1), std::invalid_argument);
}

TEST_CASE("replicate column means and spreads match the truth") {
  const int reps = 10000;
  const auto t = gen_example1(0).truth;
  std::vector<double> mean(200, 0.0), ss(200, 0.0), true_mean(200, 0.0);
  for (std::size_t j = 0; j < 200; ++j)
    for (std::size_t i = 0; i < 20; ++i)
      true_mean[j] += t.mu(i, j) / 20.0;
  for (int r = 0; r < reps; ++r) {
    const auto d = gen_example1(1000 + r).data;
    for (std::size_t j = 0; j < 200; ++j) {
      double m = 0.0;
      for (std::size_t i = 0; i < 20; ++i)
        m += d(i, j);
      m /= 20.0;
      mean[j] += m;
      for (std::size_t i = 0; i < 20; ++i) {
        const double e = d(i, j) - t.mu(i, j);
        ss[j] += e * e;
      }
    }
  }
  for (std::size_t j = 0; j < 200; ++j) {
    const double se = t.sigma[j] / std::sqrt(20.0 * reps);
    CHECK(std::abs(mean[j] / reps - true_mean[j]) < 4 * se);
    const double sd = std::sqrt(ss[j] / (20.0 * reps));
    // sd of the sample sd is about sigma / sqrt(2N)
    CHECK(std::abs(sd - t.sigma[j]) < 4 * t.sigma[j] / std::sqrt(2.0 * 20.0 * reps));
  }
}

TEST_CASE("simulate_from_truth recomputes relevance") {
  SimTruth t;
  t.mu = Matrix(3, 4);
  t.mu(2, 1) = 0.5;
  t.sigma.assign(4, 1.0);
  t.labels = {0, 0, 1};
  t.relevant = {0, 1, 2, 3};
  const auto [d, back] = simulate_from_truth(t, 3);
  CHECK(back.relevant == std::vector<std::size_t>{1});
  t.sigma.pop_back();
  CHECK_THROWS_AS((void)simulate_from_truth(t, 3), std::invalid_argument);
}
