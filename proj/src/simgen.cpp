#include "sparsedp/simgen.hpp"

#include <stdexcept>

#include <fmt/format.h>

#include "sparsedp/rng.hpp"

namespace sparsedp {

namespace {

std::vector<std::string> default_names(std::size_t p) {
  std::vector<std::string> names(p);
  for (std::size_t j = 0; j < p; ++j)
    names[j] = fmt::format("x{}", j + 1);
  return names;
}

SimDataset example12(std::size_t p, std::uint64_t seed) {
  constexpr std::size_t n = 20;
  SimTruth t;
  t.mu = Matrix(n, p);
  t.labels.resize(n);
  const double block[4] = {0.25, 0.1, -0.1, -0.25};
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t g = i / 5;
    t.labels[i] = static_cast<int>(g);
    for (std::size_t j = 0; j < 5; ++j)
      t.mu(i, j) = block[g];
    if (g == 0)
      for (std::size_t j = 5; j < 10; ++j)
        t.mu(i, j) = 0.2;
    if (g == 3)
      for (std::size_t j = 10; j < 15; ++j)
        t.mu(i, j) = -0.15;
  }
  t.sigma.assign(p, 0.05);
  for (std::size_t j = 0; j < 15; ++j)
    t.sigma[j] = 0.1;
  return simulate_from_truth(std::move(t), seed);
}

} // namespace

SimDataset simulate_from_truth(SimTruth truth, std::uint64_t seed) {
  const std::size_t n = truth.mu.rows();
  const std::size_t p = truth.mu.cols();
  if (truth.sigma.size() != p || truth.labels.size() != n)
    throw std::invalid_argument("simulate_from_truth: truth dimensions disagree");
  truth.relevant.clear();
  for (std::size_t j = 0; j < p; ++j)
    for (std::size_t i = 0; i < n; ++i)
      if (truth.mu(i, j) != 0.0) {
        truth.relevant.push_back(j);
        break;
      }
  Rng rng(seed);
  Matrix y(n, p);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < p; ++j)
      y(i, j) = truth.mu(i, j) + truth.sigma[j] * rng.normal(0.0, 1.0);
  return {DataMatrix(std::move(y), default_names(p)), std::move(truth)};
}

SimDataset gen_example1(std::uint64_t seed) { return example12(200, seed); }
SimDataset gen_example2(std::uint64_t seed) { return example12(1000, seed); }

SimDataset gen_example3(std::uint64_t seed) {
  constexpr std::size_t n = 20;
  constexpr std::size_t p = 50;
  const int sizes[4] = {3, 3, 7, 7};
  SimTruth t;
  t.mu = Matrix(n, p);
  std::size_t i = 0;
  for (int c = 0; c < 4; ++c)
    for (int k = 0; k < sizes[c]; ++k, ++i) {
      t.labels.push_back(c);
      for (std::size_t j = 0; j < 10; ++j)
        t.mu(i, j) = (c + 1) / 4.0;
    }
  t.sigma.assign(p, 0.1);
  return simulate_from_truth(std::move(t), seed);
}

SimDataset gen_example4(std::uint64_t seed) {
  constexpr std::size_t n = 20;
  constexpr std::size_t p = 50;
  SimTruth t;
  t.mu = Matrix(n, p);
  for (std::size_t i = 0; i < n; ++i) {
    t.labels.push_back(i < 10 ? 0 : 1);
    for (std::size_t j = 0; j < p; ++j) {
      const double jj = static_cast<double>(j + 1);
      t.mu(i, j) = i < 10 ? jj / 50.0 : (50.0 - jj) / 50.0;
    }
  }
  t.sigma.assign(p, 0.1);
  return simulate_from_truth(std::move(t), seed);
}

SimDataset gen_example(int which, std::uint64_t seed) {
  switch (which) {
  case 1:
    return gen_example1(seed);
  case 2:
    return gen_example2(seed);
  case 3:
    return gen_example3(seed);
  case 4:
    return gen_example4(seed);
  default:
    throw std::invalid_argument(fmt::format("unknown example {}", which));
  }
}

} // namespace sparsedp
