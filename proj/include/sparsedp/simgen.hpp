#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "sparsedp/core_model.hpp"

namespace sparsedp {

/// Ground truth of a simulated dataset. Indices are 0-based: attribute j here
/// is attribute j+1 in the usual 1-based description of the examples.
struct SimTruth {
  Matrix mu;                  ///< n x p true means
  std::vector<double> sigma;  ///< noise standard deviation per attribute
  std::vector<int> labels;    ///< true group per sample, 0-based
  std::vector<std::size_t> relevant; ///< {j : some mu_ij != 0}, ascending
};

struct SimDataset {
  DataMatrix data;
  SimTruth truth;
};

/// y_ij = mu_ij + sigma_j eps_ij with the noise drawn in row-major order
/// from a generator seeded with `seed`. Recomputes `relevant` from `mu`.
[[nodiscard]] SimDataset simulate_from_truth(SimTruth truth, std::uint64_t seed);

/// n=20, p=200, four groups of five. Attributes 1-5 separate all groups,
/// 6-10 mark group 1, 11-15 mark group 4.
[[nodiscard]] SimDataset gen_example1(std::uint64_t seed);
/// Example 1 with p=1000.
[[nodiscard]] SimDataset gen_example2(std::uint64_t seed);
/// n=20, p=50, groups of 3,3,7,7 with mean c/4 on attributes 1-10.
[[nodiscard]] SimDataset gen_example3(std::uint64_t seed);
/// n=20, p=50, two groups of ten with means j/50 and (50-j)/50.
[[nodiscard]] SimDataset gen_example4(std::uint64_t seed);

/// gen_example1..4 by number; throws std::invalid_argument otherwise.
[[nodiscard]] SimDataset gen_example(int which, std::uint64_t seed);

} // namespace sparsedp
