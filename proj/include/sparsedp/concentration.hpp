#pragma once

#include <span>
#include <vector>

#include "sparsedp/rng.hpp"

namespace sparsedp {

struct GammaPrior {
  double shape = 0.5;
  double rate = 0.5;
};

/// Mixing weight of the Gamma(s + k, r - log x) component in the auxiliary
/// variable update: (s + k - 1) / ((s + k - 1) + n (r - log x)).
[[nodiscard]] double concentration_mixture_weight(std::size_t k, std::size_t n, GammaPrior prior,
                                                  double log_x) noexcept;

/// Auxiliary-variable update of a DP concentration given k occupied clusters
/// among n items.
[[nodiscard]] double update_concentration(double conc, std::size_t k, std::size_t n, GammaPrior prior,
                                          Rng &rng);

/// Occupancy of one of several independent partitions that share a
/// concentration parameter.
struct CrpCounts {
  std::size_t clusters = 0; ///< k_c
  std::size_t items = 0;    ///< m_c
};

/// Log weights of the Gamma mixture components for a concentration shared by
/// C partitions with occupied counts (k_c, m_c), given the auxiliary draws
/// log x_c. Entry t is the component with shape s + sum k_c - C + t.
[[nodiscard]] std::vector<double> shared_concentration_log_weights(std::span<const CrpCounts> parts,
                                                                   GammaPrior prior,
                                                                   std::span<const double> log_x);

/// Update of a concentration shared by several independent partitions.
/// Partitions with no items are ignored; with none left the value is redrawn
/// from the prior.
[[nodiscard]] double update_shared_concentration(double conc, std::span<const CrpCounts> parts,
                                                 GammaPrior prior, Rng &rng);

} // namespace sparsedp
