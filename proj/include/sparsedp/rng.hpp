#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace sparsedp {

/// Location of a categorical draw, used only to build diagnostics when a log
/// weight is not finite.
struct WeightSite {
  const char *step = "";
  long first = -1;  ///< sample, cluster or attribute index, -1 if unused
  long second = -1; ///< attribute index, -1 if unused
};

/// Random source for one chain.
///
/// Stream discipline: a chain owns exactly one 64-bit Mersenne twister seeded
/// with the chain seed, and every draw in a sweep is taken from it in program
/// order. Independent chains use seed, seed+1, ... so results depend only on
/// (data, hyperparameters, config, seed).
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on the open interval (0,1).
  double uniform();
  double normal(double mean, double variance);
  double gamma(double shape, double rate);
  /// log of a Gamma(shape, 1) variate; accurate for tiny shapes.
  double log_gamma_unit(double shape);
  double inv_gamma(double shape, double rate);
  /// Beta draw clamped to the open interval (0,1).
  double beta(double a, double b);
  bool bernoulli(double prob);
  std::size_t uniform_index(std::size_t n);

  /// Draws an index with probability proportional to exp(log_w[k]).
  /// Entries of -inf have probability zero. log_w is overwritten with the
  /// normalized probabilities. Throws SamplerError if any entry is NaN or
  /// +inf, or if every entry is -inf.
  std::size_t categorical_log(std::span<double> log_w, const WeightSite &site);

  /// Draws an index with probability proportional to w[k] >= 0.
  std::size_t categorical(std::span<const double> w);

  std::mt19937_64 &engine() noexcept { return engine_; }

private:
  std::mt19937_64 engine_;
};

} // namespace sparsedp
