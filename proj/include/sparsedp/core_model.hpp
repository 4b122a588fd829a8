#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sparsedp/matrix.hpp"

namespace sparsedp {

/// Raised when the data cannot support the empirical base measure
/// (for example every attribute has the same mean).
class DegenerateDataError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a sampler produces a non-finite log weight. The message names
/// the step and the indices involved.
class SamplerError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Observed n x p matrix, one sample per row.
struct DataMatrix {
  Matrix y;
  std::vector<std::string> names; ///< attribute names, may be empty

  DataMatrix() = default;
  explicit DataMatrix(Matrix values, std::vector<std::string> attribute_names = {});

  [[nodiscard]] std::size_t n() const noexcept { return y.rows(); }
  [[nodiscard]] std::size_t p() const noexcept { return y.cols(); }
  [[nodiscard]] double operator()(std::size_t i, std::size_t j) const noexcept { return y(i, j); }

  /// Throws std::invalid_argument unless n >= 2, p >= 1 and all entries finite.
  void validate() const;
};

/// Fixed constants of the model.
///
/// The inverse-gamma family is parameterized by (shape, rate) with density
/// proportional to x^(-shape-1) exp(-rate/x). Gamma priors use (shape, rate).
struct Hyperparams {
  double mu0 = 0.0;
  double sigma0_sq = 1.0;
  double alpha0 = 0.5;
  double beta0 = 0.5;
  double eta_shape = 0.5;
  double eta_rate = 0.5;
  double conc_shape = 0.5;
  double conc_rate = 0.5;
  double a = 9.0;
  double b = 1.0;
  double c = 0.2;
  double d = 199.8;

  /// Throws std::invalid_argument if any field other than mu0 is not a
  /// strictly positive finite number.
  void validate() const;

  bool operator==(const Hyperparams &) const = default;
};

/// Empirical base measure for the attribute means: mu0 is the grand mean of
/// the attribute means and sigma0_sq their spread around it. Remaining fields
/// keep their defaults.
[[nodiscard]] Hyperparams default_hyperparams(const DataMatrix &data);

inline constexpr double kLogSqrt2Pi = 0.91893853320467274178032973640562;

[[nodiscard]] inline double log_normal_pdf_unchecked(double x, double mean, double variance) noexcept {
  const double d = x - mean;
  return -kLogSqrt2Pi - 0.5 * std::log(variance) - 0.5 * d * d / variance;
}

[[nodiscard]] double log_normal_pdf(double x, double mean, double variance);
[[nodiscard]] double log_inv_gamma_pdf(double x, double shape, double rate);
[[nodiscard]] double log_gamma_pdf(double x, double shape, double rate);
[[nodiscard]] double log_beta_pdf(double x, double a, double b);
[[nodiscard]] double log_beta_fn(double a, double b);

/// log(sum(exp(v))). Entries equal to -inf are ignored; returns -inf when all
/// entries are -inf or v is empty.
[[nodiscard]] double log_sum_exp(std::span<const double> v) noexcept;

/// Normalizes log weights in place into probabilities. Returns the log
/// normalizer.
double normalize_log_weights(std::span<double> v) noexcept;

} // namespace sparsedp
