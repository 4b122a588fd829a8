#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sparsedp/chain.hpp"
#include "sparsedp/core_model.hpp"

namespace sparsedp {

/// Malformed input. `row` and `column` are 1-based file positions (the header
/// is row 1); 0 means the position does not apply.
class ParseError : public std::runtime_error {
public:
  ParseError(const std::string &what, std::size_t row, std::size_t column)
      : std::runtime_error(what), row_(row), column_(column) {}
  [[nodiscard]] std::size_t row() const noexcept { return row_; }
  [[nodiscard]] std::size_t column() const noexcept { return column_; }

private:
  std::size_t row_;
  std::size_t column_;
};

/// Header row of attribute names, then one numeric row per sample.
[[nodiscard]] DataMatrix load_csv(const std::filesystem::path &path);
[[nodiscard]] DataMatrix parse_csv(std::istream &in, const std::string &source = "<stream>");

/// Writes `data` in the load_csv layout with 17 significant digits, which
/// round-trips every finite double exactly. Unnamed attributes become x1..xp.
void save_csv(const std::filesystem::path &path, const DataMatrix &data);

[[nodiscard]] std::string format_double(double x);

struct PreprocessOptions {
  double floor = 1.0;
  double ceil = 16000.0;
  double ratio = 5.0;
  double spread = 500.0;
  std::size_t top = 2000;
};

struct PreprocessResult {
  DataMatrix data;
  std::vector<std::size_t> kept; ///< original column index of each output column
  std::vector<std::string> warnings;
};

/// Clamps to [floor, ceil], drops attributes with max/min <= ratio and
/// max - min <= spread, then keeps the `top` attributes of largest variance,
/// in their original order. Variance ties are broken by lower index.
[[nodiscard]] PreprocessResult preprocess_expression(const DataMatrix &raw, const PreprocessOptions &opt = {});

/// Centres every attribute and scales it to unit sample variance. Throws
/// DegenerateDataError on a constant attribute.
[[nodiscard]] DataMatrix standardize(const DataMatrix &data);

/// Everything that determines a command-line run.
struct RunConfig {
  Hyperparams hp;
  /// Unset: taken from the data (see default_hyperparams).
  std::optional<double> mu0;
  std::optional<double> sigma0_sq;
  ChainConfig chain;
  std::size_t chains = 1;
  std::optional<std::string> data;
  std::optional<int> simulate;     ///< example number 1..4
  std::optional<std::uint64_t> sim_seed; ///< unset: same as chain.seed
  bool preprocess = false;
  PreprocessOptions pre;
  bool standardize = false;
  double threshold = 0.5;
};

/// Applies flat `key = value` lines; '#' starts a comment. Throws ParseError
/// (row = line number) on malformed lines, unknown keys or bad values.
void apply_config(RunConfig &cfg, std::istream &in, const std::string &source = "<config>");
void apply_config_file(RunConfig &cfg, const std::filesystem::path &path);

/// Sets one key; throws std::invalid_argument on an unknown key or bad value.
void set_config_value(RunConfig &cfg, const std::string &key, const std::string &value);

/// The key = value form of a fully resolved config, which apply_config reads
/// back to the same run.
[[nodiscard]] std::string manifest_text(const RunConfig &cfg);

[[nodiscard]] std::string version_string();

} // namespace sparsedp
