#include "sparsedp/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <sstream>

#include <fmt/format.h>

#ifndef SPARSEDP_VERSION_STRING
#define SPARSEDP_VERSION_STRING "unknown"
#endif

namespace sparsedp {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_fields(const std::string &line, const std::string &source, std::size_t row) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    const char ch = line[k];
    if (quoted) {
      if (ch == '"') {
        if (k + 1 < line.size() && line[k + 1] == '"') {
          cur.push_back('"');
          ++k;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(ch);
      }
    } else if (ch == '"' && trim(cur).empty()) {
      cur.clear();
      quoted = true;
      was_quoted = true;
    } else if (ch == ',') {
      out.push_back(was_quoted ? cur : trim(cur));
      cur.clear();
      was_quoted = false;
    } else {
      cur.push_back(ch);
    }
  }
  if (quoted)
    throw ParseError(fmt::format("{}: row {}: unterminated quote", source, row), row, out.size() + 1);
  out.push_back(was_quoted ? cur : trim(cur));
  return out;
}

double parse_cell(const std::string &cell, const std::string &source, std::size_t row, std::size_t col) {
  double v = 0.0;
  const char *first = cell.data();
  const char *last = first + cell.size();
  if (!cell.empty() && *first == '+')
    ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (cell.empty() || ec != std::errc{} || ptr != last || !std::isfinite(v))
    throw ParseError(fmt::format("{}: row {}, column {}: '{}' is not a finite number", source, row, col, cell),
                     row, col);
  return v;
}

std::string quote_name(const std::string &s) {
  if (s.find_first_of(",\"") == std::string::npos && trim(s) == s)
    return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"')
      out.push_back('"');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

bool parse_bool(const std::string &v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on")
    return true;
  if (v == "false" || v == "0" || v == "no" || v == "off")
    return false;
  throw std::invalid_argument(fmt::format("'{}' is not a boolean", v));
}

double parse_real(const std::string &v) {
  double x = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (v.empty() || ec != std::errc{} || ptr != v.data() + v.size() || !std::isfinite(x))
    throw std::invalid_argument(fmt::format("'{}' is not a finite number", v));
  return x;
}

std::uint64_t parse_uint(const std::string &v) {
  std::uint64_t x = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (v.empty() || ec != std::errc{} || ptr != v.data() + v.size())
    throw std::invalid_argument(fmt::format("'{}' is not a non-negative integer", v));
  return x;
}

std::optional<double> parse_opt_real(const std::string &v) {
  if (v == "none")
    return std::nullopt;
  return parse_real(v);
}

} // namespace

std::string format_double(double x) { return fmt::format("{:.17g}", x); }

DataMatrix parse_csv(std::istream &in, const std::string &source) {
  std::string line;
  std::size_t row = 0;
  std::vector<std::string> header;
  while (header.empty() && std::getline(in, line)) {
    ++row;
    if (trim(line).empty())
      continue;
    header = split_fields(line, source, row);
  }
  if (header.empty())
    throw ParseError(fmt::format("{}: no header row", source), 0, 0);
  if (!header.front().empty() && static_cast<unsigned char>(header.front()[0]) == 0xEF &&
      header.front().rfind("\xEF\xBB\xBF", 0) == 0)
    header.front().erase(0, 3);

  const std::size_t p = header.size();
  std::vector<double> values;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty())
      continue;
    const auto fields = split_fields(line, source, row);
    if (fields.size() != p)
      throw ParseError(
          fmt::format("{}: row {} has {} fields but the header has {}", source, row, fields.size(), p), row,
          std::min(fields.size(), p) + 1);
    for (std::size_t j = 0; j < p; ++j)
      values.push_back(parse_cell(fields[j], source, row, j + 1));
    ++n;
  }
  if (n < 2)
    throw ParseError(fmt::format("{}: need at least 2 samples, found {}", source, n), row, 0);
  Matrix y(n, p);
  y.data() = std::move(values);
  return DataMatrix(std::move(y), std::move(header));
}

DataMatrix load_csv(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw ParseError(fmt::format("cannot open '{}'", path.string()), 0, 0);
  return parse_csv(in, path.string());
}

void save_csv(const std::filesystem::path &path, const DataMatrix &data) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
  for (std::size_t j = 0; j < data.p(); ++j) {
    if (j)
      out << ',';
    out << (j < data.names.size() ? quote_name(data.names[j]) : fmt::format("x{}", j + 1));
  }
  out << '\n';
  for (std::size_t i = 0; i < data.n(); ++i) {
    for (std::size_t j = 0; j < data.p(); ++j) {
      if (j)
        out << ',';
      out << format_double(data(i, j));
    }
    out << '\n';
  }
  if (!out)
    throw std::runtime_error(fmt::format("error writing '{}'", path.string()));
}

PreprocessResult preprocess_expression(const DataMatrix &raw, const PreprocessOptions &opt) {
  if (!(opt.floor > 0.0 && opt.ceil > opt.floor))
    throw std::invalid_argument("preprocess_expression: need 0 < floor < ceil");
  if (opt.top == 0)
    throw std::invalid_argument("preprocess_expression: top must be positive");
  const std::size_t n = raw.n();
  const std::size_t p = raw.p();
  Matrix y = raw.y;
  for (double &v : y.data())
    v = std::clamp(v, opt.floor, opt.ceil);

  std::vector<std::size_t> survivors;
  std::vector<double> variance(p, 0.0);
  for (std::size_t j = 0; j < p; ++j) {
    double lo = y(0, j), hi = y(0, j), sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      lo = std::min(lo, y(i, j));
      hi = std::max(hi, y(i, j));
      sum += y(i, j);
    }
    if (hi / lo <= opt.ratio && hi - lo <= opt.spread)
      continue;
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      ss += (y(i, j) - mean) * (y(i, j) - mean);
    variance[j] = ss / static_cast<double>(n - 1);
    survivors.push_back(j);
  }
  if (survivors.empty())
    throw DegenerateDataError("preprocess_expression: no attribute survives the filter");

  PreprocessResult res;
  if (opt.top >= survivors.size()) {
    if (opt.top > survivors.size())
      res.warnings.push_back(fmt::format("only {} attributes survive the filter; keeping all (top = {})",
                                         survivors.size(), opt.top));
    res.kept = survivors;
  } else {
    std::vector<std::size_t> order = survivors;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return variance[a] > variance[b]; });
    order.resize(opt.top);
    std::sort(order.begin(), order.end());
    res.kept = std::move(order);
  }

  Matrix out(n, res.kept.size());
  std::vector<std::string> names;
  for (std::size_t k = 0; k < res.kept.size(); ++k) {
    const std::size_t j = res.kept[k];
    for (std::size_t i = 0; i < n; ++i)
      out(i, k) = y(i, j);
    names.push_back(j < raw.names.size() ? raw.names[j] : fmt::format("x{}", j + 1));
  }
  res.data = DataMatrix(std::move(out), std::move(names));
  return res;
}

DataMatrix standardize(const DataMatrix &data) {
  const std::size_t n = data.n();
  Matrix y = data.y;
  for (std::size_t j = 0; j < data.p(); ++j) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      sum += y(i, j);
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      ss += (y(i, j) - mean) * (y(i, j) - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (!(sd > 0.0))
      throw DegenerateDataError(fmt::format("standardize: attribute {} is constant", j + 1));
    for (std::size_t i = 0; i < n; ++i)
      y(i, j) = (y(i, j) - mean) / sd;
  }
  return DataMatrix(std::move(y), data.names);
}

void set_config_value(RunConfig &cfg, const std::string &key, const std::string &value) {
  Hyperparams &hp = cfg.hp;
  ChainConfig &ch = cfg.chain;
  if (key == "mu0")
    cfg.mu0 = parse_opt_real(value);
  else if (key == "sigma0_sq")
    cfg.sigma0_sq = parse_opt_real(value);
  else if (key == "alpha0")
    hp.alpha0 = parse_real(value);
  else if (key == "beta0")
    hp.beta0 = parse_real(value);
  else if (key == "eta_shape")
    hp.eta_shape = parse_real(value);
  else if (key == "eta_rate")
    hp.eta_rate = parse_real(value);
  else if (key == "conc_shape")
    hp.conc_shape = parse_real(value);
  else if (key == "conc_rate")
    hp.conc_rate = parse_real(value);
  else if (key == "a")
    hp.a = parse_real(value);
  else if (key == "b")
    hp.b = parse_real(value);
  else if (key == "c")
    hp.c = parse_real(value);
  else if (key == "d")
    hp.d = parse_real(value);
  else if (key == "iterations")
    ch.iterations = parse_uint(value);
  else if (key == "burn_in")
    ch.burn_in = parse_uint(value);
  else if (key == "thin")
    ch.thin = parse_uint(value);
  else if (key == "seed")
    ch.seed = parse_uint(value);
  else if (key == "init") {
    if (value == "one")
      ch.init_mode = InitMode::AllOneCluster;
    else if (value == "singletons")
      ch.init_mode = InitMode::AllSingletons;
    else
      throw std::invalid_argument(fmt::format("init must be 'one' or 'singletons', not '{}'", value));
  } else if (key == "proposal") {
    if (value == "sequential")
      ch.proposal = ProposalKind::Sequential;
    else if (value == "prior")
      ch.proposal = ProposalKind::Prior;
    else
      throw std::invalid_argument(fmt::format("proposal must be 'sequential' or 'prior', not '{}'", value));
  } else if (key == "fixed_alpha")
    ch.fixed_alpha = parse_opt_real(value);
  else if (key == "fixed_gamma")
    ch.fixed_gamma = parse_opt_real(value);
  else if (key == "chains")
    cfg.chains = parse_uint(value);
  else if (key == "data")
    cfg.data = value == "none" ? std::nullopt : std::optional<std::string>(value);
  else if (key == "simulate") {
    if (value == "none")
      cfg.simulate.reset();
    else if (value.size() == 3 && value.rfind("ex", 0) == 0 && value[2] >= '1' && value[2] <= '4')
      cfg.simulate = value[2] - '0';
    else
      throw std::invalid_argument(fmt::format("simulate must be ex1..ex4, not '{}'", value));
  } else if (key == "sim_seed")
    cfg.sim_seed = value == "none" ? std::nullopt : std::optional<std::uint64_t>(parse_uint(value));
  else if (key == "preprocess")
    cfg.preprocess = parse_bool(value);
  else if (key == "pre_floor")
    cfg.pre.floor = parse_real(value);
  else if (key == "pre_ceil")
    cfg.pre.ceil = parse_real(value);
  else if (key == "pre_ratio")
    cfg.pre.ratio = parse_real(value);
  else if (key == "pre_spread")
    cfg.pre.spread = parse_real(value);
  else if (key == "pre_top")
    cfg.pre.top = parse_uint(value);
  else if (key == "standardize")
    cfg.standardize = parse_bool(value);
  else if (key == "threshold")
    cfg.threshold = parse_real(value);
  else if (key == "version") {
    // informational, written by manifest_text
  } else
    throw std::invalid_argument(fmt::format("unknown key '{}'", key));
}

void apply_config(RunConfig &cfg, std::istream &in, const std::string &source) {
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    if (trim(line).empty())
      continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError(fmt::format("{}: line {}: expected key = value", source, row), row, 0);
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    try {
      set_config_value(cfg, key, value);
    } catch (const std::invalid_argument &e) {
      throw ParseError(fmt::format("{}: line {}: {}", source, row, e.what()), row, 0);
    }
  }
}

void apply_config_file(RunConfig &cfg, const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in)
    throw ParseError(fmt::format("cannot open config '{}'", path.string()), 0, 0);
  apply_config(cfg, in, path.string());
}

std::string manifest_text(const RunConfig &cfg) {
  const auto opt = [](const std::optional<double> &v) { return v ? format_double(*v) : std::string("none"); };
  const Hyperparams &hp = cfg.hp;
  const ChainConfig &ch = cfg.chain;
  std::ostringstream s;
  s << "version = " << version_string() << '\n';
  s << "data = " << (cfg.data ? *cfg.data : "none") << '\n';
  s << "simulate = " << (cfg.simulate ? fmt::format("ex{}", *cfg.simulate) : "none") << '\n';
  s << "sim_seed = " << (cfg.sim_seed ? std::to_string(*cfg.sim_seed) : "none") << '\n';
  s << "preprocess = " << (cfg.preprocess ? "true" : "false") << '\n';
  s << "pre_floor = " << format_double(cfg.pre.floor) << '\n';
  s << "pre_ceil = " << format_double(cfg.pre.ceil) << '\n';
  s << "pre_ratio = " << format_double(cfg.pre.ratio) << '\n';
  s << "pre_spread = " << format_double(cfg.pre.spread) << '\n';
  s << "pre_top = " << cfg.pre.top << '\n';
  s << "standardize = " << (cfg.standardize ? "true" : "false") << '\n';
  s << "mu0 = " << opt(cfg.mu0) << '\n';
  s << "sigma0_sq = " << opt(cfg.sigma0_sq) << '\n';
  s << "alpha0 = " << format_double(hp.alpha0) << '\n';
  s << "beta0 = " << format_double(hp.beta0) << '\n';
  s << "eta_shape = " << format_double(hp.eta_shape) << '\n';
  s << "eta_rate = " << format_double(hp.eta_rate) << '\n';
  s << "conc_shape = " << format_double(hp.conc_shape) << '\n';
  s << "conc_rate = " << format_double(hp.conc_rate) << '\n';
  s << "a = " << format_double(hp.a) << '\n';
  s << "b = " << format_double(hp.b) << '\n';
  s << "c = " << format_double(hp.c) << '\n';
  s << "d = " << format_double(hp.d) << '\n';
  s << "iterations = " << ch.iterations << '\n';
  s << "burn_in = " << ch.burn_in << '\n';
  s << "thin = " << ch.thin << '\n';
  s << "seed = " << ch.seed << '\n';
  s << "init = " << (ch.init_mode == InitMode::AllOneCluster ? "one" : "singletons") << '\n';
  s << "proposal = " << (ch.proposal == ProposalKind::Sequential ? "sequential" : "prior") << '\n';
  s << "fixed_alpha = " << opt(ch.fixed_alpha) << '\n';
  s << "fixed_gamma = " << opt(ch.fixed_gamma) << '\n';
  s << "chains = " << cfg.chains << '\n';
  s << "threshold = " << format_double(cfg.threshold) << '\n';
  return s.str();
}

std::string version_string() { return SPARSEDP_VERSION_STRING; }

} // namespace sparsedp
