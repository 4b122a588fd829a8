#include "sparsedp/cli.hpp"

#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "sparsedp/chain.hpp"
#include "sparsedp/io.hpp"
#include "sparsedp/postprocess.hpp"
#include "sparsedp/simgen.hpp"

namespace fs = std::filesystem;

namespace sparsedp {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::ofstream open_out(const fs::path &path) {
  std::ofstream f(path, std::ios::binary);
  if (!f)
    throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
  return f;
}

void write_header(std::ostream &f, const std::vector<std::string> &names) {
  for (std::size_t j = 0; j < names.size(); ++j)
    f << (j ? "," : "") << names[j];
  f << '\n';
}

void write_matrix(const fs::path &path, const std::vector<std::string> &header, const Matrix &m) {
  auto f = open_out(path);
  write_header(f, header);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c)
      f << (c ? "," : "") << format_double(m(r, c));
    f << '\n';
  }
}

std::vector<std::string> numbered(const char *prefix, std::size_t count) {
  std::vector<std::string> out;
  for (std::size_t k = 1; k <= count; ++k)
    out.push_back(fmt::format("{}{}", prefix, k));
  return out;
}

std::vector<std::string> attribute_header(const DataMatrix &data) {
  std::vector<std::string> out;
  for (std::size_t j = 0; j < data.p(); ++j) {
    std::string name = j < data.names.size() ? data.names[j] : fmt::format("x{}", j + 1);
    if (name.find_first_of(",\"") != std::string::npos) {
      std::string q = "\"";
      for (char ch : name) {
        if (ch == '"')
          q.push_back('"');
        q.push_back(ch);
      }
      name = q + "\"";
    }
    out.push_back(std::move(name));
  }
  return out;
}

void write_summary(const fs::path &dir, const PosteriorSummary &s, const DataMatrix &data,
                   const ClusterMoveStats &moves) {
  {
    auto f = open_out(dir / "k_posterior.csv");
    f << "K,probability\n";
    for (const auto &[k, m] : s.k.mass)
      f << k << ',' << format_double(m) << '\n';
  }
  {
    auto f = open_out(dir / "rho_mean.csv");
    f << "attribute,rho_mean\n";
    for (std::size_t j = 0; j < s.rho_mean.size(); ++j)
      f << j + 1 << ',' << format_double(s.rho_mean[j]) << '\n';
  }
  const auto names = attribute_header(data);
  write_matrix(dir / "pi_mean.csv", names, s.modal.pi_mean);
  write_matrix(dir / "cluster_means.csv", names, s.modal.mean_mean);
  write_matrix(dir / "mu_hat.csv", names, s.mu_hat);
  write_matrix(dir / "coclustering.csv", numbered("s", data.n()), s.coclustering);
  write_matrix(dir / "membership.csv", numbered("cluster", s.modal.k), s.modal.membership);
  {
    auto f = open_out(dir / "selected_attributes.csv");
    f << "attribute,max_pi\n";
    for (std::size_t j : s.selected) {
      double best = 0.0;
      for (std::size_t c = 0; c < s.modal.pi_mean.rows(); ++c)
        best = std::max(best, s.modal.pi_mean(c, j));
      f << j + 1 << ',' << format_double(best) << '\n';
    }
  }
  {
    auto f = open_out(dir / "moves.csv");
    f << "birth_attempts,birth_accepts,death_attempts,death_accepts\n";
    f << moves.birth_attempts << ',' << moves.birth_accepts << ',' << moves.death_attempts << ','
      << moves.death_accepts << '\n';
  }
}

void write_truth_metrics(const fs::path &dir, const PosteriorSummary &s, const SimTruth &truth) {
  std::vector<std::size_t> all(truth.mu.cols());
  for (std::size_t j = 0; j < all.size(); ++j)
    all[j] = j;
  std::size_t hits = 0;
  for (std::size_t j : s.selected)
    hits += std::binary_search(truth.relevant.begin(), truth.relevant.end(), j) ? 1 : 0;
  auto f = open_out(dir / "truth_metrics.csv");
  f << "k_mode,mse_relevant,mse_all,selected,selected_relevant,relevant\n";
  f << s.k.mode << ',' << format_double(mse_fitted_means(s.mu_hat, truth, truth.relevant)) << ','
    << format_double(mse_fitted_means(s.mu_hat, truth, all)) << ',' << s.selected.size() << ',' << hits << ','
    << truth.relevant.size() << '\n';
}

struct ChainResult {
  PosteriorAccumulator acc;
  ClusterMoveStats moves;
  std::vector<std::pair<std::size_t, std::size_t>> k_trace;
};

ChainResult run_one_chain(const DataMatrix &data, const Hyperparams &hp, const ChainConfig &cfg,
                          const fs::path &dir) {
  ChainResult res{PosteriorAccumulator(data.n(), data.p()), {}, {}};
  auto kf = open_out(dir / "k_trace.csv");
  auto af = open_out(dir / "assignments.csv");
  kf << "iteration,K\n";
  af << "iteration";
  for (std::size_t i = 1; i <= data.n(); ++i)
    af << ",s" << i;
  af << '\n';
  res.moves = run_chain_streaming(data, hp, cfg, [&](const TraceRecord &r) {
    kf << r.iteration << ',' << r.k << '\n';
    af << r.iteration;
    for (int a : r.assignments)
      af << ',' << a + 1;
    af << '\n';
    res.k_trace.emplace_back(r.iteration, r.k);
    res.acc.add(r);
  });
  if (!kf || !af)
    throw std::runtime_error(fmt::format("error writing traces in '{}'", dir.string()));
  return res;
}

void write_manifest(const fs::path &dir, const RunConfig &cfg) {
  auto f = open_out(dir / "run_manifest");
  f << manifest_text(cfg);
}

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  CLI::App app{"Sparse Bayesian hierarchical Dirichlet process mixture clustering"};
  app.set_version_flag("--version", version_string());
  std::optional<std::string> data_path, config_path, init, simulate, out_dir;
  std::optional<std::size_t> iters, burn_in, thin, chains;
  std::optional<std::uint64_t> seed;
  std::optional<double> threshold;
  bool preprocess = false, standardize_flag = false;
  app.add_option("--data", data_path, "CSV file: header of attribute names, one sample per row");
  app.add_option("--config", config_path, "key = value file of hyperparameters and chain settings");
  app.add_option("--iters", iters, "number of sweeps");
  app.add_option("--burn-in", burn_in, "sweeps discarded before recording");
  app.add_option("--thin", thin, "record every thin-th sweep after burn-in");
  app.add_option("--seed", seed, "random seed; chain k uses seed + k");
  app.add_option("--init", init, "initial partition")->check(CLI::IsMember({"one", "singletons"}));
  app.add_option("--chains", chains, "number of independent chains run concurrently");
  app.add_option("--simulate", simulate, "use a simulated example instead of --data")
      ->check(CLI::IsMember({"ex1", "ex2", "ex3", "ex4"}));
  app.add_flag("--preprocess", preprocess, "apply the expression filter before clustering");
  app.add_option("--out", out_dir, "output directory")->required();
  app.add_flag("--standardize", standardize_flag, "centre and scale every attribute");
  app.add_option("--threshold", threshold, "selection threshold on posterior mean pi")
      ->check(CLI::Range(0.0, 1.0));

  std::vector<std::string> argv_store{"sparsedp"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char *> argv;
  for (auto &a : argv_store)
    argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError &e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  RunConfig cfg;
  try {
    if (config_path)
      apply_config_file(cfg, *config_path);
    if (data_path)
      set_config_value(cfg, "data", *data_path);
    if (simulate)
      set_config_value(cfg, "simulate", *simulate);
    if (iters)
      cfg.chain.iterations = *iters;
    if (burn_in)
      cfg.chain.burn_in = *burn_in;
    if (thin)
      cfg.chain.thin = *thin;
    if (seed)
      cfg.chain.seed = *seed;
    if (init)
      set_config_value(cfg, "init", *init);
    if (chains)
      cfg.chains = *chains;
    if (threshold)
      cfg.threshold = *threshold;
    if (preprocess)
      cfg.preprocess = true;
    if (standardize_flag)
      cfg.standardize = true;
    if (cfg.data && cfg.simulate)
      throw UsageError("--data and --simulate are mutually exclusive");
    if (!cfg.data && !cfg.simulate)
      throw UsageError("one of --data or --simulate is required");
    if (cfg.chains == 0)
      throw UsageError("--chains must be at least 1");
    if (!(cfg.threshold > 0.0 && cfg.threshold <= 1.0))
      throw UsageError("--threshold must be in (0, 1]");
    cfg.chain.validate();
  } catch (const std::exception &e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }

  DataMatrix data;
  std::optional<SimTruth> truth;
  try {
    if (cfg.simulate) {
      if (!cfg.sim_seed)
        cfg.sim_seed = cfg.chain.seed;
      auto [d, t] = gen_example(*cfg.simulate, *cfg.sim_seed);
      data = std::move(d);
      truth = std::move(t);
    } else {
      data = load_csv(*cfg.data);
    }
    if (cfg.preprocess) {
      auto res = preprocess_expression(data, cfg.pre);
      for (const auto &w : res.warnings)
        err << "warning: " << w << '\n';
      data = std::move(res.data);
      if (truth) {
        SimTruth t = *truth;
        t.mu = Matrix(data.n(), res.kept.size());
        t.sigma.clear();
        for (std::size_t k = 0; k < res.kept.size(); ++k) {
          for (std::size_t i = 0; i < data.n(); ++i)
            t.mu(i, k) = truth->mu(i, res.kept[k]);
          t.sigma.push_back(truth->sigma[res.kept[k]]);
        }
        t.relevant.clear();
        for (std::size_t k = 0; k < res.kept.size(); ++k)
          if (std::binary_search(truth->relevant.begin(), truth->relevant.end(), res.kept[k]))
            t.relevant.push_back(k);
        truth = std::move(t);
      }
    }
    if (cfg.standardize) {
      data = standardize(data);
      truth.reset();
    }
    if (!cfg.mu0 || !cfg.sigma0_sq) {
      const Hyperparams emp = default_hyperparams(data);
      if (!cfg.mu0)
        cfg.mu0 = emp.mu0;
      if (!cfg.sigma0_sq)
        cfg.sigma0_sq = emp.sigma0_sq;
    }
    cfg.hp.mu0 = *cfg.mu0;
    cfg.hp.sigma0_sq = *cfg.sigma0_sq;
    cfg.hp.validate();
  } catch (const std::exception &e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }

  try {
    const fs::path dir(*out_dir);
    fs::create_directories(dir);
    write_manifest(dir, cfg);
    if (truth)
      save_csv(dir / "data.csv", data);

    std::vector<std::optional<ChainResult>> results(cfg.chains);
    std::vector<std::exception_ptr> errors(cfg.chains);
    std::vector<fs::path> dirs(cfg.chains, dir);
    auto work = [&](std::size_t k) {
      try {
        ChainConfig cc = cfg.chain;
        cc.seed = cfg.chain.seed + k;
        results[k].emplace(run_one_chain(data, cfg.hp, cc, dirs[k]));
      } catch (...) {
        errors[k] = std::current_exception();
      }
    };
    if (cfg.chains == 1) {
      work(0);
    } else {
      for (std::size_t k = 0; k < cfg.chains; ++k) {
        dirs[k] = dir / fmt::format("chain_{}", k);
        fs::create_directories(dirs[k]);
        RunConfig single = cfg;
        single.chains = 1;
        single.chain.seed = cfg.chain.seed + k;
        write_manifest(dirs[k], single);
      }
      std::vector<std::thread> pool;
      for (std::size_t k = 0; k < cfg.chains; ++k)
        pool.emplace_back(work, k);
      for (auto &t : pool)
        t.join();
    }
    for (auto &e : errors)
      if (e)
        std::rethrow_exception(e);

    ClusterMoveStats total;
    for (std::size_t k = 0; k < cfg.chains; ++k) {
      const ChainResult &r = *results[k];
      total.birth_attempts += r.moves.birth_attempts;
      total.birth_accepts += r.moves.birth_accepts;
      total.death_attempts += r.moves.death_attempts;
      total.death_accepts += r.moves.death_accepts;
      if (cfg.chains > 1) {
        const auto s = r.acc.summarize(cfg.threshold);
        write_summary(dirs[k], s, data, r.moves);
        if (truth)
          write_truth_metrics(dirs[k], s, *truth);
      }
    }
    PosteriorAccumulator merged = results[0]->acc;
    for (std::size_t k = 1; k < cfg.chains; ++k)
      merged.merge(results[k]->acc);
    const auto summary = merged.summarize(cfg.threshold);
    write_summary(dir, summary, data, total);
    if (truth)
      write_truth_metrics(dir, summary, *truth);
    if (cfg.chains > 1) {
      auto f = open_out(dir / "k_trace.csv");
      f << "chain,iteration,K\n";
      for (std::size_t k = 0; k < cfg.chains; ++k)
        for (const auto &[it, kk] : results[k]->k_trace)
          f << k << ',' << it << ',' << kk << '\n';
    }
    out << fmt::format("K mode {} (posterior {:.3f}), {} attributes selected, output in {}\n", summary.k.mode,
                       summary.k.mass.at(summary.k.mode), summary.selected.size(), dir.string());
  } catch (const SamplerError &e) {
    err << "sampler aborted: " << e.what() << '\n';
    return kExitFailure;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitOk;
}

} // namespace

int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  return run(args, out, err);
}

int run_cli(int argc, char **argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

} // namespace sparsedp
