#include <doctest.h>

#include <cmath>
#include <map>
#include <vector>

#include "sparsedp/cluster_sampler.hpp"
#include "sparsedp/sparsity.hpp"
#include "support/geweke.hpp"
#include "support/log_joint.hpp"
#include "support/oracles.hpp"

using namespace sparsedp;
using testing::build_mean;
using testing::config_blocks;
using testing::mean_configs;

namespace {

struct Model {
  std::vector<double> vars;
  std::vector<double> rho;
  InnerModel m;
  Model(std::vector<double> v, std::vector<double> r, double eta_sq, double gamma)
      : vars(std::move(v)), rho(std::move(r)), m{vars, rho, eta_sq, gamma, 9.0, 1.0} {}
};

Model small_model(std::size_t p) {
  std::vector<double> vars{0.5, 1.3, 0.8, 2.0};
  std::vector<double> rho{0.3, 0.75, 0.5, 0.1};
  vars.resize(p);
  rho.resize(p);
  return Model(vars, rho, 0.9, 1.7);
}

MeanContext small_context(std::size_t p, double count) {
  MeanContext ctx;
  const std::vector<double> x{0.8, -1.1, 0.95, 0.1};
  ctx.x.assign(x.begin(), x.begin() + static_cast<long>(p));
  ctx.count = count;
  return ctx;
}

// Configuration of a mean vector as a restricted growth string.
std::vector<int> config_of(const ClusterMeanVector &mv) {
  std::vector<int> cfg(mv.p(), -1);
  std::map<ClusterId, int> label;
  for (std::size_t j = 0; j < mv.p(); ++j) {
    const ClusterId id = mv.inner.cluster_of(j);
    if (id == kSpike)
      continue;
    auto it = label.find(id);
    if (it == label.end())
      it = label.emplace(id, static_cast<int>(label.size())).first;
    cfg[j] = it->second;
  }
  return cfg;
}

struct Setup {
  Hyperparams hp;
  ModelState state;
  DataMatrix data;
  Setup(std::uint64_t seed, std::size_t n, std::size_t p) {
    hp.c = 2.0;
    hp.d = 2.0;
    hp.conc_shape = 3.0;
    hp.conc_rate = 1.0;
    Rng rng(seed);
    state = testing::draw_prior_state(n, p, hp, rng);
    data = DataMatrix(Matrix(n, p));
    testing::redraw_data(state, data, rng);
  }
};

} // namespace

TEST_CASE("configuration counts are Bell numbers") {
  CHECK(mean_configs(1).size() == 2);
  CHECK(mean_configs(2).size() == 5);
  CHECK(mean_configs(3).size() == 15);
  CHECK(mean_configs(4).size() == 52);
}

TEST_CASE("sequential discrete probabilities sum to one over every configuration") {
  for (std::size_t p : {2u, 3u, 4u}) {
    const Model mod = small_model(p);
    for (double count : {1.0, 3.0}) {
      const MeanContext ctx = small_context(p, count);
      double total_q = 0.0, total_q0 = 0.0, total_prior = 0.0;
      for (const auto &cfg : mean_configs(p)) {
        const std::vector<double> vals(config_blocks(cfg), 0.3);
        const auto mv = build_mean(cfg, vals);
        total_q += std::exp(score_sequential(mv, &ctx, mod.m).log_q_discrete);
        total_q0 += std::exp(score_sequential(mv, &ctx, mod.m).log_q0_discrete);
        total_prior += std::exp(score_sequential(mv, nullptr, mod.m).log_q_discrete);
      }
      CHECK(total_q == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(total_q0 == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(total_prior == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("single-atom prior factor") {
  // One nonzero component opening the first inner cluster has CRP factor 1.
  const Model mod = small_model(1);
  const auto mv = build_mean({0}, std::vector<double>{0.4});
  const auto s = score_sequential(mv, nullptr, mod.m);
  const double w = 9.0 * mod.rho[0] / 10.0;
  CHECK(s.log_q0_discrete == doctest::Approx(std::log(w)).epsilon(1e-15));
  CHECK(s.log_q0_values == doctest::Approx(log_normal_pdf(0.4, 0.0, 0.9)).epsilon(1e-15));
}

TEST_CASE("q and q0 match the brute-force oracles") {
  Rng rng(31);
  for (std::size_t p : {2u, 3u}) {
    const Model mod = small_model(p);
    for (double count : {1.0, 4.0}) {
      const MeanContext ctx = small_context(p, count);
      for (const auto &cfg : mean_configs(p)) {
        std::vector<double> vals(config_blocks(cfg));
        for (auto &v : vals)
          v = rng.normal(0.0, 1.0);
        const auto mv = build_mean(cfg, vals);
        const auto s = score_sequential(mv, &ctx, mod.m);
        CHECK(s.log_q() == doctest::Approx(testing::oracle_log_q(cfg, vals, &ctx, mod.m)).epsilon(1e-7));
        CHECK(s.log_q0() == doctest::Approx(testing::oracle_log_q0(cfg, vals, mod.m)).epsilon(1e-12));
        CHECK(eval_log_q(mv, ctx, mod.m) == s.log_q());
        CHECK(eval_log_q0(mv, mod.m) == doctest::Approx(s.log_q0()).epsilon(1e-14));
        const auto prior = score_sequential(mv, nullptr, mod.m);
        CHECK(prior.log_q() == doctest::Approx(testing::oracle_log_q(cfg, vals, nullptr, mod.m)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("generated configurations follow the discrete proposal") {
  const std::size_t p = 3;
  const Model mod = small_model(p);
  const MeanContext ctx = small_context(p, 2.0);
  Rng rng(77);
  std::map<std::vector<int>, int> counts;
  const int n = 200000;
  for (int k = 0; k < n; ++k)
    ++counts[config_of(sequential_sample_mean(&ctx, mod.m, rng).mean)];
  for (const auto &cfg : mean_configs(p)) {
    const std::vector<double> vals(config_blocks(cfg), 0.0);
    const double prob = std::exp(score_sequential(build_mean(cfg, vals), &ctx, mod.m).log_q_discrete);
    const double freq = counts[cfg] / double(n);
    CHECK(std::abs(freq - prob) <= 5.0 * std::sqrt(prob * (1 - prob) / n) + 1e-12);
  }
}

TEST_CASE("replay reproduces generated scores exactly") {
  const std::size_t p = 40;
  std::vector<double> vars(p), rho(p);
  Rng setup(5);
  for (std::size_t j = 0; j < p; ++j) {
    vars[j] = 0.05 + setup.uniform();
    rho[j] = setup.uniform();
  }
  const InnerModel m{vars, rho, 0.7, 2.5, 9.0, 1.0};
  MeanContext ctx;
  for (std::size_t j = 0; j < p; ++j)
    ctx.x.push_back(setup.normal(0.0, 1.0));
  ctx.count = 3.0;
  Rng rng(6);
  for (int k = 0; k < 2000; ++k) {
    const auto prop = sequential_sample_mean(k % 2 ? &ctx : nullptr, m, rng);
    const auto s = score_sequential(prop.mean, k % 2 ? &ctx : nullptr, m);
    CHECK(s.log_q() == prop.log_q);
    CHECK(s.log_q0() == prop.log_q0);
    if (k % 2 == 0)
      CHECK(prop.log_q == doctest::Approx(prop.log_q0).epsilon(1e-13));
  }
}

TEST_CASE("zero slab mass gives a zero-density proposal") {
  Model mod = small_model(2);
  mod.rho[1] = 0.0;
  const auto mv = build_mean({-1, 0}, std::vector<double>{0.5});
  CHECK(eval_log_q0(mv, mod.m) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("component weights match the quadrature oracle") {
  Setup s(12, 6, 4);
  ClusterSampler cs(s.state, s.data, s.hp);
  for (ClusterId c : s.state.clusters.live_ids()) {
    const MeanContext ctx = cs.cluster_context(c);
    const auto &inner = s.state.clusters.value(c).mean.inner;
    const InnerModel &m = cs.model();
    for (std::size_t j = 0; j < 4; ++j) {
      const auto opts = cs.component_weights(c, ctx, j);
      std::map<ClusterId, std::vector<std::size_t>> blocks;
      std::size_t nonzero = 0;
      for (std::size_t k = 0; k < 4; ++k)
        if (k != j && inner.cluster_of(k) >= 0) {
          blocks[inner.cluster_of(k)].push_back(k);
          ++nonzero;
        }
      auto ml = [&](const std::vector<std::size_t> &ks) {
        std::vector<double> x, v;
        for (auto k : ks) {
          x.push_back(ctx.x[k]);
          v.push_back(m.vars[k] / ctx.count);
        }
        return ks.empty() ? 0.0 : testing::quad_block_log_ml(x, v, m.eta_sq);
      };
      const double w = 9.0 * m.rho[j] / 10.0;
      const double denom = nonzero + m.gamma;
      REQUIRE(opts.size() == blocks.size() + 2);
      CHECK(opts[0].target == kSpike);
      CHECK(opts[0].log_weight ==
            doctest::Approx(std::log1p(-w) + log_normal_pdf(ctx.x[j], 0.0, m.vars[j] / ctx.count)).epsilon(1e-12));
      std::size_t k = 1;
      for (const auto &[id, members] : blocks) {
        CHECK(opts[k].target == id);
        auto with = members;
        with.push_back(j);
        const double want = std::log(w * members.size() / denom) + ml(with) - ml(members);
        CHECK(opts[k].log_weight == doctest::Approx(want).epsilon(1e-7));
        ++k;
      }
      CHECK(opts.back().target == kUnassigned);
      CHECK(opts.back().log_weight == doctest::Approx(std::log(w * m.gamma / denom) + ml({j})).epsilon(1e-7));
    }
  }
}

TEST_CASE("Gibbs update of a mean vector leaves its posterior invariant") {
  // One cluster, everything else fixed: the stationary law of the
  // configuration is q0(config) * marginal likelihood (by enumeration).
  Setup s(3, 4, 3);
  ClusterSampler cs(s.state, s.data, s.hp);
  const ClusterId c = s.state.clusters.live_ids().front();
  const MeanContext ctx = small_context(3, 2.0);
  const InnerModel &m = cs.model();

  std::map<std::vector<int>, double> target;
  double z = 0.0;
  for (const auto &cfg : mean_configs(3)) {
    double lp = testing::oracle_log_q0_discrete(cfg, m);
    for (std::size_t j = 0; j < 3; ++j)
      if (cfg[j] < 0)
        lp += log_normal_pdf(ctx.x[j], 0.0, m.vars[j] / ctx.count);
    for (std::size_t b = 0; b < config_blocks(cfg); ++b) {
      std::vector<double> x, v;
      for (std::size_t j = 0; j < 3; ++j)
        if (cfg[j] == static_cast<int>(b)) {
          x.push_back(ctx.x[j]);
          v.push_back(m.vars[j] / ctx.count);
        }
      lp += testing::quad_block_log_ml(x, v, m.eta_sq);
    }
    target[cfg] = std::exp(lp);
    z += std::exp(lp);
  }

  Rng rng(15);
  std::map<std::vector<int>, int> counts;
  const int n = 100000;
  for (int k = 0; k < n; ++k) {
    cs.gibbs_update_cluster_mean(c, ctx, rng);
    ++counts[config_of(s.state.clusters.value(c).mean)];
  }
  for (const auto &[cfg, w] : target) {
    const double prob = w / z;
    const double freq = counts[cfg] / double(n);
    // Autocorrelated draws: allow 4x the iid standard error.
    CHECK(std::abs(freq - prob) <= 20.0 * std::sqrt(prob * (1 - prob) / n) + 1e-9);
  }
}

TEST_CASE("reassignment weights agree with the collapsed joint") {
  Setup s(21, 8, 5);
  ClusterSampler cs(s.state, s.data, s.hp);
  for (std::size_t i = 0; i < 8; ++i) {
    const ClusterId own = s.state.clusters.cluster_of(i);
    if (s.state.clusters.count(own) == 1)
      continue;
    const auto w = cs.reassign_weights(i);
    const double base = testing::log_joint_collapsed(s.state, s.data, s.hp);
    double own_w = 0.0;
    for (const auto &[c, lw] : w)
      if (c == own)
        own_w = lw;
    for (const auto &[c, lw] : w) {
      ModelState moved = s.state;
      moved.clusters.detach(i);
      moved.clusters.attach(i, c);
      const double diff = testing::log_joint_collapsed(moved, s.data, s.hp) - base;
      CHECK(lw - own_w == doctest::Approx(diff).epsilon(1e-9));
    }
  }
}

TEST_CASE("birth and death ratios are the Metropolis-Hastings ratios of the collapsed joint") {
  Setup s(33, 7, 4);
  ClusterSampler cs(s.state, s.data, s.hp);
  Rng rng(2);
  int checked = 0;
  for (std::size_t i = 0; i < 7; ++i) {
    const ClusterId own = s.state.clusters.cluster_of(i);
    const int nc = s.state.clusters.count(own);
    if (nc == 1)
      continue;
    const MeanContext ctx = cs.sample_context(i);
    const auto prop = sequential_sample_mean(&ctx, cs.model(), rng);
    const auto shift = prop.mean.dense();
    const double lf_new = likelihood_log_f(s.data.y.row(i), shift, cs.baseline(), cs.vars());
    const double lf_old = cs.log_f(i, own);
    const double lr = birth_log_ratio(s.state.tau, 7, lf_new, lf_old, prop.log_q0, prop.log_q);

    ModelState born = s.state;
    born.clusters.detach(i);
    SampleCluster sc;
    sc.mean = prop.mean;
    sc.pi.assign(4, 0.5);
    const ClusterId id = born.clusters.attach_new(i, sc);
    (void)id;
    // Target ratio times reverse / forward proposal: the reverse death picks
    // i's old cluster with probability (n_c - 1)/(n - 1).
    const double want = testing::log_joint_collapsed(born, s.data, s.hp) -
                        testing::log_joint_collapsed(s.state, s.data, s.hp) + std::log((nc - 1) / 6.0) -
                        prop.log_q;
    CHECK(lr == doctest::Approx(want).epsilon(1e-9));

    // The reverse move from `born` has exactly the opposite ratio.
    const double dr = death_log_ratio(born.tau, 7, lf_old, lf_new, prop.log_q, prop.log_q0);
    CHECK(dr == doctest::Approx(-lr).epsilon(1e-12));
    ++checked;
  }
  CHECK(checked > 0);
}

TEST_CASE("sweeps keep the state valid") {
  Setup s(44, 9, 6);
  Rng rng(3);
  ClusterMoveStats st;
  for (int t = 0; t < 200; ++t) {
    ClusterSampler cs(s.state, s.data, s.hp);
    cs.sweep(rng, &st);
    s.state.validate();
  }
  CHECK(st.birth_attempts + st.death_attempts == 9u * 200u);
}

TEST_CASE("prior proposal gives q equal to q0") {
  Setup s(45, 6, 5);
  ClusterSampler cs(s.state, s.data, s.hp, ProposalKind::Prior);
  Rng rng(4);
  for (int t = 0; t < 50; ++t) {
    for (std::size_t i = 0; i < 6; ++i) {
      const auto mv = cs.mh_move(i, rng);
      CHECK(mv.attempted);
      CHECK(std::isfinite(mv.log_ratio));
    }
  }
  s.state.validate();
}

TEST_CASE("misuse of the move primitives") {
  Setup s(46, 6, 3);
  ClusterSampler cs(s.state, s.data, s.hp);
  Rng rng(1);
  for (std::size_t i = 0; i < 6; ++i) {
    const bool single = s.state.clusters.count(s.state.clusters.cluster_of(i)) == 1;
    if (single) {
      CHECK_THROWS_AS(cs.mh_birth_move(i, rng), std::logic_error);
      CHECK_THROWS_AS(cs.gibbs_reassign(i, rng), std::logic_error);
    } else {
      CHECK_THROWS_AS(cs.mh_death_move(i, rng), std::logic_error);
    }
  }
}
