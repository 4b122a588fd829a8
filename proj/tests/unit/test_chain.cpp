#include <doctest.h>

#include <cmath>

#include "sparsedp/chain.hpp"
#include "sparsedp/simgen.hpp"
#include "support/geweke.hpp"

using namespace sparsedp;

namespace {
DataMatrix small_data(std::uint64_t seed) {
  auto [d, t] = gen_example3(seed);
  return d;
}
} // namespace

TEST_CASE("chain config validation") {
  ChainConfig c;
  CHECK_NOTHROW(c.validate());
  CHECK(c.trace_length() == 40000);
  c.iterations = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = ChainConfig{};
  c.burn_in = c.iterations;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = ChainConfig{};
  c.thin = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = ChainConfig{};
  c.fixed_alpha = -1.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = ChainConfig{};
  c.iterations = 10;
  c.burn_in = 3;
  c.thin = 2;
  CHECK(c.trace_length() == 3);
}

TEST_CASE("initial state") {
  const DataMatrix d = small_data(1);
  const Hyperparams hp = default_hyperparams(d);
  ChainConfig cfg;
  Rng rng(1);
  const ModelState one = init_state(d, hp, cfg, rng);
  CHECK(one.num_clusters() == 1);
  CHECK(one.baseline_mean.num_clusters() == d.p());
  for (std::size_t j = 0; j < d.p(); ++j) {
    double m = 0.0;
    for (std::size_t i = 0; i < d.n(); ++i)
      m += d(i, j);
    CHECK(one.mean_of(j) == doctest::Approx(m / d.n()).epsilon(1e-14));
    CHECK(one.rho[j] == doctest::Approx(0.001));
  }
  CHECK(one.eta_sq == doctest::Approx(0.5 / 1.5));
  CHECK(one.tau == 1.0);

  cfg.init_mode = InitMode::AllSingletons;
  cfg.fixed_alpha = 1e6;
  cfg.fixed_gamma = 1e6;
  const ModelState many = init_state(d, hp, cfg, rng);
  CHECK(many.num_clusters() == d.n());
  CHECK(many.alpha == 1e6);
  CHECK(many.gamma == 1e6);

  Matrix y = d.y;
  for (std::size_t i = 0; i < d.n(); ++i)
    y(i, 3) = 2.0;
  CHECK_THROWS_AS((void)init_state(DataMatrix(y), hp, ChainConfig{}, rng), DegenerateDataError);
}

TEST_CASE("same seed gives a bit-identical trace") {
  const DataMatrix d = small_data(2);
  const Hyperparams hp = default_hyperparams(d);
  ChainConfig cfg;
  cfg.iterations = 60;
  cfg.burn_in = 20;
  cfg.thin = 3;
  cfg.seed = 5;
  const ChainTrace a = run_chain(d, hp, cfg);
  const ChainTrace b = run_chain(d, hp, cfg);
  CHECK(a.records.size() == cfg.trace_length());
  CHECK(a == b);
  CHECK(a.records.front().iteration == 23);
  cfg.seed = 6;
  CHECK(!(run_chain(d, hp, cfg) == a));
}

TEST_CASE("records use canonical labels and reproduce fitted means") {
  const DataMatrix d = small_data(3);
  const Hyperparams hp = default_hyperparams(d);
  ChainConfig cfg;
  cfg.iterations = 30;
  cfg.burn_in = 0;
  cfg.init_mode = InitMode::AllSingletons;
  cfg.validate_each_step = true;
  const ChainTrace tr = run_chain(d, hp, cfg);
  for (const auto &r : tr.records) {
    int next = 0;
    for (int a : r.assignments) {
      CHECK(a <= next);
      if (a == next)
        ++next;
    }
    CHECK(static_cast<std::size_t>(next) == r.k);
    const Matrix f = r.fitted_matrix();
    CHECK(f(2, 4) == r.baseline[4] + r.shift(r.assignments[2], 4));
    for (std::size_t c = 0; c < r.k; ++c)
      for (std::size_t j = 0; j < d.p(); ++j) {
        if (r.shift(c, j) != 0.0)
          CHECK(r.pi(c, j) > 0.0);
      }
  }
}

TEST_CASE("record set controls what is stored") {
  const DataMatrix d = small_data(4);
  const Hyperparams hp = default_hyperparams(d);
  ChainConfig cfg;
  cfg.iterations = 5;
  cfg.burn_in = 0;
  cfg.record = RecordSet{false, false, false, false};
  const ChainTrace tr = run_chain(d, hp, cfg);
  CHECK(tr.records.size() == 5);
  CHECK(tr.records[0].rho.empty());
  CHECK(tr.records[0].pi.empty());
  CHECK(tr.records[0].assignments.empty());
  CHECK(tr.records[0].k >= 1);
}

TEST_CASE("state serialization round trip mid-chain") {
  const DataMatrix d = small_data(5);
  const Hyperparams hp = default_hyperparams(d);
  ChainConfig cfg;
  Rng rng(3);
  ModelState s = init_state(d, hp, cfg, rng);
  for (std::size_t t = 1; t <= 10; ++t)
    sweep(s, d, hp, cfg, rng, t);
  const ModelState back = ModelState::from_json(s.to_json());
  CHECK(back == s);
  // Continuing from the copy with a copied generator gives the same future.
  Rng r1 = rng, r2 = rng;
  ModelState a = s, b = back;
  sweep(a, d, hp, cfg, r1, 11);
  sweep(b, d, hp, cfg, r2, 11);
  CHECK(a == b);
}

TEST_CASE("fixed concentrations stay fixed") {
  const DataMatrix d = small_data(6);
  const Hyperparams hp = default_hyperparams(d);
  ChainConfig cfg;
  cfg.iterations = 20;
  cfg.burn_in = 0;
  cfg.fixed_alpha = 1e6;
  cfg.fixed_gamma = 1e6;
  for (const auto &r : run_chain(d, hp, cfg).records) {
    CHECK(r.alpha == 1e6);
    CHECK(r.gamma == 1e6);
  }
}

TEST_CASE("short Geweke comparison") {
  Hyperparams hp;
  hp.c = 2.0;
  hp.d = 2.0;
  hp.a = 1.0;
  hp.b = 1.0;
  const auto res = testing::run_geweke(3, 2, hp, 20000, 123);
  for (std::size_t k = 0; k < testing::kGewekeGated; ++k) {
    INFO(testing::kGewekeNames[k]);
    CHECK(std::abs(res.z[k]) < 5.0);
  }
}
