#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/inverse_gamma.hpp>
#include <boost/math/distributions/normal.hpp>

#include "sparsedp/core_model.hpp"

using namespace sparsedp;

namespace {
void check_rel(double got, double want, double tol) {
  CHECK(std::abs(got - want) <= tol * std::max(1.0, std::abs(want)));
}
} // namespace

TEST_CASE("log_normal_pdf matches an independent implementation") {
  for (double x : {-3.0, -0.2, 0.0, 1.5, 7.0})
    for (double mean : {-1.0, 0.0, 2.5})
      for (double var : {1e-4, 0.3, 1.0, 40.0}) {
        const boost::math::normal_distribution<double> d(mean, std::sqrt(var));
        check_rel(log_normal_pdf(x, mean, var), std::log(boost::math::pdf(d, x)), 1e-12);
      }
  CHECK_THROWS_AS((void)log_normal_pdf(0.0, 0.0, 0.0), std::domain_error);
  CHECK_THROWS_AS((void)log_normal_pdf(0.0, 0.0, -1.0), std::domain_error);
}

TEST_CASE("log_inv_gamma_pdf matches an independent implementation") {
  for (double x : {0.01, 0.5, 1.0, 3.0, 25.0})
    for (double shape : {0.5, 1.0, 4.0})
      for (double rate : {0.5, 2.0}) {
        const boost::math::inverse_gamma_distribution<double> d(shape, rate);
        check_rel(log_inv_gamma_pdf(x, shape, rate), std::log(boost::math::pdf(d, x)), 1e-12);
      }
  CHECK_THROWS_AS((void)log_inv_gamma_pdf(0.0, 1.0, 1.0), std::domain_error);
}

TEST_CASE("log_gamma_pdf matches an independent implementation") {
  for (double x : {0.01, 0.5, 1.0, 3.0, 25.0})
    for (double shape : {0.5, 1.0, 4.0})
      for (double rate : {0.5, 2.0}) {
        const boost::math::gamma_distribution<double> d(shape, 1.0 / rate);
        check_rel(log_gamma_pdf(x, shape, rate), std::log(boost::math::pdf(d, x)), 1e-12);
      }
}

TEST_CASE("log_beta_pdf matches an independent implementation") {
  for (double x : {1e-6, 0.1, 0.5, 0.9, 0.999})
    for (double a : {0.2, 1.0, 9.0})
      for (double b : {1.0, 199.8}) {
        const boost::math::beta_distribution<double> d(a, b);
        check_rel(log_beta_pdf(x, a, b), std::log(boost::math::pdf(d, x)), 1e-10);
      }
  CHECK_THROWS_AS((void)log_beta_pdf(0.0, 1.0, 1.0), std::domain_error);
  CHECK_THROWS_AS((void)log_beta_pdf(1.0, 1.0, 1.0), std::domain_error);
}

TEST_CASE("log_sum_exp") {
  const double ninf = -std::numeric_limits<double>::infinity();
  const std::vector<double> v{0.1, -2.0, 1.3};
  CHECK(log_sum_exp(v) == doctest::Approx(std::log(std::exp(0.1) + std::exp(-2.0) + std::exp(1.3))).epsilon(1e-14));
  const std::vector<double> big{1000.0, 1000.0};
  CHECK(log_sum_exp(big) == doctest::Approx(1000.0 + std::log(2.0)).epsilon(1e-15));
  const std::vector<double> with_inf{ninf, 0.0, ninf};
  CHECK(log_sum_exp(with_inf) == 0.0);
  const std::vector<double> all_inf{ninf, ninf};
  CHECK(log_sum_exp(all_inf) == ninf);
  CHECK(log_sum_exp(std::vector<double>{}) == ninf);
}

TEST_CASE("normalize_log_weights gives probabilities") {
  std::vector<double> v{-800.0, -801.0, -std::numeric_limits<double>::infinity()};
  normalize_log_weights(v);
  CHECK(v[0] + v[1] + v[2] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(v[2] == 0.0);
  CHECK(v[0] / v[1] == doctest::Approx(std::exp(1.0)).epsilon(1e-12));
}

TEST_CASE("hyperparameter validation") {
  Hyperparams hp;
  CHECK_NOTHROW(hp.validate());
  hp.d = 0.0;
  CHECK_THROWS_AS(hp.validate(), std::invalid_argument);
  hp = Hyperparams{};
  hp.mu0 = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(hp.validate(), std::invalid_argument);
  hp = Hyperparams{};
  hp.mu0 = -3.0;
  CHECK_NOTHROW(hp.validate());
}

TEST_CASE("default hyperparameters") {
  const Hyperparams hp;
  CHECK(hp.alpha0 == 0.5);
  CHECK(hp.beta0 == 0.5);
  CHECK(hp.eta_shape == 0.5);
  CHECK(hp.eta_rate == 0.5);
  CHECK(hp.conc_shape == 0.5);
  CHECK(hp.conc_rate == 0.5);
  CHECK(hp.a == 9.0);
  CHECK(hp.b == 1.0);
  CHECK(hp.c == 0.2);
  CHECK(hp.d == 199.8);
}

TEST_CASE("default_hyperparams uses the spread of the attribute means") {
  Matrix y(2, 3);
  // column means 1, 2, 6
  y(0, 0) = 0.0, y(1, 0) = 2.0;
  y(0, 1) = 2.0, y(1, 1) = 2.0;
  y(0, 2) = 5.0, y(1, 2) = 7.0;
  const DataMatrix d(y);
  const Hyperparams hp = default_hyperparams(d);
  CHECK(hp.mu0 == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(hp.sigma0_sq == doctest::Approx((4.0 + 1.0 + 9.0) / 3.0).epsilon(1e-15));
  CHECK(hp.a == 9.0);

  Matrix flat(3, 2, 1.5);
  flat(0, 0) = 0.5;
  flat(1, 0) = 2.5;
  CHECK_THROWS_AS((void)default_hyperparams(DataMatrix(flat)), DegenerateDataError);
}

TEST_CASE("data validation") {
  CHECK_THROWS_AS(DataMatrix(Matrix(1, 3)).validate(), std::invalid_argument);
  Matrix y(2, 2, 0.0);
  y(1, 1) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(DataMatrix(y).validate(), std::invalid_argument);
  CHECK_THROWS_AS(DataMatrix(Matrix(2, 2), {"a"}).validate(), std::invalid_argument);
}
