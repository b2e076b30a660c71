#include <doctest.h>

#include <random>

#include "workload/baseline.hpp"

using namespace wl::baseline;

TEST_CASE("ar_fit recovers a noiseless AR(1)") {
  Eigen::VectorXd x(50);
  x(0) = 1.0;
  for (int t = 1; t < 50; ++t) x(t) = 0.5 * x(t - 1);
  auto model = ar_fit(x, 1);
  CHECK(std::abs(model.coefficients(0) - 0.5) < 1e-8);
  CHECK(std::abs(model.intercept) < 1e-8);
}

TEST_CASE("ar_fit matches the normal-equation oracle") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> noise(0, 0.3);
  Eigen::VectorXd x(200);
  x(0) = 0.2;
  x(1) = -0.1;
  for (int t = 2; t < 200; ++t) x(t) = 0.4 * x(t - 1) - 0.3 * x(t - 2) + 0.7 + noise(rng);
  const int p = 2;
  auto model = ar_fit(x, p);

  // oracle: solve the normal equations directly
  const int rows = 200 - p;
  Eigen::MatrixXd design(rows, p + 1);
  Eigen::VectorXd target(rows);
  for (int t = 0; t < rows; ++t) {
    design(t, 0) = 1;
    for (int j = 0; j < p; ++j) design(t, 1 + j) = x(p + t - 1 - j);
    target(t) = x(p + t);
  }
  Eigen::VectorXd beta =
      (design.transpose() * design).ldlt().solve(design.transpose() * target);
  CHECK(std::abs(model.intercept - beta(0)) < 1e-8);
  CHECK(std::abs(model.coefficients(0) - beta(1)) < 1e-8);
  CHECK(std::abs(model.coefficients(1) - beta(2)) < 1e-8);
}

TEST_CASE("ar_fit recovers generator coefficients of a stable AR(3)") {
  Eigen::VectorXd x(400);
  x(0) = 0.3;
  x(1) = -0.2;
  x(2) = 0.1;
  for (int t = 3; t < 400; ++t)
    x(t) = 0.5 * x(t - 1) - 0.2 * x(t - 2) + 0.1 * x(t - 3) + 0.05;
  auto model = ar_fit(x, 3);
  CHECK(std::abs(model.coefficients(0) - 0.5) < 1e-6);
  CHECK(std::abs(model.coefficients(1) + 0.2) < 1e-6);
  CHECK(std::abs(model.coefficients(2) - 0.1) < 1e-6);
}

TEST_CASE("constant series fixed point under the minimum-norm solution") {
  Eigen::VectorXd x = Eigen::VectorXd::Constant(20, 5.0);
  auto model = ar_fit(x, 2);
  Eigen::VectorXd window = Eigen::VectorXd::Constant(2, 5.0);
  CHECK(ar_predict(model, window) == doctest::Approx(5.0).epsilon(1e-10));
}

TEST_CASE("ar_fit preconditions") {
  Eigen::VectorXd x(5);
  x << 1, 2, 3, 4, 5;
  CHECK_THROWS_AS(ar_fit(x, 4), std::invalid_argument);
  CHECK_THROWS_AS(ar_fit(x, 0), std::invalid_argument);
}

TEST_CASE("ar_predict arithmetic") {
  ArModel identity;
  identity.coefficients = Eigen::VectorXd::Ones(1);
  identity.intercept = 0;
  Eigen::VectorXd w1(1);
  w1 << 7;
  CHECK(ar_predict(identity, w1) == 7);

  ArModel avg;
  avg.coefficients = Eigen::VectorXd::Constant(2, 0.5);
  avg.intercept = 0;
  Eigen::VectorXd w2(2);
  w2 << 2, 4;
  CHECK(ar_predict(avg, w2) == 3);

  ArModel zero;
  zero.coefficients = Eigen::VectorXd::Zero(3);
  zero.intercept = 0;
  Eigen::VectorXd w3(3);
  w3 << 1, 2, 3;
  CHECK(ar_predict(zero, w3) == 0);

  CHECK_THROWS_AS(ar_predict(avg, w1), std::invalid_argument);
}

TEST_CASE("error_metrics") {
  Eigen::VectorXd a(2), b(2);
  a << 0, 0;
  b << 3, 4;
  auto m = error_metrics(a, b);
  CHECK(m.mse == doctest::Approx(12.5));
  CHECK(m.rmse == doctest::Approx(std::sqrt(12.5)));
  CHECK(m.mae == doctest::Approx(3.5));

  auto zero = error_metrics(b, b);
  CHECK(zero.mse == 0);
  CHECK(zero.rmse == 0);
  CHECK(zero.mae == 0);

  Eigen::VectorXd c(3);
  c.setZero();
  CHECK_THROWS_AS(error_metrics(a, c), std::invalid_argument);
  Eigen::VectorXd empty;
  CHECK_THROWS_AS(error_metrics(empty, empty), std::invalid_argument);
}

TEST_CASE("rmse squared equals mse") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> noise(0, 1);
  Eigen::MatrixXd p(30, 3), t(30, 3);
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    p.data()[i] = noise(rng);
    t.data()[i] = noise(rng);
  }
  auto m = error_metrics(p, t);
  CHECK(std::abs(m.rmse * m.rmse - m.mse) < 1e-12);
  CHECK(m.mse >= 0);
  CHECK(m.mae >= 0);
}

TEST_CASE("relative_improvement") {
  CHECK(relative_improvement(10, 7.84) == doctest::Approx(0.216));
  CHECK(relative_improvement(3, 3) == 0);
  CHECK(relative_improvement(5, 0) == 1.0);
  CHECK_THROWS_AS(relative_improvement(0, 1), std::invalid_argument);

  // monotone decreasing in the method error
  double prev = relative_improvement(2.0, 0.0);
  for (double err = 0.2; err < 4; err += 0.2) {
    double cur = relative_improvement(2.0, err);
    CHECK(cur < prev);
    prev = cur;
  }
}
