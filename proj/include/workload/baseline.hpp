#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace wl::baseline {

// Autoregressive model x_t = intercept + sum_j coeff[j] * x_{t-1-j}.
template <typename Scalar>
struct ArModelT {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> coefficients;  // a_1..a_p
  Scalar intercept = 0;

  int order() const { return static_cast<int>(coefficients.size()); }
};
using ArModel = ArModelT<double>;

// Least-squares fit; rank-deficient systems get the minimum-norm solution.
template <typename Derived>
ArModelT<typename Derived::Scalar> ar_fit(const Eigen::MatrixBase<Derived>& x, int order) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = x.size();
  if (order < 1) throw std::invalid_argument("ar_fit: order must be >= 1");
  if (n <= order + 1) throw std::invalid_argument("ar_fit: series too short for order");

  const Eigen::Index rows = n - order;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> design(rows, order + 1);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> target(rows);
  for (Eigen::Index t = 0; t < rows; ++t) {
    design(t, 0) = Scalar(1);
    for (int j = 0; j < order; ++j) design(t, 1 + j) = x(order + t - 1 - j);
    target(t) = x(order + t);
  }
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> beta =
      design.completeOrthogonalDecomposition().solve(target);
  ArModelT<Scalar> model;
  model.intercept = beta(0);
  model.coefficients = beta.tail(order);
  return model;
}

// window holds the most recent values, oldest first.
template <typename Scalar, typename Derived>
Scalar ar_predict(const ArModelT<Scalar>& model, const Eigen::MatrixBase<Derived>& window) {
  const int p = model.order();
  if (window.size() < p) throw std::invalid_argument("ar_predict: window shorter than order");
  Scalar y = model.intercept;
  for (int j = 0; j < p; ++j) y += model.coefficients(j) * window(window.size() - 1 - j);
  return y;
}

struct ErrorMetrics {
  double mse = 0;
  double rmse = 0;
  double mae = 0;
};

// Componentwise errors averaged over all samples and dimensions.
template <typename DerivedA, typename DerivedB>
ErrorMetrics error_metrics(const Eigen::MatrixBase<DerivedA>& predictions,
                           const Eigen::MatrixBase<DerivedB>& truths) {
  if (predictions.rows() != truths.rows() || predictions.cols() != truths.cols() ||
      predictions.size() == 0)
    throw std::invalid_argument("error_metrics: shape mismatch or empty input");
  const auto diff = (predictions - truths).eval();
  ErrorMetrics m;
  m.mse = diff.array().square().mean();
  m.rmse = std::sqrt(m.mse);
  m.mae = diff.array().abs().mean();
  return m;
}

inline double relative_improvement(double baseline_err, double method_err) {
  if (!(baseline_err > 0))
    throw std::invalid_argument("relative_improvement: baseline error must be > 0");
  return (baseline_err - method_err) / baseline_err;
}

}  // namespace wl::baseline
