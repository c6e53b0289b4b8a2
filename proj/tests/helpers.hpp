// Shared oracles and utilities for the test suites. Everything here is an
// independent re-derivation used to cross-check library results; none of it
// calls back into the code under test.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace testutil {

// Composite Simpson quadrature on [lo, hi] with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double lo, double hi, int n) {
  if (n % 2 != 0) ++n;
  const double h = (hi - lo) / n;
  double acc = f(lo) + f(hi);
  for (int i = 1; i < n; ++i) acc += f(lo + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

// Standard normal upper-tail probability via the complementary error function.
inline double normal_upper_tail(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

// Row-stochastic random matrix with strictly positive entries.
inline Eigen::MatrixXd random_stochastic(int n, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i) {
    double row_sum = 0.0;
    for (int j = 0; j < n; ++j) {
      a(i, j) = u(gen);
      row_sum += a(i, j);
    }
    for (int j = 0; j < n; ++j) a(i, j) /= row_sum;
  }
  return a;
}

// Random probability vector with strictly positive entries.
inline Eigen::VectorXd random_distribution(int n, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  Eigen::VectorXd v(n);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    v(i) = u(gen);
    sum += v(i);
  }
  return v / sum;
}

// Left eigenvector check helper: max_j |(pi^T A - pi^T)_j|.
inline double stationarity_residual(const Eigen::VectorXd& pi, const Eigen::MatrixXd& a) {
  Eigen::VectorXd lhs = a.transpose() * pi;
  return (lhs - pi).lpNorm<Eigen::Infinity>();
}

}  // namespace testutil
