#pragma once

#include <cstdint>
#include <vector>

#include "pclda/numerics.hpp"
#include "pclda/rng.hpp"

namespace pclda::test {

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.normal();
  return m;
}

inline Vector random_vector(Eigen::Index n, Rng& rng) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.normal();
  return v;
}

inline Matrix random_spd(Eigen::Index k, Rng& rng) {
  const Matrix g = random_matrix(k, k, rng);
  return g * g.transpose() + 0.5 * Matrix::Identity(k, k);
}

// Two Gaussian clouds with means 0 and `shift` along every coordinate.
inline void two_clouds(Eigen::Index n, Eigen::Index p, double shift, Rng& rng, Matrix& x,
                       std::vector<int>& y) {
  x = random_matrix(n, p, rng);
  y.assign(static_cast<std::size_t>(n), 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    y[static_cast<std::size_t>(i)] = static_cast<int>(i % 2);
    if (i % 2) x.row(i).array() += shift;
  }
}

inline double rel_diff(const Matrix& a, const Matrix& b) {
  const double scale = std::max(1.0, b.norm());
  return (a - b).norm() / scale;
}

}  // namespace pclda::test

#include "pclda/model.hpp"

namespace pclda::test {

// Two-class parameters with a dense, invertible noise covariance.
inline FactorModelParams random_params(Eigen::Index p, Eigen::Index k, Rng& rng,
                                       double pi1 = 0.5) {
  FactorModelParams params;
  params.loadings = random_matrix(p, k, rng);
  params.sigma_zy = random_spd(k, rng);
  params.sigma_w = random_spd(p, rng);
  params.alphas = {random_vector(k, rng), random_vector(k, rng)};
  params.priors = {1.0 - pi1, pi1};
  return params;
}

inline FactorModelParams scalar_params(double sigma_w) {
  FactorModelParams params;
  params.loadings = Matrix::Ones(1, 1);
  params.sigma_zy = Matrix::Ones(1, 1);
  params.sigma_w = Matrix::Constant(1, 1, sigma_w);
  params.alphas = {Vector::Zero(1), Vector::Constant(1, 2.0)};
  params.priors = {0.5, 0.5};
  return params;
}

}  // namespace pclda::test
