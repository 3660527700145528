#include <doctest.h>

#include <cmath>

#include "pclda/error.hpp"
#include "pclda/model.hpp"
#include "pclda/simulation.hpp"
#include "support.hpp"

using namespace pclda;
using namespace pclda::test;

namespace {

// Reference values of the standard normal CDF (scipy.stats.norm).
constexpr double kOneMinusPhi1 = 0.15865525393145707;
constexpr double kOneMinusPhiRoot2Half = 0.23975006109347663;
constexpr double kPhi1MinusPhiRoot2Half = 0.08109480716201956;

double dense_delta_x2(const FactorModelParams& p) {
  const Vector d = p.alphas[1] - p.alphas[0];
  const Matrix total = p.loadings * p.sigma_zy * p.loadings.transpose() + p.sigma_w;
  const Vector ad = p.loadings * d;
  return ad.dot(total.fullPivLu().inverse() * ad);
}

}  // namespace

TEST_CASE("std_normal_cdf reference values") {
  CHECK(std_normal_cdf(0.0) == 0.5);
  CHECK(std::abs(std_normal_cdf(1.96) - 0.9750021048517795) < 1e-15);
  CHECK(std::abs(1.0 - std_normal_cdf(1.0) - kOneMinusPhi1) < 1e-15);
  CHECK(std::abs(std_normal_cdf(-8.0) - 6.22096057427178e-16) < 1e-25);
}

TEST_CASE("mahalanobis_delta") {
  Vector a0 = Vector::Zero(2), a1(2);
  a1 << 3, 4;
  CHECK(mahalanobis_delta(a0, a1, Matrix::Identity(2, 2)) == doctest::Approx(5.0));
  CHECK(mahalanobis_delta(a1, a1, Matrix::Identity(2, 2)) == 0.0);
  CHECK(mahalanobis_delta(Vector::Zero(1), Vector::Constant(1, 2.0), Matrix::Constant(1, 1, 4.0)) ==
        doctest::Approx(1.0));

  Matrix bad(2, 2);
  bad << 1, 2, 2, 1;
  CHECK_THROWS_AS(mahalanobis_delta(a0, a1, bad), DomainError);
  CHECK_THROWS_AS(mahalanobis_delta(Vector::Zero(3), a1, Matrix::Identity(2, 2)), ShapeError);
}

TEST_CASE("delta_x scalar example and noiseless limit") {
  const auto params = scalar_params(1.0);
  CHECK(delta_x(params) * delta_x(params) == doctest::Approx(2.0));
  CHECK(mahalanobis_delta(params) == doctest::Approx(2.0));

  Rng rng(4);
  auto p = random_params(4, 4, rng);
  p.sigma_w = 1e-12 * Matrix::Identity(4, 4);
  CHECK(std::abs(delta_x(p) - mahalanobis_delta(p)) < 1e-4);
}

TEST_CASE("delta_x matches a dense-solve oracle") {
  Rng rng(21);
  for (int t = 0; t < 50; ++t) {
    const auto params = random_params(2, 2, rng);
    const double dx = delta_x(params);
    CHECK(dx * dx == doctest::Approx(dense_delta_x2(params)).epsilon(1e-10));
  }
}

TEST_CASE("Woodbury form of the separation loss") {
  Rng rng(8);
  for (int t = 0; t < 50; ++t) {
    const Eigen::Index k = 1 + static_cast<Eigen::Index>(rng.below(3));
    const Eigen::Index p = k + static_cast<Eigen::Index>(rng.below(4));
    const auto params = random_params(p, k, rng);
    const double delta = mahalanobis_delta(params);
    const double dx = delta_x(params);

    Eigen::SelfAdjointEigenSolver<Matrix> es(params.sigma_zy);
    const Matrix half = es.operatorSqrt();
    const Matrix inv_half = es.operatorInverseSqrt();
    const Vector d = params.alphas[1] - params.alphas[0];
    const Matrix inner = Matrix::Identity(k, k) +
                         half * params.loadings.transpose() *
                             params.sigma_w.fullPivLu().inverse() * params.loadings * half;
    const Vector u = inv_half * d;
    const double expected = u.dot(inner.fullPivLu().inverse() * u);
    CHECK(delta * delta - dx * dx == doctest::Approx(expected).epsilon(1e-8));
  }
}

TEST_CASE("bayes_risk_z") {
  CHECK(bayes_risk_z(0.0, 0.5, 0.5) == 0.5);
  CHECK(std::abs(bayes_risk_z(2.0, 0.5, 0.5) - kOneMinusPhi1) < 1e-14);
  CHECK(bayes_risk_z(0.0, 0.1, 0.9) == doctest::Approx(0.1));
  CHECK(std::abs(bayes_risk_z(1e-8, 0.1, 0.9) - 0.1) < 1e-6);

  double prev = 0.5;
  for (int i = 1; i <= 100; ++i) {
    const double r = bayes_risk_z(0.08 * i, 0.5, 0.5);
    CHECK(r < prev);
    prev = r;
  }

  CHECK_THROWS_AS(bayes_risk_z(1.0, 0.0, 1.0), DomainError);
  CHECK_THROWS_AS(bayes_risk_z(1.0, 0.3, 0.3), DomainError);
  CHECK_THROWS_AS(bayes_risk_z(-1.0, 0.5, 0.5), DomainError);
}

TEST_CASE("bayes_risk_x and risk_gap") {
  const auto scalar = scalar_params(1.0);
  CHECK(std::abs(bayes_risk_x(scalar) - kOneMinusPhiRoot2Half) < 1e-14);
  CHECK(std::abs(risk_gap(scalar) - kPhi1MinusPhiRoot2Half) < 1e-14);

  const auto quiet = scalar_params(1e-10);
  CHECK(risk_gap(quiet) <= 1e-4);
  CHECK(std::abs(bayes_risk_x(quiet) - bayes_risk_z(2.0, 0.5, 0.5)) < 1e-6);

  auto same = scalar_params(1.0);
  same.alphas[1] = same.alphas[0];
  CHECK(risk_gap(same) == 0.0);

  auto skewed = scalar_params(1.0);
  skewed.priors = {0.3, 0.7};
  CHECK_THROWS_AS(risk_gap(skewed), UnsupportedError);
}

TEST_CASE("ordering on random parameters") {
  Rng rng(33);
  for (int t = 0; t < 100; ++t) {
    const auto params = random_params(6, 3, rng, rng.uniform(0.1, 0.9));
    const double delta = mahalanobis_delta(params);
    CHECK(delta_x(params) <= delta + 1e-10);
    CHECK(bayes_risk_x(params) >= bayes_risk_z(delta, params.priors[0], params.priors[1]) - 1e-10);
  }
}

TEST_CASE("snr_diagnostics closed form") {
  FactorModelParams params;
  const double lambda = 2.0, sigma2 = 0.5;
  params.loadings = Matrix::Identity(3, 3);
  params.sigma_zy = lambda * Matrix::Identity(3, 3);
  params.sigma_w = sigma2 * Matrix::Identity(3, 3);
  params.alphas = {Vector::Zero(3), Vector::Zero(3)};
  params.priors = {0.5, 0.5};
  const auto snr = snr_diagnostics(params, 10);
  CHECK(snr.xi_star == doctest::Approx(lambda / sigma2));
  CHECK(snr.delta_w == doctest::Approx(sigma2 * (1.0 + 3.0 / 10.0)));
  CHECK(snr.xi == doctest::Approx(lambda / snr.delta_w));
  CHECK(snr.xi <= snr.xi_star);

  params.sigma_zy = Matrix::Identity(3, 3);
  Rng rng(6);
  params.loadings = random_matrix(5, 3, rng).householderQr().householderQ() * Matrix::Identity(5, 3);
  params.sigma_w = Matrix::Identity(5, 5);
  CHECK(snr_diagnostics(params, 10).kappa == doctest::Approx(1.0));

  params.sigma_w = Matrix::Zero(5, 5);
  CHECK_THROWS_AS(snr_diagnostics(params, 10), DomainError);
  params.sigma_w = Matrix::Identity(5, 5);
  CHECK_THROWS_AS(snr_diagnostics(params, 0), DomainError);
}

TEST_CASE("snr_diagnostics agrees with a dense eigen solve") {
  Rng rng(44);
  for (int t = 0; t < 20; ++t) {
    const auto params = random_params(7, 3, rng);
    const auto snr = snr_diagnostics(params, 25);
    const Matrix signal = params.loadings * params.sigma_zy * params.loadings.transpose();
    Eigen::SelfAdjointEigenSolver<Matrix> sig(signal), noise(params.sigma_w);
    const double lk = sig.eigenvalues()(7 - 3);
    const double l1w = noise.eigenvalues()(6);
    CHECK(snr.xi_star == doctest::Approx(lk / l1w).epsilon(1e-9));
    CHECK(snr.delta_w == doctest::Approx(l1w + params.sigma_w.trace() / 25).epsilon(1e-9));
    const Matrix marg = params.loadings * latent_covariance(params) * params.loadings.transpose();
    Eigen::SelfAdjointEigenSolver<Matrix> m(marg);
    CHECK(snr.kappa == doctest::Approx(m.eigenvalues()(6) / m.eigenvalues()(4)).epsilon(1e-9));
  }
}

TEST_CASE("latent_covariance two-class form") {
  Rng rng(9);
  const auto params = random_params(4, 3, rng, 0.3);
  const Vector d = params.alphas[1] - params.alphas[0];
  const Matrix expected = params.sigma_zy + 0.3 * 0.7 * d * d.transpose();
  CHECK((latent_covariance(params) - expected).norm() < 1e-12);
}

TEST_CASE("oracle_rules scalar example") {
  FactorModelParams params;
  params.loadings = Matrix::Ones(1, 1);
  params.sigma_zy = Matrix::Ones(1, 1);
  params.sigma_w = Matrix::Ones(1, 1);
  params.alphas = {Vector::Constant(1, -1.0), Vector::Constant(1, 1.0)};
  params.priors = {0.5, 0.5};
  const auto rule = oracle_rules(params);
  CHECK(rule.eta(0) == doctest::Approx(2.0));
  CHECK(rule.eta0 == doctest::Approx(0.0));
  CHECK(rule.beta(0) == doctest::Approx(0.25));
  CHECK(rule.beta0 == doctest::Approx(0.0));
  CHECK(rule.scale == doctest::Approx(8.0));
}

TEST_CASE("oracle_rules equal priors drop the log term") {
  Rng rng(10);
  const auto params = random_params(3, 2, rng);
  const auto rule = oracle_rules(params);
  CHECK(rule.eta0 == -0.5 * (params.alphas[0] + params.alphas[1]).dot(rule.eta));
}

TEST_CASE("oracle_rules sign agreement and scale identity") {
  Rng rng(12);
  for (int t = 0; t < 100; ++t) {
    const auto params = random_params(3, 1 + static_cast<Eigen::Index>(rng.below(3)), rng,
                                      rng.uniform(0.05, 0.95));
    const auto rule = oracle_rules(params);
    for (int s = 0; s < 20; ++s) {
      const Vector z = 3.0 * random_vector(params.k(), rng);
      const double e = rule.eta_value(z), b = rule.beta_value(z);
      CHECK(std::abs(e - rule.scale * b) <= 1e-9 * std::max(1.0, std::abs(e)));
      if (std::abs(b) > 1e-9) CHECK((e >= 0) == (b >= 0));
    }
  }
}

TEST_CASE("oracle_rules rejects multi-class parameters") {
  Rng rng(13);
  auto params = random_params(3, 2, rng);
  params.alphas.push_back(random_vector(2, rng));
  params.priors = {0.2, 0.3, 0.5};
  CHECK_THROWS_AS(oracle_rules(params), UnsupportedError);
}

TEST_CASE("params validation") {
  Rng rng(14);
  auto params = random_params(3, 2, rng);
  CHECK_NOTHROW(params.validate());
  auto bad = params;
  bad.priors = {0.5, 0.6};
  CHECK_THROWS_AS(bad.validate(), DomainError);
  bad = params;
  bad.loadings.col(1) = bad.loadings.col(0);
  CHECK_THROWS_AS(bad.validate(), DomainError);
  bad = params;
  bad.sigma_w = Matrix::Identity(2, 2);
  CHECK_THROWS_AS(bad.validate(), ShapeError);
  bad = params;
  bad.alphas.pop_back();
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("oracle_ls_fit hand example") {
  Matrix z(4, 1);
  z << -1, -1, 1, 1;
  const std::vector<int> y{0, 0, 1, 1};
  const auto fit = oracle_ls_fit(z, y);
  CHECK(fit.theta(0) == doctest::Approx(0.5));
  CHECK(std::abs(fit.beta0) < 1e-15);
  CHECK(decision_value(fit, Vector::Zero(1)) == doctest::Approx(0.0));

  Matrix zz(8, 1);
  zz << z, z;
  std::vector<int> yy = y;
  yy.insert(yy.end(), y.begin(), y.end());
  const auto twice = oracle_ls_fit(zz, yy);
  CHECK(twice.theta(0) == doctest::Approx(fit.theta(0)));
  CHECK(twice.beta0 == doctest::Approx(fit.beta0));

  const std::vector<int> single{1, 1, 1, 1};
  CHECK_THROWS_AS(oracle_ls_fit(z, single), DegenerateLabelsError);
}

TEST_CASE("oracle_ls_fit test error tracks the Bayes risk at delta 4") {
  FactorModelParams params;
  params.loadings = Matrix::Identity(2, 2);
  params.sigma_zy = Matrix::Identity(2, 2);
  params.sigma_w = Matrix::Identity(2, 2);
  params.alphas = {Vector::Zero(2), Vector::Zero(2)};
  params.alphas[1] << 4.0, 0.0;
  params.priors = {0.5, 0.5};
  const auto train = sample_dataset(params, 2000, 1);
  const auto test = sample_dataset(params, 20000, 2);
  const auto fit = oracle_ls_fit(train.z, train.y);
  const double err = misclassification_rate(predict(fit, test.z), test.y);
  CHECK(std::abs(err - bayes_risk_z(4.0, 0.5, 0.5)) < 0.02);
}
