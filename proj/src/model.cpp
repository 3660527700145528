#include "pclda/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "pclda/error.hpp"
#include "pclda/projection.hpp"

namespace pclda {

namespace {

constexpr double kPriorTol = 1e-12;

void check_priors(double pi0, double pi1) {
  if (!(pi0 > 0.0 && pi0 < 1.0 && pi1 > 0.0 && pi1 < 1.0) ||
      std::abs(pi0 + pi1 - 1.0) > kPriorTol) {
    throw DomainError("priors must lie in (0,1) and sum to 1");
  }
}

Eigen::LLT<Matrix> cholesky_or_throw(const Matrix& m, const char* what) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) {
    throw DomainError(std::string(what) + " is not positive definite");
  }
  return llt;
}

Vector class_gap(const FactorModelParams& params) {
  if (params.alphas.size() < 2) throw DomainError("need at least two class means");
  return params.alphas[1] - params.alphas[0];
}

// Eigenvalues of A S A^T restricted to its column space, via the K x K
// matrix L^T A^T A L where S = L L^T. Sorted ascending.
Vector factor_signal_spectrum(const Matrix& loadings, const Matrix& s, const char* what) {
  const auto llt = cholesky_or_throw(s, what);
  const Matrix al = loadings * llt.matrixL().toDenseMatrix();
  Eigen::SelfAdjointEigenSolver<Matrix> es(al.transpose() * al, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("eigenvalue solver failed");
  return es.eigenvalues();
}

}  // namespace

void FactorModelParams::validate() const {
  const auto p_ = p();
  const auto k_ = k();
  if (p_ < 1 || k_ < 1) throw ShapeError("loadings must be non-empty");
  if (sigma_zy.rows() != k_ || sigma_zy.cols() != k_) {
    throw ShapeError("sigma_zy must be K x K");
  }
  if (sigma_w.rows() != p_ || sigma_w.cols() != p_) throw ShapeError("sigma_w must be p x p");
  if (priors.size() < 2) throw DomainError("need at least two classes");
  if (alphas.size() != priors.size()) throw ShapeError("one class mean per prior required");
  for (const auto& a : alphas) {
    if (a.size() != k_) throw ShapeError("class means must have K entries");
  }
  double total = 0.0;
  for (double pi : priors) {
    if (!(pi > 0.0 && pi < 1.0)) throw DomainError("each prior must lie in (0,1)");
    total += pi;
  }
  if (std::abs(total - 1.0) > kPriorTol) throw DomainError("priors must sum to 1");
  require_finite(loadings, "loadings");
  require_finite(sigma_zy, "sigma_zy");
  require_finite(sigma_w, "sigma_w");
  if (!sigma_zy.isApprox(sigma_zy.transpose(), 1e-12)) {
    throw DomainError("sigma_zy must be symmetric");
  }
  if (!sigma_w.isApprox(sigma_w.transpose(), 1e-12) && !sigma_w.isZero(0.0)) {
    throw DomainError("sigma_w must be symmetric");
  }
  if ((sigma_w.diagonal().array() < 0.0).any()) {
    throw DomainError("sigma_w must have a nonnegative diagonal");
  }
  cholesky_or_throw(sigma_zy, "sigma_zy");
  const Vector s = thin_svd(loadings).singular;
  if (!(s(s.size() - 1) > 1e-10 * s(0)) || k_ > p_) {
    throw DomainError("loadings must have full column rank K");
  }
}

Matrix latent_covariance(const FactorModelParams& params) {
  Vector mean = Vector::Zero(params.k());
  for (std::size_t c = 0; c < params.priors.size(); ++c) mean += params.priors[c] * params.alphas[c];
  Matrix out = params.sigma_zy;
  for (std::size_t c = 0; c < params.priors.size(); ++c) {
    const Vector d = params.alphas[c] - mean;
    out.noalias() += params.priors[c] * d * d.transpose();
  }
  return out;
}

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double mahalanobis_delta(const Vector& alpha0, const Vector& alpha1, const Matrix& sigma_zy) {
  if (alpha0.size() != alpha1.size() || sigma_zy.rows() != alpha0.size() ||
      sigma_zy.cols() != alpha0.size()) {
    throw ShapeError("mahalanobis_delta: dimension mismatch");
  }
  const auto llt = cholesky_or_throw(sigma_zy, "sigma_zy");
  const Vector half = llt.matrixL().solve(alpha1 - alpha0);
  return half.norm();
}

double mahalanobis_delta(const FactorModelParams& params) {
  return mahalanobis_delta(params.alphas.at(0), params.alphas.at(1), params.sigma_zy);
}

double delta_x(const FactorModelParams& params) {
  const Matrix total =
      params.loadings * params.sigma_zy * params.loadings.transpose() + params.sigma_w;
  const auto llt = cholesky_or_throw(total, "A Sigma_{Z|Y} A^T + Sigma_W");
  const Vector half = llt.matrixL().solve(params.loadings * class_gap(params));
  return half.norm();
}

double bayes_risk_z(double delta, double pi0, double pi1) {
  check_priors(pi0, pi1);
  if (!(delta >= 0.0) || !std::isfinite(delta)) {
    throw DomainError("separation must be finite and nonnegative");
  }
  if (delta == 0.0) return std::min(pi0, pi1);
  const double shift = std::log(pi1 / pi0) / delta;
  return 1.0 - pi1 * std_normal_cdf(delta / 2.0 + shift) -
         pi0 * std_normal_cdf(delta / 2.0 - shift);
}

double bayes_risk_x(const FactorModelParams& params) {
  return bayes_risk_z(delta_x(params), params.priors.at(0), params.priors.at(1));
}

double risk_gap(const FactorModelParams& params) {
  if (params.priors.size() != 2 || std::abs(params.priors[0] - params.priors[1]) > kPriorTol) {
    throw UnsupportedError("risk_gap: the exact gap is only available for equal priors");
  }
  return std_normal_cdf(mahalanobis_delta(params) / 2.0) - std_normal_cdf(delta_x(params) / 2.0);
}

NoiseSpectrum noise_spectrum(const Matrix& sigma_w) {
  NoiseSpectrum out;
  out.trace = sigma_w.trace();
  if (sigma_w.isDiagonal(0.0)) {
    out.top_eigenvalue = sigma_w.diagonal().maxCoeff();
    return out;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(sigma_w, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("noise_spectrum: eigen solver failed");
  out.top_eigenvalue = es.eigenvalues()(es.eigenvalues().size() - 1);
  return out;
}

SnrDiagnostics snr_diagnostics(const FactorModelParams& params, Eigen::Index n,
                               std::optional<NoiseSpectrum> noise) {
  if (n < 1) throw DomainError("snr_diagnostics: n must be at least 1");
  const NoiseSpectrum ns = noise ? *noise : noise_spectrum(params.sigma_w);
  if (!(ns.top_eigenvalue > 0.0)) {
    throw DomainError("snr_diagnostics: lambda_1(Sigma_W) = 0, SNR undefined");
  }
  const Vector cond = factor_signal_spectrum(params.loadings, params.sigma_zy, "sigma_zy");
  const Vector marg =
      factor_signal_spectrum(params.loadings, latent_covariance(params), "Sigma_Z");
  const double lambda_k = cond(0);

  SnrDiagnostics out;
  out.delta_w = ns.top_eigenvalue + ns.trace / static_cast<double>(n);
  out.xi_star = lambda_k / ns.top_eigenvalue;
  out.xi = lambda_k / out.delta_w;
  out.kappa = marg(marg.size() - 1) / marg(0);
  return out;
}

PopulationSummary population_summary(const FactorModelParams& params, Eigen::Index n,
                                     std::optional<NoiseSpectrum> noise) {
  PopulationSummary s;
  s.delta = mahalanobis_delta(params);
  s.delta_x = delta_x(params);
  s.r_z_star = bayes_risk_z(s.delta, params.priors.at(0), params.priors.at(1));
  s.r_x_star = bayes_risk_z(s.delta_x, params.priors.at(0), params.priors.at(1));
  const auto snr = snr_diagnostics(params, n, noise);
  s.xi_star = snr.xi_star;
  s.xi = snr.xi;
  s.delta_w = snr.delta_w;
  s.kappa = snr.kappa;
  return s;
}

OracleRule oracle_rules(const FactorModelParams& params) {
  if (params.priors.size() != 2) {
    throw UnsupportedError("oracle_rules: two-class parameters required");
  }
  const double pi0 = params.priors[0];
  const double pi1 = params.priors[1];
  check_priors(pi0, pi1);
  const Vector& a0 = params.alphas[0];
  const Vector& a1 = params.alphas[1];
  const Vector d = a1 - a0;
  const double log_ratio = std::log(pi1 / pi0);

  OracleRule rule;
  const auto cond = cholesky_or_throw(params.sigma_zy, "sigma_zy");
  rule.eta = cond.solve(d);
  rule.eta0 = -0.5 * (a0 + a1).dot(rule.eta) + log_ratio;

  const double w = pi0 * pi1;
  const auto marg = cholesky_or_throw(latent_covariance(params), "Sigma_Z");
  rule.beta = w * marg.solve(d);
  rule.beta0 = -0.5 * (a0 + a1).dot(rule.beta) + w * (1.0 - d.dot(rule.beta)) * log_ratio;

  const double delta2 = d.dot(rule.eta);
  rule.scale = (1.0 + w * delta2) / w;
  return rule;
}

BinaryFit oracle_ls_fit(const Matrix& z, std::span<const int> y) {
  return fit_binary(z, y, identity_projection(z.cols()));
}

}  // namespace pclda
