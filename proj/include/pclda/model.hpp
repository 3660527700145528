#pragma once

// Population-level quantities of the latent factor model
//
//   X = A Z + W,   Z | Y = k ~ N_K(alpha_k, Sigma_{Z|Y}),   W ~ (0, Sigma_W),
//
// with W independent of (Z, Y): separations, Bayes risks, SNR diagnostics and
// the oracle linear rules.

#include <optional>
#include <span>
#include <vector>

#include "pclda/classifier.hpp"
#include "pclda/numerics.hpp"

namespace pclda {

struct FactorModelParams {
  Matrix loadings;            // A, p x K
  Matrix sigma_zy;            // Sigma_{Z|Y}, K x K, positive definite
  Matrix sigma_w;             // Sigma_W, p x p, positive semi-definite
  std::vector<Vector> alphas; // class means alpha_k in R^K, one per class
  std::vector<double> priors; // pi_k

  Eigen::Index p() const { return loadings.rows(); }
  Eigen::Index k() const { return loadings.cols(); }
  int num_classes() const { return static_cast<int>(priors.size()); }

  /// Checks every structural invariant; throws ShapeError or DomainError.
  void validate() const;
};

/// Unconditional covariance of Z: Sigma_{Z|Y} + sum_k pi_k (alpha_k - abar)(alpha_k - abar)^T.
/// Reduces to Sigma_{Z|Y} + pi0 pi1 d d^T for two classes.
Matrix latent_covariance(const FactorModelParams& params);

/// Standard normal CDF.
double std_normal_cdf(double x);

/// sqrt((alpha1 - alpha0)^T Sigma^{-1} (alpha1 - alpha0)) via a Cholesky solve.
double mahalanobis_delta(const Vector& alpha0, const Vector& alpha1, const Matrix& sigma_zy);

/// Delta for classes 0 and 1 of `params`.
double mahalanobis_delta(const FactorModelParams& params);

/// Separation of the two classes in the observed space:
/// sqrt(d^T A^T (A Sigma_{Z|Y} A^T + Sigma_W)^{-1} A d), d = alpha1 - alpha0.
double delta_x(const FactorModelParams& params);

/// Two-class LDA risk for separation `delta`. Returns min(pi0, pi1) at delta = 0.
double bayes_risk_z(double delta, double pi0, double pi1);

/// Bayes risk of classifying from X; bayes_risk_z evaluated at delta_x.
double bayes_risk_x(const FactorModelParams& params);

/// R_x* - R_z* = Phi(Delta/2) - Phi(Delta_x/2). Only defined for equal priors;
/// anything else throws UnsupportedError.
double risk_gap(const FactorModelParams& params);

/// Spectral summary of Sigma_W, reusable when many parameter sets share it.
struct NoiseSpectrum {
  double top_eigenvalue = 0.0;
  double trace = 0.0;
};

NoiseSpectrum noise_spectrum(const Matrix& sigma_w);

struct SnrDiagnostics {
  double xi_star = 0.0;  // lambda_K(A Sigma_{Z|Y} A^T) / lambda_1(Sigma_W)
  double xi = 0.0;       // lambda_K(A Sigma_{Z|Y} A^T) / delta_w
  double delta_w = 0.0;  // lambda_1(Sigma_W) + tr(Sigma_W) / n
  double kappa = 1.0;    // lambda_1(A Sigma_Z A^T) / lambda_K(A Sigma_Z A^T)
};

/// Throws DomainError if lambda_1(Sigma_W) = 0.
SnrDiagnostics snr_diagnostics(const FactorModelParams& params, Eigen::Index n,
                               std::optional<NoiseSpectrum> noise = std::nullopt);

struct PopulationSummary {
  double delta = 0.0;
  double delta_x = 0.0;
  double r_z_star = 0.0;
  double r_x_star = 0.0;
  double xi_star = 0.0;
  double xi = 0.0;
  double delta_w = 0.0;
  double kappa = 1.0;
};

PopulationSummary population_summary(const FactorModelParams& params, Eigen::Index n,
                                     std::optional<NoiseSpectrum> noise = std::nullopt);

/// The Bayes rule on Z in both parameterizations. For every z,
/// z^T eta + eta0 = scale * (z^T beta + beta0).
struct OracleRule {
  Vector eta;
  double eta0 = 0.0;
  Vector beta;
  double beta0 = 0.0;
  double scale = 1.0;  // (1 + pi0 pi1 Delta^2) / (pi0 pi1)

  double eta_value(const Vector& z) const { return z.dot(eta) + eta0; }
  double beta_value(const Vector& z) const { return z.dot(beta) + beta0; }
  int predict(const Vector& z) const { return eta_value(z) >= 0.0 ? 1 : 0; }
};

/// Two-class parameters only.
OracleRule oracle_rules(const FactorModelParams& params);

/// Least-squares discriminant fit on the latent factors themselves (B = I_K).
BinaryFit oracle_ls_fit(const Matrix& z, std::span<const int> y);

}  // namespace pclda
