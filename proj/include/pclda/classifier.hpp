#pragma once

// Regression-based linear discriminant on projected features.
//
// Given a projection B, the binary rule is
//
//   theta = B (Pi_n X B)^+ Y,
//   beta0 = -(mu0 + mu1)^T theta / 2 + pi0 pi1 [1 - (mu1 - mu0)^T theta] log(pi1 / pi0),
//   g(x)  = 1{x^T theta + beta0 >= 0}.
//
// The multi-class rule fits one such discriminant per (baseline, class) pair
// and picks the class with the largest rescaled score.

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pclda/numerics.hpp"
#include "pclda/projection.hpp"

namespace pclda {

using Labels = std::vector<int>;

struct BinaryFit {
  Vector theta;
  double beta0 = 0.0;
  double pi0 = 0.5;
  double pi1 = 0.5;
  Vector mu0;
  Vector mu1;
  Provenance provenance = Provenance::identity;
  Eigen::Index rank = 0;  // columns of B

  Eigen::Index p() const { return theta.size(); }
};

BinaryFit fit_binary(const Matrix& x, std::span<const int> y, const Projection& basis);

/// x^T theta + beta0.
double decision_value(const BinaryFit& fit, const Vector& x);
Vector decision_values(const BinaryFit& fit, const Matrix& x);

/// 1 iff the decision value is >= 0.
int predict(const BinaryFit& fit, const Vector& x);
Labels predict(const BinaryFit& fit, const Matrix& x);

/// Fit whose principal-component basis comes from an independent unlabelled
/// design `x_tilde` with the same columns.
BinaryFit fit_with_auxiliary(const Matrix& x, std::span<const int> y, const Matrix& x_tilde,
                             const ProjectionSpec& spec);

/// Stratified fold assignment used by cross-fitting: entry i is the fold of
/// row i. Every fold receives at least one row of each class when
/// kfolds <= the smallest class count.
std::vector<int> stratified_folds(std::span<const int> y, int kfolds, std::uint64_t seed);

/// k-fold cross-fitting. For each fold the basis is built from the fold's rows
/// and the discriminant from the remaining rows; theta and beta0 are averaged
/// over folds in fold order. pi and mu are reported on the full data.
BinaryFit fit_crossfit(const Matrix& x, std::span<const int> y, const ProjectionSpec& spec,
                       int kfolds = 5, std::uint64_t seed = 0);

struct PairwiseRule {
  int label = 0;        // class compared against the baseline
  Vector theta;
  double beta0 = 0.0;
  double denom = 1.0;   // pi~_b pi~_l [1 - (mu_l - mu_b)^T theta], clamped below at kMinDenom
};

struct MulticlassFit {
  static constexpr double kMinDenom = 1e-8;

  int num_classes = 0;
  int baseline = 0;
  std::vector<PairwiseRule> rules;  // one per non-baseline class, ascending label
  std::vector<Eigen::Index> counts; // n_l per class
  std::vector<Vector> means;        // mu_l per class
  Provenance provenance = Provenance::identity;
  Eigen::Index rank = 0;
  std::vector<std::string> warnings;

  Eigen::Index p() const { return means.empty() ? 0 : means.front().size(); }
};

/// Labels must be 0..L-1 with every class present.
MulticlassFit fit_multiclass(const Matrix& x, std::span<const int> y, const Projection& basis,
                             int baseline = 0);

/// Scores G(l | baseline)(x); the baseline entry is exactly 0.
Vector multiclass_scores(const MulticlassFit& fit, const Vector& x);

/// Argmax of the scores; ties go to the smallest class index.
int predict_multiclass(const MulticlassFit& fit, const Vector& x);
Labels predict_multiclass(const MulticlassFit& fit, const Matrix& x);

/// One multi-class fit per baseline class, combined by averaging softmax
/// posteriors.
struct AveragedMulticlassFit {
  static constexpr double kScoreCap = 700.0;

  std::vector<MulticlassFit> per_baseline;  // entry k uses baseline k

  int num_classes() const {
    return per_baseline.empty() ? 0 : per_baseline.front().num_classes;
  }
};

AveragedMulticlassFit fit_multiclass_averaged(const Matrix& x, std::span<const int> y,
                                              const Projection& basis);

/// Averaged posterior vector; sums to 1.
Vector averaged_posterior(const AveragedMulticlassFit& fit, const Vector& x);

std::pair<int, Vector> predict_multiclass_averaged(const AveragedMulticlassFit& fit,
                                                   const Vector& x);

/// Convenience form: fits every baseline on (x, y, basis) and classifies `query`.
std::pair<int, Vector> predict_multiclass_averaged(const Matrix& x, std::span<const int> y,
                                                   const Projection& basis,
                                                   const Vector& query);

}  // namespace pclda
