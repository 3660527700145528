#include "pclda/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pclda/error.hpp"
#include "pclda/rng.hpp"

namespace pclda {

namespace {

struct PairCore {
  Vector theta;
  double beta0 = 0.0;
  double denom = 0.0;  // pi0 pi1 [1 - (mu1 - mu0)^T theta]
};

// Discriminant for one (reference, target) pair of classes. `y01` encodes the
// target class as 1.
PairCore fit_pair(const Matrix& x, const Vector& y01, const Matrix& basis, const Vector& mu0,
                  const Vector& mu1, double pi0, double pi1) {
  const Matrix projected = center_columns(x).data * basis;
  PairCore core;
  core.theta = basis * min_norm_lstsq(projected, y01);
  const double w = pi0 * pi1;
  core.denom = w * (1.0 - (mu1 - mu0).dot(core.theta));
  core.beta0 = -0.5 * (mu0 + mu1).dot(core.theta) + core.denom * std::log(pi1 / pi0);
  return core;
}

void check_design(const Matrix& x, std::size_t n_labels, const Projection& basis) {
  if (x.rows() == 0 || x.cols() == 0) throw ShapeError("design matrix is empty");
  if (static_cast<Eigen::Index>(n_labels) != x.rows()) {
    throw ShapeError("got " + std::to_string(n_labels) + " labels for " +
                     std::to_string(x.rows()) + " rows");
  }
  if (basis.basis.rows() != x.cols()) {
    throw ShapeError("projection has " + std::to_string(basis.basis.rows()) +
                     " rows but the design has " + std::to_string(x.cols()) + " columns");
  }
  if (basis.basis.cols() < 1) throw ShapeError("projection has no columns");
  require_finite(x, "design matrix");
}

void check_query(Eigen::Index p, const Vector& x) {
  if (x.size() != p) {
    throw ShapeError("query has " + std::to_string(x.size()) + " entries, model expects " +
                     std::to_string(p));
  }
}

Vector class_mean(const Matrix& x, std::span<const int> y, int label) {
  Vector sum = Vector::Zero(x.cols());
  Eigen::Index count = 0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    if (y[i] == label) {
      sum += x.row(i).transpose();
      ++count;
    }
  }
  return sum / static_cast<double>(count);
}

// Validates binary labels and fills the class proportions and means.
BinaryFit binary_stats(const Matrix& x, std::span<const int> y) {
  if (x.rows() < 2) throw ShapeError("a binary fit needs at least two rows");
  Eigen::Index n1 = 0;
  for (int label : y) {
    if (label != 0 && label != 1) {
      throw DomainError("binary labels must be 0 or 1, got " + std::to_string(label));
    }
    n1 += label;
  }
  const Eigen::Index n = x.rows();
  const Eigen::Index n0 = n - n1;
  if (n0 == 0 || n1 == 0) {
    throw DegenerateLabelsError("binary fit: labels contain only class " +
                                std::to_string(n0 == 0 ? 1 : 0));
  }
  BinaryFit fit;
  fit.pi0 = static_cast<double>(n0) / static_cast<double>(n);
  fit.pi1 = static_cast<double>(n1) / static_cast<double>(n);
  fit.mu0 = class_mean(x, y, 0);
  fit.mu1 = class_mean(x, y, 1);
  return fit;
}

}  // namespace

BinaryFit fit_binary(const Matrix& x, std::span<const int> y, const Projection& basis) {
  check_design(x, y.size(), basis);
  BinaryFit fit = binary_stats(x, y);
  Vector y01(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) y01(i) = y[i];
  const PairCore core = fit_pair(x, y01, basis.basis, fit.mu0, fit.mu1, fit.pi0, fit.pi1);
  fit.theta = core.theta;
  fit.beta0 = core.beta0;
  fit.provenance = basis.provenance;
  fit.rank = basis.rank();
  return fit;
}

double decision_value(const BinaryFit& fit, const Vector& x) {
  check_query(fit.p(), x);
  return x.dot(fit.theta) + fit.beta0;
}

Vector decision_values(const BinaryFit& fit, const Matrix& x) {
  if (x.cols() != fit.p()) {
    throw ShapeError("design has " + std::to_string(x.cols()) + " columns, model expects " +
                     std::to_string(fit.p()));
  }
  Vector out = x * fit.theta;
  out.array() += fit.beta0;
  return out;
}

int predict(const BinaryFit& fit, const Vector& x) { return decision_value(fit, x) >= 0.0 ? 1 : 0; }

Labels predict(const BinaryFit& fit, const Matrix& x) {
  const Vector g = decision_values(fit, x);
  Labels out(static_cast<std::size_t>(g.size()));
  for (Eigen::Index i = 0; i < g.size(); ++i) out[i] = g(i) >= 0.0 ? 1 : 0;
  return out;
}

BinaryFit fit_with_auxiliary(const Matrix& x, std::span<const int> y, const Matrix& x_tilde,
                             const ProjectionSpec& spec) {
  if (spec.kind != ProjectionSpec::Kind::principal_components) {
    throw DomainError("fit_with_auxiliary requires a principal-component projection");
  }
  return fit_binary(x, y, resolve_projection(spec, x, &x_tilde));
}

std::vector<int> stratified_folds(std::span<const int> y, int kfolds, std::uint64_t seed) {
  if (kfolds < 2) throw DomainError("cross-fitting needs at least 2 folds");
  int max_label = -1;
  for (int label : y) {
    if (label < 0) throw DomainError("labels must be nonnegative");
    max_label = std::max(max_label, label);
  }
  std::vector<std::vector<Eigen::Index>> by_class(static_cast<std::size_t>(max_label + 1));
  for (std::size_t i = 0; i < y.size(); ++i) by_class[y[i]].push_back(static_cast<Eigen::Index>(i));

  Rng rng(seed);
  std::vector<int> fold(y.size(), 0);
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    auto& members = by_class[c];
    if (members.empty()) continue;
    if (static_cast<int>(members.size()) < kfolds) {
      throw DomainError("class " + std::to_string(c) + " has " + std::to_string(members.size()) +
                        " samples, fewer than " + std::to_string(kfolds) + " folds");
    }
    for (std::size_t i = members.size() - 1; i > 0; --i) {
      std::swap(members[i], members[rng.below(i + 1)]);
    }
    for (std::size_t j = 0; j < members.size(); ++j) {
      fold[members[j]] = static_cast<int>(j % static_cast<std::size_t>(kfolds));
    }
  }
  return fold;
}

BinaryFit fit_crossfit(const Matrix& x, std::span<const int> y, const ProjectionSpec& spec,
                       int kfolds, std::uint64_t seed) {
  if (spec.kind != ProjectionSpec::Kind::principal_components) {
    throw DomainError("cross-fitting requires a principal-component projection");
  }
  if (static_cast<Eigen::Index>(y.size()) != x.rows()) {
    throw ShapeError("got " + std::to_string(y.size()) + " labels for " +
                     std::to_string(x.rows()) + " rows");
  }
  require_finite(x, "design matrix");
  BinaryFit out = binary_stats(x, y);
  const std::vector<int> fold = stratified_folds(y, kfolds, seed);

  Vector theta_sum = Vector::Zero(x.cols());
  double beta0_sum = 0.0;
  Eigen::Index max_rank = 0;
  for (int f = 0; f < kfolds; ++f) {
    std::vector<Eigen::Index> in_fold;
    std::vector<Eigen::Index> rest;
    for (std::size_t i = 0; i < fold.size(); ++i) {
      (fold[i] == f ? in_fold : rest).push_back(static_cast<Eigen::Index>(i));
    }
    const Matrix x_fold = x(in_fold, Eigen::all);
    const Matrix x_rest = x(rest, Eigen::all);
    Labels y_rest;
    y_rest.reserve(rest.size());
    for (auto i : rest) y_rest.push_back(y[i]);

    const Projection basis = resolve_projection(spec, x_rest, &x_fold);
    BinaryFit part;
    try {
      part = fit_binary(x_rest, y_rest, basis);
    } catch (const DegenerateLabelsError& e) {
      throw DegenerateLabelsError("cross-fitting fold " + std::to_string(f) +
                                  ": complement is single-class (" + e.what() + ")");
    }
    theta_sum += part.theta;
    beta0_sum += part.beta0;
    max_rank = std::max(max_rank, basis.rank());
  }
  out.theta = theta_sum / static_cast<double>(kfolds);
  out.beta0 = beta0_sum / static_cast<double>(kfolds);
  out.provenance = Provenance::pc_of_auxiliary;
  out.rank = max_rank;
  return out;
}

MulticlassFit fit_multiclass(const Matrix& x, std::span<const int> y, const Projection& basis,
                             int baseline) {
  check_design(x, y.size(), basis);
  int max_label = -1;
  for (int label : y) {
    if (label < 0) throw DomainError("class labels must be nonnegative");
    max_label = std::max(max_label, label);
  }
  const int num_classes = max_label + 1;
  if (num_classes < 2) throw DegenerateLabelsError("multi-class fit needs at least two classes");
  if (baseline < 0 || baseline >= num_classes) throw DomainError("baseline class out of range");

  MulticlassFit fit;
  fit.num_classes = num_classes;
  fit.baseline = baseline;
  fit.provenance = basis.provenance;
  fit.rank = basis.rank();
  fit.counts.assign(static_cast<std::size_t>(num_classes), 0);
  for (int label : y) ++fit.counts[label];
  for (int c = 0; c < num_classes; ++c) {
    if (fit.counts[c] == 0) {
      throw DegenerateLabelsError("class " + std::to_string(c) + " has no samples");
    }
    fit.means.push_back(class_mean(x, y, c));
  }

  const Vector& mu_b = fit.means[baseline];
  for (int c = 0; c < num_classes; ++c) {
    if (c == baseline) continue;
    std::vector<Eigen::Index> rows;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (y[i] == c || y[i] == baseline) rows.push_back(static_cast<Eigen::Index>(i));
    }
    const Matrix x_pair = x(rows, Eigen::all);
    Vector y01(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t j = 0; j < rows.size(); ++j) y01(j) = y[rows[j]] == c ? 1.0 : 0.0;
    const double total = static_cast<double>(fit.counts[baseline] + fit.counts[c]);
    const double pi_b = static_cast<double>(fit.counts[baseline]) / total;
    const double pi_c = static_cast<double>(fit.counts[c]) / total;
    const PairCore core = fit_pair(x_pair, y01, basis.basis, mu_b, fit.means[c], pi_b, pi_c);

    PairwiseRule rule;
    rule.label = c;
    rule.theta = core.theta;
    rule.beta0 = core.beta0;
    rule.denom = core.denom;
    if (!(rule.denom >= MulticlassFit::kMinDenom)) {
      fit.warnings.push_back("pair (" + std::to_string(baseline) + ", " + std::to_string(c) +
                             "): denominator " + std::to_string(core.denom) +
                             " clamped to 1e-8");
      rule.denom = MulticlassFit::kMinDenom;
    }
    fit.rules.push_back(std::move(rule));
  }
  return fit;
}

Vector multiclass_scores(const MulticlassFit& fit, const Vector& x) {
  check_query(fit.p(), x);
  Vector scores = Vector::Zero(fit.num_classes);
  for (const auto& rule : fit.rules) {
    scores(rule.label) = (x.dot(rule.theta) + rule.beta0) / rule.denom;
  }
  return scores;
}

int predict_multiclass(const MulticlassFit& fit, const Vector& x) {
  const Vector scores = multiclass_scores(fit, x);
  int best = 0;
  for (int c = 1; c < scores.size(); ++c) {
    if (scores(c) > scores(best)) best = c;
  }
  return best;
}

Labels predict_multiclass(const MulticlassFit& fit, const Matrix& x) {
  Labels out(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    out[i] = predict_multiclass(fit, Vector(x.row(i).transpose()));
  }
  return out;
}

AveragedMulticlassFit fit_multiclass_averaged(const Matrix& x, std::span<const int> y,
                                              const Projection& basis) {
  AveragedMulticlassFit out;
  out.per_baseline.push_back(fit_multiclass(x, y, basis, 0));
  for (int b = 1; b < out.per_baseline.front().num_classes; ++b) {
    out.per_baseline.push_back(fit_multiclass(x, y, basis, b));
  }
  return out;
}

Vector averaged_posterior(const AveragedMulticlassFit& fit, const Vector& x) {
  const int classes = fit.num_classes();
  Vector posterior = Vector::Zero(classes);
  for (const auto& per : fit.per_baseline) {
    Vector s = multiclass_scores(per, x)
                   .cwiseMax(-AveragedMulticlassFit::kScoreCap)
                   .cwiseMin(AveragedMulticlassFit::kScoreCap);
    s.array() -= s.maxCoeff();
    Vector e = s.array().exp();
    posterior += e / e.sum();
  }
  return posterior / static_cast<double>(fit.per_baseline.size());
}

std::pair<int, Vector> predict_multiclass_averaged(const AveragedMulticlassFit& fit,
                                                   const Vector& x) {
  Vector posterior = averaged_posterior(fit, x);
  int best = 0;
  for (int c = 1; c < posterior.size(); ++c) {
    if (posterior(c) > posterior(best)) best = c;
  }
  return {best, std::move(posterior)};
}

std::pair<int, Vector> predict_multiclass_averaged(const Matrix& x, std::span<const int> y,
                                                   const Projection& basis,
                                                   const Vector& query) {
  return predict_multiclass_averaged(fit_multiclass_averaged(x, y, basis), query);
}

}  // namespace pclda
