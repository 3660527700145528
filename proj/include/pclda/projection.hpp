#pragma once

// Construction of the projection matrix B used by the discriminant:
// principal-component bases, the data-driven rank selector, and resolution
// of user-facing projection specifications.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pclda/numerics.hpp"

namespace pclda {

enum class Provenance { pc_of_training, pc_of_auxiliary, identity, user };

std::string_view to_string(Provenance p);
Provenance parse_provenance(std::string_view text);

/// Outcome of the rank selector
///
///   k_hat = argmin_{0 <= k <= k_bar} sum_{j>k} sigma_j^2 / (n p - c0 (n + p) k),
///   k_bar = floor(nu / (2 c0 (1 + nu)) * min(n, p)).
struct KSelection {
  Eigen::Index k_hat = 0;
  Eigen::Index k_bar = 0;
  std::vector<double> criterion;  // indexed by k = 0..k_bar
  double c0 = 2.1;
  double nu = 100.0;
};

struct Projection {
  Matrix basis;  // p x q
  Provenance provenance = Provenance::identity;
  std::optional<KSelection> selection;
  std::vector<std::string> warnings;

  Eigen::Index rank() const { return basis.cols(); }
};

struct ProjectionSpec {
  enum class Kind { principal_components, identity, user_matrix };

  static constexpr double kDefaultC0 = 2.1;
  static constexpr double kDefaultNu = 100.0;

  Kind kind = Kind::principal_components;
  std::optional<Eigen::Index> rank;  // principal components only; empty = auto
  double c0 = kDefaultC0;
  double nu = kDefaultNu;
  Matrix user_basis;
  std::string user_path;  // set when parsed from "file:<path>"

  static ProjectionSpec pc_auto(double c0 = kDefaultC0, double nu = kDefaultNu);
  static ProjectionSpec pc(Eigen::Index rank);
  static ProjectionSpec identity();
  static ProjectionSpec user(Matrix basis);

  /// Parses "pc:auto", "pc:<r>", "identity" or "file:<path>". A file spec
  /// loads the CSV immediately. Throws DomainError on a malformed string.
  static ProjectionSpec parse(std::string_view text);

  std::string to_string() const;

  /// Throws DomainError when rank < 1, c0 <= 0 or nu <= 1.
  void validate() const;
};

/// k_bar for the given sample size and dimension.
Eigen::Index selector_cap(Eigen::Index n, Eigen::Index p, double c0, double nu);

/// Runs the rank selector on the singular values of a centered design.
/// Values beyond those supplied are treated as zero; ties go to the smaller k.
KSelection select_k(const Vector& singular, Eigen::Index n, Eigen::Index p,
                    double c0 = ProjectionSpec::kDefaultC0,
                    double nu = ProjectionSpec::kDefaultNu);

/// Leading r right-singular vectors of the centered design. Throws
/// RankDeficiencyError if r exceeds the numerical rank of the centered data.
Projection principal_component_basis(const Matrix& x, Eigen::Index r);

Projection identity_projection(Eigen::Index p);

/// Resolves `spec` against the training design `x`. Principal-component specs
/// use `auxiliary` as the source when given, otherwise `x`. Automatic rank
/// selection promotes k_hat = 0 to rank 1 and records a warning.
Projection resolve_projection(const ProjectionSpec& spec, const Matrix& x,
                              const Matrix* auxiliary = nullptr);

}  // namespace pclda
