#pragma once

// Dense linear-algebra substrate shared by every estimator: column centering,
// thin SVD and minimum-norm least squares. Backed by Eigen.

#include <Eigen/Dense>
#include <optional>

namespace pclda {

/// Sample-by-feature data matrix (n rows, p columns).
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Centered {
  Vector means;  // p column means
  Matrix data;   // X with the column means removed
};

/// Subtracts column means. Realizes Pi_n X without forming the n x n projector.
Centered center_columns(const Matrix& x);

/// Thin singular value decomposition M = left * diag(singular) * right^T.
///
/// Singular values are sorted non-increasing. Each right-singular vector is
/// sign-normalized so that its largest-magnitude entry is positive; the
/// matching left vector is flipped with it.
struct SvdResult {
  Matrix left;      // n x r, orthonormal columns
  Vector singular;  // r values, non-increasing, nonnegative
  Matrix right;     // p x r, orthonormal columns

  Eigen::Index rank() const { return singular.size(); }
};

/// Computes the thin SVD of `m`, keeping at most `max_rank` leading triples.
///
/// Wide inputs (cols > rows) are reduced through a Householder QR of m^T
/// first, so the dense SVD only ever runs on a min(n,p)-sized square core.
/// Throws NumericalError if the input is not finite or the decomposition
/// produces non-finite output.
SvdResult thin_svd(const Matrix& m, std::optional<Eigen::Index> max_rank = std::nullopt);

/// Default relative cutoff for pseudo-inverse singular values: 1e-12 * max(n, q).
double default_rtol(Eigen::Index rows, Eigen::Index cols);

/// Minimum-norm minimizer of ||m w - y||_2 via the SVD. Singular values below
/// rtol * sigma_1 are treated as zero. rtol must lie in (0, 1).
Vector min_norm_lstsq(const Matrix& m, const Vector& y, double rtol);

/// Same, with rtol = default_rtol(m.rows(), m.cols()).
Vector min_norm_lstsq(const Matrix& m, const Vector& y);

/// Number of singular values above rtol * sigma_1 (0 for an all-zero vector).
Eigen::Index numerical_rank(const Vector& singular, double rtol);

/// Throws NumericalError naming `what` if any entry is non-finite.
void require_finite(const Matrix& m, const char* what);

}  // namespace pclda
