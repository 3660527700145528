#include "pclda/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pclda/error.hpp"

namespace pclda {

namespace {

// SVD of a square (or near-square) core matrix; returns thin factors.
void core_svd(const Matrix& core, Matrix& u, Vector& s, Matrix& v) {
  Eigen::BDCSVD<Matrix> svd(core, Eigen::ComputeThinU | Eigen::ComputeThinV);
  u = svd.matrixU();
  s = svd.singularValues();
  v = svd.matrixV();
  if (!u.allFinite() || !s.allFinite() || !v.allFinite()) {
    throw NumericalError("thin_svd: decomposition did not converge");
  }
}

void normalize_signs(SvdResult& r) {
  for (Eigen::Index j = 0; j < r.right.cols(); ++j) {
    Eigen::Index arg = 0;
    r.right.col(j).cwiseAbs().maxCoeff(&arg);
    if (r.right(arg, j) < 0.0) {
      r.right.col(j) *= -1.0;
      r.left.col(j) *= -1.0;
    }
  }
}

}  // namespace

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) {
    throw NumericalError(std::string(what) + ": non-finite entries");
  }
}

Centered center_columns(const Matrix& x) {
  if (x.rows() == 0 || x.cols() == 0) {
    throw ShapeError("center_columns: empty matrix");
  }
  Centered out;
  out.means = x.colwise().mean().transpose();
  out.data = x.rowwise() - out.means.transpose();
  return out;
}

SvdResult thin_svd(const Matrix& m, std::optional<Eigen::Index> max_rank) {
  if (m.rows() == 0 || m.cols() == 0) {
    throw ShapeError("thin_svd: empty matrix");
  }
  require_finite(m, "thin_svd");

  SvdResult r;
  const Eigen::Index n = m.rows();
  const Eigen::Index p = m.cols();
  const Eigen::Index k = std::min(n, p);

  if (p > n) {
    // m^T = Q R  =>  m = R^T Q^T, and SVD(R^T) = U S V'^T gives right = Q V'.
    Eigen::HouseholderQR<Matrix> qr(m.transpose());
    Matrix q = qr.householderQ() * Matrix::Identity(p, k);
    Matrix rt = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>().toDenseMatrix().transpose();
    Matrix v_core;
    core_svd(rt, r.left, r.singular, v_core);
    r.right = q * v_core;
  } else if (n > 2 * p) {
    Eigen::HouseholderQR<Matrix> qr(m);
    Matrix q = qr.householderQ() * Matrix::Identity(n, k);
    Matrix rr = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    Matrix u_core;
    core_svd(rr, u_core, r.singular, r.right);
    r.left = q * u_core;
  } else {
    core_svd(m, r.left, r.singular, r.right);
  }

  normalize_signs(r);

  if (max_rank && *max_rank < r.rank()) {
    const Eigen::Index keep = std::max<Eigen::Index>(*max_rank, 0);
    r.left.conservativeResize(Eigen::NoChange, keep);
    r.right.conservativeResize(Eigen::NoChange, keep);
    r.singular.conservativeResize(keep);
  }
  return r;
}

double default_rtol(Eigen::Index rows, Eigen::Index cols) {
  return std::min(0.5, 1e-12 * static_cast<double>(std::max(rows, cols)));
}

Eigen::Index numerical_rank(const Vector& singular, double rtol) {
  if (singular.size() == 0 || singular(0) <= 0.0) return 0;
  const double cutoff = rtol * singular(0);
  Eigen::Index r = 0;
  while (r < singular.size() && singular(r) > cutoff) ++r;
  return r;
}

Vector min_norm_lstsq(const Matrix& m, const Vector& y, double rtol) {
  if (!(rtol > 0.0 && rtol < 1.0)) {
    throw DomainError("min_norm_lstsq: rtol must lie in (0, 1)");
  }
  if (y.size() != m.rows()) {
    throw ShapeError("min_norm_lstsq: response length " + std::to_string(y.size()) +
                     " does not match " + std::to_string(m.rows()) + " rows");
  }
  const SvdResult svd = thin_svd(m);
  const Eigen::Index r = numerical_rank(svd.singular, rtol);
  if (r == 0) return Vector::Zero(m.cols());
  Vector coef = svd.left.leftCols(r).transpose() * y;
  coef.array() /= svd.singular.head(r).array();
  return svd.right.leftCols(r) * coef;
}

Vector min_norm_lstsq(const Matrix& m, const Vector& y) {
  return min_norm_lstsq(m, y, default_rtol(m.rows(), m.cols()));
}

}  // namespace pclda
