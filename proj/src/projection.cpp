#include "pclda/projection.hpp"

#include <charconv>
#include <cmath>
#include <string>

#include "pclda/csv.hpp"
#include "pclda/error.hpp"

namespace pclda {

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::pc_of_training: return "pc_of_training";
    case Provenance::pc_of_auxiliary: return "pc_of_auxiliary";
    case Provenance::identity: return "identity";
    case Provenance::user: return "user";
  }
  return "unknown";
}

Provenance parse_provenance(std::string_view text) {
  if (text == "pc_of_training") return Provenance::pc_of_training;
  if (text == "pc_of_auxiliary") return Provenance::pc_of_auxiliary;
  if (text == "identity") return Provenance::identity;
  if (text == "user") return Provenance::user;
  throw FormatError("unknown projection provenance '" + std::string(text) + "'");
}

ProjectionSpec ProjectionSpec::pc_auto(double c0, double nu) {
  ProjectionSpec s;
  s.c0 = c0;
  s.nu = nu;
  return s;
}

ProjectionSpec ProjectionSpec::pc(Eigen::Index rank) {
  ProjectionSpec s;
  s.rank = rank;
  return s;
}

ProjectionSpec ProjectionSpec::identity() {
  ProjectionSpec s;
  s.kind = Kind::identity;
  return s;
}

ProjectionSpec ProjectionSpec::user(Matrix basis) {
  ProjectionSpec s;
  s.kind = Kind::user_matrix;
  s.user_basis = std::move(basis);
  return s;
}

ProjectionSpec ProjectionSpec::parse(std::string_view text) {
  if (text == "identity") return identity();
  if (text == "pc:auto") return pc_auto();
  if (text.starts_with("pc:")) {
    const auto digits = text.substr(3);
    long r = 0;
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), r);
    if (ec != std::errc() || ptr != digits.data() + digits.size() || r < 1) {
      throw DomainError("invalid projection rank in '" + std::string(text) + "'");
    }
    return pc(r);
  }
  if (text.starts_with("file:") && text.size() > 5) {
    const std::string path(text.substr(5));
    ProjectionSpec s = user(read_csv(path).values);
    s.user_path = path;
    return s;
  }
  throw DomainError("invalid projection spec '" + std::string(text) +
                    "' (expected pc:auto, pc:<r>, identity or file:<path>)");
}

std::string ProjectionSpec::to_string() const {
  switch (kind) {
    case Kind::identity: return "identity";
    case Kind::user_matrix: return user_path.empty() ? "user" : "file:" + user_path;
    case Kind::principal_components:
      return rank ? "pc:" + std::to_string(*rank) : std::string("pc:auto");
  }
  return "unknown";
}

void ProjectionSpec::validate() const {
  if (rank && *rank < 1) throw DomainError("projection rank must be at least 1");
  if (!(c0 > 0.0)) throw DomainError("c0 must be positive");
  if (!(nu > 1.0)) throw DomainError("nu must exceed 1");
  if (kind == Kind::user_matrix && (user_basis.rows() == 0 || user_basis.cols() == 0)) {
    throw ShapeError("user projection matrix is empty");
  }
}

Eigen::Index selector_cap(Eigen::Index n, Eigen::Index p, double c0, double nu) {
  const double m = static_cast<double>(std::min(n, p));
  return static_cast<Eigen::Index>(std::floor(nu / (2.0 * c0 * (1.0 + nu)) * m));
}

KSelection select_k(const Vector& singular, Eigen::Index n, Eigen::Index p, double c0,
                    double nu) {
  if (n < 2 || p < 2) throw DomainError("select_k: n and p must be at least 2");
  if (!(c0 > 0.0) || !(nu > 1.0)) throw DomainError("select_k: need c0 > 0 and nu > 1");
  for (Eigen::Index j = 0; j < singular.size(); ++j) {
    if (!(singular(j) >= 0.0) || (j > 0 && singular(j) > singular(j - 1))) {
      throw DomainError("select_k: singular values must be nonnegative and non-increasing");
    }
  }

  KSelection sel;
  sel.c0 = c0;
  sel.nu = nu;
  sel.k_bar = selector_cap(n, p, c0, nu);

  // tail[k] = sum_{j > k} sigma_j^2 (1-based j), accumulated from the smallest value.
  const Eigen::Index m = singular.size();
  std::vector<double> tail(static_cast<std::size_t>(std::max(m, sel.k_bar) + 1), 0.0);
  for (Eigen::Index k = m - 1; k >= 0; --k) {
    tail[k] = tail[k + 1] + singular(k) * singular(k);
  }

  const double np = static_cast<double>(n) * static_cast<double>(p);
  const double floor_denom = np / (1.0 + nu);
  sel.criterion.reserve(static_cast<std::size_t>(sel.k_bar) + 1);
  for (Eigen::Index k = 0; k <= sel.k_bar; ++k) {
    const double denom = np - c0 * static_cast<double>(n + p) * static_cast<double>(k);
    if (!(denom >= floor_denom * (1.0 - 1e-12))) {
      throw NumericalError("select_k: criterion denominator fell below n p / (1 + nu)");
    }
    const double value = tail[k] / denom;
    sel.criterion.push_back(value);
    if (value < sel.criterion[sel.k_hat]) sel.k_hat = k;
  }
  return sel;
}

namespace {

Projection basis_from_svd(const SvdResult& svd, Eigen::Index numerical, Eigen::Index r,
                          Provenance provenance) {
  if (r < 1) throw DomainError("principal component rank must be at least 1");
  if (r > numerical) {
    throw RankDeficiencyError("requested " + std::to_string(r) +
                                  " principal components but the centered design has "
                                  "numerical rank " + std::to_string(numerical),
                              numerical);
  }
  Projection out;
  out.basis = svd.right.leftCols(r);
  out.provenance = provenance;
  return out;
}

struct CenteredSpectrum {
  SvdResult svd;
  Eigen::Index numerical_rank = 0;
};

CenteredSpectrum centered_spectrum(const Matrix& source) {
  CenteredSpectrum cs;
  cs.svd = thin_svd(center_columns(source).data);
  cs.numerical_rank =
      numerical_rank(cs.svd.singular, default_rtol(source.rows(), source.cols()));
  return cs;
}

}  // namespace

Projection principal_component_basis(const Matrix& x, Eigen::Index r) {
  const auto cs = centered_spectrum(x);
  return basis_from_svd(cs.svd, cs.numerical_rank, r, Provenance::pc_of_training);
}

Projection identity_projection(Eigen::Index p) {
  Projection out;
  out.basis = Matrix::Identity(p, p);
  out.provenance = Provenance::identity;
  return out;
}

Projection resolve_projection(const ProjectionSpec& spec, const Matrix& x,
                              const Matrix* auxiliary) {
  spec.validate();
  const Eigen::Index p = x.cols();
  if (p == 0) throw ShapeError("resolve_projection: design has no columns");

  switch (spec.kind) {
    case ProjectionSpec::Kind::identity:
      return identity_projection(p);
    case ProjectionSpec::Kind::user_matrix: {
      if (spec.user_basis.rows() != p) {
        throw ShapeError("user projection has " + std::to_string(spec.user_basis.rows()) +
                         " rows but the design has " + std::to_string(p) + " columns");
      }
      if (spec.user_basis.cols() > p) throw ShapeError("user projection is wider than p");
      require_finite(spec.user_basis, "user projection");
      Projection out;
      out.basis = spec.user_basis;
      out.provenance = Provenance::user;
      return out;
    }
    case ProjectionSpec::Kind::principal_components:
      break;
  }

  const Matrix* source = &x;
  Provenance provenance = Provenance::pc_of_training;
  if (auxiliary != nullptr) {
    if (auxiliary->rows() == 0) throw ShapeError("auxiliary design is empty");
    if (auxiliary->cols() != p) {
      throw ShapeError("auxiliary design has " + std::to_string(auxiliary->cols()) +
                       " columns but the training design has " + std::to_string(p));
    }
    source = auxiliary;
    provenance = Provenance::pc_of_auxiliary;
  }

  const auto cs = centered_spectrum(*source);
  if (spec.rank) return basis_from_svd(cs.svd, cs.numerical_rank, *spec.rank, provenance);

  if (cs.numerical_rank == 0) {
    throw RankDeficiencyError("centered design is numerically zero; no principal components",
                              0);
  }
  KSelection sel = select_k(cs.svd.singular.head(cs.numerical_rank), source->rows(), p,
                            spec.c0, spec.nu);
  std::vector<std::string> warnings;
  Eigen::Index q = sel.k_hat;
  if (q == 0) {
    warnings.emplace_back("rank selector returned k_hat = 0; using one principal component");
    q = 1;
  }
  Projection out = basis_from_svd(cs.svd, cs.numerical_rank, q, provenance);
  out.selection = std::move(sel);
  out.warnings = std::move(warnings);
  return out;
}

}  // namespace pclda
