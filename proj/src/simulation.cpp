#include "pclda/simulation.hpp"

#include <atomic>
#include <cmath>
#include <optional>
#include <ostream>
#include <thread>

#include "pclda/csv.hpp"
#include "pclda/error.hpp"
#include "pclda/rng.hpp"

namespace pclda {

void GeneratorConfig::validate() const {
  if (k < 1 || k > p) throw DomainError("generator needs 1 <= K <= p");
  if (!(eta >= 0.0)) throw DomainError("generator needs eta >= 0");
  if (!(loading_sd > 0.0)) throw DomainError("loading standard deviation must be positive");
}

double fixed_snr_loading_sd(Eigen::Index p) {
  return 0.3 * std::sqrt(300.0 / static_cast<double>(p));
}

Matrix decay_covariance(const Vector& diagonal) {
  const Eigen::Index m = diagonal.size();
  Matrix s(m, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    for (Eigen::Index i = 0; i < m; ++i) {
      if (i == j) {
        s(i, j) = diagonal(i);
        continue;
      }
      const auto gap = std::abs(i - j);
      const double sign = (i + j) % 2 == 0 ? 1.0 : -1.0;
      s(i, j) = std::sqrt(diagonal(i) * diagonal(j)) * sign * std::pow(0.5, static_cast<double>(gap));
    }
  }
  return s;
}

FactorModelParams gen_params(const GeneratorConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  Vector diag(cfg.k);
  for (Eigen::Index i = 0; i < cfg.k; ++i) diag(i) = rng.uniform(1.0, 3.0);

  FactorModelParams params;
  params.sigma_zy = decay_covariance(diag);
  params.loadings.resize(cfg.p, cfg.k);
  for (Eigen::Index i = 0; i < cfg.p; ++i) {
    for (Eigen::Index j = 0; j < cfg.k; ++j) params.loadings(i, j) = cfg.loading_sd * rng.normal();
  }
  params.sigma_w = decay_covariance(Vector::Ones(cfg.p));
  params.alphas = {Vector::Zero(cfg.k),
                   Vector::Constant(cfg.k, std::sqrt(cfg.eta / static_cast<double>(cfg.k)))};
  params.priors = {0.5, 0.5};

  if (Eigen::LLT<Matrix>(params.sigma_zy).info() != Eigen::Success) {
    throw DomainError("generated Sigma_{Z|Y} is not positive definite (seed " +
                      std::to_string(cfg.seed) + ")");
  }
  params.validate();
  return params;
}

std::shared_ptr<const Matrix> DatasetSampler::noise_factor(const Matrix& sigma_w) {
  if (sigma_w.isZero(0.0)) return std::make_shared<const Matrix>();
  Eigen::LLT<Matrix> llt(sigma_w);
  if (llt.info() == Eigen::Success) {
    return std::make_shared<const Matrix>(llt.matrixL().toDenseMatrix());
  }
  // Positive semi-definite: symmetric square root from the spectrum.
  Eigen::SelfAdjointEigenSolver<Matrix> es(sigma_w);
  if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() < -1e-10 * es.eigenvalues().maxCoeff()) {
    throw DomainError("Sigma_W is not positive semi-definite");
  }
  return std::make_shared<const Matrix>(es.eigenvectors() *
                                        es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal());
}

DatasetSampler::DatasetSampler(const FactorModelParams& params,
                               std::shared_ptr<const Matrix> noise_factor)
    : loadings_(params.loadings), alphas_(params.alphas), priors_(params.priors) {
  Eigen::LLT<Matrix> llt(params.sigma_zy);
  if (llt.info() != Eigen::Success) throw DomainError("sigma_zy is not positive definite");
  latent_factor_ = llt.matrixL();
  noise_factor_ = noise_factor ? std::move(noise_factor) : DatasetSampler::noise_factor(params.sigma_w);
  if (noise_factor_->size() != 0 && noise_factor_->rows() != params.p()) {
    throw ShapeError("noise factor does not match p");
  }
}

Dataset DatasetSampler::sample(Eigen::Index n, std::uint64_t seed) const {
  if (n < 1) throw DomainError("sample size must be at least 1");
  const Eigen::Index k = loadings_.cols();
  const Eigen::Index p = loadings_.rows();
  Rng rng(seed);
  Dataset d;

  d.y.resize(static_cast<std::size_t>(n));
  for (auto& label : d.y) {
    const double u = rng.uniform();
    double cum = 0.0;
    label = static_cast<int>(priors_.size()) - 1;
    for (std::size_t c = 0; c + 1 < priors_.size(); ++c) {
      cum += priors_[c];
      if (u < cum) {
        label = static_cast<int>(c);
        break;
      }
    }
  }

  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> g(n, k);
  for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = rng.normal();
  d.z = g * latent_factor_.transpose();
  for (Eigen::Index i = 0; i < n; ++i) d.z.row(i) += alphas_[d.y[i]].transpose();

  d.x = d.z * loadings_.transpose();
  if (noise_factor_->size() != 0) {
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> h(n, p);
    for (Eigen::Index i = 0; i < h.size(); ++i) h.data()[i] = rng.normal();
    d.x.noalias() += h * noise_factor_->transpose();
  }
  return d;
}

Dataset sample_dataset(const FactorModelParams& params, Eigen::Index n, std::uint64_t seed) {
  return DatasetSampler(params).sample(n, seed);
}

double misclassification_rate(std::span<const int> predicted, std::span<const int> actual) {
  if (predicted.size() != actual.size()) {
    throw ShapeError("misclassification_rate: " + std::to_string(predicted.size()) +
                     " predictions for " + std::to_string(actual.size()) + " labels");
  }
  if (predicted.empty()) throw ShapeError("misclassification_rate: no labels");
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < actual.size(); ++i) wrong += predicted[i] != actual[i];
  return static_cast<double>(wrong) / static_cast<double>(actual.size());
}

std::string MethodSpec::name() const {
  switch (method) {
    case Method::pclda_k: return "pclda_k";
    case Method::pclda_khat: return "pclda_khat";
    case Method::pclda_cf: return "pclda_cf" + std::to_string(folds);
    case Method::pclda_split: return "pclda_split";
    case Method::oracle_ls: return "oracle_ls";
    case Method::bayes: return "bayes";
  }
  return "unknown";
}

MethodSpec MethodSpec::parse(const std::string& text) {
  MethodSpec m;
  if (text == "pclda_k") m.method = Method::pclda_k;
  else if (text == "pclda_khat") m.method = Method::pclda_khat;
  else if (text == "pclda_split") m.method = Method::pclda_split;
  else if (text == "oracle_ls") m.method = Method::oracle_ls;
  else if (text == "bayes") m.method = Method::bayes;
  else if (text.starts_with("pclda_cf")) {
    m.method = Method::pclda_cf;
    const std::string rest = text.substr(8);
    if (!rest.empty()) {
      std::size_t used = 0;
      int folds = 0;
      try {
        folds = std::stoi(rest, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != rest.size() || folds < 2) throw DomainError("invalid fold count in '" + text + "'");
      m.folds = folds;
    }
  } else {
    throw DomainError("unknown method '" + text + "'");
  }
  return m;
}

std::string to_string(Sweep s) {
  switch (s) {
    case Sweep::n: return "n";
    case Sweep::eta: return "eta";
    case Sweep::p: return "p";
  }
  return "unknown";
}

Sweep parse_sweep(const std::string& text) {
  if (text == "n") return Sweep::n;
  if (text == "eta") return Sweep::eta;
  if (text == "p") return Sweep::p;
  throw DomainError("unknown sweep '" + text + "' (expected n, eta or p)");
}

void ExperimentGrid::validate() const {
  if (reps < 1) throw DomainError("reps must be at least 1");
  if (values.empty()) throw DomainError("sweep list is empty");
  if (methods.empty()) throw DomainError("no methods requested");
  if (test_size < 1) throw DomainError("test size must be at least 1");
  if (threads < 1) throw DomainError("threads must be at least 1");
  for (double v : values) {
    if (sweep != Sweep::eta && (v < 1.0 || v != std::floor(v))) {
      throw DomainError("sweep values for " + to_string(sweep) + " must be positive integers");
    }
  }
  if (sweep != Sweep::n && n < 2) throw DomainError("training size must be at least 2");
}

const RiskRow& RiskReport::at(double sweep_value, const std::string& method) const {
  for (const auto& row : rows) {
    if (row.sweep_value == sweep_value && row.method == method) return row;
  }
  throw DomainError("no report row for method '" + method + "' at " + format_double(sweep_value));
}

void RiskReport::write_csv(std::ostream& out) const {
  out << "sweep_name,sweep_value,method,mean_error,sd_error,delta2_mean,r_z_star,r_x_star,"
         "xi_star,xi,kappa,reps_ok,reps_failed\n";
  for (const auto& r : rows) {
    out << r.sweep_name << ',' << format_double(r.sweep_value) << ',' << r.method << ','
        << format_double(r.mean_error) << ',' << format_double(r.sd_error) << ','
        << format_double(r.delta2_mean) << ',' << format_double(r.r_z_star) << ','
        << format_double(r.r_x_star) << ',' << format_double(r.xi_star) << ','
        << format_double(r.xi) << ',' << format_double(r.kappa) << ',' << r.reps_ok << ','
        << r.reps_failed << '\n';
  }
}

namespace {

struct SweepContext {
  GeneratorConfig cfg;
  Eigen::Index n = 0;
  std::shared_ptr<const Matrix> noise_factor;
  NoiseSpectrum spectrum;
};

struct RepResult {
  std::optional<PopulationSummary> population;
  std::vector<std::optional<double>> errors;  // one per method
};

Labels predict_rows(const OracleRule& rule, const Matrix& z) {
  Labels out(static_cast<std::size_t>(z.rows()));
  for (Eigen::Index i = 0; i < z.rows(); ++i) out[i] = rule.predict(z.row(i).transpose());
  return out;
}

RepResult run_rep(const ExperimentGrid& grid, const SweepContext& ctx, std::uint64_t rep_seed) {
  RepResult res;
  res.errors.assign(grid.methods.size(), std::nullopt);

  GeneratorConfig cfg = ctx.cfg;
  cfg.seed = derive_seed(rep_seed, {0});
  FactorModelParams params;
  std::optional<DatasetSampler> sampler;
  std::optional<Dataset> train, test, aux;
  try {
    params = gen_params(cfg);
    res.population = population_summary(params, ctx.n, ctx.spectrum);
    sampler.emplace(params, ctx.noise_factor);
    train = sampler->sample(ctx.n, derive_seed(rep_seed, {1}));
    test = sampler->sample(grid.test_size, derive_seed(rep_seed, {2}));
  } catch (const Error&) {
    res.population.reset();
    return res;
  }

  const auto pc_k = ProjectionSpec::pc(cfg.k);
  for (std::size_t m = 0; m < grid.methods.size(); ++m) {
    try {
      Labels predicted;
      switch (grid.methods[m].method) {
        case Method::pclda_k:
          predicted = predict(fit_binary(train->x, train->y, resolve_projection(pc_k, train->x)),
                              test->x);
          break;
        case Method::pclda_khat: {
          const auto spec = ProjectionSpec::pc_auto(grid.c0, grid.nu);
          predicted = predict(fit_binary(train->x, train->y, resolve_projection(spec, train->x)),
                              test->x);
          break;
        }
        case Method::pclda_cf:
          predicted = predict(fit_crossfit(train->x, train->y, pc_k, grid.methods[m].folds,
                                           derive_seed(rep_seed, {4})),
                              test->x);
          break;
        case Method::pclda_split:
          if (!aux) aux = sampler->sample(ctx.n, derive_seed(rep_seed, {3}));
          predicted = predict(fit_with_auxiliary(train->x, train->y, aux->x, pc_k), test->x);
          break;
        case Method::oracle_ls:
          predicted = predict(oracle_ls_fit(train->z, train->y), test->z);
          break;
        case Method::bayes:
          predicted = predict_rows(oracle_rules(params), test->z);
          break;
      }
      res.errors[m] = misclassification_rate(predicted, test->y);
    } catch (const Error&) {
      res.errors[m].reset();
    }
  }
  return res;
}

}  // namespace

RiskReport run_grid(const ExperimentGrid& grid) {
  grid.validate();
  const std::size_t n_sweep = grid.values.size();
  const std::size_t n_rep = static_cast<std::size_t>(grid.reps);

  std::vector<SweepContext> contexts(n_sweep);
  for (std::size_t s = 0; s < n_sweep; ++s) {
    SweepContext& ctx = contexts[s];
    ctx.cfg = grid.base;
    ctx.n = grid.n;
    const double v = grid.values[s];
    switch (grid.sweep) {
      case Sweep::n: ctx.n = static_cast<Eigen::Index>(v); break;
      case Sweep::eta: ctx.cfg.eta = v; break;
      case Sweep::p: ctx.cfg.p = static_cast<Eigen::Index>(v); break;
    }
    if (grid.fixed_snr) ctx.cfg.loading_sd = fixed_snr_loading_sd(ctx.cfg.p);
    ctx.cfg.validate();
    // Sigma_W does not depend on the seed, so its factor and spectrum are shared.
    const Matrix sigma_w = decay_covariance(Vector::Ones(ctx.cfg.p));
    ctx.noise_factor = DatasetSampler::noise_factor(sigma_w);
    ctx.spectrum = noise_spectrum(sigma_w);
  }

  std::vector<RepResult> results(n_sweep * n_rep);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t = next++; t < results.size(); t = next++) {
      const std::size_t s = t / n_rep;
      const std::size_t r = t % n_rep;
      results[t] = run_rep(grid, contexts[s], derive_seed(grid.base.seed, {s, r}));
    }
  };
  const int threads = std::min<int>(grid.threads, static_cast<int>(results.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  RiskReport report;
  for (std::size_t s = 0; s < n_sweep; ++s) {
    PopulationSummary pop_mean;
    double delta2 = 0.0;
    int pop_count = 0;
    pop_mean.kappa = 0.0;
    for (std::size_t r = 0; r < n_rep; ++r) {
      const auto& pop = results[s * n_rep + r].population;
      if (!pop) continue;
      ++pop_count;
      delta2 += pop->delta * pop->delta;
      pop_mean.r_z_star += pop->r_z_star;
      pop_mean.r_x_star += pop->r_x_star;
      pop_mean.xi_star += pop->xi_star;
      pop_mean.xi += pop->xi;
      pop_mean.kappa += pop->kappa;
    }
    const double denom = pop_count > 0 ? static_cast<double>(pop_count) : std::nan("");

    for (std::size_t m = 0; m < grid.methods.size(); ++m) {
      RiskRow row;
      row.sweep_name = to_string(grid.sweep);
      row.sweep_value = grid.values[s];
      row.method = grid.methods[m].name();
      double sum = 0.0;
      for (std::size_t r = 0; r < n_rep; ++r) {
        const auto& e = results[s * n_rep + r].errors[m];
        if (e) {
          ++row.reps_ok;
          sum += *e;
        } else {
          ++row.reps_failed;
        }
      }
      if (row.reps_ok > 0) {
        row.mean_error = sum / row.reps_ok;
        double ss = 0.0;
        for (std::size_t r = 0; r < n_rep; ++r) {
          const auto& e = results[s * n_rep + r].errors[m];
          if (e) ss += (*e - row.mean_error) * (*e - row.mean_error);
        }
        row.sd_error = row.reps_ok > 1 ? std::sqrt(ss / (row.reps_ok - 1)) : 0.0;
      } else {
        row.mean_error = row.sd_error = std::nan("");
      }
      row.delta2_mean = delta2 / denom;
      row.r_z_star = pop_mean.r_z_star / denom;
      row.r_x_star = pop_mean.r_x_star / denom;
      row.xi_star = pop_mean.xi_star / denom;
      row.xi = pop_mean.xi / denom;
      row.kappa = pop_mean.kappa / denom;
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

}  // namespace pclda
