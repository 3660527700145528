#pragma once

// Seeded sampling from the latent factor mixture and Monte-Carlo experiment
// grids comparing the discriminants against oracle benchmarks.

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "pclda/classifier.hpp"
#include "pclda/model.hpp"

namespace pclda {

struct GeneratorConfig {
  Eigen::Index p = 300;
  Eigen::Index k = 5;
  double eta = 5.0;           // signal strength; alpha1 = 1_K sqrt(eta / K)
  std::uint64_t seed = 0;
  double loading_sd = 0.3;    // standard deviation of the entries of A

  void validate() const;
};

/// Loading standard deviation that keeps lambda_K(A Sigma A^T) roughly
/// constant as p grows: 0.3 * sqrt(300 / p).
double fixed_snr_loading_sd(Eigen::Index p);

/// The alternating-sign decay covariance
///   S_ii = d_i,  S_ij = sqrt(d_i d_j) (-1)^(i+j) 0.5^|i-j|.
Matrix decay_covariance(const Vector& diagonal);

/// Parameter draw. Uses the seeded stream in a fixed order: K diagonal
/// entries of Sigma_{Z|Y} ~ Unif(1,3), then A row-major with N(0, sd^2)
/// entries. Sigma_W is the decay covariance with unit diagonal.
FactorModelParams gen_params(const GeneratorConfig& cfg);

struct Dataset {
  Matrix x;   // n x p
  Labels y;   // n
  Matrix z;   // n x K
};

/// Draws datasets from fixed parameters. Cholesky factors are computed once.
/// An all-zero Sigma_W yields W = 0 exactly.
class DatasetSampler {
 public:
  explicit DatasetSampler(const FactorModelParams& params,
                          std::shared_ptr<const Matrix> noise_factor = nullptr);

  /// Draw order: n labels, then Z (n x K, row-major), then W (n x p, row-major).
  Dataset sample(Eigen::Index n, std::uint64_t seed) const;

  /// Lower factor F with F F^T = sigma_w (empty for a zero Sigma_W).
  static std::shared_ptr<const Matrix> noise_factor(const Matrix& sigma_w);

 private:
  Matrix loadings_;
  std::vector<Vector> alphas_;
  std::vector<double> priors_;
  Matrix latent_factor_;
  std::shared_ptr<const Matrix> noise_factor_;
};

Dataset sample_dataset(const FactorModelParams& params, Eigen::Index n, std::uint64_t seed);

/// Fraction of mismatched labels. Throws ShapeError on length mismatch or
/// empty input.
double misclassification_rate(std::span<const int> predicted, std::span<const int> actual);

enum class Method { pclda_k, pclda_khat, pclda_cf, pclda_split, oracle_ls, bayes };

struct MethodSpec {
  Method method = Method::pclda_k;
  int folds = 5;  // pclda_cf only

  std::string name() const;
  /// Accepts pclda_k, pclda_khat, pclda_cf<k> (pclda_cf means 5 folds),
  /// pclda_split, oracle_ls, bayes.
  static MethodSpec parse(const std::string& text);
};

enum class Sweep { n, eta, p };

std::string to_string(Sweep s);
Sweep parse_sweep(const std::string& text);

struct ExperimentGrid {
  GeneratorConfig base;
  Sweep sweep = Sweep::n;
  std::vector<double> values;
  Eigen::Index n = 100;         // used when n is not swept
  int reps = 100;
  Eigen::Index test_size = 100;
  std::vector<MethodSpec> methods;
  bool fixed_snr = false;       // scale loadings with fixed_snr_loading_sd(p)
  double c0 = ProjectionSpec::kDefaultC0;
  double nu = ProjectionSpec::kDefaultNu;
  int threads = 1;

  void validate() const;
};

struct RiskRow {
  std::string sweep_name;
  double sweep_value = 0.0;
  std::string method;
  double mean_error = 0.0;
  double sd_error = 0.0;
  double delta2_mean = 0.0;
  double r_z_star = 0.0;
  double r_x_star = 0.0;
  double xi_star = 0.0;
  double xi = 0.0;
  double kappa = 0.0;
  int reps_ok = 0;
  int reps_failed = 0;
};

struct RiskReport {
  std::vector<RiskRow> rows;  // sweep value major, method minor

  const RiskRow& at(double sweep_value, const std::string& method) const;
  void write_csv(std::ostream& out) const;
};

/// Per (sweep value, repetition): fresh parameters, training and test draws;
/// every method is fit on the training data and scored on the test data.
/// Substream seeds depend only on (base seed, sweep index, repetition), so
/// the report does not depend on the thread count.
RiskReport run_grid(const ExperimentGrid& grid);

}  // namespace pclda
