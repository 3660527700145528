#include <doctest.h>

#include <cmath>
#include <sstream>

#include "pclda/error.hpp"
#include "pclda/rng.hpp"
#include "pclda/simulation.hpp"
#include "support.hpp"

using namespace pclda;

TEST_CASE("derive_seed is a pure function of its path") {
  CHECK(derive_seed(1, {2, 3}) == derive_seed(1, {2, 3}));
  CHECK(derive_seed(1, {2, 3}) != derive_seed(1, {3, 2}));
  CHECK(derive_seed(1, {2}) != derive_seed(2, {2}));
  Rng a(5), b(5);
  for (int i = 0; i < 10; ++i) CHECK(a.normal() == b.normal());
  Rng c(6);
  for (int i = 0; i < 1000; ++i) CHECK(c.below(7) < 7);
}

TEST_CASE("gen_params recipe") {
  GeneratorConfig cfg;
  cfg.p = 20;
  cfg.k = 4;
  cfg.eta = 8;
  cfg.seed = 3;
  const auto params = gen_params(cfg);
  CHECK(params.p() == 20);
  CHECK(params.k() == 4);
  for (Eigen::Index i = 0; i < 4; ++i) {
    CHECK(params.sigma_zy(i, i) >= 1.0);
    CHECK(params.sigma_zy(i, i) <= 3.0);
  }
  const double d1 = params.sigma_zy(0, 0), d2 = params.sigma_zy(1, 1);
  CHECK(params.sigma_zy(0, 1) == doctest::Approx(-0.5 * std::sqrt(d1 * d2)));
  CHECK(params.sigma_zy(0, 2) == doctest::Approx(0.25 * std::sqrt(d1 * params.sigma_zy(2, 2))));
  for (Eigen::Index i = 0; i < 20; ++i) CHECK(params.sigma_w(i, i) == 1.0);
  CHECK(params.sigma_w(3, 5) == doctest::Approx(0.25));
  CHECK(params.alphas[0].isZero(0.0));
  CHECK(params.alphas[1].isApprox(Vector::Constant(4, std::sqrt(2.0))));
  CHECK(params.priors == std::vector<double>{0.5, 0.5});

  const auto again = gen_params(cfg);
  CHECK(again.loadings == params.loadings);
  CHECK(again.sigma_zy == params.sigma_zy);
  cfg.seed = 4;
  CHECK(gen_params(cfg).loadings != params.loadings);
}

TEST_CASE("gen_params loading scale") {
  GeneratorConfig cfg;
  cfg.p = 400;
  cfg.k = 5;
  cfg.seed = 9;
  const auto params = gen_params(cfg);
  const double sd = std::sqrt(params.loadings.squaredNorm() / 2000.0);
  CHECK(sd == doctest::Approx(0.3).epsilon(0.05));
  CHECK(fixed_snr_loading_sd(300) == doctest::Approx(0.3));
  CHECK(fixed_snr_loading_sd(1200) == doctest::Approx(0.15));
}

TEST_CASE("generated Sigma_{Z|Y} is positive definite across seeds") {
  for (std::uint64_t seed = 0; seed < 10000; ++seed) {
    const auto k = static_cast<Eigen::Index>(1 + seed % 20);
    Rng rng(seed);
    Vector diag(k);
    for (Eigen::Index i = 0; i < k; ++i) diag(i) = rng.uniform(1.0, 3.0);
    Eigen::LLT<Matrix> llt(decay_covariance(diag));
    if (llt.info() != Eigen::Success) {
      FAIL("not positive definite at seed " << seed);
    }
  }
  GeneratorConfig cfg;
  cfg.p = 20;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    cfg.k = static_cast<Eigen::Index>(1 + seed % 20);
    cfg.seed = seed;
    CHECK_NOTHROW(gen_params(cfg));
  }
}

TEST_CASE("generator config validation") {
  GeneratorConfig cfg;
  cfg.k = 0;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg.k = 400;
  CHECK_THROWS_AS(gen_params(cfg), DomainError);
  cfg.k = 5;
  cfg.eta = -1;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
}

TEST_CASE("sample_dataset") {
  GeneratorConfig cfg;
  cfg.p = 30;
  cfg.k = 3;
  cfg.seed = 1;
  auto params = gen_params(cfg);
  const auto a = sample_dataset(params, 50, 7);
  const auto b = sample_dataset(params, 50, 7);
  CHECK(a.x == b.x);
  CHECK(a.y == b.y);
  CHECK(a.z == b.z);
  CHECK(a.x.rows() == 50);
  CHECK(a.z.cols() == 3);
  CHECK(sample_dataset(params, 50, 8).x != a.x);

  params.sigma_w.setZero();
  const auto clean = sample_dataset(params, 40, 2);
  CHECK(clean.x == clean.z * params.loadings.transpose());

  const auto big = sample_dataset(gen_params(cfg), 10000, 3);
  int ones = 0;
  for (int label : big.y) ones += label;
  CHECK(ones >= 4800);
  CHECK(ones <= 5200);

  CHECK_THROWS_AS(sample_dataset(params, 0, 1), DomainError);
}

TEST_CASE("sampled class means match the model") {
  GeneratorConfig cfg;
  cfg.p = 10;
  cfg.k = 2;
  cfg.eta = 8;
  cfg.seed = 2;
  const auto params = gen_params(cfg);
  const auto data = sample_dataset(params, 20000, 5);
  Vector m1 = Vector::Zero(2);
  int n1 = 0;
  for (Eigen::Index i = 0; i < data.z.rows(); ++i)
    if (data.y[static_cast<std::size_t>(i)] == 1) {
      m1 += data.z.row(i).transpose();
      ++n1;
    }
  m1 /= n1;
  CHECK((m1 - params.alphas[1]).norm() < 0.1);
}

TEST_CASE("empirical delta matches the Mahalanobis formula") {
  GeneratorConfig cfg;
  cfg.k = 5;
  cfg.p = 20;
  cfg.eta = 6;
  cfg.seed = 12;
  const auto params = gen_params(cfg);
  const Vector d = params.alphas[1] - params.alphas[0];
  const double direct = d.dot(params.sigma_zy.llt().solve(d));
  const double delta = mahalanobis_delta(params);
  CHECK(delta * delta == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("misclassification_rate") {
  const std::vector<int> y{0, 1, 1, 0};
  CHECK(misclassification_rate(y, y) == 0.0);
  CHECK(misclassification_rate(std::vector<int>{1, 0, 0, 1}, y) == 1.0);
  CHECK(misclassification_rate(std::vector<int>{0, 1, 0, 1}, y) == 0.5);
  CHECK_THROWS_AS(misclassification_rate(std::vector<int>{0}, y), ShapeError);
  CHECK_THROWS_AS(misclassification_rate(std::vector<int>{}, std::vector<int>{}), ShapeError);
}

TEST_CASE("method and sweep names") {
  for (const char* name : {"pclda_k", "pclda_khat", "pclda_split", "oracle_ls", "bayes", "pclda_cf3"}) {
    CHECK(MethodSpec::parse(name).name() == name);
  }
  CHECK(MethodSpec::parse("pclda_cf").folds == 5);
  CHECK(MethodSpec::parse("pclda_cf7").folds == 7);
  CHECK_THROWS_AS(MethodSpec::parse("pclda_cf1"), DomainError);
  CHECK_THROWS_AS(MethodSpec::parse("pclda_cfx"), DomainError);
  CHECK_THROWS_AS(MethodSpec::parse("svm"), DomainError);
  CHECK(parse_sweep("eta") == Sweep::eta);
  CHECK(to_string(Sweep::p) == "p");
  CHECK_THROWS_AS(parse_sweep("q"), DomainError);
}

TEST_CASE("grid validation") {
  ExperimentGrid grid;
  grid.values = {100};
  grid.methods = {MethodSpec::parse("bayes")};
  CHECK_NOTHROW(grid.validate());
  auto bad = grid;
  bad.values.clear();
  CHECK_THROWS_AS(bad.validate(), DomainError);
  bad = grid;
  bad.reps = 0;
  CHECK_THROWS_AS(bad.validate(), DomainError);
  bad = grid;
  bad.methods.clear();
  CHECK_THROWS_AS(bad.validate(), DomainError);
  bad = grid;
  bad.values = {10.5};
  CHECK_THROWS_AS(bad.validate(), DomainError);
}

namespace {

ExperimentGrid small_grid() {
  ExperimentGrid grid;
  grid.base.p = 40;
  grid.base.k = 3;
  grid.base.eta = 5;
  grid.base.seed = 77;
  grid.sweep = Sweep::n;
  grid.values = {30, 60};
  grid.reps = 6;
  grid.test_size = 50;
  for (const char* m : {"pclda_k", "pclda_khat", "pclda_cf", "pclda_split", "oracle_ls", "bayes"}) {
    grid.methods.push_back(MethodSpec::parse(m));
  }
  return grid;
}

}  // namespace

TEST_CASE("run_grid report shape and thread invariance") {
  auto grid = small_grid();
  const auto serial = run_grid(grid);
  REQUIRE(serial.rows.size() == 12);
  CHECK(serial.rows[0].sweep_value == 30);
  CHECK(serial.rows[0].method == "pclda_k");
  CHECK(serial.rows[6].sweep_value == 60);
  for (const auto& row : serial.rows) {
    CHECK(row.reps_ok + row.reps_failed == 6);
    CHECK(row.mean_error >= 0.0);
    CHECK(row.mean_error <= 1.0);
    CHECK(row.r_x_star >= row.r_z_star);
    CHECK(row.xi <= row.xi_star);
  }
  grid.threads = 3;
  const auto parallel = run_grid(grid);
  std::ostringstream a, b;
  serial.write_csv(a);
  parallel.write_csv(b);
  CHECK(a.str() == b.str());

  auto reordered = small_grid();
  std::reverse(reordered.methods.begin(), reordered.methods.end());
  const auto other = run_grid(reordered);
  for (const auto& row : serial.rows) {
    const auto& match = other.at(row.sweep_value, row.method);
    CHECK(match.mean_error == row.mean_error);
    CHECK(match.sd_error == row.sd_error);
  }
  CHECK_THROWS_AS(serial.at(45, "bayes"), DomainError);
}

TEST_CASE("run_grid csv columns") {
  auto grid = small_grid();
  grid.values = {30};
  grid.reps = 2;
  std::ostringstream out;
  run_grid(grid).write_csv(out);
  const std::string header = out.str().substr(0, out.str().find('\n'));
  CHECK(header ==
        "sweep_name,sweep_value,method,mean_error,sd_error,delta2_mean,r_z_star,r_x_star,xi_star,"
        "xi,kappa,reps_ok,reps_failed");
}

TEST_CASE("run_grid counts failed repetitions") {
  auto grid = small_grid();
  grid.values = {12};
  grid.methods = {MethodSpec::parse("pclda_cf9"), MethodSpec::parse("bayes")};
  const auto report = run_grid(grid);
  const auto& cf = report.at(12, "pclda_cf9");
  CHECK(cf.reps_failed > 0);
  CHECK(cf.reps_ok + cf.reps_failed == grid.reps);
  CHECK(report.at(12, "bayes").reps_ok == grid.reps);
}

TEST_CASE("bayes method at high signal") {
  ExperimentGrid grid;
  grid.base.p = 50;
  grid.base.k = 5;
  grid.base.seed = 4;
  grid.sweep = Sweep::eta;
  grid.values = {50};
  grid.n = 20;
  grid.reps = 20;
  grid.test_size = 200;
  grid.methods = {MethodSpec::parse("bayes")};
  CHECK(run_grid(grid).at(50, "bayes").mean_error <= 0.01);
}

TEST_CASE("fixed snr keeps the signal eigenvalue roughly constant") {
  double small = 0, large = 0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    for (Eigen::Index p : {100, 900}) {
      GeneratorConfig cfg;
      cfg.p = p;
      cfg.seed = s;
      cfg.loading_sd = fixed_snr_loading_sd(p);
      const auto params = gen_params(cfg);
      const double xi = snr_diagnostics(params, 100).xi_star;
      (p == 100 ? small : large) += xi / 10;
    }
  }
  CHECK(large / small == doctest::Approx(1.0).epsilon(0.35));
}
