#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pclda/classifier.hpp"
#include "pclda/error.hpp"
#include "pclda/model.hpp"
#include "pclda/model_io.hpp"
#include "pclda/projection.hpp"
#include "pclda/simulation.hpp"

namespace py = pybind11;
using namespace pclda;

namespace {

ProjectionSpec to_spec(const std::string& text, double c0, double nu) {
  auto spec = ProjectionSpec::parse(text);
  spec.c0 = c0;
  spec.nu = nu;
  spec.validate();
  return spec;
}

py::dict summary_dict(const PopulationSummary& s) {
  py::dict d;
  d["delta"] = s.delta;
  d["delta_x"] = s.delta_x;
  d["r_z_star"] = s.r_z_star;
  d["r_x_star"] = s.r_x_star;
  d["xi_star"] = s.xi_star;
  d["xi"] = s.xi;
  d["delta_w"] = s.delta_w;
  d["kappa"] = s.kappa;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Principal-component linear discriminant for latent factor models";

  auto base = py::register_exception<Error>(m, "PcldaError", PyExc_RuntimeError);
  py::register_exception<ShapeError>(m, "ShapeError", base.ptr());
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<DegenerateLabelsError>(m, "DegenerateLabelsError", base.ptr());
  py::register_exception<RankDeficiencyError>(m, "RankDeficiencyError", base.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", base.ptr());
  py::register_exception<UnsupportedError>(m, "UnsupportedError", base.ptr());
  py::register_exception<FormatError>(m, "FormatError", base.ptr());

  m.def("thin_svd", [](const Matrix& x, std::optional<Eigen::Index> max_rank) {
    auto s = thin_svd(x, max_rank);
    return py::make_tuple(s.left, s.singular, s.right);
  }, py::arg("x"), py::arg("max_rank") = py::none());
  m.def("min_norm_lstsq", py::overload_cast<const Matrix&, const Vector&>(&min_norm_lstsq));
  m.def("min_norm_lstsq", py::overload_cast<const Matrix&, const Vector&, double>(&min_norm_lstsq),
        py::arg("m"), py::arg("y"), py::arg("rtol"));

  py::class_<KSelection>(m, "KSelection")
      .def_readonly("k_hat", &KSelection::k_hat)
      .def_readonly("k_bar", &KSelection::k_bar)
      .def_readonly("criterion", &KSelection::criterion)
      .def_readonly("c0", &KSelection::c0)
      .def_readonly("nu", &KSelection::nu);
  m.def("select_k", &select_k, py::arg("singular"), py::arg("n"), py::arg("p"), py::arg("c0") = 2.1,
        py::arg("nu") = 100.0);

  py::class_<Projection>(m, "Projection")
      .def_readonly("basis", &Projection::basis)
      .def_property_readonly("provenance", [](const Projection& p) { return std::string(to_string(p.provenance)); })
      .def_readonly("selection", &Projection::selection)
      .def_readonly("warnings", &Projection::warnings)
      .def_property_readonly("rank", &Projection::rank);
  m.def("resolve_projection",
        [](const std::string& spec, const Matrix& x, std::optional<Matrix> auxiliary, double c0, double nu) {
          return resolve_projection(to_spec(spec, c0, nu), x, auxiliary ? &*auxiliary : nullptr);
        },
        py::arg("spec"), py::arg("x"), py::arg("auxiliary") = py::none(), py::arg("c0") = 2.1,
        py::arg("nu") = 100.0);
  m.def("user_projection", [](const Matrix& basis, const Matrix& x) {
    return resolve_projection(ProjectionSpec::user(basis), x);
  });

  py::class_<BinaryFit>(m, "BinaryFit")
      .def_readonly("theta", &BinaryFit::theta)
      .def_readonly("beta0", &BinaryFit::beta0)
      .def_readonly("pi0", &BinaryFit::pi0)
      .def_readonly("pi1", &BinaryFit::pi1)
      .def_readonly("mu0", &BinaryFit::mu0)
      .def_readonly("mu1", &BinaryFit::mu1)
      .def_readonly("rank", &BinaryFit::rank)
      .def_property_readonly("provenance", [](const BinaryFit& f) { return std::string(to_string(f.provenance)); })
      .def("decision_values", [](const BinaryFit& f, const Matrix& x) { return decision_values(f, x); })
      .def("predict", [](const BinaryFit& f, const Matrix& x) { return predict(f, x); });

  m.def("fit_binary", [](const Matrix& x, const Labels& y, const Projection& basis) {
    return fit_binary(x, y, basis);
  });
  m.def("fit",
        [](const Matrix& x, const Labels& y, const std::string& spec, std::optional<Matrix> auxiliary,
           double c0, double nu) {
          const auto s = to_spec(spec, c0, nu);
          if (auxiliary) return fit_with_auxiliary(x, y, *auxiliary, s);
          return fit_binary(x, y, resolve_projection(s, x));
        },
        py::arg("x"), py::arg("y"), py::arg("spec") = "pc:auto", py::arg("auxiliary") = py::none(),
        py::arg("c0") = 2.1, py::arg("nu") = 100.0);
  m.def("fit_crossfit",
        [](const Matrix& x, const Labels& y, const std::string& spec, int kfolds, std::uint64_t seed) {
          return fit_crossfit(x, y, ProjectionSpec::parse(spec), kfolds, seed);
        },
        py::arg("x"), py::arg("y"), py::arg("spec") = "pc:auto", py::arg("kfolds") = 5, py::arg("seed") = 0);
  m.def("stratified_folds", [](const Labels& y, int k, std::uint64_t seed) { return stratified_folds(y, k, seed); });

  py::class_<MulticlassFit>(m, "MulticlassFit")
      .def_readonly("num_classes", &MulticlassFit::num_classes)
      .def_readonly("baseline", &MulticlassFit::baseline)
      .def_readonly("counts", &MulticlassFit::counts)
      .def_readonly("warnings", &MulticlassFit::warnings)
      .def_property_readonly("denominators", [](const MulticlassFit& f) {
        std::vector<double> out;
        for (const auto& r : f.rules) out.push_back(r.denom);
        return out;
      })
      .def("scores", [](const MulticlassFit& f, const Vector& x) { return multiclass_scores(f, x); })
      .def("predict", [](const MulticlassFit& f, const Matrix& x) { return predict_multiclass(f, x); });
  m.def("fit_multiclass",
        [](const Matrix& x, const Labels& y, const std::string& spec, int baseline) {
          return fit_multiclass(x, y, resolve_projection(ProjectionSpec::parse(spec), x), baseline);
        },
        py::arg("x"), py::arg("y"), py::arg("spec") = "pc:auto", py::arg("baseline") = 0);

  py::class_<AveragedMulticlassFit>(m, "AveragedMulticlassFit")
      .def_property_readonly("num_classes", &AveragedMulticlassFit::num_classes)
      .def("posterior", [](const AveragedMulticlassFit& f, const Vector& x) { return averaged_posterior(f, x); })
      .def("predict", [](const AveragedMulticlassFit& f, const Matrix& x) {
        Labels out;
        for (Eigen::Index i = 0; i < x.rows(); ++i)
          out.push_back(predict_multiclass_averaged(f, Vector(x.row(i).transpose())).first);
        return out;
      });
  m.def("fit_multiclass_averaged",
        [](const Matrix& x, const Labels& y, const std::string& spec) {
          return fit_multiclass_averaged(x, y, resolve_projection(ProjectionSpec::parse(spec), x));
        },
        py::arg("x"), py::arg("y"), py::arg("spec") = "pc:auto");

  m.def("save_model", [](const std::string& path, const BinaryFit& f) { save_model(path, f); });
  m.def("save_model", [](const std::string& path, const MulticlassFit& f) { save_model(path, f); });
  m.def("save_model", [](const std::string& path, const AveragedMulticlassFit& f) { save_model(path, f); });
  m.def("load_model", [](const std::string& path) -> py::object {
    return std::visit([](auto&& fit) { return py::cast(fit); }, load_model(path));
  });

  py::class_<FactorModelParams>(m, "FactorModelParams")
      .def(py::init([](Matrix loadings, Matrix sigma_zy, Matrix sigma_w, std::vector<Vector> alphas,
                       std::vector<double> priors) {
             FactorModelParams p{std::move(loadings), std::move(sigma_zy), std::move(sigma_w),
                                 std::move(alphas), std::move(priors)};
             p.validate();
             return p;
           }),
           py::arg("loadings"), py::arg("sigma_zy"), py::arg("sigma_w"), py::arg("alphas"), py::arg("priors"))
      .def_readonly("loadings", &FactorModelParams::loadings)
      .def_readonly("sigma_zy", &FactorModelParams::sigma_zy)
      .def_readonly("sigma_w", &FactorModelParams::sigma_w)
      .def_readonly("alphas", &FactorModelParams::alphas)
      .def_readonly("priors", &FactorModelParams::priors);

  m.def("gen_params",
        [](Eigen::Index p, Eigen::Index k, double eta, std::uint64_t seed, double loading_sd) {
          return gen_params(GeneratorConfig{p, k, eta, seed, loading_sd});
        },
        py::arg("p") = 300, py::arg("k") = 5, py::arg("eta") = 5.0, py::arg("seed") = 0,
        py::arg("loading_sd") = 0.3);
  m.def("sample_dataset", [](const FactorModelParams& params, Eigen::Index n, std::uint64_t seed) {
    auto d = sample_dataset(params, n, seed);
    return py::make_tuple(d.x, d.y, d.z);
  }, py::arg("params"), py::arg("n"), py::arg("seed"));

  m.def("mahalanobis_delta", py::overload_cast<const FactorModelParams&>(&mahalanobis_delta));
  m.def("delta_x", &delta_x);
  m.def("bayes_risk_z", &bayes_risk_z, py::arg("delta"), py::arg("pi0") = 0.5, py::arg("pi1") = 0.5);
  m.def("bayes_risk_x", &bayes_risk_x);
  m.def("risk_gap", &risk_gap);
  m.def("population_summary", [](const FactorModelParams& params, Eigen::Index n) {
    return summary_dict(population_summary(params, n));
  }, py::arg("params"), py::arg("n"));

  py::class_<OracleRule>(m, "OracleRule")
      .def_readonly("eta", &OracleRule::eta)
      .def_readonly("eta0", &OracleRule::eta0)
      .def_readonly("beta", &OracleRule::beta)
      .def_readonly("beta0", &OracleRule::beta0)
      .def_readonly("scale", &OracleRule::scale);
  m.def("oracle_rules", &oracle_rules);
  m.def("oracle_ls_fit", [](const Matrix& z, const Labels& y) { return oracle_ls_fit(z, y); });
  m.def("misclassification_rate", [](const Labels& a, const Labels& b) { return misclassification_rate(a, b); });

  m.def("run_grid",
        [](const std::string& sweep, std::vector<double> values, std::vector<std::string> methods,
           Eigen::Index p, Eigen::Index k, double eta, Eigen::Index n, int reps, Eigen::Index test_size,
           std::uint64_t seed, bool fixed_snr, int threads) {
          ExperimentGrid grid;
          grid.base = GeneratorConfig{p, k, eta, seed, 0.3};
          grid.sweep = parse_sweep(sweep);
          grid.values = std::move(values);
          for (const auto& name : methods) grid.methods.push_back(MethodSpec::parse(name));
          grid.n = n;
          grid.reps = reps;
          grid.test_size = test_size;
          grid.fixed_snr = fixed_snr;
          grid.threads = threads;
          py::list rows;
          for (const auto& r : run_grid(grid).rows) {
            py::dict d;
            d["sweep_name"] = r.sweep_name;
            d["sweep_value"] = r.sweep_value;
            d["method"] = r.method;
            d["mean_error"] = r.mean_error;
            d["sd_error"] = r.sd_error;
            d["delta2_mean"] = r.delta2_mean;
            d["r_z_star"] = r.r_z_star;
            d["r_x_star"] = r.r_x_star;
            d["xi_star"] = r.xi_star;
            d["xi"] = r.xi;
            d["kappa"] = r.kappa;
            d["reps_ok"] = r.reps_ok;
            d["reps_failed"] = r.reps_failed;
            rows.append(d);
          }
          return rows;
        },
        py::arg("sweep"), py::arg("values"), py::arg("methods"), py::arg("p") = 300, py::arg("k") = 5,
        py::arg("eta") = 5.0, py::arg("n") = 100, py::arg("reps") = 100, py::arg("test_size") = 100,
        py::arg("seed") = 0, py::arg("fixed_snr") = false, py::arg("threads") = 1);
}
