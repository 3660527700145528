#include "pclda/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>

#include "pclda/classifier.hpp"
#include "pclda/csv.hpp"
#include "pclda/error.hpp"
#include "pclda/model.hpp"
#include "pclda/model_io.hpp"
#include "pclda/params_io.hpp"
#include "pclda/projection.hpp"
#include "pclda/rng.hpp"
#include "pclda/simulation.hpp"

namespace pclda {

namespace {

struct DataOptions {
  std::string data;
  std::string labels;
  long label_col = -1;
};

struct LabeledData {
  Matrix x;
  std::vector<int> y;
};

Matrix read_features(const DataOptions& o, std::vector<int>* labels_out) {
  CsvTable table = read_csv(o.data);
  if (o.label_col >= 0) {
    auto labels = take_label_column(table, o.label_col, o.data);
    if (labels_out) *labels_out = std::move(labels);
  }
  return std::move(table.values);
}

LabeledData read_labeled(const DataOptions& o) {
  LabeledData d;
  if (o.label_col < 0 && o.labels.empty()) {
    throw UnsupportedError("labels required: pass --labels <file> or --label-col <index>");
  }
  d.x = read_features(o, &d.y);
  if (o.label_col < 0) {
    d.y = read_labels(o.labels);
    if (static_cast<Eigen::Index>(d.y.size()) != d.x.rows()) {
      throw FormatError(o.labels + ": " + std::to_string(d.y.size()) + " labels for " +
                        std::to_string(d.x.rows()) + " data rows in " + o.data);
    }
  }
  return d;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto field = text.substr(start, comma == std::string::npos ? std::string::npos
                                                                     : comma - start);
    const auto v = parse_double(field);
    if (!v) throw UnsupportedError("invalid number '" + field + "' in list '" + text + "'");
    out.push_back(*v);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::vector<std::string> split_names(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    out.push_back(text.substr(start, comma == std::string::npos ? std::string::npos
                                                                 : comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

// Holdout rows; stratified draws round(frac * n_c) rows from each class.
std::vector<bool> holdout_mask(const std::vector<int>& y, double frac, bool stratified,
                               std::uint64_t seed) {
  Rng rng(seed);
  std::vector<bool> test(y.size(), false);
  auto take = [&](std::vector<std::size_t> idx) {
    for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[rng.below(i)]);
    const auto m = static_cast<std::size_t>(std::lround(frac * static_cast<double>(idx.size())));
    for (std::size_t j = 0; j < m; ++j) test[idx[j]] = true;
  };
  if (stratified) {
    const int classes = *std::max_element(y.begin(), y.end()) + 1;
    for (int c = 0; c < classes; ++c) {
      std::vector<std::size_t> idx;
      for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] == c) idx.push_back(i);
      }
      take(std::move(idx));
    }
  } else {
    std::vector<std::size_t> idx(y.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    take(std::move(idx));
  }
  return test;
}

LabeledData subset(const LabeledData& d, const std::vector<bool>& mask, bool keep) {
  std::vector<Eigen::Index> rows;
  LabeledData out;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i] == keep) {
      rows.push_back(static_cast<Eigen::Index>(i));
      out.y.push_back(d.y[i]);
    }
  }
  out.x = d.x(rows, Eigen::all);
  return out;
}

Labels predict_any(const FittedModel& model, const Matrix& x) {
  if (const auto* b = std::get_if<BinaryFit>(&model)) return predict(*b, x);
  if (const auto* m = std::get_if<MulticlassFit>(&model)) return predict_multiclass(*m, x);
  const auto& avg = std::get<AveragedMulticlassFit>(model);
  if (x.cols() != avg.per_baseline.front().p()) {
    throw ShapeError("design has " + std::to_string(x.cols()) + " columns, model expects " +
                     std::to_string(avg.per_baseline.front().p()));
  }
  Labels out;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    out.push_back(predict_multiclass_averaged(avg, Vector(x.row(i).transpose())).first);
  }
  return out;
}

std::ostream& open_output(const std::string& path, std::ofstream& file, std::ostream& fallback) {
  if (path.empty() || path == "-") return fallback;
  file.open(path);
  if (!file) throw FormatError(path + ": cannot open for writing");
  return file;
}

void print_seed(std::ostream& err, std::uint64_t seed, bool given) {
  if (!given) err << "seed = " << seed << " (default)\n";
}

// Malformed flag values are usage errors, not numerical ones.
template <class F>
auto usage_guard(F&& f) {
  try {
    return f();
  } catch (const DomainError& e) {
    throw UnsupportedError(e.what());
  }
}

void add_data_options(CLI::App* cmd, DataOptions& o, bool labels) {
  cmd->add_option("--data", o.data, "Feature CSV, one row per sample")->required();
  cmd->add_option("--label-col", o.label_col, "0-based column holding integer labels");
  if (labels) cmd->add_option("--labels", o.labels, "Label file, one integer per line");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Principal-component linear discriminant for factor-model data", "pclda"};
  app.require_subcommand(1);

  // fit
  DataOptions fit_data;
  std::string fit_spec = "pc:auto";
  std::string fit_out;
  std::string fit_aux;
  int fit_crossfit_k = 0;
  std::uint64_t fit_seed = 0;
  double c0 = ProjectionSpec::kDefaultC0;
  double nu = ProjectionSpec::kDefaultNu;
  bool fit_multi = false;
  bool fit_averaged = false;
  double holdout = 0.0;
  bool stratified = false;
  auto* fit = app.add_subcommand("fit", "Fit a discriminant and write a model file");
  add_data_options(fit, fit_data, true);
  fit->add_option("--projection", fit_spec, "pc:auto | pc:<r> | identity | file:<path>");
  fit->add_option("--crossfit", fit_crossfit_k, "Number of cross-fitting folds (binary only)");
  fit->add_option("--auxiliary", fit_aux, "Unlabelled CSV used to build the PC basis");
  auto* fit_seed_opt = fit->add_option("--seed", fit_seed, "Seed for folds and holdout splits");
  fit->add_option("--c0", c0, "Rank selector constant c0");
  fit->add_option("--nu", nu, "Rank selector cap parameter nu");
  fit->add_option("--out", fit_out, "Model file to write")->required();
  fit->add_flag("--multiclass", fit_multi, "Use the multi-class rule even for two classes");
  fit->add_flag("--averaged", fit_averaged, "Average posteriors over every baseline class");
  fit->add_option("--holdout", holdout, "Fraction of rows held out for a test error")
      ->check(CLI::Range(0.0, 0.95));
  fit->add_flag("--stratified", stratified, "Stratify the holdout split by class");

  // predict
  DataOptions pred_data;
  std::string pred_model;
  std::string pred_out;
  auto* pred = app.add_subcommand("predict", "Predict labels with a saved model");
  add_data_options(pred, pred_data, false);
  pred->add_option("--model", pred_model, "Model file from `fit`")->required();
  pred->add_option("--out", pred_out, "Prediction CSV (default stdout)");

  // select-k
  DataOptions sel_data;
  auto* sel = app.add_subcommand("select-k", "Estimate the number of latent factors");
  add_data_options(sel, sel_data, false);
  sel->add_option("--c0", c0, "Rank selector constant c0");
  sel->add_option("--nu", nu, "Rank selector cap parameter nu");

  // diagnose
  std::string diag_params;
  std::string diag_write;
  GeneratorConfig gen;
  long diag_n = 100;
  auto* diag = app.add_subcommand("diagnose", "Population separations, Bayes risks and SNRs");
  diag->add_option("--params", diag_params, "Parameter JSON file");
  diag->add_option("--p", gen.p, "Generator: feature dimension");
  diag->add_option("--K", gen.k, "Generator: number of factors");
  diag->add_option("--eta", gen.eta, "Generator: signal strength");
  auto* diag_seed_opt = diag->add_option("--seed", gen.seed, "Generator seed");
  diag->add_option("--loading-sd", gen.loading_sd, "Generator: sd of loading entries");
  diag->add_option("--n", diag_n, "Sample size used by xi and delta_w");
  diag->add_option("--write-params", diag_write, "Also write the parameters as JSON");

  // simulate
  ExperimentGrid grid;
  std::string sim_sweep;
  std::string sim_values;
  std::string sim_methods = "pclda_k,oracle_ls,bayes";
  std::string sim_out;
  long sim_n = 100;
  long sim_test = 100;
  auto* sim = app.add_subcommand("simulate", "Monte-Carlo risk grid; writes a CSV report");
  sim->add_option("--sweep", sim_sweep, "Swept quantity: n, eta or p")->required();
  sim->add_option("--values", sim_values, "Comma-separated sweep values")->required();
  sim->add_option("--p", grid.base.p, "Feature dimension");
  sim->add_option("--K", grid.base.k, "Number of factors");
  sim->add_option("--eta", grid.base.eta, "Signal strength");
  sim->add_option("--n", sim_n, "Training size when n is not swept");
  sim->add_option("--reps", grid.reps, "Repetitions per sweep value");
  sim->add_option("--test-size", sim_test, "Test points per repetition");
  sim->add_option("--methods", sim_methods,
                  "pclda_k,pclda_khat,pclda_cf<k>,pclda_split,oracle_ls,bayes");
  auto* sim_seed_opt = sim->add_option("--seed", grid.base.seed, "Base seed");
  sim->add_option("--threads", grid.threads, "Worker threads");
  sim->add_flag("--fixed-snr", grid.fixed_snr, "Scale loadings so lambda/sigma^2 stays fixed in p");
  sim->add_option("--c0", grid.c0, "Rank selector constant c0");
  sim->add_option("--nu", grid.nu, "Rank selector cap parameter nu");
  sim->add_option("--out", sim_out, "Report CSV (default stdout)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (fit->parsed()) {
      ProjectionSpec spec = usage_guard([&] { return ProjectionSpec::parse(fit_spec); });
      spec.c0 = c0;
      spec.nu = nu;
      LabeledData all = read_labeled(fit_data);
      const bool randomized = fit_crossfit_k > 0 || holdout > 0.0;
      if (randomized) print_seed(err, fit_seed, fit_seed_opt->count() > 0);

      LabeledData train_part = all;
      std::optional<LabeledData> test_part;
      if (holdout > 0.0) {
        const auto mask = holdout_mask(all.y, holdout, stratified, fit_seed);
        train_part = subset(all, mask, false);
        test_part = subset(all, mask, true);
      }
      std::optional<Matrix> aux;
      if (!fit_aux.empty()) aux = read_csv(fit_aux).values;

      const int classes = *std::max_element(train_part.y.begin(), train_part.y.end()) + 1;
      FittedModel model;
      std::vector<std::string> warnings;
      if (classes <= 2 && !fit_multi && !fit_averaged) {
        if (fit_crossfit_k > 0) {
          model = fit_crossfit(train_part.x, train_part.y, spec, fit_crossfit_k, fit_seed);
        } else {
          const Projection b =
              resolve_projection(spec, train_part.x, aux ? &*aux : nullptr);
          warnings = b.warnings;
          if (b.selection) out << "k_hat = " << b.selection->k_hat << '\n';
          model = fit_binary(train_part.x, train_part.y, b);
        }
        out << "kind = binary\nrank = " << std::get<BinaryFit>(model).rank << '\n';
      } else {
        if (fit_crossfit_k > 0) throw UnsupportedError("--crossfit applies to binary fits only");
        const Projection b = resolve_projection(spec, train_part.x, aux ? &*aux : nullptr);
        warnings = b.warnings;
        if (b.selection) out << "k_hat = " << b.selection->k_hat << '\n';
        if (fit_averaged) {
          auto avg = fit_multiclass_averaged(train_part.x, train_part.y, b);
          for (const auto& per : avg.per_baseline) {
            warnings.insert(warnings.end(), per.warnings.begin(), per.warnings.end());
          }
          model = std::move(avg);
          out << "kind = multiclass_averaged\n";
        } else {
          auto mc = fit_multiclass(train_part.x, train_part.y, b);
          warnings.insert(warnings.end(), mc.warnings.begin(), mc.warnings.end());
          model = std::move(mc);
          out << "kind = multiclass\n";
        }
        out << "num_classes = " << classes << "\nrank = " << b.rank() << '\n';
      }
      for (const auto& w : warnings) err << "warning: " << w << '\n';
      if (test_part) {
        const Labels predicted = predict_any(model, test_part->x);
        out << "n_train = " << train_part.y.size() << "\nn_test = " << test_part->y.size()
            << "\nholdout_error = "
            << format_double(misclassification_rate(predicted, test_part->y)) << '\n';
      }
      save_model(fit_out, model);
      return kExitOk;
    }

    if (pred->parsed()) {
      const FittedModel model = load_model(pred_model);
      std::vector<int> truth;
      const Matrix x = read_features(pred_data, &truth);
      std::ofstream file;
      std::ostream& dest = open_output(pred_out, file, out);
      if (const auto* b = std::get_if<BinaryFit>(&model)) {
        const Vector g = decision_values(*b, x);
        dest << "label,decision_value\n";
        for (Eigen::Index i = 0; i < g.size(); ++i) {
          dest << (g(i) >= 0.0 ? 1 : 0) << ',' << format_double(g(i)) << '\n';
        }
      } else {
        dest << "label\n";
        for (int label : predict_any(model, x)) dest << label << '\n';
      }
      if (!truth.empty()) {
        err << "error = " << format_double(misclassification_rate(predict_any(model, x), truth))
            << '\n';
      }
      return kExitOk;
    }

    if (sel->parsed()) {
      const Matrix x = read_features(sel_data, nullptr);
      const SvdResult svd = thin_svd(center_columns(x).data);
      const auto rank = numerical_rank(svd.singular, default_rtol(x.rows(), x.cols()));
      const KSelection s = select_k(svd.singular.head(rank), x.rows(), x.cols(), c0, nu);
      out << "k_hat = " << s.k_hat << "\nk_bar = " << s.k_bar << "\nk,criterion\n";
      for (std::size_t k = 0; k < s.criterion.size(); ++k) {
        out << k << ',' << format_double(s.criterion[k]) << '\n';
      }
      return kExitOk;
    }

    if (diag->parsed()) {
      FactorModelParams params;
      if (!diag_params.empty()) {
        params = read_params_json(diag_params);
      } else {
        print_seed(err, gen.seed, diag_seed_opt->count() > 0);
        params = gen_params(gen);
      }
      if (!diag_write.empty()) write_params_json(diag_write, params);
      const PopulationSummary s = population_summary(params, diag_n);
      out << "delta = " << format_double(s.delta) << '\n'
          << "delta2 = " << format_double(s.delta * s.delta) << '\n'
          << "delta_x = " << format_double(s.delta_x) << '\n'
          << "r_z_star = " << format_double(s.r_z_star) << '\n'
          << "r_x_star = " << format_double(s.r_x_star) << '\n'
          << "xi_star = " << format_double(s.xi_star) << '\n'
          << "xi = " << format_double(s.xi) << '\n'
          << "delta_w = " << format_double(s.delta_w) << '\n'
          << "kappa = " << format_double(s.kappa) << '\n';
      if (params.priors.size() == 2 && std::abs(params.priors[0] - params.priors[1]) <= 1e-12) {
        out << "risk_gap = " << format_double(risk_gap(params)) << '\n';
      }
      return kExitOk;
    }

    if (sim->parsed()) {
      usage_guard([&] {
        grid.sweep = parse_sweep(sim_sweep);
        grid.values = parse_list(sim_values);
        grid.n = sim_n;
        grid.test_size = sim_test;
        for (const auto& name : split_names(sim_methods)) {
          grid.methods.push_back(MethodSpec::parse(name));
        }
        grid.validate();
        return 0;
      });
      print_seed(err, grid.base.seed, sim_seed_opt->count() > 0);
      const RiskReport report = run_grid(grid);
      std::ofstream file;
      report.write_csv(open_output(sim_out, file, out));
      return kExitOk;
    }
  } catch (const UnsupportedError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const FormatError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const ShapeError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const DegenerateLabelsError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const DomainError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const Error& e) {
    err << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitUsage;
}

}  // namespace pclda
