#include "pclda/params_io.hpp"

#include <fstream>
#include <iterator>

#include <json.hpp>

#include "pclda/error.hpp"

namespace pclda {

namespace {

using nlohmann::json;

Matrix to_matrix(const json& j, const std::string& key, const std::string& source) {
  if (!j.is_array() || j.empty() || !j.front().is_array()) {
    throw FormatError(source + ": '" + key + "' must be a non-empty array of rows");
  }
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j.front().size());
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw FormatError(source + ": '" + key + "' row " + std::to_string(i) +
                        " has the wrong length");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      const auto& v = row[static_cast<std::size_t>(c)];
      if (!v.is_number()) throw FormatError(source + ": '" + key + "' has a non-numeric entry");
      m(i, c) = v.get<double>();
    }
  }
  return m;
}

Vector to_vector(const json& j, const std::string& key, const std::string& source) {
  if (!j.is_array() || j.empty()) {
    throw FormatError(source + ": '" + key + "' must be a non-empty array");
  }
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw FormatError(source + ": '" + key + "' has a non-numeric entry");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

const json& field(const json& doc, const char* key, const std::string& source) {
  const auto it = doc.find(key);
  if (it == doc.end()) throw FormatError(source + ": missing '" + std::string(key) + "'");
  return *it;
}

json rows_of(const Matrix& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(i, c));
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace

FactorModelParams parse_params_json(const std::string& text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(source + ": " + e.what());
  }
  if (!doc.is_object()) throw FormatError(source + ": expected a JSON object");

  FactorModelParams params;
  params.loadings = to_matrix(field(doc, "loadings", source), "loadings", source);
  params.sigma_zy = to_matrix(field(doc, "sigma_zy", source), "sigma_zy", source);
  if (doc.contains("sigma_w")) {
    params.sigma_w = to_matrix(doc["sigma_w"], "sigma_w", source);
  } else {
    params.sigma_w = to_vector(field(doc, "sigma_w_diag", source), "sigma_w_diag", source).asDiagonal();
  }
  const json& alphas = field(doc, "alphas", source);
  if (!alphas.is_array()) throw FormatError(source + ": 'alphas' must be an array");
  for (const auto& a : alphas) params.alphas.push_back(to_vector(a, "alphas", source));
  const Vector priors = to_vector(field(doc, "priors", source), "priors", source);
  params.priors.assign(priors.data(), priors.data() + priors.size());

  try {
    params.validate();
  } catch (const Error& e) {
    throw FormatError(source + ": invalid parameters: " + e.what());
  }
  return params;
}

FactorModelParams read_params_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(path + ": cannot open file");
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_params_json(text, path);
}

std::string params_to_json(const FactorModelParams& params) {
  json doc;
  doc["loadings"] = rows_of(params.loadings);
  doc["sigma_zy"] = rows_of(params.sigma_zy);
  doc["sigma_w"] = rows_of(params.sigma_w);
  json alphas = json::array();
  for (const auto& a : params.alphas) alphas.push_back(std::vector<double>(a.data(), a.data() + a.size()));
  doc["alphas"] = std::move(alphas);
  doc["priors"] = params.priors;
  return doc.dump(1);
}

void write_params_json(const std::string& path, const FactorModelParams& params) {
  std::ofstream out(path);
  if (!out) throw FormatError(path + ": cannot open for writing");
  out << params_to_json(params) << '\n';
}

}  // namespace pclda
