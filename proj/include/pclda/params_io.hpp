#pragma once

// JSON form of FactorModelParams, used by `pclda diagnose --params`.
//
//   {
//     "loadings": [[...], ...],      p rows of K entries
//     "sigma_zy": [[...], ...],      K x K
//     "sigma_w":  [[...], ...],      p x p   (or "sigma_w_diag": [...])
//     "alphas":   [[...], ...],      one K-vector per class
//     "priors":   [...]
//   }

#include <string>

#include "pclda/model.hpp"

namespace pclda {

FactorModelParams parse_params_json(const std::string& text, const std::string& source);
FactorModelParams read_params_json(const std::string& path);

std::string params_to_json(const FactorModelParams& params);
void write_params_json(const std::string& path, const FactorModelParams& params);

}  // namespace pclda
