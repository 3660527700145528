#pragma once

// Line-oriented text persistence for fitted discriminants.
//
//   # pclda model
//   format_version = 1
//   kind = binary | multiclass | multiclass_averaged
//   provenance = pc_of_training
//   rank = 5
//   p = 300
//   theta = 0.1,-0.2,...
//
// One "key = value" line per scalar and one comma-separated line per vector.
// Floating values use 17 significant digits, so save/load is exact.

#include <iosfwd>
#include <string>
#include <variant>

#include "pclda/classifier.hpp"

namespace pclda {

inline constexpr int kModelFormatVersion = 1;

using FittedModel = std::variant<BinaryFit, MulticlassFit, AveragedMulticlassFit>;

void write_model(std::ostream& out, const FittedModel& model);
void save_model(const std::string& path, const FittedModel& model);

/// Throws FormatError naming `source` on malformed or unsupported input.
FittedModel read_model(std::istream& in, const std::string& source);
FittedModel load_model(const std::string& path);

}  // namespace pclda
