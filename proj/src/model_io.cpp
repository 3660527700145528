#include "pclda/model_io.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "pclda/csv.hpp"
#include "pclda/error.hpp"

namespace pclda {

namespace {

std::string join(const Vector& v) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += format_double(v(i));
  }
  return out;
}

void put(std::ostream& out, const std::string& key, const std::string& value) {
  out << key << " = " << value << '\n';
}

void put(std::ostream& out, const std::string& key, double value) {
  put(out, key, format_double(value));
}

void put(std::ostream& out, const std::string& key, const Vector& value) {
  put(out, key, join(value));
}

void put_count(std::ostream& out, const std::string& key, long long value) {
  put(out, key, std::to_string(value));
}

class Fields {
 public:
  Fields(std::istream& in, std::string source) : source_(std::move(source)) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      const auto first = line.find_first_not_of(" \t");
      if (first == std::string::npos || line[first] == '#') continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw FormatError(source_ + ":" + std::to_string(line_no) + ": expected 'key = value'");
      }
      auto strip = [](std::string s) {
        const auto a = s.find_first_not_of(" \t");
        const auto b = s.find_last_not_of(" \t");
        return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
      };
      std::string key = strip(line.substr(0, eq));
      if (!values_.emplace(key, strip(line.substr(eq + 1))).second) {
        throw FormatError(source_ + ":" + std::to_string(line_no) + ": duplicate key '" + key +
                          "'");
      }
    }
  }

  const std::string& text(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw FormatError(source_ + ": missing key '" + key + "'");
    return it->second;
  }

  double number(const std::string& key) const {
    const auto v = parse_double(text(key));
    if (!v) throw FormatError(source_ + ": key '" + key + "' is not a number");
    return *v;
  }

  long long count(const std::string& key) const {
    const std::string& t = text(key);
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || v < 0) {
      throw FormatError(source_ + ": key '" + key + "' is not a nonnegative integer");
    }
    return v;
  }

  Vector vector(const std::string& key, Eigen::Index expected) const {
    const std::string& t = text(key);
    std::vector<double> vals;
    std::size_t start = 0;
    while (start <= t.size()) {
      const auto comma = t.find(',', start);
      const auto field = t.substr(start, comma == std::string::npos ? std::string::npos
                                                                     : comma - start);
      const auto v = parse_double(field);
      if (!v) throw FormatError(source_ + ": key '" + key + "' has a non-numeric entry");
      vals.push_back(*v);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (static_cast<Eigen::Index>(vals.size()) != expected) {
      throw FormatError(source_ + ": key '" + key + "' has " + std::to_string(vals.size()) +
                        " entries, expected " + std::to_string(expected));
    }
    return Eigen::Map<const Vector>(vals.data(), expected);
  }

  const std::string& source() const { return source_; }

 private:
  std::string source_;
  std::map<std::string, std::string> values_;
};

void write_header(std::ostream& out, const char* kind, Provenance provenance, Eigen::Index rank,
                  Eigen::Index p) {
  out << "# pclda model\n";
  put_count(out, "format_version", kModelFormatVersion);
  put(out, "kind", kind);
  put(out, "provenance", std::string(to_string(provenance)));
  put_count(out, "rank", rank);
  put_count(out, "p", p);
}

void write_class_stats(std::ostream& out, const MulticlassFit& fit) {
  put_count(out, "num_classes", fit.num_classes);
  for (int c = 0; c < fit.num_classes; ++c) {
    put_count(out, "count." + std::to_string(c), fit.counts[c]);
    put(out, "mean." + std::to_string(c), fit.means[c]);
  }
}

void write_rules(std::ostream& out, const MulticlassFit& fit, const std::string& prefix) {
  put_count(out, prefix + "baseline", fit.baseline);
  for (const auto& rule : fit.rules) {
    const std::string s = "." + std::to_string(rule.label);
    put(out, prefix + "theta" + s, rule.theta);
    put(out, prefix + "beta0" + s, rule.beta0);
    put(out, prefix + "denom" + s, rule.denom);
  }
}

MulticlassFit read_multiclass(const Fields& f, const std::string& prefix, Provenance provenance,
                              Eigen::Index rank, Eigen::Index p) {
  MulticlassFit fit;
  fit.num_classes = static_cast<int>(f.count("num_classes"));
  if (fit.num_classes < 2) throw FormatError(f.source() + ": num_classes must be at least 2");
  fit.provenance = provenance;
  fit.rank = rank;
  for (int c = 0; c < fit.num_classes; ++c) {
    fit.counts.push_back(static_cast<Eigen::Index>(f.count("count." + std::to_string(c))));
    fit.means.push_back(f.vector("mean." + std::to_string(c), p));
  }
  fit.baseline = static_cast<int>(f.count(prefix + "baseline"));
  if (fit.baseline >= fit.num_classes) throw FormatError(f.source() + ": baseline out of range");
  for (int c = 0; c < fit.num_classes; ++c) {
    if (c == fit.baseline) continue;
    const std::string s = "." + std::to_string(c);
    PairwiseRule rule;
    rule.label = c;
    rule.theta = f.vector(prefix + "theta" + s, p);
    rule.beta0 = f.number(prefix + "beta0" + s);
    rule.denom = f.number(prefix + "denom" + s);
    if (!(rule.denom > 0.0)) throw FormatError(f.source() + ": denominators must be positive");
    fit.rules.push_back(std::move(rule));
  }
  return fit;
}

}  // namespace

void write_model(std::ostream& out, const FittedModel& model) {
  if (const auto* fit = std::get_if<BinaryFit>(&model)) {
    write_header(out, "binary", fit->provenance, fit->rank, fit->p());
    put(out, "pi0", fit->pi0);
    put(out, "pi1", fit->pi1);
    put(out, "beta0", fit->beta0);
    put(out, "theta", fit->theta);
    put(out, "mu0", fit->mu0);
    put(out, "mu1", fit->mu1);
  } else if (const auto* fit = std::get_if<MulticlassFit>(&model)) {
    write_header(out, "multiclass", fit->provenance, fit->rank, fit->p());
    write_class_stats(out, *fit);
    write_rules(out, *fit, "");
  } else {
    const auto& avg = std::get<AveragedMulticlassFit>(model);
    if (avg.per_baseline.empty()) throw ShapeError("averaged model has no baselines");
    const auto& first = avg.per_baseline.front();
    write_header(out, "multiclass_averaged", first.provenance, first.rank, first.p());
    write_class_stats(out, first);
    put_count(out, "num_baselines", static_cast<long long>(avg.per_baseline.size()));
    for (std::size_t b = 0; b < avg.per_baseline.size(); ++b) {
      write_rules(out, avg.per_baseline[b], "b" + std::to_string(b) + ".");
    }
  }
}

void save_model(const std::string& path, const FittedModel& model) {
  std::ofstream out(path);
  if (!out) throw FormatError(path + ": cannot open for writing");
  write_model(out, model);
  if (!out) throw FormatError(path + ": write failed");
}

FittedModel read_model(std::istream& in, const std::string& source) {
  const Fields f(in, source);
  const auto version = f.count("format_version");
  if (version != kModelFormatVersion) {
    throw FormatError(source + ": unsupported model format version " + std::to_string(version));
  }
  const std::string& kind = f.text("kind");
  const Provenance provenance = parse_provenance(f.text("provenance"));
  const auto rank = static_cast<Eigen::Index>(f.count("rank"));
  const auto p = static_cast<Eigen::Index>(f.count("p"));
  if (p < 1) throw FormatError(source + ": p must be at least 1");

  if (kind == "binary") {
    BinaryFit fit;
    fit.provenance = provenance;
    fit.rank = rank;
    fit.pi0 = f.number("pi0");
    fit.pi1 = f.number("pi1");
    fit.beta0 = f.number("beta0");
    fit.theta = f.vector("theta", p);
    fit.mu0 = f.vector("mu0", p);
    fit.mu1 = f.vector("mu1", p);
    return fit;
  }
  if (kind == "multiclass") return read_multiclass(f, "", provenance, rank, p);
  if (kind == "multiclass_averaged") {
    AveragedMulticlassFit avg;
    const auto baselines = f.count("num_baselines");
    for (long long b = 0; b < baselines; ++b) {
      avg.per_baseline.push_back(
          read_multiclass(f, "b" + std::to_string(b) + ".", provenance, rank, p));
    }
    if (avg.per_baseline.empty()) throw FormatError(source + ": no baselines");
    return avg;
  }
  throw FormatError(source + ": unknown model kind '" + kind + "'");
}

FittedModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(path + ": cannot open file");
  return read_model(in, path);
}

}  // namespace pclda
