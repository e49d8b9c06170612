/**
 * @file report.hpp
 * @brief Run configuration (JSON in, flag overrides) and deterministic
 *        JSON / CSV writers for experiment reports.
 *
 * Config schema:
 *
 *     {
 *       "physical":  {"L0": 3.14159, "epsilon": 1e-3, "gamma": 2, "T": 100},
 *       "numerical": {"K": 16, "steps_per_period": 64, "monodromy_steps": 2048,
 *                     "dynamics": "linearized", "variant": "both"},
 *       "floquet":   {"epsilon_sweep": [0.01, 0.005], "K_sweep": [8, 12],
 *                     "samples": 101},
 *       "output":    {"samples_per_period": 1}
 *     }
 *
 * epsilon, gamma and T are required; everything else has a default
 * (K defaults to max(4 ceil(gamma), 16)).
 */
#pragma once

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dce/cavity_model.hpp"
#include "dce/floquet.hpp"
#include "dce/mode_evolver.hpp"

namespace dce {

inline constexpr const char* kToolVersion = "0.1.0";

using ordered_json = nlohmann::ordered_json;

/// Config problems: unreadable file, malformed JSON, unknown or ill-typed field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class VariantSelection { eq44, printed4x4, both };

inline std::string to_string(VariantSelection v) {
  switch (v) {
    case VariantSelection::eq44: return "eq44";
    case VariantSelection::printed4x4: return "printed4x4";
    case VariantSelection::both: return "both";
  }
  return "?";
}

inline VariantSelection parse_variant_selection(const std::string& s) {
  if (s == "eq44") return VariantSelection::eq44;
  if (s == "printed4x4") return VariantSelection::printed4x4;
  if (s == "both") return VariantSelection::both;
  throw ConfigError("variant: expected one of eq44, printed4x4, both (got '" + s + "')");
}

inline std::vector<RecurrenceVariant> variants_of(VariantSelection v) {
  if (v == VariantSelection::eq44) return {RecurrenceVariant::eq44};
  if (v == VariantSelection::printed4x4) return {RecurrenceVariant::printed4x4};
  return {RecurrenceVariant::eq44, RecurrenceVariant::printed4x4};
}

inline Dynamics parse_dynamics(const std::string& s) {
  if (s == "linearized") return Dynamics::linearized;
  if (s == "exact") return Dynamics::exact;
  throw ConfigError("dynamics: expected linearized or exact (got '" + s + "')");
}

struct RunConfig {
  CavityConfig cavity;
  int monodromy_steps = 2048;
  Dynamics dynamics = Dynamics::linearized;
  VariantSelection variant = VariantSelection::both;
  std::vector<double> floquet_epsilons{1e-2, 5e-3};
  std::vector<int> floquet_K{8, 12};
  int floquet_samples = 101;
  int samples_per_period = 1;
  bool K_explicit = false;

  void validate() const {
    try {
      cavity.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    if (monodromy_steps < 1) throw ConfigError("monodromy_steps: must be a positive integer");
    if (floquet_epsilons.size() != 2 || !(floquet_epsilons[0] > floquet_epsilons[1]) || !(floquet_epsilons[1] > 0.0))
      throw ConfigError("floquet.epsilon_sweep: expected two amplitudes [high, low] with high > low > 0");
    if (floquet_K.size() != 2 || floquet_K[0] < 1 || floquet_K[1] < 1)
      throw ConfigError("floquet.K_sweep: expected two positive truncations");
    if (floquet_samples < 2) throw ConfigError("floquet.samples: must be at least 2");
    if (samples_per_period < 1) throw ConfigError("output.samples_per_period: must be a positive integer");
  }
};

namespace detail {

inline std::string line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

inline double as_number(const nlohmann::json& v, const std::string& key) {
  if (!v.is_number()) throw ConfigError(key + ": expected a number");
  return v.get<double>();
}

inline int as_integer(const nlohmann::json& v, const std::string& key) {
  if (v.is_number_integer()) return v.get<int>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (d == std::round(d) && std::abs(d) < 1e9) return static_cast<int>(d);
  }
  throw ConfigError(key + ": expected an integer");
}

inline std::string as_string(const nlohmann::json& v, const std::string& key) {
  if (!v.is_string()) throw ConfigError(key + ": expected a string");
  return v.get<std::string>();
}

/// Canonical dotted key for a bare or dotted name.
inline std::string canonical_key(const std::string& key) {
  static const std::vector<std::pair<std::string, std::string>> table{
      {"L0", "physical.L0"},
      {"epsilon", "physical.epsilon"},
      {"gamma", "physical.gamma"},
      {"T", "physical.T"},
      {"K", "numerical.K"},
      {"steps_per_period", "numerical.steps_per_period"},
      {"monodromy_steps", "numerical.monodromy_steps"},
      {"dynamics", "numerical.dynamics"},
      {"variant", "numerical.variant"},
      {"epsilon_sweep", "floquet.epsilon_sweep"},
      {"K_sweep", "floquet.K_sweep"},
      {"samples", "floquet.samples"},
      {"samples_per_period", "output.samples_per_period"},
  };
  for (const auto& [bare, dotted] : table)
    if (key == bare || key == dotted) return dotted;
  throw ConfigError("unknown config key '" + key + "'");
}

inline void assign(RunConfig& rc, const std::string& dotted, const nlohmann::json& v) {
  if (dotted == "physical.L0") rc.cavity.L0 = as_number(v, dotted);
  else if (dotted == "physical.epsilon") rc.cavity.epsilon = as_number(v, dotted);
  else if (dotted == "physical.gamma") rc.cavity.gamma = as_number(v, dotted);
  else if (dotted == "physical.T") rc.cavity.T = as_number(v, dotted);
  else if (dotted == "numerical.K") {
    rc.cavity.K = as_integer(v, dotted);
    rc.K_explicit = true;
  } else if (dotted == "numerical.steps_per_period") rc.cavity.steps_per_period = as_integer(v, dotted);
  else if (dotted == "numerical.monodromy_steps") rc.monodromy_steps = as_integer(v, dotted);
  else if (dotted == "numerical.dynamics") rc.dynamics = parse_dynamics(as_string(v, dotted));
  else if (dotted == "numerical.variant") rc.variant = parse_variant_selection(as_string(v, dotted));
  else if (dotted == "floquet.epsilon_sweep") {
    if (!v.is_array()) throw ConfigError(dotted + ": expected an array of two numbers");
    rc.floquet_epsilons.clear();
    for (const auto& e : v) rc.floquet_epsilons.push_back(as_number(e, dotted));
  } else if (dotted == "floquet.K_sweep") {
    if (!v.is_array()) throw ConfigError(dotted + ": expected an array of two integers");
    rc.floquet_K.clear();
    for (const auto& e : v) rc.floquet_K.push_back(as_integer(e, dotted));
  } else if (dotted == "floquet.samples") rc.floquet_samples = as_integer(v, dotted);
  else if (dotted == "output.samples_per_period") rc.samples_per_period = as_integer(v, dotted);
  else throw ConfigError("unknown config key '" + dotted + "'");
}

}  // namespace detail

/// Builds a RunConfig from a JSON document. `source` names the input in messages.
inline RunConfig parse_config(const std::string& text, const std::string& source = "config") {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(source + ": malformed JSON at " + detail::line_column(text, e.byte ? e.byte - 1 : 0) + ": " + e.what());
  }
  if (!doc.is_object()) throw ConfigError(source + ": top level must be an object");
  RunConfig rc;
  for (const auto& [block, body] : doc.items()) {
    if (block == "version") continue;
    if (block != "physical" && block != "numerical" && block != "floquet" && block != "output")
      throw ConfigError(source + ": unknown block '" + block + "'");
    if (!body.is_object()) throw ConfigError(source + ": block '" + block + "' must be an object");
    for (const auto& [key, value] : body.items()) {
      const std::string dotted = block + "." + key;
      try {
        if (detail::canonical_key(dotted) != dotted) throw ConfigError("unknown config key '" + dotted + "'");
        detail::assign(rc, dotted, value);
      } catch (const ConfigError& e) {
        throw ConfigError(source + ": " + e.what());
      }
    }
  }
  for (const char* required : {"epsilon", "gamma", "T"}) {
    const auto& phys = doc.contains("physical") ? doc["physical"] : nlohmann::json::object();
    if (!phys.contains(required))
      throw ConfigError(source + ": missing required field physical." + std::string(required));
  }
  if (!rc.K_explicit) rc.cavity.K = default_truncation(rc.cavity.gamma);
  return rc;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

/// Applies one `key=value` override; value is read as JSON, falling back to a string.
inline void apply_override(RunConfig& rc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value (got '" + assignment + "')");
  const std::string key = detail::canonical_key(assignment.substr(0, eq));
  const std::string raw = assignment.substr(eq + 1);
  nlohmann::json value;
  try {
    value = nlohmann::json::parse(raw);
  } catch (const nlohmann::json::parse_error&) {
    value = raw;
  }
  try {
    detail::assign(rc, key, value);
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("--set ") + e.what());
  }
}

/// Re-resolves the truncation default after overrides touched gamma.
inline void finalize_config(RunConfig& rc) {
  if (!rc.K_explicit) rc.cavity.K = default_truncation(rc.cavity.gamma);
  rc.validate();
}

inline ordered_json config_to_json(const RunConfig& rc) {
  ordered_json j;
  j["physical"] = {{"L0", rc.cavity.L0}, {"epsilon", rc.cavity.epsilon}, {"gamma", rc.cavity.gamma}, {"T", rc.cavity.T}};
  j["numerical"] = {{"K", rc.cavity.K},
                    {"steps_per_period", rc.cavity.steps_per_period},
                    {"monodromy_steps", rc.monodromy_steps},
                    {"dynamics", to_string(rc.dynamics)},
                    {"variant", to_string(rc.variant)}};
  j["floquet"] = {{"epsilon_sweep", rc.floquet_epsilons}, {"K_sweep", rc.floquet_K}, {"samples", rc.floquet_samples}};
  j["output"] = {{"samples_per_period", rc.samples_per_period}};
  return j;
}

// ---------------------------------------------------------------------------
// Number formatting
// ---------------------------------------------------------------------------

inline std::string format_number(double x, int digits) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0.0) return "0";  // also folds -0
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

namespace detail {

inline void write_json(std::ostream& os, const ordered_json& j, int indent, int level) {
  const std::string pad(static_cast<std::size_t>(indent * (level + 1)), ' ');
  const std::string close(static_cast<std::size_t>(indent * level), ' ');
  switch (j.type()) {
    case ordered_json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << "{\n";
      bool first = true;
      for (const auto& [k, v] : j.items()) {
        if (!first) os << ",\n";
        first = false;
        os << pad << ordered_json(k).dump() << ": ";
        write_json(os, v, indent, level + 1);
      }
      os << "\n" << close << "}";
      return;
    }
    case ordered_json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      os << "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) os << ",\n";
        os << pad;
        write_json(os, j[i], indent, level + 1);
      }
      os << "\n" << close << "]";
      return;
    }
    case ordered_json::value_t::number_float: {
      const double x = j.get<double>();
      if (!std::isfinite(x)) {
        os << "null";
        return;
      }
      std::string s = format_number(x, 17);
      // Keep floats recognisable as floats when read back.
      if (s.find_first_of(".en") == std::string::npos) s += ".0";
      os << s;
      return;
    }
    default:
      os << j.dump();
  }
}

}  // namespace detail

/// JSON text with 17 significant digits for every float and a trailing newline.
inline std::string render_json(const ordered_json& j) {
  std::ostringstream os;
  detail::write_json(os, j, 2, 0);
  os << "\n";
  return os.str();
}

/// Comma-separated table with a header row, LF endings and 9 significant digits.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  class Row {
   public:
    Row& operator<<(double x) { return put(format_number(x, 9)); }
    Row& operator<<(int x) { return put(std::to_string(x)); }
    Row& operator<<(const std::string& s) {
      if (s.find_first_of(",\"\n\r") != std::string::npos) throw std::invalid_argument("CsvTable: field needs quoting");
      return put(s);
    }
    Row& operator<<(const char* s) { return *this << std::string(s); }

   private:
    friend class CsvTable;
    explicit Row(std::vector<std::string>& cells) : cells_(cells) {}
    Row& put(std::string s) {
      cells_.push_back(std::move(s));
      return *this;
    }
    std::vector<std::string>& cells_;
  };

  Row row() {
    rows_.emplace_back();
    return Row(rows_.back());
  }

  std::size_t size() const { return rows_.size(); }

  std::string render() const {
    std::string out;
    auto line = [&](const std::vector<std::string>& cells) {
      if (cells.size() != header_.size()) throw std::logic_error("CsvTable: row width differs from header");
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += cells[i];
      }
      out += '\n';
    };
    line(header_);
    for (const auto& r : rows_) line(r);
    return out;
  }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

inline ordered_json complex_list(const std::vector<cplx>& z) {
  ordered_json a = ordered_json::array();
  for (const auto& v : z) a.push_back({v.real(), v.imag()});
  return a;
}

inline ordered_json complex_list(const Eigen::VectorXcd& z) {
  return complex_list(std::vector<cplx>(z.data(), z.data() + z.size()));
}

inline ordered_json spectrum_to_json(const ParticleSpectrum& s) {
  return {{"method", to_string(s.method)}, {"N", s.N}, {"total", s.total()}, {"argmax", s.argmax()}};
}

}  // namespace dce
