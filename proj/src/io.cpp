#include "measchrod/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#ifndef MEASCHROD_VERSION
#define MEASCHROD_VERSION "0.0.0"
#endif

namespace measchrod {

namespace {

double require_number(const json& j, const std::string& field) {
  if (!j.is_number()) throw ConfigError(field + ": expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(field + ": must be finite");
  return v;
}

const json& require_array(const json& j, const std::string& field) {
  if (!j.is_array()) throw ConfigError(field + ": expected an array");
  return j;
}

void reject_unknown(const json& obj, const std::vector<std::string>& allowed, const std::string& where) {
  for (const auto& [key, value] : obj.items())
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw ConfigError(where + (where.empty() ? "" : ".") + key + ": unknown key");
}

std::string field(const std::string& base, std::size_t i, const std::string& leaf = "") {
  return base + "[" + std::to_string(i) + "]" + (leaf.empty() ? "" : "." + leaf);
}

double parse_double(std::string_view s, const std::string& what) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ptr != s.data() + s.size() || s.empty()) throw ConfigError(what + ": '" + std::string(s) + "' is not a number");
  if (ec == std::errc::result_out_of_range) {
    // from_chars leaves v untouched; decide between overflow and underflow
    const auto e = s.find_first_of("eE");
    const bool big = e != std::string_view::npos && s.substr(e + 1).front() != '-';
    const bool negative = s.front() == '-';
    return big ? (negative ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity())
               : (negative ? -0.0 : 0.0);
  }
  return v;
}

}  // namespace

json parse_json_text(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // e.byte is the 1-based offset of the offending character
    const std::size_t end = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < end; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::string what = e.what();
    if (const auto p = what.find("syntax error"); p != std::string::npos) what = what.substr(p);
    throw ConfigError(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": malformed JSON (" + what +
                      ")");
  }
}

json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path + ": cannot open file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_json_text(ss.str(), path);
}

namespace {

SignedMeasure potential_from_json(const json& spec) {
  if (!spec.is_object()) throw ConfigError("potential: expected a JSON object");
  reject_unknown(spec, {"support", "atoms", "density", "generators"}, "");

  std::vector<Atom> atoms;
  std::vector<double> hull;
  if (spec.contains("atoms")) {
    const json& arr = require_array(spec["atoms"], "atoms");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const json& a = arr[i];
      if (!a.is_object()) throw ConfigError(field("atoms", i) + ": expected an object {\"x\", \"w\"}");
      reject_unknown(a, {"x", "w"}, field("atoms", i));
      if (!a.contains("x")) throw ConfigError(field("atoms", i, "x") + ": missing");
      if (!a.contains("w")) throw ConfigError(field("atoms", i, "w") + ": missing");
      atoms.push_back({require_number(a["x"], field("atoms", i, "x")), require_number(a["w"], field("atoms", i, "w"))});
      hull.push_back(atoms.back().position);
    }
  }

  PiecewiseDensity density;
  if (spec.contains("density")) {
    const json& d = spec["density"];
    if (!d.is_object()) throw ConfigError("density: expected an object");
    reject_unknown(d, {"breakpoints", "coeffs"}, "density");
    if (!d.contains("breakpoints")) throw ConfigError("density.breakpoints: missing");
    if (!d.contains("coeffs")) throw ConfigError("density.coeffs: missing");
    const json& bp = require_array(d["breakpoints"], "density.breakpoints");
    const json& cf = require_array(d["coeffs"], "density.coeffs");
    std::vector<double> breaks;
    for (std::size_t i = 0; i < bp.size(); ++i) breaks.push_back(require_number(bp[i], field("density.breakpoints", i)));
    for (std::size_t i = 1; i < breaks.size(); ++i)
      if (!(breaks[i] > breaks[i - 1]))
        throw ConfigError("density.breakpoints: not strictly increasing at index " + std::to_string(i));
    if (breaks.size() < 2 && !cf.empty()) throw ConfigError("density.breakpoints: need at least two");
    if (!breaks.empty() && cf.size() + 1 != breaks.size())
      throw ConfigError("density.coeffs: expected " + std::to_string(breaks.size() - 1) + " pieces, got " +
                        std::to_string(cf.size()));
    std::vector<Cubic> coeffs;
    for (std::size_t i = 0; i < cf.size(); ++i) {
      const json& row = require_array(cf[i], field("density.coeffs", i));
      if (row.empty() || row.size() > 4)
        throw ConfigError(field("density.coeffs", i) + ": expected 1 to 4 coefficients");
      Cubic c{0.0, 0.0, 0.0, 0.0};
      for (std::size_t k = 0; k < row.size(); ++k) c[k] = require_number(row[k], field(field("density.coeffs", i), k));
      coeffs.push_back(c);
    }
    if (!coeffs.empty()) {
      hull.push_back(breaks.front());
      hull.push_back(breaks.back());
      density = PiecewiseDensity(std::move(breaks), std::move(coeffs));
    }
  }

  if (spec.contains("generators")) {
    const json& arr = require_array(spec["generators"], "generators");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const json& g = arr[i];
      if (!g.is_object()) throw ConfigError(field("generators", i) + ": expected an object");
      if (!g.contains("type") || !g["type"].is_string())
        throw ConfigError(field("generators", i, "type") + ": expected a string");
      const std::string type = g["type"].get<std::string>();
      if (type != "cantor") throw ConfigError(field("generators", i, "type") + ": unknown generator '" + type + "'");
      reject_unknown(g, {"type", "level", "mass"}, field("generators", i));
      if (!g.contains("level") || !g["level"].is_number_integer())
        throw ConfigError(field("generators", i, "level") + ": expected an integer");
      const int level = g["level"].get<int>();
      if (level < 1 || level > 20) throw ConfigError(field("generators", i, "level") + ": must be in [1, 20]");
      if (!g.contains("mass")) throw ConfigError(field("generators", i, "mass") + ": missing");
      const double mass = require_number(g["mass"], field("generators", i, "mass"));
      const SignedMeasure c = cantor_approx(level, mass);
      atoms.insert(atoms.end(), c.atoms().begin(), c.atoms().end());
      hull.push_back(0.0);
      hull.push_back(1.0);
    }
  }

  Interval support{-1.0, 1.0};
  if (spec.contains("support")) {
    const json& s = spec["support"];
    if (!s.is_array() || s.size() != 2) throw ConfigError("support: expected [a, b]");
    support = {require_number(s[0], "support[0]"), require_number(s[1], "support[1]")};
    if (!(support.lo < support.hi)) throw ConfigError("support: expected a < b");
    for (double x : hull)
      if (!support.contains(x)) throw ConfigError("support: does not contain " + format_number(x));
  } else if (!hull.empty()) {
    const auto [lo, hi] = std::minmax_element(hull.begin(), hull.end());
    support = {*lo, *hi};
    if (!(support.lo < support.hi)) support = {support.lo - 0.5, support.hi + 0.5};
  }
  try {
    return SignedMeasure(std::move(atoms), std::move(density), support);
  } catch (const InvalidInput& e) {
    throw ConfigError(std::string("potential: ") + e.what());
  }
}

}  // namespace

SignedMeasure parse_potential(const std::string& text, const std::string& source) {
  return potential_from_json(parse_json_text(text, source));
}

SignedMeasure load_potential(const std::string& path) { return potential_from_json(read_json_file(path)); }

json potential_to_json(const SignedMeasure& m) {
  json j;
  j["support"] = {m.support().lo, m.support().hi};
  j["atoms"] = json::array();
  for (const Atom& a : m.atoms()) j["atoms"].push_back({{"x", a.position}, {"w", a.weight}});
  if (!m.density().empty()) {
    json coeffs = json::array();
    for (const Cubic& c : m.density().coeffs()) coeffs.push_back({c[0], c[1], c[2], c[3]});
    j["density"] = {{"breakpoints", m.density().breakpoints()}, {"coeffs", coeffs}};
  }
  return j;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

json json_number(double v) {
  if (!std::isfinite(v)) return format_number(v);
  if (v != 0.0 && std::abs(std::floor(std::log10(std::abs(v)))) > 300.0) return format_number(v);
  return v;
}

json json_number_from_log(double log_value) {
  if (std::isnan(log_value)) return "nan";
  if (log_value == -std::numeric_limits<double>::infinity()) return 0.0;
  if (log_value == std::numeric_limits<double>::infinity()) return "inf";
  const double e10 = log_value / std::numbers::ln10;
  if (std::abs(e10) <= 300.0) return std::exp(log_value);
  // long double keeps the fractional exponent accurate for |e10| in the thousands
  const long double e10l = static_cast<long double>(log_value) / std::numbers::ln10_v<long double>;
  const long double whole = std::floor(e10l);
  const double mantissa = static_cast<double>(std::pow(10.0L, e10l - whole));
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, mantissa, std::chars_format::fixed, 14);
  return std::string(buf, res.ptr) + "e" + (whole >= 0 ? "+" : "") + std::to_string(static_cast<long long>(whole));
}

double number_from_json(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return parse_double(j.get<std::string>(), "number");
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  throw ConfigError("expected a number or a decimal string");
}

std::string canonical_hash(const json& j) {
  // objects are key-sorted, so the compact dump is canonical
  const std::string s = j.dump();
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

CsvWriter::CsvWriter(std::vector<std::string> header) : columns_(header.size()) {
  for (std::size_t i = 0; i < header.size(); ++i) text_ += (i ? "," : "") + header[i];
  text_ += "\n";
}

void CsvWriter::row(const std::vector<json>& cells) {
  if (cells.size() != columns_) throw std::logic_error("CSV row has the wrong number of cells");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) text_ += ",";
    const json& c = cells[i];
    if (c.is_number()) {
      text_ += format_number(c.get<double>());
    } else if (c.is_boolean()) {
      text_ += c.get<bool>() ? "true" : "false";
    } else if (c.is_string()) {
      const std::string s = c.get<std::string>();
      if (s.find_first_of(",\"\n") == std::string::npos) {
        text_ += s;
      } else {
        text_ += '"';
        for (char ch : s) text_ += ch == '"' ? std::string("\"\"") : std::string(1, ch);
        text_ += '"';
      }
    } else if (c.is_null()) {
      // empty cell
    } else {
      text_ += c.dump();
    }
  }
  text_ += "\n";
}

std::string CsvWriter::str() const { return text_; }

void CsvWriter::save(const std::string& path) const { write_text(path, text_); }

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open file");
  auto split = [](const std::string& line) {
    std::vector<std::string> out(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char c = line[i];
      if (quoted) {
        if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
          out.back() += '"';
          ++i;
        } else if (c == '"') {
          quoted = false;
        } else {
          out.back() += c;
        }
      } else if (c == '"') {
        quoted = true;
      } else if (c == ',') {
        out.emplace_back();
      } else {
        out.back() += c;
      }
    }
    return out;
  };
  CsvTable t;
  std::string line;
  if (std::getline(in, line)) t.header = split(line);
  while (std::getline(in, line))
    if (!line.empty()) t.rows.push_back(split(line));
  return t;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError(path + ": cannot write file");
  out << text;
  if (!out) throw ConfigError(path + ": write failed");
}

void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

std::string version_string() { return MEASCHROD_VERSION; }

namespace {

json numbers(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(json_number(x));
  return a;
}

std::vector<double> numbers_from(const json& a) {
  std::vector<double> v;
  for (const json& x : a) v.push_back(number_from_json(x));
  return v;
}

}  // namespace

void to_json(json& j, const RunManifest& m) {
  j = {{"command", m.command},       {"potential_hash", m.potential_hash},
       {"parameters", m.parameters}, {"version", m.version},
       {"seed", m.seed},             {"outputs", m.outputs},
       {"wall_time", m.wall_time}};
}

void from_json(const json& j, RunManifest& m) {
  m.command = j.at("command").get<std::string>();
  m.potential_hash = j.at("potential_hash").get<std::string>();
  m.parameters = j.at("parameters");
  m.version = j.at("version").get<std::string>();
  m.seed = j.at("seed").get<unsigned>();
  m.outputs = j.at("outputs").get<std::vector<std::string>>();
  m.wall_time = j.at("wall_time").get<double>();
}

void to_json(json& j, const Resonance& r) {
  j = {{"lambda_re", json_number(r.lambda.real())},
       {"lambda_im", json_number(r.lambda.imag())},
       {"multiplicity", r.multiplicity},
       {"residual", json_number(r.newton_residual)},
       {"eigenvalue", r.eigenvalue}};
}

void from_json(const json& j, Resonance& r) {
  r.lambda = {number_from_json(j.at("lambda_re")), number_from_json(j.at("lambda_im"))};
  r.multiplicity = j.at("multiplicity").get<int>();
  r.newton_residual = number_from_json(j.at("residual"));
  r.eigenvalue = j.value("eigenvalue", false);
}

void to_json(json& j, const StripReport& r) {
  json samples = json::array();
  for (const StripSample& s : r.samples)
    samples.push_back({{"re", json_number(s.re)},
                       {"im", json_number(s.im)},
                       {"norm", json_number(s.norm)},
                       {"scaled", json_number(s.scaled)}});
  j = {{"lambda0", json_number(r.lambda0)},
       {"lambda_max", json_number(r.lambda_max)},
       {"eps0", json_number(r.eps0)},
       {"k", r.k},
       {"zeros", r.zeros},
       {"samples", samples},
       {"empirical_constant", json_number(r.empirical_constant)},
       {"resonance_free", r.zeros.empty()}};
}

void from_json(const json& j, StripReport& r) {
  r.lambda0 = number_from_json(j.at("lambda0"));
  r.lambda_max = number_from_json(j.at("lambda_max"));
  r.eps0 = number_from_json(j.at("eps0"));
  r.k = j.at("k").get<int>();
  r.zeros = j.at("zeros").get<std::vector<Resonance>>();
  r.samples.clear();
  for (const json& s : j.at("samples"))
    r.samples.push_back({number_from_json(s.at("re")), number_from_json(s.at("im")), number_from_json(s.at("norm")),
                         number_from_json(s.at("scaled"))});
  r.empirical_constant = number_from_json(j.at("empirical_constant"));
}

void to_json(json& j, const CarlemanConstants& c) {
  j = {{"tv", json_number(c.tv)},
       {"energy", json_number(c.energy)},
       {"h", json_number(c.h)},
       {"delta", json_number(c.delta)},
       {"c1", json_number(c.c1)},
       {"log_c", json_number(c.log_c)},
       {"c", json_number_from_log(c.log_c)},
       {"log_c_literal", json_number(c.log_c_literal)},
       {"c_tilde", json_number(c.c_tilde)},
       {"log_simplified", json_number(c.log_simplified)}};
}

void from_json(const json& j, CarlemanConstants& c) {
  c.tv = number_from_json(j.at("tv"));
  c.energy = number_from_json(j.at("energy"));
  c.h = number_from_json(j.at("h"));
  c.delta = number_from_json(j.at("delta"));
  c.c1 = number_from_json(j.at("c1"));
  c.log_c = number_from_json(j.at("log_c"));
  c.c = number_from_json(j.at("c"));
  c.log_c_literal = number_from_json(j.at("log_c_literal"));
  c.c_tilde = number_from_json(j.at("c_tilde"));
  c.log_simplified = number_from_json(j.at("log_simplified"));
}

void to_json(json& j, const CarlemanReport& r) {
  j = {{"energy", json_number(r.energy)},
       {"eps", json_number(r.eps)},
       {"h", json_number(r.h)},
       {"delta", json_number(r.delta)},
       {"sign", r.sign},
       {"resolution", json_number(r.resolution)},
       {"lhs", json_number(r.lhs)},
       {"rhs_integral", json_number(r.rhs_integral)},
       {"log_rhs", json_number(r.log_rhs)},
       {"rhs", json_number_from_log(r.log_rhs)},
       {"ratio", json_number(r.ratio)},
       {"log10_ratio", json_number(r.log10_ratio)},
       {"tolerance", json_number(r.tolerance())},
       {"pass", r.pass()},
       {"skipped", r.skipped},
       {"note", r.note},
       {"constants", r.constants}};
}

void from_json(const json& j, CarlemanReport& r) {
  r.energy = number_from_json(j.at("energy"));
  r.eps = number_from_json(j.at("eps"));
  r.h = number_from_json(j.at("h"));
  r.delta = number_from_json(j.at("delta"));
  r.sign = j.at("sign").get<int>();
  r.resolution = number_from_json(j.at("resolution"));
  r.lhs = number_from_json(j.at("lhs"));
  r.rhs_integral = number_from_json(j.at("rhs_integral"));
  r.log_rhs = number_from_json(j.at("log_rhs"));
  r.ratio = number_from_json(j.at("ratio"));
  r.log10_ratio = number_from_json(j.at("log10_ratio"));
  r.skipped = j.at("skipped").get<bool>();
  r.note = j.at("note").get<std::string>();
  r.constants = j.at("constants").get<CarlemanConstants>();
}

void to_json(json& j, const ResolventBoundReport& r) {
  j = {{"energy", json_number(r.energy)},
       {"eps", json_number(r.eps)},
       {"h", json_number(r.h)},
       {"delta", json_number(r.delta)},
       {"sign", r.sign},
       {"measured_norm", json_number(r.measured_norm)},
       {"log_paper_bound", json_number(r.log_paper_bound)},
       {"paper_bound", json_number_from_log(r.log_paper_bound)},
       {"ratio", json_number(r.ratio)},
       {"converged", r.converged},
       {"pass", r.pass()}};
}

void from_json(const json& j, ResolventBoundReport& r) {
  r.energy = number_from_json(j.at("energy"));
  r.eps = number_from_json(j.at("eps"));
  r.h = number_from_json(j.at("h"));
  r.delta = number_from_json(j.at("delta"));
  r.sign = j.at("sign").get<int>();
  r.measured_norm = number_from_json(j.at("measured_norm"));
  r.log_paper_bound = number_from_json(j.at("log_paper_bound"));
  r.paper_bound = number_from_json(j.at("paper_bound"));
  r.ratio = number_from_json(j.at("ratio"));
  r.converged = j.at("converged").get<bool>();
}

void to_json(json& j, const HScanReport& r) {
  j = {{"h", numbers(r.h)},
       {"energy", numbers(r.energy)},
       {"norm", numbers(r.norm)},
       {"slope", json_number(r.slope)},
       {"intercept", json_number(r.intercept)},
       {"envelope_slope", json_number(r.envelope_slope)},
       {"under_envelope", r.slope <= r.envelope_slope}};
}

void from_json(const json& j, HScanReport& r) {
  r.h = numbers_from(j.at("h"));
  r.energy = numbers_from(j.at("energy"));
  r.norm = numbers_from(j.at("norm"));
  r.slope = number_from_json(j.at("slope"));
  r.intercept = number_from_json(j.at("intercept"));
  r.envelope_slope = number_from_json(j.at("envelope_slope"));
}

void to_json(json& j, const ExteriorReport& r) {
  j = {{"h0", json_number(r.h0)},
       {"r0", json_number(r.r0)},
       {"h", numbers(r.h)},
       {"norm", numbers(r.norm)},
       {"slope", json_number(r.slope)},
       {"empirical_c", json_number(r.empirical_c)},
       {"slope_in_band", r.slope_in_band()}};
}

void from_json(const json& j, ExteriorReport& r) {
  r.h0 = number_from_json(j.at("h0"));
  r.r0 = number_from_json(j.at("r0"));
  r.h = numbers_from(j.at("h"));
  r.norm = numbers_from(j.at("norm"));
  r.slope = number_from_json(j.at("slope"));
  r.empirical_c = number_from_json(j.at("empirical_c"));
}

void to_json(json& j, const DecayFit& f) {
  j = {{"rate", json_number(f.rate)},
       {"amplitude_rate", json_number(0.5 * f.rate)},
       {"prefactor", json_number(f.prefactor)},
       {"r_squared", json_number(f.r_squared)},
       {"t_start", json_number(f.t_start)},
       {"t_end", json_number(f.t_end)},
       {"points", f.points},
       {"decays", f.decays()}};
}

void from_json(const json& j, DecayFit& f) {
  f.rate = number_from_json(j.at("rate"));
  f.prefactor = number_from_json(j.at("prefactor"));
  f.r_squared = number_from_json(j.at("r_squared"));
  f.t_start = number_from_json(j.at("t_start"));
  f.t_end = number_from_json(j.at("t_end"));
  f.points = j.at("points").get<std::size_t>();
}

json led_summary(const LedReport& r) {
  json j;
  j["fit"] = r.fit;
  j["zero_resonance"] = {{"exists", r.zero_resonance.exists},
                         {"slope", json_number(r.zero_resonance.slope)},
                         {"left_value", json_number(r.zero_resonance.left_value)},
                         {"right_value", json_number(r.zero_resonance.right_value)}};
  j["limit_coefficient"] = json_number(r.limit_coefficient);
  j["limit_error"] = json_number(r.limit_error);
  j["slowest_resonance"] = r.slowest ? json(*r.slowest) : json(nullptr);
  j["rate_ratio"] = json_number(r.rate_ratio);
  j["rate_in_band"] = r.rate_in_band();
  j["run"] = {{"dt", json_number(r.run.dt)},
              {"stability_limit", json_number(r.run.stability_limit)},
              {"box", json_number(r.run.box)},
              {"data_radius", json_number(r.run.data_radius)},
              {"negative_modes", r.run.negative_modes},
              {"projected", r.run.projected},
              {"energy_drift", json_number(r.run.energy_drift)}};
  return j;
}

std::function<double(double)> parse_profile(const std::string& spec) {
  if (spec == "zero" || spec.empty()) return [](double) { return 0.0; };
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  std::vector<double> args;
  if (colon != std::string::npos) {
    std::string_view rest(spec);
    rest.remove_prefix(colon + 1);
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      args.push_back(parse_double(rest.substr(0, comma), "profile '" + spec + "'"));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
  }
  if (args.size() != 2) throw ConfigError("profile '" + spec + "': expected kind:center,width");
  const double c = args[0], r = args[1];
  if (!(r > 0.0)) throw ConfigError("profile '" + spec + "': width must be positive");
  if (kind == "bump")
    return [c, r](double x) {
      const double t = (x - c) / r;
      return std::abs(t) < 1.0 ? std::exp(-1.0 / (1.0 - t * t)) : 0.0;
    };
  if (kind == "gaussian") {
    const double cut = r * std::sqrt(18.0 * std::numbers::ln10);  // exp(-cut^2/r^2) = 1e-18
    return [c, r, cut](double x) {
      const double t = x - c;
      return std::abs(t) < cut ? std::exp(-(t * t) / (r * r)) : 0.0;
    };
  }
  throw ConfigError("profile '" + spec + "': unknown kind '" + kind + "'");
}

}  // namespace measchrod
