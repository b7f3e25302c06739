#pragma once

#include <functional>
#include <string>
#include <vector>

#include "json.hpp"
#include "measchrod/carleman.hpp"
#include "measchrod/measure.hpp"
#include "measchrod/scattering.hpp"
#include "measchrod/wave.hpp"

namespace measchrod {

using json = nlohmann::json;

/// Configuration or input-file error; the message names the offending field
/// or the line and column of malformed JSON.
class ConfigError : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

/// Potential spec:
///   {"support": [a, b],
///    "atoms": [{"x": ..., "w": ...}, ...],
///    "density": {"breakpoints": [b0, ..., bn], "coeffs": [[c0, c1, c2, c3], ...]},
///    "generators": [{"type": "cantor", "level": n, "mass": m}]}
/// Every key is optional. Density piece k is c0 + c1 t + c2 t^2 + c3 t^3 with
/// t = x - b_k on [b_k, b_{k+1}]. The support defaults to the hull of all
/// atoms and breakpoints (and [0, 1] for a Cantor generator), or [-1, 1].
SignedMeasure parse_potential(const std::string& text, const std::string& source = "potential");
SignedMeasure load_potential(const std::string& path);
/// Spec text as parsed JSON (for hashing); same errors as parse_potential.
json parse_json_text(const std::string& text, const std::string& source);
json read_json_file(const std::string& path);

/// Expanded spec of a measure (generators become atoms).
json potential_to_json(const SignedMeasure& m);

/// Shortest round-trip decimal, independent of the locale.
std::string format_number(double v);
/// JSON number, or a decimal string when the value is not finite or its
/// decimal exponent exceeds 300 in magnitude.
json json_number(double v);
/// exp(log_value) as a decimal string when it would leave the safe range.
json json_number_from_log(double log_value);
/// Inverse of json_number (accepts numbers and decimal strings).
double number_from_json(const json& j);

/// Key-order independent hash of a JSON value (FNV-1a 64 of the sorted dump).
std::string canonical_hash(const json& j);

/// CSV with a header row and locale-free numbers.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);
  void row(const std::vector<json>& cells);
  [[nodiscard]] std::string str() const;
  void save(const std::string& path) const;

 private:
  std::size_t columns_;
  std::string text_;
};

/// Parsed CSV: header plus rows of raw cells.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};
CsvTable read_csv(const std::string& path);

void write_text(const std::string& path, const std::string& text);
void write_json(const std::string& path, const json& j);

struct RunManifest {
  std::string command;
  std::string potential_hash;
  json parameters = json::object();
  std::string version;
  unsigned seed = 0;
  std::vector<std::string> outputs;
  double wall_time = 0.0;
};

/// Library version string.
std::string version_string();

// JSON conversions of the reports. Values that may overflow are written
// through json_number / json_number_from_log.
void to_json(json& j, const RunManifest& m);
void from_json(const json& j, RunManifest& m);
void to_json(json& j, const Resonance& r);
void from_json(const json& j, Resonance& r);
void to_json(json& j, const StripReport& r);
void from_json(const json& j, StripReport& r);
void to_json(json& j, const CarlemanConstants& c);
void from_json(const json& j, CarlemanConstants& c);
void to_json(json& j, const CarlemanReport& r);
void from_json(const json& j, CarlemanReport& r);
void to_json(json& j, const ResolventBoundReport& r);
void from_json(const json& j, ResolventBoundReport& r);
void to_json(json& j, const HScanReport& r);
void from_json(const json& j, HScanReport& r);
void to_json(json& j, const ExteriorReport& r);
void from_json(const json& j, ExteriorReport& r);
void to_json(json& j, const DecayFit& f);
void from_json(const json& j, DecayFit& f);
/// Summary of a local energy decay experiment (without the states).
json led_summary(const LedReport& r);

/// Data profile "zero", "bump:c,r" or "gaussian:c,s" (Gaussian exp(-((x-c)/s)^2)
/// truncated where it drops below 1e-18).
std::function<double(double)> parse_profile(const std::string& spec);

}  // namespace measchrod
