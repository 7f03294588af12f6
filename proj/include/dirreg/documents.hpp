#pragma once

#include "dirreg/determine.hpp"
#include "dirreg/momentmatrix.hpp"
#include "dirreg/rational.hpp"
#include "dirreg/sharpness.hpp"
#include "dirreg/version.hpp"

#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

namespace dirreg {

using nlohmann::json;

// Malformed or inconsistent input files; the CLI maps this to exit code 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ScalarMode { Rational, Float };

inline std::string mode_name(ScalarMode mode) { return mode == ScalarMode::Rational ? "rational" : "float"; }

inline ScalarMode parse_mode(const std::string& text) {
  if (text == "rational") return ScalarMode::Rational;
  if (text == "float") return ScalarMode::Float;
  throw InputError("mode must be \"rational\" or \"float\", got \"" + text + "\"");
}

namespace detail {

inline void require(bool cond, const std::string& message) {
  if (!cond) throw InputError(message);
}

inline Rational json_to_rational(const json& v, const std::string& where) {
  if (v.is_number_integer()) return Rational(v.get<long>());
  if (v.is_string()) {
    try {
      return parse_rational(v.get<std::string>());
    } catch (const std::invalid_argument& e) {
      throw InputError(where + ": " + e.what());
    }
  }
  if (v.is_number_float())
    throw InputError(where + ": rational mode requires integers or fraction strings, got " + v.dump());
  throw InputError(where + ": expected a number or fraction string, got " + v.dump());
}

inline double json_to_double(const json& v, const std::string& where) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    try {
      return to_double(parse_rational(v.get<std::string>()));
    } catch (const std::invalid_argument& e) {
      throw InputError(where + ": " + e.what());
    }
  }
  throw InputError(where + ": expected a number or fraction string, got " + v.dump());
}

inline void check_schema(const json& doc, const std::string& what) {
  require(doc.is_object(), what + ": document must be a JSON object");
  require(doc.contains("schema"), what + ": missing \"schema\" field");
  require(doc["schema"].is_number_integer() && doc["schema"].get<int>() == 1,
          what + ": unsupported schema version " + doc["schema"].dump());
}

} // namespace detail

// lambda.json: the direction-set input. Point entries stay in their raw
// JSON form so serialization round-trips byte-losslessly.
struct LambdaDocument {
  int n = 0;
  int m = 0;
  int k = 0;
  ScalarMode mode = ScalarMode::Rational;
  json points; // array of {"xi": [...], "eta": [...]}

  static LambdaDocument parse(const json& doc) {
    detail::check_schema(doc, "lambda");
    LambdaDocument out;
    for (const char* field : {"n", "m", "k"}) {
      detail::require(doc.contains(field) && doc[field].is_number_integer() && doc[field].get<int>() >= 1,
                      std::string("lambda: field \"") + field + "\" must be an integer >= 1");
    }
    out.n = doc["n"].get<int>();
    out.m = doc["m"].get<int>();
    out.k = doc["k"].get<int>();
    detail::require(doc.contains("mode") && doc["mode"].is_string(), "lambda: missing \"mode\" string");
    out.mode = parse_mode(doc["mode"].get<std::string>());
    detail::require(doc.contains("points") && doc["points"].is_array() && !doc["points"].empty(),
                    "lambda: \"points\" must be a nonempty array");
    out.points = doc["points"];
    for (std::size_t p = 0; p < out.points.size(); ++p) {
      const json& pt = out.points[p];
      std::string where = "lambda: points[" + std::to_string(p) + "]";
      detail::require(pt.is_object() && pt.contains("xi") && pt.contains("eta"), where + " needs \"xi\" and \"eta\"");
      detail::require(pt["xi"].is_array() && static_cast<int>(pt["xi"].size()) == out.n,
                      where + ".xi must be an array of length n = " + std::to_string(out.n));
      detail::require(pt["eta"].is_array() && static_cast<int>(pt["eta"].size()) == out.m,
                      where + ".eta must be an array of length m = " + std::to_string(out.m));
      // Validate entries eagerly so diagnostics carry the field path.
      for (const char* part : {"xi", "eta"}) {
        for (std::size_t i = 0; i < pt[part].size(); ++i) {
          std::string entry_where = where + "." + part + "[" + std::to_string(i) + "]";
          if (out.mode == ScalarMode::Rational)
            detail::json_to_rational(pt[part][i], entry_where);
          else
            detail::json_to_double(pt[part][i], entry_where);
        }
      }
    }
    return out;
  }

  json serialize() const {
    json doc;
    doc["schema"] = 1;
    doc["n"] = n;
    doc["m"] = m;
    doc["k"] = k;
    doc["mode"] = mode_name(mode);
    doc["points"] = points;
    return doc;
  }

  template <class Scalar>
  DirectionSet<Scalar> direction_set() const {
    DirectionSet<Scalar> set;
    set.n = n;
    set.m = m;
    set.k = k;
    for (std::size_t p = 0; p < points.size(); ++p) {
      DirectionPair<Scalar> pr;
      pr.id = static_cast<int>(p);
      pr.xi.resize(n);
      pr.eta.resize(m);
      std::string where = "lambda: points[" + std::to_string(p) + "]";
      for (int i = 0; i < n; ++i) {
        if constexpr (is_rational_v<Scalar>)
          pr.xi(i) = detail::json_to_rational(points[p]["xi"][static_cast<std::size_t>(i)], where);
        else
          pr.xi(i) = detail::json_to_double(points[p]["xi"][static_cast<std::size_t>(i)], where);
      }
      for (int j = 0; j < m; ++j) {
        if constexpr (is_rational_v<Scalar>)
          pr.eta(j) = detail::json_to_rational(points[p]["eta"][static_cast<std::size_t>(j)], where);
        else
          pr.eta(j) = detail::json_to_double(points[p]["eta"][static_cast<std::size_t>(j)], where);
      }
      set.pairs.push_back(std::move(pr));
    }
    set.validate();
    return set;
  }
};

// data.json: directional values keyed by the decimal id of the Lambda point.
template <class Scalar>
std::map<int, Scalar> parse_data_document(const json& doc) {
  detail::check_schema(doc, "data");
  detail::require(doc.contains("values") && doc["values"].is_object(), "data: missing \"values\" object");
  std::map<int, Scalar> out;
  for (const auto& [key, value] : doc["values"].items()) {
    int id = 0;
    try {
      std::size_t used = 0;
      id = std::stoi(key, &used);
      detail::require(used == key.size() && id >= 0, "");
    } catch (...) {
      throw InputError("data: key \"" + key + "\" is not a nonnegative integer id");
    }
    if constexpr (is_rational_v<Scalar>)
      out[id] = detail::json_to_rational(value, "data: values[\"" + key + "\"]");
    else
      out[id] = detail::json_to_double(value, "data: values[\"" + key + "\"]");
  }
  return out;
}

inline std::string coeff_key(const MultiIndex& alpha, int j) {
  return alpha.to_string() + "|" + std::to_string(j + 1); // 1-based component in files
}

inline std::pair<MultiIndex, int> parse_coeff_key(const std::string& key, int n, int m) {
  auto bar = key.find('|');
  detail::require(bar != std::string::npos, "coefficient key \"" + key + "\" must look like \"a1,...,an|j\"");
  std::vector<int> exps;
  std::stringstream ss(key.substr(0, bar));
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      exps.push_back(std::stoi(tok));
    } catch (...) {
      throw InputError("coefficient key \"" + key + "\": bad exponent \"" + tok + "\"");
    }
  }
  detail::require(static_cast<int>(exps.size()) == n, "coefficient key \"" + key + "\": expected " +
                                                          std::to_string(n) + " exponents");
  int j = 0;
  try {
    j = std::stoi(key.substr(bar + 1));
  } catch (...) {
    throw InputError("coefficient key \"" + key + "\": bad component index");
  }
  detail::require(j >= 1 && j <= m, "coefficient key \"" + key + "\": component out of range 1.." + std::to_string(m));
  return {MultiIndex(std::move(exps)), j - 1};
}

// phi.json: annihilator-form coefficients keyed "alpha|j".
template <class Scalar>
AnnihilatorForm<Scalar> parse_phi_document(const json& doc) {
  detail::check_schema(doc, "phi");
  for (const char* field : {"n", "m", "k"})
    detail::require(doc.contains(field) && doc[field].is_number_integer() && doc[field].get<int>() >= 1,
                    std::string("phi: field \"") + field + "\" must be an integer >= 1");
  AnnihilatorForm<Scalar> phi;
  phi.n = doc["n"].get<int>();
  phi.m = doc["m"].get<int>();
  phi.k = doc["k"].get<int>();
  phi.basis = enumerate_degree_k(phi.n, phi.k);
  phi.coeffs = VectorX<Scalar>::Zero(static_cast<Eigen::Index>(phi.basis.count()) * phi.m);
  detail::require(doc.contains("coeffs") && doc["coeffs"].is_object(), "phi: missing \"coeffs\" object");
  for (const auto& [key, value] : doc["coeffs"].items()) {
    auto [alpha, j] = parse_coeff_key(key, phi.n, phi.m);
    detail::require(alpha.degree() == phi.k, "phi: key \"" + key + "\" has degree != k");
    Scalar c;
    if constexpr (is_rational_v<Scalar>)
      c = detail::json_to_rational(value, "phi: coeffs[\"" + key + "\"]");
    else
      c = detail::json_to_double(value, "phi: coeffs[\"" + key + "\"]");
    phi.coeffs(phi.basis.position(alpha) * phi.m + j) = c;
  }
  detail::require(!phi.is_zero_form(), "phi: all coefficients vanish");
  return phi;
}

template <class Scalar>
json serialize_annihilator(const AnnihilatorForm<Scalar>& phi) {
  json coeffs = json::object();
  for (int a_pos = 0; a_pos < phi.basis.count(); ++a_pos)
    for (int j = 0; j < phi.m; ++j) {
      Scalar c = phi.coeff(a_pos, j);
      if (c == Scalar(0)) continue;
      if constexpr (is_rational_v<Scalar>)
        coeffs[coeff_key(phi.basis.indices[static_cast<std::size_t>(a_pos)], j)] = to_fraction_string(c);
      else
        coeffs[coeff_key(phi.basis.indices[static_cast<std::size_t>(a_pos)], j)] = c;
    }
  json doc;
  doc["schema"] = 1;
  doc["n"] = phi.n;
  doc["m"] = phi.m;
  doc["k"] = phi.k;
  doc["coeffs"] = coeffs;
  return doc;
}

// uv.json: a rank-1 witness plus the scalar profile of the Theorem-2
// counterexample.
struct UvDocument {
  VectorX<double> u;
  VectorX<double> v;
  ScalarProfile profile;

  static UvDocument parse(const json& doc) {
    detail::check_schema(doc, "uv");
    detail::require(doc.contains("u") && doc["u"].is_array() && !doc["u"].empty(), "uv: missing \"u\" array");
    detail::require(doc.contains("v") && doc["v"].is_array() && !doc["v"].empty(), "uv: missing \"v\" array");
    UvDocument out;
    out.u.resize(static_cast<Eigen::Index>(doc["u"].size()));
    out.v.resize(static_cast<Eigen::Index>(doc["v"].size()));
    for (std::size_t i = 0; i < doc["u"].size(); ++i)
      out.u(static_cast<Eigen::Index>(i)) = detail::json_to_double(doc["u"][i], "uv: u[" + std::to_string(i) + "]");
    for (std::size_t i = 0; i < doc["v"].size(); ++i)
      out.v(static_cast<Eigen::Index>(i)) = detail::json_to_double(doc["v"][i], "uv: v[" + std::to_string(i) + "]");
    detail::require(out.u.norm() > 0, "uv: u must be nonzero");
    detail::require(out.v.norm() > 0, "uv: v must be nonzero");
    if (doc.contains("profile")) {
      const json& prof = doc["profile"];
      detail::require(prof.is_object() && prof.contains("kind") && prof["kind"].is_string(),
                      "uv: profile needs a \"kind\" string");
      std::string kind = prof["kind"].get<std::string>();
      if (kind == "weierstrass") {
        double a = prof.value("a", 0.5), b = prof.value("b", 3.0);
        try {
          out.profile = weierstrass_profile(a, b);
        } catch (const std::invalid_argument& e) {
          throw InputError(std::string("uv: ") + e.what());
        }
      } else if (kind == "abs") {
        out.profile.kind = ScalarProfile::Kind::Abs;
      } else {
        throw InputError("uv: unknown profile kind \"" + kind + "\"");
      }
    }
    return out;
  }
};

// 64-bit FNV-1a over the raw input bytes, hex encoded.
inline std::string digest_bytes(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string("fnv1a64:") + buf;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open file \"" + path + "\"");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline json parse_json_file(const std::string& path) {
  std::string bytes = read_file(path);
  try {
    return json::parse(bytes);
  } catch (const json::parse_error& e) {
    throw InputError("file \"" + path + "\": " + e.what());
  }
}

// Atomic write: temp file in the target directory, then rename.
inline void write_file_atomic(const std::string& path, const std::string& contents) {
  namespace fs = std::filesystem;
  fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write to \"" + tmp.string() + "\"");
    out << contents;
  }
  fs::rename(tmp, target);
}

// Common report envelope; payload fields are merged at the top level.
inline json make_report(const std::string& command_echo, const std::string& input_digest, json payload) {
  json doc;
  doc["schema"] = 1;
  doc["tool"] = {{"name", kToolName}, {"version", kToolVersion}};
  doc["command"] = command_echo;
  doc["input_digest"] = input_digest;
  for (auto& [key, value] : payload.items()) doc[key] = value;
  return doc;
}

template <class Scalar>
json scalar_to_json(const Scalar& v) {
  if constexpr (is_rational_v<Scalar>)
    return to_fraction_string(v);
  else
    return v;
}

} // namespace dirreg
