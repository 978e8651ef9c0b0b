#ifndef HYPERLOSS_IO_HPP_
#define HYPERLOSS_IO_HPP_

// Spec documents (JSON, `schema: 1`), angle tokens, overrides and output files.
//
// Network document:
//   { "schema": 1, "name": "...", "description": "...",
//     "modes": [ {"label": "FM", "order": 0}, {"label": "HOM", "order": 1} ],
//     "input": {"mode": "FM", "sqz_db": 15 | "r": 1.72, "angle": 0},
//     "components": [
//       {"kind": "coupler",  "from": "FM", "to": "HOM", "eps": 0.08},
//       {"kind": "phase",    "mode": "HOM", "phi": "pi/2", "free": true},
//       {"kind": "gouy",     "mode": "HOM", "psi": 0.3, "free": false},
//       {"kind": "cavity",   "mode": "FM", "delta_hz": 0, "gamma_hz": 1.8e7, "resonant": true},
//       {"kind": "loss",     "mode": "FM", "lambda": 0.05},
//       {"kind": "squeezer", "mode": "FM", "r": 0.5, "angle": 0} ],
//     "readout": "FM", "external_loss": 0.263,
//     "frequency_grid": {"start_hz": 0, "stop_hz": 1e7, "points": 201} | {"values_hz": [...]} }
//
// Chain document:
//   { "schema": 1, "chain": {"nodes": 10, "eps": 0.01, "phi": "pi" | [...], "sqz_db": 15 | "r": ...,
//                            "policy": "shared", "phase_order": "after", "readout": "locked"} }

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

#include "hyperloss/components.hpp"
#include "hyperloss/errors.hpp"
#include "hyperloss/network.hpp"

namespace hyperloss {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

/// Parses radians: a plain number, or a pi token such as "pi", "-pi/2", "3pi/2", "2*pi", "0.5pi".
inline double parse_angle(std::string_view text) {
  static const std::regex kPiToken(R"(^\s*([+-]?)\s*(\d*\.?\d*)\s*\*?\s*pi\s*(?:/\s*(\d*\.?\d+))?\s*$)",
                                   std::regex::icase);
  const std::string s(text);
  std::smatch m;
  if (std::regex_match(s, m, kPiToken)) {
    const double sign = m[1] == "-" ? -1.0 : 1.0;
    const double num = m[2].length() > 0 ? std::stod(m[2]) : 1.0;
    const double den = m[3].matched ? std::stod(m[3]) : 1.0;
    if (den == 0.0) throw InvalidArgument("angle '" + s + "': division by zero");
    return sign * num * kPi / den;
  }
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(s, &used);
  } catch (const std::exception&) {
    throw InvalidArgument("cannot parse angle '" + s + "'");
  }
  while (used < s.size() && std::isspace(static_cast<unsigned char>(s[used]))) ++used;
  if (used != s.size()) throw InvalidArgument("cannot parse angle '" + s + "'");
  return value;
}

/// Wraps into [0, 2π).
inline double wrap_phase(double phi) {
  double w = std::fmod(phi, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  if (w >= kTwoPi) w = 0.0;
  return w;
}

/// %.15g formatting; the text used in every output file.
inline std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", x);
  return buf;
}

inline std::string format_fixed(double x, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

namespace detail {

inline const json& require(const json& j, const std::string& key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw ConfigError(where, "missing field '" + key + "'");
  return j.at(key);
}

inline void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) throw ConfigError(where + "." + it.key(), "unknown field");
}

inline double number(const json& j, const std::string& where) {
  if (!j.is_number()) throw ConfigError(where, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(where, "must be finite");
  return v;
}

inline double angle(const json& j, const std::string& where) {
  if (j.is_number()) return number(j, where);
  if (j.is_string()) {
    try {
      return parse_angle(j.get<std::string>());
    } catch (const InvalidArgument& e) {
      throw ConfigError(where, e.what());
    }
  }
  throw ConfigError(where, "expected a number or an angle token such as \"pi/2\"");
}

inline bool boolean(const json& j, const std::string& where) {
  if (!j.is_boolean()) throw ConfigError(where, "expected true or false");
  return j.get<bool>();
}

inline std::string text(const json& j, const std::string& where) {
  if (!j.is_string()) throw ConfigError(where, "expected a string");
  return j.get<std::string>();
}

/// Squeeze parameter from either "r" or "sqz_db" (input squeezed variance in dB below shot noise).
inline double squeeze_param(const json& j, const std::string& where) {
  const bool has_r = j.contains("r");
  const bool has_db = j.contains("sqz_db");
  if (has_r == has_db) throw ConfigError(where, "give exactly one of 'r' or 'sqz_db'");
  return has_r ? number(j.at("r"), where + ".r") : db_to_r(number(j.at("sqz_db"), where + ".sqz_db"));
}

inline std::size_t mode_ref(const NetworkSpec& net, const json& j, const std::string& where) {
  const std::string label = text(j, where);
  for (std::size_t k = 0; k < net.modes.size(); ++k)
    if (net.modes[k].label == label) return k;
  throw ConfigError(where, "unknown mode label '" + label + "'");
}

inline std::vector<double> frequency_grid(const json& j, const std::string& where) {
  std::vector<double> out;
  if (j.contains("values_hz")) {
    reject_unknown(j, {"values_hz"}, where);
    const json& v = j.at("values_hz");
    if (!v.is_array() || v.empty()) throw ConfigError(where + ".values_hz", "expected a non-empty array");
    for (std::size_t k = 0; k < v.size(); ++k)
      out.push_back(kTwoPi * number(v[k], where + ".values_hz[" + std::to_string(k) + "]"));
    return out;
  }
  reject_unknown(j, {"start_hz", "stop_hz", "points"}, where);
  const double lo = number(require(j, "start_hz", where), where + ".start_hz");
  const double hi = number(require(j, "stop_hz", where), where + ".stop_hz");
  const json& pts = require(j, "points", where);
  if (!pts.is_number_integer() || pts.get<long>() < 1) throw ConfigError(where + ".points", "expected an integer >= 1");
  const long n = pts.get<long>();
  for (long k = 0; k < n; ++k) {
    const double f = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
    out.push_back(kTwoPi * f);
  }
  return out;
}

inline void check_schema(const json& doc) {
  if (!doc.is_object()) throw ConfigError("", "spec document must be a JSON object");
  const json& s = require(doc, "schema", "");
  if (!s.is_number_integer() || s.get<int>() != kSchemaVersion)
    throw ConfigError("schema", "unsupported schema version (expected " + std::to_string(kSchemaVersion) + ")");
}

}  // namespace detail

inline NetworkSpec network_from_json(const json& doc) {
  using namespace detail;
  check_schema(doc);
  reject_unknown(doc, {"schema", "name", "description", "modes", "input", "components", "readout", "external_loss",
                       "frequency_grid"},
                 "");
  NetworkSpec net;
  if (doc.contains("name")) net.name = text(doc.at("name"), "name");

  const json& modes = require(doc, "modes", "");
  if (!modes.is_array() || modes.empty()) throw ConfigError("modes", "expected a non-empty array");
  for (std::size_t k = 0; k < modes.size(); ++k) {
    const std::string where = "modes[" + std::to_string(k) + "]";
    reject_unknown(modes[k], {"label", "order"}, where);
    ModeSpec m;
    m.label = text(require(modes[k], "label", where), where + ".label");
    if (modes[k].contains("order")) {
      if (!modes[k].at("order").is_number_integer()) throw ConfigError(where + ".order", "expected an integer");
      m.order = modes[k].at("order").get<int>();
    }
    net.modes.push_back(m);
  }

  const json& input = require(doc, "input", "");
  reject_unknown(input, {"mode", "r", "sqz_db", "angle"}, "input");
  net.input.mode = mode_ref(net, require(input, "mode", "input"), "input.mode");
  net.input.r = squeeze_param(input, "input");
  if (input.contains("angle")) net.input.angle = angle(input.at("angle"), "input.angle");

  net.readout = mode_ref(net, require(doc, "readout", ""), "readout");
  if (doc.contains("external_loss")) net.external_loss = number(doc.at("external_loss"), "external_loss");
  if (doc.contains("frequency_grid")) net.frequency_grid = frequency_grid(doc.at("frequency_grid"), "frequency_grid");

  const json& comps = require(doc, "components", "");
  if (!comps.is_array()) throw ConfigError("components", "expected an array");
  for (std::size_t k = 0; k < comps.size(); ++k) {
    const json& c = comps[k];
    const std::string where = "components[" + std::to_string(k) + "]";
    const std::string kind = text(require(c, "kind", where), where + ".kind");
    if (kind == "coupler") {
      reject_unknown(c, {"kind", "from", "to", "eps"}, where);
      net.components.emplace_back(Coupler{number(require(c, "eps", where), where + ".eps"),
                                          mode_ref(net, require(c, "from", where), where + ".from"),
                                          mode_ref(net, require(c, "to", where), where + ".to")});
    } else if (kind == "phase") {
      reject_unknown(c, {"kind", "mode", "phi", "free"}, where);
      net.components.emplace_back(Phase{angle(require(c, "phi", where), where + ".phi"),
                                        mode_ref(net, require(c, "mode", where), where + ".mode"),
                                        c.contains("free") && boolean(c.at("free"), where + ".free")});
    } else if (kind == "gouy") {
      reject_unknown(c, {"kind", "mode", "psi", "free"}, where);
      const std::size_t mode = mode_ref(net, require(c, "mode", where), where + ".mode");
      net.components.emplace_back(Gouy{angle(require(c, "psi", where), where + ".psi"), net.modes[mode].order, mode,
                                       c.contains("free") && boolean(c.at("free"), where + ".free")});
    } else if (kind == "cavity") {
      reject_unknown(c, {"kind", "mode", "delta_hz", "gamma_hz", "resonant"}, where);
      Cavity cav;
      cav.mode = mode_ref(net, require(c, "mode", where), where + ".mode");
      cav.resonant = c.contains("resonant") ? boolean(c.at("resonant"), where + ".resonant") : true;
      if (cav.resonant || c.contains("gamma_hz")) {
        // no defaults: linewidth and detuning are always explicit for a resonant mode
        cav.gamma = kTwoPi * number(require(c, "gamma_hz", where), where + ".gamma_hz");
        cav.delta = kTwoPi * number(require(c, "delta_hz", where), where + ".delta_hz");
      }
      net.components.emplace_back(cav);
    } else if (kind == "loss") {
      reject_unknown(c, {"kind", "mode", "lambda"}, where);
      net.components.emplace_back(Loss{number(require(c, "lambda", where), where + ".lambda"),
                                       mode_ref(net, require(c, "mode", where), where + ".mode")});
    } else if (kind == "squeezer") {
      reject_unknown(c, {"kind", "mode", "r", "sqz_db", "angle"}, where);
      net.components.emplace_back(Squeezer{squeeze_param(c, where),
                                           c.contains("angle") ? angle(c.at("angle"), where + ".angle") : 0.0,
                                           mode_ref(net, require(c, "mode", where), where + ".mode")});
    } else {
      throw ConfigError(where + ".kind", "unknown component kind '" + kind + "'");
    }
  }
  net.validate();
  return net;
}

/// Canonical document: squeeze as "r", frequencies in Hz.
inline json to_json(const NetworkSpec& net) {
  json doc;
  doc["schema"] = kSchemaVersion;
  doc["name"] = net.name;
  json modes = json::array();
  for (const auto& m : net.modes) modes.push_back({{"label", m.label}, {"order", m.order}});
  doc["modes"] = modes;
  const auto label = [&](std::size_t k) { return net.modes.at(k).label; };
  doc["input"] = {{"mode", label(net.input.mode)}, {"r", net.input.r}, {"angle", net.input.angle}};
  json comps = json::array();
  for (const auto& comp : net.components) {
    std::visit(
        [&](const auto& c) {
          using T = std::decay_t<decltype(c)>;
          json e;
          e["kind"] = kind_name(comp);
          if constexpr (std::is_same_v<T, Coupler>) {
            e["from"] = label(c.i);
            e["to"] = label(c.j);
            e["eps"] = c.eps;
          } else if constexpr (std::is_same_v<T, Phase>) {
            e["mode"] = label(c.mode);
            e["phi"] = c.phi;
            e["free"] = c.free;
          } else if constexpr (std::is_same_v<T, Gouy>) {
            e["mode"] = label(c.mode);
            e["psi"] = c.psi;
            e["free"] = c.free;
          } else if constexpr (std::is_same_v<T, Cavity>) {
            e["mode"] = label(c.mode);
            e["resonant"] = c.resonant;
            e["delta_hz"] = c.delta / kTwoPi;
            e["gamma_hz"] = c.gamma / kTwoPi;
          } else if constexpr (std::is_same_v<T, Loss>) {
            e["mode"] = label(c.mode);
            e["lambda"] = c.lambda;
          } else {
            e["mode"] = label(c.mode);
            e["r"] = c.r;
            e["angle"] = c.angle;
          }
          comps.push_back(e);
        },
        comp);
  }
  doc["components"] = comps;
  doc["readout"] = label(net.readout);
  doc["external_loss"] = net.external_loss;
  json hz = json::array();
  for (double w : net.frequency_grid) hz.push_back(w / kTwoPi);
  doc["frequency_grid"] = {{"values_hz", hz}};
  return doc;
}

inline ChainSpec chain_from_json(const json& doc) {
  using namespace detail;
  check_schema(doc);
  reject_unknown(doc, {"schema", "name", "description", "chain"}, "");
  const json& c = require(doc, "chain", "");
  reject_unknown(c, {"nodes", "eps", "phi", "r", "sqz_db", "policy", "phase_order", "readout"}, "chain");
  ChainSpec spec;
  const json& nodes = require(c, "nodes", "chain");
  if (!nodes.is_number_integer()) throw ConfigError("chain.nodes", "expected an integer");
  spec.n_nodes = nodes.get<int>();
  spec.eps = number(require(c, "eps", "chain"), "chain.eps");
  spec.r_in = squeeze_param(c, "chain");
  if (c.contains("phi")) {
    const json& p = c.at("phi");
    spec.phi.clear();
    if (p.is_array()) {
      for (std::size_t k = 0; k < p.size(); ++k) spec.phi.push_back(angle(p[k], "chain.phi[" + std::to_string(k) + "]"));
    } else {
      spec.phi.push_back(angle(p, "chain.phi"));
    }
  }
  if (c.contains("policy")) {
    const std::string v = text(c.at("policy"), "chain.policy");
    if (v == "shared") spec.policy = HomPolicy::shared;
    else if (v == "refreshed") spec.policy = HomPolicy::refreshed;
    else throw ConfigError("chain.policy", "expected 'shared' or 'refreshed'");
  }
  if (c.contains("phase_order")) {
    const std::string v = text(c.at("phase_order"), "chain.phase_order");
    if (v == "after") spec.order = PhaseOrder::after_coupler;
    else if (v == "before") spec.order = PhaseOrder::before_coupler;
    else throw ConfigError("chain.phase_order", "expected 'after' or 'before'");
  }
  if (c.contains("readout")) {
    const std::string v = text(c.at("readout"), "chain.readout");
    if (v == "locked") spec.readout = Readout::locked;
    else if (v == "optimal") spec.readout = Readout::optimal;
    else throw ConfigError("chain.readout", "expected 'locked' or 'optimal'");
  }
  spec.validate();
  return spec;
}

inline json to_json(const ChainSpec& c) {
  json phi = json::array();
  for (double p : c.phi) phi.push_back(p);
  return {{"schema", kSchemaVersion},
          {"chain",
           {{"nodes", c.n_nodes},
            {"eps", c.eps},
            {"phi", phi},
            {"r", c.r_in},
            {"policy", policy_name(c.policy)},
            {"phase_order", order_name(c.order)},
            {"readout", readout_name(c.readout)}}}};
}

using AnySpec = std::variant<NetworkSpec, ChainSpec>;

inline AnySpec spec_from_json(const json& doc) {
  if (doc.is_object() && doc.contains("chain")) return chain_from_json(doc);
  return network_from_json(doc);
}

inline json to_json(const AnySpec& spec) {
  return std::visit([](const auto& s) { return to_json(s); }, spec);
}

/// Parses JSON text; syntax errors are reported with a line number.
inline json parse_document(const std::string& text, const std::string& origin = "spec") {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    for (std::size_t k = 0; k < e.byte && k < text.size(); ++k)
      if (text[k] == '\n') ++line;
    throw ConfigError(origin + ":" + std::to_string(line), e.what());
  }
}

inline json load_document(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), "cannot open spec file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_document(buf.str(), path.string());
}

/// Applies "dotted.path=value" overrides (array elements by index). Each path must already exist.
/// The value is read as JSON when it parses as such, otherwise as a string.
inline void apply_overrides(json& doc, const std::vector<std::string>& overrides) {
  for (const auto& ov : overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError(ov, "override must look like key=value");
    const std::string key = ov.substr(0, eq);
    const std::string raw = ov.substr(eq + 1);
    json* node = &doc;
    std::stringstream parts(key);
    std::string part;
    while (std::getline(parts, part, '.')) {
      if (node->is_object() && node->contains(part)) {
        node = &(*node)[part];
      } else if (node->is_array() && !part.empty() &&
                 part.find_first_not_of("0123456789") == std::string::npos &&
                 std::stoul(part) < node->size()) {
        node = &(*node)[std::stoul(part)];
      } else {
        throw ConfigError(key, "override references a missing key");
      }
    }
    json value = json::parse(raw, nullptr, false);
    *node = value.is_discarded() ? json(raw) : value;
  }
}

/// Writes via a sibling temp file and rename.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError(path.string(), "cannot open output file for writing");
    out << content;
    if (!out) throw ConfigError(path.string(), "write failed");
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace hyperloss

#endif  // HYPERLOSS_IO_HPP_
