#pragma once

#include "qreach/expression.hpp"
#include "qreach/representation.hpp"

#include <json.hpp>

#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace qreach {

using json = nlohmann::json;

/// Schema violations collected over the whole file.
class SystemError : public std::runtime_error {
 public:
  explicit SystemError(std::vector<std::string> problems)
      : std::runtime_error(join(problems)), problems_(std::move(problems)) {}
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  static std::string join(const std::vector<std::string>& ps) {
    std::string out = "invalid system definition:";
    for (const auto& p : ps) out += "\n  - " + p;
    return out;
  }
  std::vector<std::string> problems_;
};

/// A validated control system. H0 and controls are stored skew-Hermitian, i.e. the physical
/// Hamiltonians from the file divided by i*hbar.
struct SystemDefinition {
  std::string name;
  std::string description;
  std::string preset;  // "heisenberg" | "so21" | "custom"
  AlgebraPtr algebra;
  std::string h0_source;
  std::vector<std::string> control_sources;
  OperatorPoly H0;
  std::vector<OperatorPoly> controls;
  std::map<std::string, Rational> params;
  double bargmann_index = 1.5;
  std::vector<int> truncations{16, 32};
  std::vector<int> caps{2, 3, 4};
  std::vector<ProfileSpec> profiles;
  double tolerance = 1e-10;
  std::uint64_t seed = 0;
  int max_rounds = 16;
  int max_ad_depth = 8;
  json algebra_config;

  bool has_representation() const { return preset == "heisenberg" || preset == "so21"; }

  TruncatedRep representation(int N) const {
    if (preset == "heisenberg") return heisenberg_rep(algebra, N);
    if (preset == "so21") return so21_discrete_rep(algebra, bargmann_index, N);
    throw RepresentationError("no truncated representation for custom algebra '" + algebra->name() + "'");
  }

  std::vector<OperatorPoly> all_hamiltonians() const {
    std::vector<OperatorPoly> out{H0};
    out.insert(out.end(), controls.begin(), controls.end());
    return out;
  }
};

inline std::vector<ProfileSpec> default_profiles() {
  ProfileSpec g;
  ProfileSpec e;
  e.type = ProfileType::Exponential;
  ProfileSpec pg;
  pg.type = ProfileType::PolyGaussian;
  return {g, e, pg};
}

inline json profile_to_json(const ProfileSpec& p) {
  json j{{"type", p.label()}};
  switch (p.type) {
    case ProfileType::Gaussian:
      j["center"] = p.center;
      j["width"] = p.width;
      break;
    case ProfileType::Exponential:
      j["center"] = p.center;
      j["rate"] = p.rate;
      break;
    case ProfileType::PolyGaussian:
      j["center"] = p.center;
      j["width"] = p.width;
      j["power"] = p.power;
      break;
    case ProfileType::Basis:
      j["index"] = p.index;
      break;
  }
  return j;
}

/// Resolved configuration, embedded in every report.
inline json system_to_json(const SystemDefinition& s) {
  json params = json::object();
  for (const auto& [k, v] : s.params) params[k] = static_cast<double>(v);
  json profiles = json::array();
  for (const auto& p : s.profiles) profiles.push_back(profile_to_json(p));
  json controls = json::array();
  for (std::size_t k = 0; k < s.controls.size(); ++k)
    controls.push_back({{"source", s.control_sources[k]}, {"skew", s.controls[k].to_string()}});
  json j{{"name", s.name},
         {"algebra", s.algebra_config},
         {"H0", {{"source", s.h0_source}, {"skew", s.H0.to_string()}}},
         {"controls", controls},
         {"params", params},
         {"truncations", s.truncations},
         {"caps", s.caps},
         {"profiles", profiles},
         {"tolerance", s.tolerance},
         {"seed", s.seed},
         {"max_rounds", s.max_rounds},
         {"max_ad_depth", s.max_ad_depth}};
  if (s.preset == "so21") j["j"] = s.bargmann_index;
  if (s.preset == "heisenberg") j["conventions"] = "e is identified with the unit";
  if (s.preset == "so21") j["conventions"] = "discrete-series truncation in the L_y eigenbasis (proxy for scattering states)";
  return j;
}

namespace detail {

class SystemParser {
 public:
  SystemDefinition parse(const json& doc) {
    if (!doc.is_object()) {
      problems_.push_back("top level must be a JSON object");
      throw SystemError(problems_);
    }
    static const std::set<std::string> known{"spec", "name", "description", "algebra", "H0", "controls", "params",
                                             "truncations", "caps", "profiles", "tolerance", "seed", "max_rounds",
                                             "max_ad_depth"};
    for (const auto& [k, v] : doc.items())
      if (!known.count(k)) problems_.push_back("unknown key '" + k + "'");

    if (!doc.contains("spec"))
      problems_.push_back("missing required key 'spec'");
    else if (!doc["spec"].is_number_integer() || doc["spec"].get<long long>() != 1)
      problems_.push_back("'spec' must be the integer 1");

    sys_.name = string_field(doc, "name", "unnamed");
    sys_.description = string_field(doc, "description", "");
    read_params(doc);
    read_algebra(doc);
    read_hamiltonians(doc);
    sys_.truncations = int_list(doc, "truncations", sys_.truncations, 4);
    sys_.caps = int_list(doc, "caps", sys_.caps, 1);
    for (std::size_t k = 1; k < sys_.caps.size(); ++k)
      if (sys_.caps[k] <= sys_.caps[k - 1]) {
        problems_.push_back("'caps' must be strictly increasing");
        break;
      }
    read_profiles(doc);
    read_numbers(doc);
    if (!problems_.empty()) throw SystemError(problems_);
    return std::move(sys_);
  }

 private:
  std::string string_field(const json& doc, const char* key, std::string fallback) {
    if (!doc.contains(key)) return fallback;
    if (!doc[key].is_string()) {
      problems_.push_back(std::string("'") + key + "' must be a string");
      return fallback;
    }
    return doc[key].get<std::string>();
  }

  std::vector<int> int_list(const json& doc, const char* key, std::vector<int> fallback, int minimum) {
    if (!doc.contains(key)) return fallback;
    const json& v = doc[key];
    if (!v.is_array() || v.empty()) {
      problems_.push_back(std::string("'") + key + "' must be a nonempty array of integers");
      return fallback;
    }
    std::vector<int> out;
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (!v[k].is_number_integer() || v[k].get<long long>() < minimum || v[k].get<long long>() > 100000) {
        problems_.push_back(std::string("'") + key + "'[" + std::to_string(k) + "] must be an integer >= " + std::to_string(minimum));
        continue;
      }
      out.push_back(v[k].get<int>());
    }
    return out;
  }

  static std::optional<Rational> to_rational(const json& v) {
    if (v.is_number_integer()) return Rational(v.get<long long>());
    if (v.is_number_float()) return rational_from_double(v.get<double>());
    if (v.is_string()) {
      try {
        return parse_decimal(v.get<std::string>());
      } catch (const std::invalid_argument&) {
        return std::nullopt;
      }
    }
    return std::nullopt;
  }

  void read_params(const json& doc) {
    sys_.params["a"] = Rational(1);
    if (!doc.contains("params")) return;
    const json& p = doc["params"];
    if (!p.is_object()) {
      problems_.push_back("'params' must be an object");
      return;
    }
    for (const auto& [k, v] : p.items()) {
      auto r = to_rational(v);
      if (!r) {
        problems_.push_back("params." + k + " must be a number");
        continue;
      }
      if (k == "hbar") {
        if (*r <= 0) problems_.push_back("params.hbar must be positive");
        hbar_ = *r;
        continue;
      }
      if (k == "j") {
        if (*r <= 0) problems_.push_back("params.j must be positive");
        sys_.bargmann_index = static_cast<double>(*r);
        continue;
      }
      bool ident = !k.empty() && (std::isalpha(static_cast<unsigned char>(k[0])) || k[0] == '_');
      for (char c : k) ident = ident && (std::isalnum(static_cast<unsigned char>(c)) || c == '_');
      if (!ident || k == "i") {
        problems_.push_back("params key '" + k + "' is not a valid identifier");
        continue;
      }
      sys_.params[k] = *r;
    }
  }

  void read_algebra(const json& doc) {
    if (!doc.contains("algebra")) {
      problems_.push_back("missing required key 'algebra'");
      return;
    }
    const json& a = doc["algebra"];
    sys_.algebra_config = a;
    if (!a.is_object()) {
      problems_.push_back("'algebra' must be an object");
      return;
    }
    if (a.contains("preset") == a.contains("custom")) {
      problems_.push_back("'algebra' needs exactly one of 'preset' or 'custom'");
      return;
    }
    for (const auto& [k, v] : a.items())
      if (k != "preset" && k != "custom") problems_.push_back("unknown key 'algebra." + k + "'");
    if (a.contains("preset")) {
      if (!a["preset"].is_string()) {
        problems_.push_back("'algebra.preset' must be a string");
        return;
      }
      sys_.preset = a["preset"].get<std::string>();
      if (hbar_ <= 0) return;
      if (sys_.preset == "heisenberg")
        sys_.algebra = heisenberg_algebra(hbar_);
      else if (sys_.preset == "so21")
        sys_.algebra = so21_algebra(hbar_);
      else
        problems_.push_back("unknown algebra preset '" + sys_.preset + "' (expected heisenberg or so21)");
      return;
    }
    sys_.preset = "custom";
    read_custom(a["custom"]);
  }

  void read_custom(const json& c) {
    if (!c.is_object()) {
      problems_.push_back("'algebra.custom' must be an object");
      return;
    }
    std::string name = c.value("name", std::string("custom"));
    if (!c.contains("generators") || !c["generators"].is_array() || c["generators"].empty()) {
      problems_.push_back("'algebra.custom.generators' must be a nonempty array");
      return;
    }
    std::vector<GeneratorSpec> gens;
    std::size_t before = problems_.size();
    for (std::size_t k = 0; k < c["generators"].size(); ++k) {
      const json& g = c["generators"][k];
      std::string where = "algebra.custom.generators[" + std::to_string(k) + "]";
      if (!g.is_object() || !g.contains("label") || !g["label"].is_string()) {
        problems_.push_back(where + " needs a string 'label'");
        continue;
      }
      GeneratorSpec spec;
      spec.label = g["label"].get<std::string>();
      spec.hermitian = g.value("hermitian", true);
      spec.central = g.value("central", false);
      spec.unit_alias = g.value("unit", false);
      gens.push_back(spec);
    }
    if (problems_.size() != before) return;

    // Bracket values are linear in the generators; read them over the commutative algebra
    // on the same labels.
    std::vector<GeneratorSpec> plain = gens;
    for (auto& g : plain) g.unit_alias = false;
    AlgebraPtr free_alg;
    try {
      free_alg = SymmetryAlgebra::create(name, plain, {}, hbar_);
    } catch (const std::exception& e) {
      problems_.push_back(std::string("algebra.custom: ") + e.what());
      return;
    }
    std::map<std::pair<int, int>, std::vector<BracketTerm>> brackets;
    if (c.contains("brackets")) {
      if (!c["brackets"].is_array()) {
        problems_.push_back("'algebra.custom.brackets' must be an array");
        return;
      }
      for (std::size_t k = 0; k < c["brackets"].size(); ++k) {
        const json& b = c["brackets"][k];
        std::string where = "algebra.custom.brackets[" + std::to_string(k) + "]";
        if (!b.is_object() || !b.contains("lhs") || !b.contains("rhs") || !b.contains("value") || !b["lhs"].is_string() ||
            !b["rhs"].is_string() || !b["value"].is_string()) {
          problems_.push_back(where + " needs string fields 'lhs', 'rhs', 'value'");
          continue;
        }
        int l = free_alg->index_of(b["lhs"].get<std::string>());
        int r = free_alg->index_of(b["rhs"].get<std::string>());
        if (l < 0 || r < 0 || l == r) {
          problems_.push_back(where + " names unknown or identical generators");
          continue;
        }
        OperatorPoly v;
        try {
          v = parse_expression(b["value"].get<std::string>(), free_alg, sys_.params);
        } catch (const std::exception& e) {
          problems_.push_back(where + ".value: " + e.what());
          continue;
        }
        std::vector<BracketTerm> terms;
        bool linear = true;
        for (const auto& [m, coeff] : v.terms()) {
          if (degree(m) != 1) {
            linear = false;
            break;
          }
          for (int g = 0; g < free_alg->dim(); ++g)
            if (m[static_cast<std::size_t>(g)] == 1) terms.push_back({g, l < r ? coeff : -coeff});
        }
        if (!linear) {
          problems_.push_back(where + ".value must be a linear combination of generators");
          continue;
        }
        brackets[{std::min(l, r), std::max(l, r)}] = terms;
      }
    }
    try {
      sys_.algebra = SymmetryAlgebra::create(name, gens, brackets, hbar_);
    } catch (const std::exception& e) {
      problems_.push_back(std::string("algebra.custom: ") + e.what());
    }
  }

  std::optional<OperatorPoly> hamiltonian(const json& v, const std::string& where, std::string& source) {
    if (!v.is_string()) {
      problems_.push_back(where + " must be an expression string");
      return std::nullopt;
    }
    source = v.get<std::string>();
    if (!sys_.algebra) return std::nullopt;
    try {
      OperatorPoly phys = parse_expression(source, sys_.algebra, sys_.params);
      OperatorPoly h = phys * (Coeff(1) / Coeff(Rational(0), sys_.algebra->hbar()));
      if (!h.is_zero() && !is_skew_hermitian(h)) {
        problems_.push_back(where + " is not Hermitian: " + phys.to_string());
        return std::nullopt;
      }
      return h;
    } catch (const std::exception& e) {
      problems_.push_back(where + ": " + e.what());
      return std::nullopt;
    }
  }

  void read_hamiltonians(const json& doc) {
    if (!doc.contains("H0")) {
      problems_.push_back("missing required key 'H0'");
    } else if (auto h = hamiltonian(doc["H0"], "H0", sys_.h0_source)) {
      sys_.H0 = *h;
    }
    if (!doc.contains("controls")) {
      problems_.push_back("missing required key 'controls'");
      return;
    }
    const json& c = doc["controls"];
    if (!c.is_array() || c.empty()) {
      problems_.push_back("'controls' must be a nonempty array");
      return;
    }
    for (std::size_t k = 0; k < c.size(); ++k) {
      std::string src;
      auto h = hamiltonian(c[k], "controls[" + std::to_string(k) + "]", src);
      sys_.control_sources.push_back(src);
      if (h) {
        if (h->is_zero()) problems_.push_back("controls[" + std::to_string(k) + "] is zero");
        sys_.controls.push_back(*h);
      }
    }
  }

  void read_profiles(const json& doc) {
    if (!doc.contains("profiles")) {
      sys_.profiles = default_profiles();
      return;
    }
    const json& ps = doc["profiles"];
    if (!ps.is_array() || ps.empty()) {
      problems_.push_back("'profiles' must be a nonempty array");
      return;
    }
    for (std::size_t k = 0; k < ps.size(); ++k) {
      const json& p = ps[k];
      std::string where = "profiles[" + std::to_string(k) + "]";
      if (!p.is_object() || !p.contains("type") || !p["type"].is_string()) {
        problems_.push_back(where + " needs a string 'type'");
        continue;
      }
      ProfileSpec spec;
      try {
        spec.type = parse_profile_type(p["type"].get<std::string>());
      } catch (const std::exception& e) {
        problems_.push_back(where + ": " + e.what());
        continue;
      }
      for (const auto& [key, v] : p.items()) {
        if (key == "type") continue;
        if (!v.is_number()) {
          problems_.push_back(where + "." + key + " must be a number");
          continue;
        }
        if (key == "center")
          spec.center = v.get<double>();
        else if (key == "width")
          spec.width = v.get<double>();
        else if (key == "rate")
          spec.rate = v.get<double>();
        else if (key == "power")
          spec.power = v.get<int>();
        else if (key == "index")
          spec.index = v.get<int>();
        else
          problems_.push_back("unknown key '" + where + "." + key + "'");
      }
      if ((spec.type == ProfileType::Gaussian || spec.type == ProfileType::PolyGaussian) && !(spec.width > 0))
        problems_.push_back(where + ".width must be positive");
      if (spec.type == ProfileType::Exponential && !(spec.rate > 0)) problems_.push_back(where + ".rate must be positive");
      if (spec.type == ProfileType::PolyGaussian && spec.power < 0) problems_.push_back(where + ".power must be >= 0");
      if (spec.type == ProfileType::Basis && spec.index < 0) problems_.push_back(where + ".index must be >= 0");
      sys_.profiles.push_back(spec);
    }
  }

  void read_numbers(const json& doc) {
    if (doc.contains("tolerance")) {
      if (!doc["tolerance"].is_number() || !(doc["tolerance"].get<double>() > 0) || doc["tolerance"].get<double>() >= 1)
        problems_.push_back("'tolerance' must be a number in (0, 1)");
      else
        sys_.tolerance = doc["tolerance"].get<double>();
    }
    if (doc.contains("seed")) {
      if (!doc["seed"].is_number_unsigned())
        problems_.push_back("'seed' must be a nonnegative integer");
      else
        sys_.seed = doc["seed"].get<std::uint64_t>();
    }
    auto small_int = [&](const char* key, int& out) {
      if (!doc.contains(key)) return;
      if (!doc[key].is_number_integer() || doc[key].get<long long>() < 1 || doc[key].get<long long>() > 64)
        problems_.push_back(std::string("'") + key + "' must be an integer in [1, 64]");
      else
        out = doc[key].get<int>();
    };
    small_int("max_rounds", sys_.max_rounds);
    small_int("max_ad_depth", sys_.max_ad_depth);
  }

  SystemDefinition sys_;
  Rational hbar_{1};
  std::vector<std::string> problems_;
};

}  // namespace detail

inline SystemDefinition parse_system(const json& doc) {
  return detail::SystemParser().parse(doc);
}

inline SystemDefinition parse_system(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SystemError({std::string("malformed JSON: ") + e.what()});
  }
  return parse_system(doc);
}

inline SystemDefinition load_system(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SystemError({"cannot open '" + path + "'"});
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_system(ss.str());
}

}  // namespace qreach
