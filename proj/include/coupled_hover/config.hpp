#pragma once

// Run configuration: a nested key-value file (YAML, usually `.cfg`) or the
// equivalent JSON. Every field is validated on load; errors carry the dotted
// field path and, for YAML input, the source line.

#include <nlohmann/json.hpp>
#include <yaml-cpp/yaml.h>

#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "coupled_hover/certificate.hpp"
#include "coupled_hover/controller.hpp"
#include "coupled_hover/dynamics.hpp"
#include "coupled_hover/error.hpp"
#include "coupled_hover/gains.hpp"
#include "coupled_hover/platform.hpp"
#include "coupled_hover/serialization.hpp"

namespace coupled_hover {

struct RunConfig {
  Platform platform;
  GainSet gains;
  /// c₁/c₂ omitted in the file: filled by complete_gains() at resolve time.
  bool auto_c1 = false;
  bool auto_c2 = false;
  DomainBounds domain;
  Reference reference;
  BodyState initial;
  double step = kDefaultStep;
  double horizon = 5.0;
  SearchRanges search;
  std::size_t audit_samples = 10000;
  std::size_t roa_trials = 200;
  double roa_horizon = 20.0;
  std::uint64_t seed = 1;
  std::string output_dir = "out";
  std::string format = "csv";

  /// Gains with any automatic cross-term weights filled in.
  GainSet resolved_gains() const {
    if (!auto_c1 && !auto_c2) return gains;
    const GainSet completed = complete_gains(platform, domain, gains);
    GainSet g = gains;
    if (auto_c1) g.c1 = completed.c1;
    if (auto_c2) g.c2 = completed.c2;
    return g;
  }
};

namespace detail {

/// Converts YAML to JSON, remembering the 1-based line of every path.
inline Json yaml_to_json(const YAML::Node& node, const std::string& path,
                         std::map<std::string, int>& lines) {
  if (node.Mark().line >= 0) lines[path] = node.Mark().line + 1;
  switch (node.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined:
      return nullptr;
    case YAML::NodeType::Sequence: {
      Json out = Json::array();
      for (std::size_t i = 0; i < node.size(); ++i) {
        out.push_back(yaml_to_json(node[i], path + "[" + std::to_string(i) + "]", lines));
      }
      return out;
    }
    case YAML::NodeType::Map: {
      Json out = Json::object();
      for (const auto& kv : node) {
        const std::string key = kv.first.as<std::string>();
        out[key] = yaml_to_json(kv.second, path.empty() ? key : path + "." + key, lines);
      }
      return out;
    }
    case YAML::NodeType::Scalar: {
      const std::string s = node.Scalar();
      if (node.Tag() == "!") return s;  // quoted
      if (!s.empty() && s.find_first_not_of("0123456789") == std::string::npos) {
        try {
          return std::stoull(s);
        } catch (...) {
        }
      }
      double d;
      if (YAML::convert<double>::decode(node, d)) return d;
      return s;
    }
  }
  return nullptr;
}

class Reader {
 public:
  Reader(Json root, std::map<std::string, int> lines)
      : root_(std::move(root)), lines_(std::move(lines)) {}

  [[noreturn]] void fail(const std::string& path, const std::string& msg) const {
    const auto it = lines_.find(path);
    if (it != lines_.end()) {
      throw ValidationError(path, msg + " (line " + std::to_string(it->second) + ")");
    }
    throw ValidationError(path, msg);
  }

  const Json* find(const std::string& path) const {
    const Json* cur = &root_;
    std::size_t start = 0;
    while (start <= path.size()) {
      const std::size_t dot = path.find('.', start);
      const std::string key = path.substr(start, dot == std::string::npos ? dot : dot - start);
      if (!cur->is_object()) return nullptr;
      const auto it = cur->find(key);
      if (it == cur->end() || it->is_null()) return nullptr;
      cur = &*it;
      if (dot == std::string::npos) break;
      start = dot + 1;
    }
    return cur;
  }

  bool has(const std::string& path) const { return find(path) != nullptr; }

  const Json& require(const std::string& path) const {
    const Json* j = find(path);
    if (!j) fail(path, "missing required field");
    return *j;
  }

  void allow_keys(const std::string& path, const std::set<std::string>& keys) const {
    const Json* j = path.empty() ? &root_ : find(path);
    if (!j) return;
    if (!j->is_object()) fail(path, "must be a mapping");
    for (const auto& [k, v] : j->items()) {
      if (!keys.count(k)) fail(path.empty() ? k : path + "." + k, "unknown field");
    }
  }

  double number(const std::string& path) const { return as_number(require(path), path); }
  double number(const std::string& path, double fallback) const {
    const Json* j = find(path);
    return j ? as_number(*j, path) : fallback;
  }

  std::uint64_t count(const std::string& path, std::uint64_t fallback) const {
    const Json* j = find(path);
    if (!j) return fallback;
    if (!j->is_number_unsigned()) fail(path, "must be a nonnegative integer");
    return j->get<std::uint64_t>();
  }

  std::string text(const std::string& path, const std::string& fallback) const {
    const Json* j = find(path);
    if (!j) return fallback;
    if (j->is_string()) return j->get<std::string>();
    if (j->is_number()) return j->dump();
    fail(path, "must be a string");
  }

  Vec3 vec3(const std::string& path, const Vec3& fallback) const {
    const Json* j = find(path);
    if (!j) return fallback;
    if (!j->is_array() || j->size() != 3) fail(path, "must be a list of 3 numbers");
    Vec3 out;
    for (int i = 0; i < 3; ++i) {
      out(i) = as_number((*j)[i], path + "[" + std::to_string(i) + "]");
    }
    return out;
  }

  /// List of rows. A flat list of 3 numbers is read as one column.
  Eigen::MatrixXd matrix(const std::string& path) const {
    const Json& j = require(path);
    if (!j.is_array() || j.empty()) fail(path, "must be a non-empty list of rows");
    if (!j[0].is_array()) {
      if (j.size() != 3) fail(path, "a flat list must have 3 entries");
      Eigen::MatrixXd out(3, 1);
      for (int i = 0; i < 3; ++i) out(i, 0) = as_number(j[i], path + "[" + std::to_string(i) + "]");
      return out;
    }
    const std::size_t cols = j[0].size();
    Eigen::MatrixXd out(j.size(), cols);
    for (std::size_t i = 0; i < j.size(); ++i) {
      const std::string row_path = path + "[" + std::to_string(i) + "]";
      if (!j[i].is_array() || j[i].size() != cols) fail(row_path, "rows must have equal length");
      for (std::size_t c = 0; c < cols; ++c) {
        out(i, c) = as_number(j[i][c], row_path + "[" + std::to_string(c) + "]");
      }
    }
    return out;
  }

  /// {axis, angle} or {matrix}.
  Rotation rotation(const std::string& path) const {
    if (!has(path)) return Rotation::identity();
    allow_keys(path, {"axis", "angle", "matrix"});
    if (has(path + ".matrix")) {
      if (has(path + ".axis") || has(path + ".angle")) {
        fail(path, "give either axis/angle or matrix, not both");
      }
      const Eigen::MatrixXd m = matrix(path + ".matrix");
      if (m.rows() != 3 || m.cols() != 3) fail(path + ".matrix", "must be 3x3");
      const Mat3 r = m;
      if (!is_rotation(r)) {
        std::ostringstream msg;
        msg << "not a rotation (det = " << r.determinant()
            << ", orthonormality residual = " << orthonormality_residual(r) << ")";
        fail(path + ".matrix", msg.str());
      }
      return Rotation::from_matrix(r);
    }
    const Vec3 axis = vec3(path + ".axis", Vec3::UnitZ());
    if (axis.norm() < 1e-12) fail(path + ".axis", "must be nonzero");
    return exp_so3(AxisAngle{axis, number(path + ".angle", 0.0)});
  }

 private:
  double as_number(const Json& j, const std::string& path) const {
    if (!j.is_number()) fail(path, "must be a number");
    const double x = j.get<double>();
    if (!std::isfinite(x)) fail(path, "must be finite");
    return x;
  }

  Json root_;
  std::map<std::string, int> lines_;
};

/// Rethrows a library validation failure with the line of the named field.
template <class F>
void with_lines(const Reader& r, F&& f) {
  try {
    f();
  } catch (const ValidationError& e) {
    r.fail(e.field(), e.reason());
  }
}

inline GridAxis read_axis(const Reader& r, const std::string& path, const GridAxis& fallback) {
  r.allow_keys(path, {"lo", "hi", "count"});
  GridAxis a;
  a.lo = r.number(path + ".lo", fallback.lo);
  a.hi = r.number(path + ".hi", fallback.hi);
  a.count = static_cast<int>(r.count(path + ".count", static_cast<std::uint64_t>(fallback.count)));
  return a;
}

}  // namespace detail

/// Builds a validated RunConfig from a parsed document.
inline RunConfig config_from_json(const Json& root, std::map<std::string, int> lines = {}) {
  const detail::Reader r(root, std::move(lines));
  if (!root.is_object()) throw Error(ErrorCode::kParseError, "top level must be a mapping");
  r.allow_keys("", {"platform", "gains", "domain", "reference", "initial_state", "integrator",
                    "search", "audit", "seed", "output"});
  RunConfig c;

  r.require("platform");
  r.allow_keys("platform", {"mass", "gravity", "inertia", "force_alloc", "spurious_alloc",
                            "moment_alloc", "rank_tolerance"});
  c.platform.mass = r.number("platform.mass");
  c.platform.gravity = r.number("platform.gravity", 9.81);
  {
    const Eigen::MatrixXd j = r.matrix("platform.inertia");
    if (j.rows() == 3 && j.cols() == 1) {
      c.platform.inertia = j.col(0).asDiagonal();
    } else if (j.rows() == 3 && j.cols() == 3) {
      c.platform.inertia = j;
    } else {
      r.fail("platform.inertia", "must be 3x3 or a 3-vector diagonal");
    }
  }
  c.platform.force_alloc = r.matrix("platform.force_alloc");
  c.platform.spurious_alloc = r.matrix("platform.spurious_alloc");
  c.platform.moment_alloc = r.matrix("platform.moment_alloc");
  c.platform.rank_tol = r.number("platform.rank_tolerance", kDefaultRankTol);
  detail::with_lines(r, [&] { validate(c.platform); });
  detail::with_lines(r, [&] {
    if (numeric_rank(c.platform.moment_alloc, c.platform.rank_tol) < 3) {
      throw ValidationError("platform.moment_alloc", "rank must be 3");
    }
  });

  r.require("gains");
  r.allow_keys("gains", {"k_p", "k_v", "k_R", "k_Omega", "c1", "c2"});
  c.gains.k_p = r.number("gains.k_p");
  c.gains.k_v = r.number("gains.k_v");
  c.gains.k_R = r.number("gains.k_R");
  c.gains.k_Omega = r.number("gains.k_Omega");
  c.auto_c1 = !r.has("gains.c1");
  c.auto_c2 = !r.has("gains.c2");
  c.gains.c1 = r.number("gains.c1", 0.0);
  c.gains.c2 = r.number("gains.c2", 0.0);
  detail::with_lines(r, [&] { validate(c.gains); });

  r.require("domain");
  r.allow_keys("domain", {"psi", "delta", "e_p_max", "v_max", "Omega_max"});
  c.domain.psi = r.number("domain.psi");
  c.domain.delta = r.number("domain.delta");
  c.domain.e_p_max = r.number("domain.e_p_max");
  c.domain.v_max = r.number("domain.v_max");
  c.domain.Omega_max = r.number("domain.Omega_max");
  detail::with_lines(r, [&] { validate(c.domain); });

  r.allow_keys("reference", {"position", "attitude"});
  c.reference.p_r = r.vec3("reference.position", Vec3::Zero());
  c.reference.R_r = r.rotation("reference.attitude");

  r.allow_keys("initial_state", {"position", "velocity", "attitude", "angular_velocity"});
  c.initial.p = r.vec3("initial_state.position", c.reference.p_r);
  c.initial.v = r.vec3("initial_state.velocity", Vec3::Zero());
  c.initial.Omega = r.vec3("initial_state.angular_velocity", Vec3::Zero());
  if (r.has("initial_state.attitude")) {
    c.initial.R = r.rotation("initial_state.attitude");
  } else {
    c.initial.R = hover_state(c.platform, c.reference).R;
  }

  r.allow_keys("integrator", {"step", "horizon"});
  c.step = r.number("integrator.step", kDefaultStep);
  c.horizon = r.number("integrator.horizon", 5.0);
  if (!(c.step > 0.0)) r.fail("integrator.step", "must be positive");
  if (!(c.horizon >= c.step)) r.fail("integrator.horizon", "must be at least one step");

  r.allow_keys("search", {"k_p", "k_v", "k_R", "k_Omega"});
  const SearchRanges defaults;
  c.search.k_p = detail::read_axis(r, "search.k_p", defaults.k_p);
  c.search.k_v = detail::read_axis(r, "search.k_v", defaults.k_v);
  c.search.k_R = detail::read_axis(r, "search.k_R", defaults.k_R);
  c.search.k_Omega = detail::read_axis(r, "search.k_Omega", defaults.k_Omega);
  detail::with_lines(r, [&] { validate(c.search); });

  r.allow_keys("audit", {"samples", "trials", "horizon"});
  c.audit_samples = r.count("audit.samples", c.audit_samples);
  c.roa_trials = r.count("audit.trials", c.roa_trials);
  c.roa_horizon = r.number("audit.horizon", c.roa_horizon);
  if (!(c.roa_horizon > 0.0)) r.fail("audit.horizon", "must be positive");

  c.seed = r.count("seed", c.seed);

  r.allow_keys("output", {"dir", "format"});
  c.output_dir = r.text("output.dir", c.output_dir);
  c.format = r.text("output.format", c.format);
  if (c.format != "csv" && c.format != "json") r.fail("output.format", "must be csv or json");
  return c;
}

inline RunConfig parse_config(const std::string& text, bool json) {
  if (json) {
    Json root;
    try {
      root = Json::parse(text);
    } catch (const Json::parse_error& e) {
      throw Error(ErrorCode::kParseError, e.what());
    }
    return config_from_json(root);
  }
  YAML::Node node;
  try {
    node = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::kParseError, e.what());
  }
  std::map<std::string, int> lines;
  const Json root = detail::yaml_to_json(node, "", lines);
  return config_from_json(root, std::move(lines));
}

/// `.json` files are read as JSON, anything else as YAML.
inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kParseError, "cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  const bool json = path.size() >= 5 && path.substr(path.size() - 5) == ".json";
  return parse_config(buf.str(), json);
}

inline Json rotation_to_json(const Rotation& r) { return {{"matrix", matrix_to_json(r.matrix())}}; }

inline Json axis_to_json(const GridAxis& a) {
  return {{"lo", a.lo}, {"hi", a.hi}, {"count", a.count}};
}

/// Inverse of config_from_json. Rotations are written as matrices.
inline Json config_to_json(const RunConfig& c) {
  Json gains = {{"k_p", c.gains.k_p}, {"k_v", c.gains.k_v}, {"k_R", c.gains.k_R},
                {"k_Omega", c.gains.k_Omega}};
  if (!c.auto_c1) gains["c1"] = c.gains.c1;
  if (!c.auto_c2) gains["c2"] = c.gains.c2;
  return {
      {"platform",
       {{"mass", c.platform.mass},
        {"gravity", c.platform.gravity},
        {"inertia", matrix_to_json(c.platform.inertia)},
        {"force_alloc", matrix_to_json(c.platform.force_alloc)},
        {"spurious_alloc", matrix_to_json(c.platform.spurious_alloc)},
        {"moment_alloc", matrix_to_json(c.platform.moment_alloc)},
        {"rank_tolerance", c.platform.rank_tol}}},
      {"gains", gains},
      {"domain", to_json(c.domain)},
      {"reference",
       {{"position", vector_to_json(c.reference.p_r)}, {"attitude", rotation_to_json(c.reference.R_r)}}},
      {"initial_state",
       {{"position", vector_to_json(c.initial.p)},
        {"velocity", vector_to_json(c.initial.v)},
        {"attitude", rotation_to_json(c.initial.R)},
        {"angular_velocity", vector_to_json(c.initial.Omega)}}},
      {"integrator", {{"step", c.step}, {"horizon", c.horizon}}},
      {"search",
       {{"k_p", axis_to_json(c.search.k_p)},
        {"k_v", axis_to_json(c.search.k_v)},
        {"k_R", axis_to_json(c.search.k_R)},
        {"k_Omega", axis_to_json(c.search.k_Omega)}}},
      {"audit",
       {{"samples", c.audit_samples}, {"trials", c.roa_trials}, {"horizon", c.roa_horizon}}},
      {"seed", c.seed},
      {"output", {{"dir", c.output_dir}, {"format", c.format}}},
  };
}

namespace detail {

inline void emit_yaml(YAML::Emitter& out, const Json& j) {
  if (j.is_object()) {
    out << YAML::BeginMap;
    for (const auto& [k, v] : j.items()) {
      out << YAML::Key << k << YAML::Value;
      emit_yaml(out, v);
    }
    out << YAML::EndMap;
  } else if (j.is_array()) {
    const bool flat = std::all_of(j.begin(), j.end(), [](const Json& e) { return e.is_primitive(); });
    out << (flat ? YAML::Flow : YAML::Block) << YAML::BeginSeq;
    for (const auto& e : j) emit_yaml(out, e);
    out << YAML::EndSeq;
  } else if (j.is_number_unsigned()) {
    out << j.get<std::uint64_t>();
  } else if (j.is_number_integer()) {
    out << j.get<std::int64_t>();
  } else if (j.is_number()) {
    out << j.get<double>();
  } else if (j.is_string()) {
    out << YAML::DoubleQuoted << j.get<std::string>();
  } else if (j.is_boolean()) {
    out << j.get<bool>();
  } else {
    out << YAML::Null;
  }
}

}  // namespace detail

inline std::string config_to_yaml(const RunConfig& c) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  detail::emit_yaml(out, config_to_json(c));
  return std::string(out.c_str()) + "\n";
}

}  // namespace coupled_hover
