#pragma once

// JSON and CSV writers for trajectories, certificates, audits, and ROA runs.

#include <nlohmann/json.hpp>

#include <iomanip>
#include <ostream>
#include <string>
#include <vector>

#include "coupled_hover/certificate.hpp"
#include "coupled_hover/dynamics.hpp"
#include "coupled_hover/verification.hpp"

namespace coupled_hover {

using Json = nlohmann::json;

inline constexpr const char* kCsvVersion = "# coupled_hover trajectory v1";

inline const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols = {
      "t",        "p_x",      "p_y",      "p_z",      "v_x",        "v_y",          "v_z",
      "R_11",     "R_12",     "R_13",     "R_21",     "R_22",       "R_23",         "R_31",
      "R_32",     "R_33",     "Omega_x",  "Omega_y",  "Omega_z",    "u_f",          "u_tau_x",
      "u_tau_y",  "u_tau_z",  "V",        "V1",       "V2",         "norm_e_p",     "norm_v",
      "norm_e_R", "norm_Omega", "norm_Omega_d"};
  return cols;
}

/// Version line, header line, then one row per sample. Missing diagnostics print as nan.
inline void write_csv(std::ostream& os, const Trajectory& traj) {
  os << kCsvVersion << '\n';
  const auto& cols = csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
  os << std::setprecision(17);
  static const char* diag_keys[] = {"V",      "V1",         "V2",        "norm_e_p",
                                    "norm_v", "norm_e_R",   "norm_Omega", "norm_Omega_d"};
  for (const Sample& s : traj.samples) {
    os << s.t;
    for (int i = 0; i < 3; ++i) os << ',' << s.state.p(i);
    for (int i = 0; i < 3; ++i) os << ',' << s.state.v(i);
    const Mat3& r = s.state.R.matrix();
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) os << ',' << r(i, j);
    }
    for (int i = 0; i < 3; ++i) os << ',' << s.state.Omega(i);
    os << ',' << s.input.u_f;
    for (int i = 0; i < 3; ++i) os << ',' << s.input.u_tau(i);
    for (const char* key : diag_keys) {
      const auto it = s.diagnostics.find(key);
      if (it == s.diagnostics.end()) {
        os << ",nan";
      } else {
        os << ',' << it->second;
      }
    }
    os << '\n';
  }
}

inline Json matrix_to_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

inline Json vector_to_json(const Vec3& v) { return Json::array({v(0), v(1), v(2)}); }

/// NaN and infinities have no JSON literal; they are written as null.
inline Json finite_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

inline Json to_json(const GainSet& g) {
  return {{"k_p", g.k_p}, {"k_v", g.k_v}, {"k_R", g.k_R},
          {"k_Omega", g.k_Omega}, {"c1", g.c1}, {"c2", g.c2}};
}

inline Json to_json(const DomainBounds& d) {
  return {{"psi", d.psi}, {"delta", d.delta}, {"e_p_max", d.e_p_max},
          {"v_max", d.v_max}, {"Omega_max", d.Omega_max}};
}

inline Json to_json(const Condition& c) {
  return {{"name", c.name},
          {"expression", c.expression},
          {"lhs", finite_or_null(c.lhs)},
          {"relation", to_string(c.relation)},
          {"rhs", finite_or_null(c.rhs)},
          {"margin", finite_or_null(c.margin)},
          {"pass", c.pass}};
}

inline Json to_json(const CertificateReport& r) {
  Json conditions = Json::array();
  for (const auto& c : r.conditions) conditions.push_back(to_json(c));
  return {
      {"feasible", r.feasible},
      {"gains", to_json(r.gains)},
      {"domain", to_json(r.domain)},
      {"gamma", r.gamma},
      {"alpha", r.alpha},
      {"beta", r.beta},
      {"e_R_max", r.e_R_max},
      {"f_lower", r.f_lower},
      {"sigma_ROmega", r.sigma_ROmega},
      {"matrices",
       {{"M11", matrix_to_json(r.M11)},
        {"M12", matrix_to_json(r.M12)},
        {"M21", matrix_to_json(r.M21)},
        {"M22", matrix_to_json(r.M22)},
        {"W1", matrix_to_json(r.W1)},
        {"W12", matrix_to_json(r.W12)},
        {"W2", matrix_to_json(r.W2)},
        {"W21", matrix_to_json(r.W21)},
        {"W", matrix_to_json(r.W)}}},
      {"c2_window",
       {{"A", r.window.A},
        {"B", r.window.B},
        {"C", r.window.C},
        {"discriminant", r.window.discriminant},
        {"c2_minus", finite_or_null(r.window.c2_minus)},
        {"c2_plus", finite_or_null(r.window.c2_plus)},
        {"nonempty", r.window.nonempty()}}},
      {"conditions", conditions},
      {"lambda_min_W", r.lambda_min_W},
      {"lambda_max_M2", r.lambda_max_M2},
      {"decay_rate", r.decay_rate},
      {"roa_level", r.roa_level},
      {"cross_audit",
       {{"sigma_printed", r.cross_audit.sigma_printed},
        {"sigma_expanded", r.cross_audit.sigma_expanded},
        {"W2_11_printed", r.cross_audit.W2_11_printed},
        {"W2_11_expanded", r.cross_audit.W2_11_expanded},
        {"W2_22_printed", r.cross_audit.W2_22_printed},
        {"W2_22_expanded", r.cross_audit.W2_22_expanded},
        {"max_discrepancy", r.cross_audit.max_discrepancy()}}},
  };
}

inline Json to_json(const SearchResult& s) {
  return {{"feasible", s.feasible},
          {"evaluated", s.evaluated},
          {"feasible_count", s.feasible_count},
          {"score", finite_or_null(s.score)},
          {"gains", to_json(s.gains)},
          {"certificate", to_json(s.report)}};
}

inline Json to_json(const AuditReport& a) {
  Json checks = Json::array();
  for (const auto& c : a.checks) {
    checks.push_back({{"name", c.name},
                      {"samples", c.samples},
                      {"worst_violation", finite_or_null(c.worst_violation)},
                      {"tolerance", c.tolerance},
                      {"pass", c.pass},
                      {"gating", c.gating},
                      {"note", c.note}});
  }
  Json metrics = Json::object();
  for (const auto& [k, v] : a.metrics) metrics[k] = finite_or_null(v);
  return {{"pass", a.pass()}, {"seed", a.seed}, {"checks", checks}, {"metrics", metrics}};
}

inline Json to_json(const RoaResult& r) {
  Json trials = Json::array();
  for (const auto& t : r.trials) {
    Json j = {{"index", t.index}, {"V0", t.V0},       {"z0", t.z0},
              {"zT", finite_or_null(t.zT)}, {"converged", t.converged}};
    if (!t.error.empty()) j["error"] = t.error;
    trials.push_back(j);
  }
  const auto fraction = r.fraction();
  return {{"n_trials", r.n_trials},
          {"converged", r.converged},
          {"fraction", fraction ? Json(*fraction) : Json(nullptr)},
          {"level", r.level},
          {"trials", trials}};
}

inline Json to_json(const Trajectory& traj) {
  Json samples = Json::array();
  for (const Sample& s : traj.samples) {
    Json diag = Json::object();
    for (const auto& [k, v] : s.diagnostics) diag[k] = finite_or_null(v);
    samples.push_back({{"t", s.t},
                       {"p", vector_to_json(s.state.p)},
                       {"v", vector_to_json(s.state.v)},
                       {"R", matrix_to_json(s.state.R.matrix())},
                       {"Omega", vector_to_json(s.state.Omega)},
                       {"u_f", s.input.u_f},
                       {"u_tau", vector_to_json(s.input.u_tau)},
                       {"diagnostics", diag}});
  }
  return {{"h", traj.h}, {"samples", samples}};
}

}  // namespace coupled_hover
