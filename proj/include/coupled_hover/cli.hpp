#pragma once

// Command-line driver: simulate, certify, search-gains, audit, roa.
// Exit codes: 0 success/feasible/pass, 1 error, 2 infeasible/fail.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>

#include "coupled_hover/certificate.hpp"
#include "coupled_hover/config.hpp"
#include "coupled_hover/controller.hpp"
#include "coupled_hover/serialization.hpp"
#include "coupled_hover/verification.hpp"

namespace coupled_hover {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitFail = 2;

struct CliFlags {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> format;
  bool uncertified = false;
};

namespace detail {

inline std::filesystem::path output_dir(const RunConfig& c, const CliFlags& f) {
  std::filesystem::path dir = f.out ? *f.out : c.output_dir;
  std::filesystem::create_directories(dir);
  return dir;
}

inline void write_json(const std::filesystem::path& path, const Json& j) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::kInvalidArgument, "cannot write " + path.string());
  os << j.dump(2) << '\n';
}

inline std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(6) << std::scientific << x;
  return os.str();
}

}  // namespace detail

/// One line per gain condition with LHS, relation, RHS, margin, verdict.
inline void print_condition_table(std::ostream& os, const CertificateReport& r) {
  os << std::left << std::setw(24) << "condition" << std::right << std::setw(15) << "lhs"
     << "   " << std::setw(15) << "rhs" << std::setw(15) << "margin"
     << "  result\n";
  for (const Condition& c : r.conditions) {
    os << std::left << std::setw(24) << c.name << std::right << std::setw(15)
       << detail::fmt(c.lhs) << ' ' << std::setw(2) << to_string(c.relation) << std::setw(15)
       << detail::fmt(c.rhs) << std::setw(15) << detail::fmt(c.margin) << "  "
       << (c.pass ? "ok" : "VIOLATED") << '\n';
  }
  os << "lambda_min(W) = " << detail::fmt(r.lambda_min_W)
     << "   gamma = " << detail::fmt(r.gamma) << "   alpha = " << detail::fmt(r.alpha)
     << "   beta = " << detail::fmt(r.beta) << '\n';
  if (r.window.nonempty()) {
    os << "c2 window: (" << detail::fmt(r.window.c2_minus) << ", " << detail::fmt(r.window.c2_plus)
       << ")\n";
  } else {
    os << "c2 window: empty (B = " << detail::fmt(r.window.B)
       << ", B^2 - 4AC = " << detail::fmt(r.window.discriminant) << ")\n";
  }
  os << (r.feasible ? "FEASIBLE" : "INFEASIBLE");
  if (r.feasible) os << "   roa level c = " << detail::fmt(r.roa_level);
  os << '\n';
}

inline int cmd_simulate(const RunConfig& c, const CliFlags& f, std::ostream& out) {
  const GainSet g = c.resolved_gains();
  HoverController ctrl(c.platform, g, c.reference);
  const Trajectory traj = rollout(c.platform, c.initial, ctrl.callback(), c.step, c.horizon);
  const auto dir = detail::output_dir(c, f);
  const std::string format = f.format ? *f.format : c.format;
  std::filesystem::path path;
  if (format == "json") {
    path = dir / "trajectory.json";
    detail::write_json(path, to_json(traj));
  } else {
    path = dir / "trajectory.csv";
    std::ofstream os(path);
    if (!os) throw Error(ErrorCode::kInvalidArgument, "cannot write " + path.string());
    write_csv(os, traj);
  }
  const Sample& last = traj.samples.back();
  out << "samples: " << traj.samples.size() << "\n";
  out << "final V = " << detail::fmt(last.diagnostics.at("V"))
      << ", |e_p| = " << detail::fmt(last.diagnostics.at("norm_e_p")) << "\n";
  out << "wrote " << path.string() << "\n";
  return kExitOk;
}

inline int cmd_certify(const RunConfig& c, const CliFlags& f, std::ostream& out) {
  const CertificateReport r = certify(c.platform, c.resolved_gains(), c.domain);
  print_condition_table(out, r);
  const auto path = detail::output_dir(c, f) / "certificate.json";
  detail::write_json(path, to_json(r));
  out << "wrote " << path.string() << "\n";
  return r.feasible ? kExitOk : kExitFail;
}

inline int cmd_search(const RunConfig& c, const CliFlags& f, std::ostream& out) {
  const SearchResult s = gain_search(c.platform, c.domain, c.search);
  out << (s.feasible ? "best feasible gains" : "no feasible grid point; nearest miss") << ": k_p = "
      << s.gains.k_p << ", k_v = " << s.gains.k_v << ", k_R = " << s.gains.k_R
      << ", k_Omega = " << s.gains.k_Omega << ", c1 = " << s.gains.c1 << ", c2 = " << s.gains.c2
      << "\n";
  out << "evaluated " << s.evaluated << " points, " << s.feasible_count << " feasible\n";
  print_condition_table(out, s.report);
  const auto path = detail::output_dir(c, f) / "search.json";
  detail::write_json(path, to_json(s));
  out << "wrote " << path.string() << "\n";
  return s.feasible ? kExitOk : kExitFail;
}

inline void print_audit(std::ostream& os, const std::string& title, const AuditReport& a) {
  os << title << (a.pass() ? ": pass" : ": FAIL") << '\n';
  for (const auto& ch : a.checks) {
    os << "  " << std::left << std::setw(28) << ch.name << std::right << " n = " << std::setw(7)
       << ch.samples << "  worst = " << std::setw(13) << detail::fmt(ch.worst_violation)
       << "  tol = " << std::setw(13) << detail::fmt(ch.tolerance) << "  "
       << (ch.pass ? "ok" : (ch.gating ? "FAIL" : "differs (informational)")) << '\n';
  }
}

inline int cmd_audit(const RunConfig& c, const CliFlags& f, std::ostream& out) {
  const GainSet g = c.resolved_gains();
  const std::uint64_t seed = f.seed ? *f.seed : c.seed;
  const AuditReport lemmas =
      audit_lemma_bounds(c.platform, g, c.domain, c.reference, c.audit_samples, seed);
  const AuditReport traj =
      audit_trajectory(c.platform, g, c.domain, c.reference, c.initial, c.step, c.horizon);
  print_audit(out, "lemma bounds", lemmas);
  print_audit(out, "trajectory", traj);
  const auto path = detail::output_dir(c, f) / "audit.json";
  detail::write_json(path, {{"lemma_bounds", to_json(lemmas)}, {"trajectory", to_json(traj)}});
  out << "wrote " << path.string() << "\n";
  return lemmas.pass() && traj.pass() ? kExitOk : kExitFail;
}

inline int cmd_roa(const RunConfig& c, const CliFlags& f, std::ostream& out) {
  const GainSet g = c.resolved_gains();
  const std::uint64_t seed = f.seed ? *f.seed : c.seed;
  RoaResult r;
  if (f.uncertified) {
    const double level = sublevel_bound(c.platform, g, c.domain);
    out << "uncertified run on {V <= " << detail::fmt(level) << "}\n";
    r = monte_carlo_sublevel(c.platform, g, c.domain, c.reference, level, c.roa_trials,
                             c.roa_horizon, seed, c.step);
  } else {
    try {
      r = monte_carlo_roa(c.platform, g, c.domain, c.reference, c.roa_trials, c.roa_horizon, seed,
                          c.step);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNotCertified) throw;
      out << e.what() << "\n";
      return kExitFail;
    }
  }
  const auto fraction = r.fraction();
  out << "converged " << r.converged << "/" << r.n_trials;
  if (fraction) out << " (" << *fraction << ")";
  out << "\n";
  const auto path = detail::output_dir(c, f) / "roa.json";
  detail::write_json(path, to_json(r));
  out << "wrote " << path.string() << "\n";
  return !fraction || *fraction == 1.0 ? kExitOk : kExitFail;
}

/// Parses argv and runs one subcommand. Never throws.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hover controller simulation, certification, and audits"};
  app.require_subcommand(1);
  CliFlags flags;
  std::uint64_t seed = 0;
  std::string out_dir, format;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", flags.config, "run configuration (.cfg YAML or .json)")->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed, "random seed");
    sub->add_option("--format", format, "trajectory format")->check(CLI::IsMember({"csv", "json"}));
  };
  auto* simulate = app.add_subcommand("simulate", "closed-loop rollout");
  auto* cert = app.add_subcommand("certify", "evaluate the stability conditions");
  auto* search = app.add_subcommand("search-gains", "grid search for certifiable gains");
  auto* audit = app.add_subcommand("audit", "sampled bound audit and trajectory audit");
  auto* roa = app.add_subcommand("roa", "Monte-Carlo region-of-attraction run");
  for (auto* sub : {simulate, cert, search, audit, roa}) add_common(sub);
  roa->add_flag("--uncertified", flags.uncertified,
                "sample the sublevel set even when the gains do not certify");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostream& stream = e.get_exit_code() == 0 ? out : err;
    const int code = app.exit(e, stream, stream);
    return code == 0 ? kExitOk : kExitError;
  }
  for (auto* sub : {simulate, cert, search, audit, roa}) {
    if (sub->count("--out")) flags.out = out_dir;
    if (sub->count("--seed")) flags.seed = seed;
    if (sub->count("--format")) flags.format = format;
  }

  try {
    const RunConfig config = load_config(flags.config);
    if (*simulate) return cmd_simulate(config, flags, out);
    if (*cert) return cmd_certify(config, flags, out);
    if (*search) return cmd_search(config, flags, out);
    if (*audit) return cmd_audit(config, flags, out);
    if (*roa) return cmd_roa(config, flags, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}

}  // namespace coupled_hover
