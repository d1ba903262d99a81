#pragma once

// Numerical audits tying simulation to the certificate: equilibrium
// residuals, sampled checks of every per-state bound used by the Lyapunov
// analysis, trajectory audits, and Monte-Carlo region-of-attraction runs.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "coupled_hover/certificate.hpp"
#include "coupled_hover/controller.hpp"
#include "coupled_hover/dynamics.hpp"
#include "coupled_hover/lyapunov.hpp"
#include "coupled_hover/parallel.hpp"

namespace coupled_hover {

struct AuditCheck {
  std::string name;
  std::size_t samples = 0;
  double worst_violation = -std::numeric_limits<double>::infinity();
  double tolerance = 0.0;
  bool pass = true;
  /// Non-gating checks are reported but do not affect AuditReport::pass().
  bool gating = true;
  std::string note;

  void record(double violation) {
    ++samples;
    if (std::isnan(violation)) violation = std::numeric_limits<double>::infinity();
    worst_violation = std::max(worst_violation, violation);
  }
  void finalize() { pass = samples == 0 || worst_violation <= tolerance; }
};

struct AuditReport {
  std::vector<AuditCheck> checks;
  std::uint64_t seed = 0;
  std::map<std::string, double> metrics;

  bool pass() const {
    return std::all_of(checks.begin(), checks.end(),
                       [](const AuditCheck& c) { return !c.gating || c.pass; });
  }
  const AuditCheck* find(const std::string& name) const {
    for (const auto& c : checks) {
      if (c.name == name) return &c;
    }
    return nullptr;
  }
};

/// Max-norm of the closed-loop error-system right-hand side at x° = 0.
inline double equilibrium_residual(const Platform& p, const GainSet& g, const Reference& ref) {
  return error_dynamics_rhs(p, g, hover_state(p, ref), ref).max_norm();
}

/// Heading guard value |r̂₁ᵀw₃| for a state.
inline double heading_alignment(const Platform& p, const GainSet& g, const BodyState& x,
                                const Reference& ref) {
  const Vec3 f_r = reference_force(p, g, x, ref);
  return std::abs(ref.heading().dot(f_r.normalized()));
}

namespace detail {

inline Vec3 ball_uniform(std::mt19937_64& rng, double radius) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vec3 dir(n(rng), n(rng), n(rng));
  while (dir.norm() < 1e-12) dir = Vec3(n(rng), n(rng), n(rng));
  return radius * std::cbrt(u(rng)) * dir.normalized();
}

inline Vec3 unit_vector(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vec3 dir(n(rng), n(rng), n(rng));
  while (dir.norm() < 1e-12) dir = Vec3(n(rng), n(rng), n(rng));
  return dir.normalized();
}

/// Rotation angle with Haar density ∝ 1 − cos θ on [0, θ_max].
inline double haar_angle(std::mt19937_64& rng, double theta_max) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double top = 1.0 - std::cos(theta_max);
  for (;;) {
    const double theta = theta_max * u(rng);
    if (u(rng) * top <= 1.0 - std::cos(theta)) return theta;
  }
}

/// Builds the state with the given errors, resolving R_d from (p, v).
/// Returns nullopt when a controller guard rejects it.
inline std::optional<BodyState> state_from_errors(const Platform& p, const GainSet& g,
                                                  const Reference& ref, const Vec3& e_p,
                                                  const Vec3& v, const Vec3& rot, const Vec3& omega,
                                                  double delta) {
  BodyState x;
  x.p = ref.p_r + e_p;
  x.v = v;
  x.Omega = omega;
  const Vec3 f_r = reference_force(p, g, x, ref);
  try {
    const DesiredAttitude att =
        desired_attitude(f_r, ref, preferential_direction(p), min_thrust(p));
    x.R = att.R_d * exp_so3(rot);
  } catch (const Error&) {
    return std::nullopt;
  }
  if (std::abs(ref.heading().dot(f_r.normalized())) > delta) return std::nullopt;
  return x;
}

}  // namespace detail

inline constexpr int kMaxRejections = 100000;

/// Sampling radii for e_p, v, the attitude-error angle, and Ω.
struct DomainRadii {
  double e_p, v, theta, Omega;
};

inline DomainRadii domain_radii(const DomainBounds& d) {
  return {d.e_p_max, d.v_max, std::acos(1.0 - d.psi), d.Omega_max};
}

/// Ball-uniform e_p, v, Ω and Haar attitude within `radii`, rejecting
/// states that violate the heading guard.
inline BodyState sample_state(const Platform& p, const GainSet& g, const DomainBounds& d,
                              const Reference& ref, const DomainRadii& radii,
                              std::mt19937_64& rng) {
  for (int attempt = 0; attempt < kMaxRejections; ++attempt) {
    const Vec3 e_p = detail::ball_uniform(rng, radii.e_p);
    const Vec3 v = detail::ball_uniform(rng, radii.v);
    const Vec3 rot = detail::haar_angle(rng, radii.theta) * detail::unit_vector(rng);
    const Vec3 omega = detail::ball_uniform(rng, radii.Omega);
    if (auto x = detail::state_from_errors(p, g, ref, e_p, v, rot, omega, d.delta)) return *x;
  }
  throw Error(ErrorCode::kInfeasibleDomain, "heading guard rejects every sampled state");
}

inline BodyState sample_domain_state(const Platform& p, const GainSet& g, const DomainBounds& d,
                                     const Reference& ref, std::mt19937_64& rng) {
  return sample_state(p, g, d, ref, domain_radii(d), rng);
}

/// Signed violations (positive = bound broken) of each per-state inequality
/// used in the analysis. Inequalities are normalized by max(1, |rhs|).
inline std::vector<std::pair<std::string, double>> evaluate_lemma_bounds(const Platform& p,
                                                                         const GainSet& g,
                                                                         const DomainBounds& d,
                                                                         const Reference& ref,
                                                                         const BodyState& x) {
  const ControllerEvaluation ev = evaluate_controller(p, g, ref, x);
  const ErrorState& e = ev.errors;
  const double m = p.mass;
  const double gamma = spurious_gain(p);
  const AlphaBeta ab = alpha_beta(p, g, d);
  const double e_max = d.e_R_max();
  const double f_low = d.f_lower(p, g);
  const double prefactor = 1.0 + d.delta / (1.0 - d.delta * d.delta);
  const VBoundMatrices mb = build_V_bound_matrices(p, g, d);
  const Eigen::Vector2d z1 = e.z1();
  const Eigen::Vector2d z2 = e.z2();
  const double v1 = lyapunov_v1(p, g, e);
  const double v2 = lyapunov_v2(p, g, e);
  const Vec3 d_star = preferential_direction(p);

  auto le = [](double lhs, double rhs) { return (lhs - rhs) / std::max(1.0, std::abs(rhs)); };

  std::vector<std::pair<std::string, double>> out;
  const double fr_norm = ev.f_r.norm();
  out.emplace_back("f_r_lower", le(f_low, fr_norm));
  out.emplace_back("omega_d_bound",
                   le(ev.Omega_d.norm(), prefactor * ev.f_r_dot.norm() / fr_norm));

  const double kk = std::abs(g.k_v * g.k_v / m - g.k_p) + g.k_v * g.k_v / m * e_max;
  const double refined =
      prefactor * (g.k_p * g.k_v / (m * f_low) * (1.0 + e_max) * e.e_p.norm() +
                   kk / f_low * e.v.norm() +
                   g.k_v / f_low * (p.gravity + gamma * g.k_R / m) * e.e_R.norm() +
                   g.k_v / (m * f_low) * gamma * (ab.beta + g.k_Omega) * e.Omega.norm());
  out.emplace_back("omega_d_refined", le(ev.Omega_d.norm(), refined));

  const Mat3 gyro = hat(x.Omega) * p.inertia - g.k_Omega * Mat3::Identity();
  out.emplace_back("moment_gain", le(gyro.jacobiSvd().singularValues()(0), ab.beta + g.k_Omega));
  const Mat3 c = p.moment_alloc;
  const Mat3 channel = desired_thrust_orthogonal_projector(ev.attitude.R_d, d_star) *
                       x.R.matrix() * p.spurious_alloc * c.inverse();
  out.emplace_back("spurious_gain", le(channel.jacobiSvd().singularValues()(0), gamma));

  out.emplace_back("misalignment",
                   le(ev.X.norm(), (g.k_p * e.e_p.norm() + g.k_v * e.v.norm() + p.weight()) *
                                       e.e_R.norm()));
  const Vec3 fc = x.R * d_star;
  const Vec3 fr = ev.attitude.R_d * d_star;
  out.emplace_back("misalignment_factor", le(fc.cross(fc.cross(fr)).norm(), e.e_R.norm()));

  out.emplace_back("V1_lower", le(0.5 * z1.dot(mb.M11 * z1), v1));
  out.emplace_back("V1_upper", le(v1, 0.5 * z1.dot(mb.M12 * z1)));
  out.emplace_back("V2_lower", le(0.5 * z2.dot(mb.M21 * z2), v2));
  out.emplace_back("V2_upper", le(v2, 0.5 * z2.dot(mb.M22 * z2)));

  const double er2 = e.e_R.squaredNorm();
  out.emplace_back("psi_lower", le(0.5 * er2, e.psi));
  out.emplace_back("psi_upper", le(e.psi, er2 / (2.0 - d.psi)));
  out.emplace_back("transport_norm",
                   le(transport_matrix(x.R, ev.attitude.R_d).jacobiSvd().singularValues()(0), 1.0));
  out.emplace_back("e_R_psi_identity", std::abs(er2 - e.psi * (2.0 - e.psi)));
  return out;
}

inline constexpr double kLemmaTolerance = 1e-10;

/// Draws n states uniformly in 𝒟 and checks every per-state bound.
/// Deterministic in (seed, n) regardless of thread count.
inline AuditReport audit_lemma_bounds(const Platform& p, const GainSet& g, const DomainBounds& d,
                                      const Reference& ref, std::size_t n_samples,
                                      std::uint64_t seed) {
  validate(p);
  validate(g);
  validate(d);
  alpha_beta(p, g, d);
  std::vector<std::vector<std::pair<std::string, double>>> rows(n_samples);
  parallel_for(n_samples, [&](std::size_t i) {
    std::mt19937_64 rng = stream_rng(seed, i);
    const BodyState x = sample_domain_state(p, g, d, ref, rng);
    rows[i] = evaluate_lemma_bounds(p, g, d, ref, x);
  });

  AuditReport report;
  report.seed = seed;
  std::map<std::string, std::size_t> index;
  for (const auto& row : rows) {
    for (const auto& [name, violation] : row) {
      auto it = index.find(name);
      if (it == index.end()) {
        it = index.emplace(name, report.checks.size()).first;
        AuditCheck c;
        c.name = name;
        c.tolerance = kLemmaTolerance;
        report.checks.push_back(c);
      }
      report.checks[it->second].record(violation);
    }
  }
  for (auto& c : report.checks) c.finalize();
  return report;
}

/// Central difference of R_d along the closed-loop flow. R_d depends on the
/// state only through (p, v), so the flow is p ± dt·v, v ± dt·v̇.
inline Vec3 omega_d_central_difference(const Platform& p, const GainSet& g, const Reference& ref,
                                       const BodyState& x, double dt) {
  const ControllerEvaluation ev = evaluate_controller(p, g, ref, x);
  const Vec3 d_star = preferential_direction(p);
  auto r_d_at = [&](double s) {
    BodyState y = x;
    y.p = x.p + s * x.v;
    y.v = x.v + s * ev.v_dot;
    return desired_attitude(reference_force(p, g, y, ref), ref, d_star, min_thrust(p)).R_d.matrix();
  };
  const Mat3 dr = (r_d_at(dt) - r_d_at(-dt)) / (2.0 * dt);
  const Mat3 w = ev.attitude.R_d.matrix().transpose() * dr;
  return vee(0.5 * (w - w.transpose()));
}

/// Steps the zero-order-hold closed loop without storing samples.
inline BodyState simulate_final_state(const Platform& p, const GainSet& g, const Reference& ref,
                                      BodyState x, double h, double horizon) {
  const std::size_t steps = sample_count(h, horizon) - 1;
  for (std::size_t k = 0; k < steps; ++k) {
    const ControlInput u = evaluate_controller(p, g, ref, x).input;
    x = step(p, x, u, h);
  }
  return x;
}

inline Trajectory closed_loop_rollout(const Platform& p, const GainSet& g, const Reference& ref,
                                      const BodyState& x0, double h, double horizon) {
  HoverController ctrl(p, g, ref);
  return rollout(p, x0, ctrl.callback(), h, horizon);
}

/// Least-squares slope of log V(t) over samples with V above `floor`,
/// returned as a positive decay rate.
inline double fit_log_decay_rate(const std::vector<double>& t, const std::vector<double>& v,
                                 double floor) {
  double st = 0, sy = 0, stt = 0, sty = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!(v[i] > floor)) continue;
    const double y = std::log(v[i]);
    st += t[i];
    sy += y;
    stt += t[i] * t[i];
    sty += t[i] * y;
    ++n;
  }
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  const double denom = n * stt - st * st;
  if (denom <= 0.0) return std::numeric_limits<double>::quiet_NaN();
  return -(n * sty - st * sy) / denom;
}

namespace detail {

struct SampledRun {
  std::vector<double> t, V;
  std::vector<Eigen::Vector4d> z;
};

inline SampledRun sample_run(const Platform& p, const GainSet& g, const Reference& ref,
                             const BodyState& x0, double h, double horizon) {
  SampledRun run;
  const std::size_t n = sample_count(h, horizon);
  BodyState x = x0;
  for (std::size_t k = 0; k < n; ++k) {
    const ControllerEvaluation ev = evaluate_controller(p, g, ref, x);
    run.t.push_back(static_cast<double>(k) * h);
    run.V.push_back(lyapunov_v(p, g, ev.errors));
    run.z.push_back(ev.errors.z());
    if (k + 1 < n) x = step(p, x, ev.input, h);
  }
  return run;
}

/// Forward-difference V̇ at interval midpoints.
inline std::vector<double> v_dot_forward(const SampledRun& run, double h) {
  std::vector<double> out;
  for (std::size_t k = 0; k + 1 < run.V.size(); ++k) out.push_back((run.V[k + 1] - run.V[k]) / h);
  return out;
}

}  // namespace detail

inline constexpr double kRichardsonHorizon = 1.0;

/// Slope κ in the O(h) slack κ·h of derivative inequalities, from a
/// Richardson pair: the forward-difference V̇ error at h is about twice the
/// gap between the h and h/2 estimates at shared instants.
inline double estimate_slack_slope(const Platform& p, const GainSet& g, const Reference& ref,
                                   const BodyState& x0, double h) {
  const double horizon = std::max(kRichardsonHorizon, 2.0 * h);
  const detail::SampledRun a = detail::sample_run(p, g, ref, x0, h, horizon);
  const detail::SampledRun b = detail::sample_run(p, g, ref, x0, 0.5 * h, horizon);
  const std::vector<double> da = detail::v_dot_forward(a, h);
  double gap = 0.0;
  for (std::size_t k = 0; k < da.size() && 2 * k + 2 < b.V.size(); ++k) {
    const double db = (b.V[2 * k + 2] - b.V[2 * k]) / h;  // same interval, finer trajectory
    gap = std::max(gap, std::abs(da[k] - db));
  }
  return 2.0 * gap / h;
}

/// Rolls out the closed loop from x0 and audits V non-increase, the composite
/// decrease inequality, domain membership, Ω_d against differences of R_d,
/// closed-loop consistency of the error system, and the log V decay rate.
inline AuditReport audit_trajectory(const Platform& p, const GainSet& g, const DomainBounds& d,
                                    const Reference& ref, const BodyState& x0, double h,
                                    double horizon) {
  const CertificateReport cert = certify(p, g, d);
  std::vector<ControllerEvaluation> evals;
  std::vector<BodyState> states;
  const std::size_t n = sample_count(h, horizon);
  evals.reserve(n);
  states.reserve(n);
  BodyState x = x0;
  for (std::size_t k = 0; k < n; ++k) {
    try {
      evals.push_back(evaluate_controller(p, g, ref, x));
      states.push_back(x);
      if (k + 1 < n) x = step(p, x, evals.back().input, h);
    } catch (const Error& e) {
      throw Error(e.code(), "t = " + std::to_string(k * h) + " s: " + e.detail());
    }
  }

  std::vector<double> t(n), v(n), zz(n);
  for (std::size_t k = 0; k < n; ++k) {
    t[k] = k * h;
    v[k] = lyapunov_v(p, g, evals[k].errors);
    zz[k] = evals[k].errors.z().squaredNorm();
  }
  const double kappa = estimate_slack_slope(p, g, ref, x0, h);
  const double v0 = v.front();
  const double slack = kappa * h + 1e-9 * std::max(1.0, v0);

  AuditReport report;
  report.metrics["kappa"] = kappa;
  report.metrics["slack"] = slack;
  report.metrics["V0"] = v0;
  report.metrics["roa_level"] = sublevel_bound(p, g, d);
  report.metrics["lambda_min_W"] = cert.lambda_min_W;
  report.metrics["certified"] = cert.feasible ? 1.0 : 0.0;

  AuditCheck nonincrease;
  nonincrease.name = "V_nonincrease";
  nonincrease.tolerance = slack;
  nonincrease.note = "max forward-difference dV/dt";
  AuditCheck decrease;
  decrease.name = "V_decrease";
  decrease.tolerance = slack;
  decrease.note = "dV/dt + lambda_min(W)|z|^2";
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double vdot = (v[k + 1] - v[k]) / h;
    nonincrease.record(vdot);
    decrease.record(vdot + cert.lambda_min_W * 0.5 * (zz[k] + zz[k + 1]));
  }

  AuditCheck domain;
  domain.name = "domain_membership";
  domain.note = "max ratio to domain bound, minus one";
  for (std::size_t k = 0; k < n; ++k) {
    const ErrorState& e = evals[k].errors;
    const double ratio = std::max(
        {e.e_p.norm() / d.e_p_max, e.v.norm() / d.v_max, e.psi / d.psi,
         e.Omega.norm() / d.Omega_max, heading_alignment(p, g, states[k], ref) / d.delta});
    domain.record(ratio - 1.0);
  }

  // With zero-order hold v̇ jumps by O(h) at each sample, so centred
  // differences agree with the right-limit closed forms only to O(h).
  double omega_scale = 1.0, accel_scale = 1.0, rate_scale = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    const ControllerEvaluation& ev = evals[k];
    omega_scale = std::max(omega_scale, ev.Omega_d.norm());
    accel_scale = std::max(accel_scale, ev.v_dot.norm());
    const Vec3 omega_dot =
        p.inertia.llt().solve(-g.k_R * ev.errors.e_R - g.k_Omega * states[k].Omega);
    rate_scale = std::max({rate_scale, ev.v_dot.norm(), states[k].v.norm(), omega_dot.norm(),
                           states[k].Omega.norm() + ev.Omega_d.norm()});
  }
  AuditCheck omega_fd;
  omega_fd.name = "omega_d_finite_difference";
  omega_fd.tolerance = 10.0 * h * omega_scale;
  AuditCheck consistency;
  consistency.name = "closed_loop_consistency";
  consistency.tolerance = 10.0 * h * rate_scale;
  consistency.note = "centred differences of (e_p, v, e_R, Omega) against the model";
  for (std::size_t k = 1; k + 1 < n; ++k) {
    const Mat3 before = evals[k - 1].attitude.R_d.matrix();
    const Mat3 after = evals[k + 1].attitude.R_d.matrix();
    const Vec3 omega_num =
        log_so3(Rotation::from_matrix_projected(before.transpose() * after)) / (2.0 * h);
    omega_fd.record((omega_num - evals[k].Omega_d).norm());

    const ErrorState& a = evals[k - 1].errors;
    const ErrorState& b = evals[k + 1].errors;
    const ControllerEvaluation& ev = evals[k];
    const BodyState& xs = states[k];
    const Vec3 e_omega =
        xs.Omega - xs.R.matrix().transpose() * ev.attitude.R_d.matrix() * ev.Omega_d;
    const Vec3 e_r_dot = transport_matrix(xs.R, ev.attitude.R_d) * e_omega;
    const Vec3 omega_dot = p.inertia.llt().solve(-g.k_R * ev.errors.e_R - g.k_Omega * xs.Omega);
    const double r = std::max({((b.e_p - a.e_p) / (2 * h) - xs.v).norm(),
                               ((b.v - a.v) / (2 * h) - ev.v_dot).norm(),
                               ((b.e_R - a.e_R) / (2 * h) - e_r_dot).norm(),
                               ((b.Omega - a.Omega) / (2 * h) - omega_dot).norm()});
    consistency.record(r);
  }

  AuditCheck printed;
  printed.name = "printed_channel_mismatch";
  printed.gating = false;
  printed.tolerance = 1e-9 * accel_scale;
  printed.note = "error-system v-dot with the desired-axis projector vs the model";
  for (std::size_t k = 0; k < n; ++k) {
    const ErrorDynamics rhs = error_dynamics_rhs(p, g, states[k], ref);
    printed.record((rhs.v_dot - evals[k].v_dot).norm());
  }

  const double fitted = fit_log_decay_rate(t, v, 1e-14 * std::max(v0, 1e-300));
  const double required = 0.5 * cert.decay_rate;
  report.metrics["fitted_rate"] = fitted;
  report.metrics["required_rate"] = required;
  AuditCheck rate;
  rate.name = "decay_rate";
  rate.note = "0.5 lambda_min(W)/lambda_max(M2) minus the fitted log V rate";
  if (v0 > 0.0) rate.record(required - fitted);

  for (AuditCheck* c : {&nonincrease, &decrease, &domain, &omega_fd, &consistency, &printed, &rate}) {
    c->finalize();
    report.checks.push_back(*c);
  }
  return report;
}

/// Point on {V = level} along the ray through a random domain sample,
/// located by bisection on the ray parameter.
inline BodyState sample_level_set(const Platform& p, const GainSet& g, const DomainBounds& d,
                                  const Reference& ref, double level, std::mt19937_64& rng) {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    const Vec3 e_p = detail::ball_uniform(rng, d.e_p_max);
    const Vec3 v = detail::ball_uniform(rng, d.v_max);
    const Vec3 rot = detail::haar_angle(rng, std::acos(1.0 - d.psi)) * detail::unit_vector(rng);
    const Vec3 omega = detail::ball_uniform(rng, d.Omega_max);
    auto at = [&](double s) {
      return detail::state_from_errors(p, g, ref, s * e_p, s * v, s * rot, s * omega, d.delta);
    };
    auto value = [&](const BodyState& x) {
      return lyapunov_v(p, g, evaluate_controller(p, g, ref, x).errors);
    };
    double lo = 0.0, hi = 1.0;
    std::optional<BodyState> top = at(hi);
    while (top && value(*top) < level && hi < 64.0) {
      lo = hi;
      hi *= 2.0;
      top = at(hi);
    }
    if (!top || value(*top) < level) continue;
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (lo + hi);
      const auto xm = at(mid);
      if (!xm) break;
      (value(*xm) < level ? lo : hi) = mid;
    }
    if (auto x = at(hi)) return *x;
  }
  throw Error(ErrorCode::kInvalidArgument, "could not reach the requested level set");
}

struct RoaTrial {
  std::size_t index = 0;
  double V0 = 0.0;
  double z0 = 0.0;
  double zT = 0.0;
  bool converged = false;
  std::string error;
};

struct RoaResult {
  std::size_t n_trials = 0;
  std::size_t converged = 0;
  double level = 0.0;
  std::vector<RoaTrial> trials;

  /// Empty when no trials ran.
  std::optional<double> fraction() const {
    if (n_trials == 0) return std::nullopt;
    return static_cast<double>(converged) / static_cast<double>(n_trials);
  }
};

inline constexpr double kConvergenceRatio = 1e-4;

/// Per-block radii of the box containing {V ≤ level} ∩ 𝒟. Each block's
/// radius comes from the Schur complement of its lower-bound matrix, and the
/// attitude angle from V₂ ≥ Ψ(k_R − c₂²/λ_min(J)).
inline DomainRadii sublevel_radii(const Platform& p, const GainSet& g, const DomainBounds& d,
                                  double level) {
  DomainRadii radii = domain_radii(d);
  const double m = p.mass;
  const double jmin = lambda_min(p.inertia);
  auto shrink = [&](double& r, double schur) {
    if (schur > 0.0) r = std::min(r, std::sqrt(2.0 * level / schur));
  };
  if (g.c1 * g.c1 < m * g.k_p) {
    shrink(radii.e_p, g.k_p - g.c1 * g.c1 / m);
    shrink(radii.v, m - g.c1 * g.c1 / g.k_p);
  }
  const double psi_room = g.k_R - g.c2 * g.c2 / jmin;
  if (psi_room > 0.0) {
    shrink(radii.Omega, jmin - g.c2 * g.c2 / g.k_R);
    const double psi_max = std::min(d.psi, level / psi_room);
    radii.theta = std::min(radii.theta, std::acos(1.0 - psi_max));
  }
  return radii;
}

/// Trials drawn uniformly from {V ≤ level} ∩ 𝒟 by rejection inside
/// sublevel_radii(). Does not require a certificate.
inline RoaResult monte_carlo_sublevel(const Platform& p, const GainSet& g, const DomainBounds& d,
                                      const Reference& ref, double level, std::size_t n_trials,
                                      double horizon, std::uint64_t seed, double h = kDefaultStep) {
  RoaResult result;
  result.n_trials = n_trials;
  result.level = level;
  result.trials.resize(n_trials);
  if (n_trials == 0) return result;
  const DomainRadii radii = sublevel_radii(p, g, d, level);

  parallel_for(n_trials, [&](std::size_t i) {
    std::mt19937_64 rng = stream_rng(seed, i);
    RoaTrial& trial = result.trials[i];
    trial.index = i;
    BodyState x0;
    for (int attempt = 0;; ++attempt) {
      if (attempt >= kMaxRejections) {
        trial.error = "no sample with V <= level";
        return;
      }
      x0 = sample_state(p, g, d, ref, radii, rng);
      trial.V0 = lyapunov_v(p, g, evaluate_controller(p, g, ref, x0).errors);
      if (trial.V0 <= level) break;
    }
    trial.z0 = evaluate_controller(p, g, ref, x0).errors.z().norm();
    try {
      const BodyState xt = simulate_final_state(p, g, ref, x0, h, horizon);
      trial.zT = evaluate_controller(p, g, ref, xt).errors.z().norm();
      trial.converged = trial.zT < kConvergenceRatio * trial.z0;
    } catch (const Error& e) {
      trial.error = e.what();
    }
  });
  for (const auto& trial : result.trials) {
    if (trial.converged) ++result.converged;
  }
  return result;
}

/// Monte-Carlo estimate over the certified 𝒟₀. Throws NotCertified.
inline RoaResult monte_carlo_roa(const Platform& p, const GainSet& g, const DomainBounds& d,
                                 const Reference& ref, std::size_t n_trials, double horizon,
                                 std::uint64_t seed, double h = kDefaultStep) {
  const double level = estimate_roa_level(p, g, d);
  return monte_carlo_sublevel(p, g, d, ref, level, n_trials, horizon, seed, h);
}

}  // namespace coupled_hover
