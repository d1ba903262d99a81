#pragma once

// Hierarchical hovering controller: position loop → reference force f_r,
// desired attitude R_d = R_w R_b with R_d d⋆ = f̂_r, attitude loop → τ_r,
// and the wrench mapper that recovers (u_f, u_τ). Also the closed-form
// desired angular velocity and the closed-loop error-dynamics evaluator.

#include <algorithm>
#include <cmath>
#include <optional>
#include <utility>

#include "coupled_hover/dynamics.hpp"
#include "coupled_hover/error.hpp"
#include "coupled_hover/gains.hpp"
#include "coupled_hover/lyapunov.hpp"
#include "coupled_hover/platform.hpp"
#include "coupled_hover/so3.hpp"

namespace coupled_hover {

/// Constant hover reference.
struct Reference {
  Vec3 p_r = Vec3::Zero();
  Rotation R_r;

  /// r̂₁ = R_r e₁.
  Vec3 heading() const { return R_r.matrix().col(0); }
};

/// Minimum admissible 1 − (r̂₁ᵀ w₃)² before the heading completion is rejected.
inline constexpr double kHeadingEps = 1e-6;
inline constexpr double kMaxConditionC = 1e8;

/// f_min = 0.1·mg.
inline double min_thrust(const Platform& p) { return 0.1 * p.weight(); }

inline Vec3 reference_force(const Platform& p, const GainSet& g, const BodyState& x,
                            const Reference& ref) {
  return p.weight() * Vec3::UnitZ() - g.k_p * (x.p - ref.p_r) - g.k_v * x.v;
}

/// ḟ_r = −k_p v − k_v v̇.
inline Vec3 reference_force_rate(const GainSet& g, const BodyState& x, const Vec3& v_dot) {
  return -g.k_p * x.v - g.k_v * v_dot;
}

/// Minimal rotation taking d⋆ to e₃; π about e₁ when d⋆ = −e₃.
inline Rotation align_to_e3(const Vec3& d_star) {
  const Vec3 d = d_star.normalized();
  const double c = std::clamp(d.dot(Vec3::UnitZ()), -1.0, 1.0);
  if (c > 1.0 - 1e-15) return Rotation::identity();
  if (c < -1.0 + 1e-15) return exp_so3(Vec3(M_PI, 0.0, 0.0));
  const Vec3 axis = d.cross(Vec3::UnitZ()).normalized();
  return exp_so3(std::acos(c) * axis);
}

struct DesiredAttitude {
  Rotation R_d;
  Rotation R_w;  // columns w₁, w₂, w₃ with w₃ = f̂_r
  Rotation R_b;  // R_b d⋆ = e₃
};

/// Throws ThrustDegenerate when ‖f_r‖ < f_min and HeadingSingular when w₃
/// is (nearly) parallel to the heading.
inline DesiredAttitude desired_attitude(const Vec3& f_r, const Reference& ref, const Vec3& d_star,
                                        double f_min) {
  const double f_norm = f_r.norm();
  if (!(f_norm >= f_min) || f_norm == 0.0) {
    throw Error(ErrorCode::kThrustDegenerate,
                "|f_r| = " + std::to_string(f_norm) + " below " + std::to_string(f_min));
  }
  const Vec3 w3 = f_r / f_norm;
  const Vec3 r1 = ref.heading();
  const double cos_axis = r1.dot(w3);
  if (1.0 - cos_axis * cos_axis < kHeadingEps) {
    throw Error(ErrorCode::kHeadingSingular, "thrust direction parallel to heading");
  }
  const Vec3 w2 = w3.cross(r1).normalized();
  const Vec3 w1 = w2.cross(w3);
  DesiredAttitude out;
  out.R_w = rotation_from_columns(w1, w2, w3);
  out.R_b = align_to_e3(d_star);
  out.R_d = out.R_w * out.R_b;
  return out;
}

/// τ_r = Ω×JΩ − k_R e_R − k_Ω Ω.
inline Vec3 reference_moment(const Platform& p, const GainSet& g, const BodyState& x,
                             const Rotation& r_d) {
  const Vec3 e_r = attitude_error(x.R, r_d);
  return x.Omega.cross(p.inertia * x.Omega) - g.k_R * e_r - g.k_Omega * x.Omega;
}

/// u_τ = C⁻¹τ_r and u_f = (R a)ᵀ(f_r − R B C⁻¹τ_r)/‖R a‖², the scalar
/// least-squares fit of R a u_f to the compensated force.
inline ControlInput wrench_map(const Platform& p, const BodyState& x, const Vec3& f_r,
                               const Vec3& tau_r) {
  require_d1_minimal(p);
  const Eigen::VectorXd s = singular_values(p.moment_alloc);
  if (!(s(2) > 0.0) || s(0) / s(2) > kMaxConditionC) {
    throw Error(ErrorCode::kIllConditionedC, "cond(C) exceeds 1e8");
  }
  const Mat3 c = p.moment_alloc;
  ControlInput u;
  u.u_tau = c.partialPivLu().solve(tau_r);
  const Vec3 ra = x.R * Vec3(p.force_alloc.col(0));
  const Vec3 target = f_r - x.R * (p.spurious_alloc * u.u_tau);
  u.u_f = ra.dot(target) / ra.squaredNorm();
  return u;
}

/// Closed form Ω_d = R_dᵀ[I + (r̂₁ᵀw₃/‖w₃×r̂₁‖²) w₃ r̂₁ᵀ](w₃ × ẇ₃),
/// ẇ₃ = (I − f̂_r f̂_rᵀ) ḟ_r / ‖f_r‖. `f_r_dot` is ḟ_r.
inline Vec3 desired_angular_velocity(const Vec3& f_r, const Vec3& f_r_dot, const Reference& ref,
                                     const Rotation& r_d) {
  const double f_norm = f_r.norm();
  const Vec3 w3 = f_r / f_norm;
  const Vec3 r1 = ref.heading();
  const Vec3 w3_dot = (Mat3::Identity() - w3 * w3.transpose()) * f_r_dot / f_norm;
  const double sin2 = w3.cross(r1).squaredNorm();
  const Mat3 lift = Mat3::Identity() + (r1.dot(w3) / sin2) * w3 * r1.transpose();
  return r_d.matrix().transpose() * (lift * w3.cross(w3_dot));
}

/// Convenience overload that rebuilds f_r and R_d from the state; `v_dot` is
/// the closed-loop translational acceleration.
inline Vec3 desired_angular_velocity(const Platform& p, const GainSet& g, const BodyState& x,
                                     const Reference& ref, const Vec3& v_dot) {
  const Vec3 f_r = reference_force(p, g, x, ref);
  const DesiredAttitude att = desired_attitude(f_r, ref, preferential_direction(p), min_thrust(p));
  return desired_angular_velocity(f_r, reference_force_rate(g, x, v_dot), ref, att.R_d);
}

/// X = ‖f_r‖((d⋆ᵀR_dᵀR d⋆) R d⋆ − R_d d⋆): the part of f_r the current
/// thrust axis R d⋆ cannot deliver.
inline Vec3 misalignment_term(const Vec3& f_r, const Rotation& r, const Rotation& r_d,
                              const Vec3& d_star) {
  const Vec3 actual = r * d_star;
  const Vec3 desired = r_d * d_star;
  return f_r.norm() * (desired.dot(actual) * actual - desired);
}

/// P⊥ = I − (R_d d⋆)(R_d d⋆)ᵀ.
inline Mat3 desired_thrust_orthogonal_projector(const Rotation& r_d, const Vec3& d_star) {
  const Vec3 n = r_d * d_star;
  return Mat3::Identity() - n * n.transpose();
}

inline ErrorState error_state(const BodyState& x, const Reference& ref, const Rotation& r_d) {
  ErrorState e;
  e.e_p = x.p - ref.p_r;
  e.v = x.v;
  e.e_R = attitude_error(x.R, r_d);
  e.Omega = x.Omega;
  e.psi = psi(x.R, r_d);
  return e;
}

/// Right-hand sides of the closed-loop error system for (e_p, v, e_R, Ω).
struct ErrorDynamics {
  Vec3 e_p_dot = Vec3::Zero();
  Vec3 v_dot = Vec3::Zero();
  Vec3 e_R_dot = Vec3::Zero();
  Vec3 Omega_dot = Vec3::Zero();
  Vec3 Omega_d = Vec3::Zero();

  double max_norm() const {
    return std::max({e_p_dot.cwiseAbs().maxCoeff(), v_dot.cwiseAbs().maxCoeff(),
                     e_R_dot.cwiseAbs().maxCoeff(), Omega_dot.cwiseAbs().maxCoeff()});
  }
};

/// Closed-loop error system with the spurious-force channel written as
/// P⊥ R B C⁻¹(Ω×JΩ − k_R e_R − k_Ω Ω), P⊥ projecting off the desired thrust
/// axis R_d d⋆. The true model projects off the current axis R d⋆ instead;
/// the two agree when R d⋆ = R_d d⋆ (see audit_trajectory).
inline ErrorDynamics error_dynamics_rhs(const Platform& p, const GainSet& g, const BodyState& x,
                                        const Reference& ref) {
  require_d1_minimal(p);
  const Vec3 d_star = preferential_direction(p);
  const Vec3 f_r = reference_force(p, g, x, ref);
  const DesiredAttitude att = desired_attitude(f_r, ref, d_star, min_thrust(p));
  const ErrorState e = error_state(x, ref, att.R_d);

  const Vec3 tau_r = reference_moment(p, g, x, att.R_d);
  const Mat3 c = p.moment_alloc;
  const Vec3 channel = desired_thrust_orthogonal_projector(att.R_d, d_star) * x.R.matrix() *
                       p.spurious_alloc * c.partialPivLu().solve(tau_r);
  const Vec3 x_term = misalignment_term(f_r, x.R, att.R_d, d_star);

  ErrorDynamics out;
  out.e_p_dot = x.v;
  out.v_dot = (-g.k_p * e.e_p - g.k_v * e.v + x_term + channel) / p.mass;
  out.Omega_d = desired_angular_velocity(f_r, reference_force_rate(g, x, out.v_dot), ref, att.R_d);
  const Vec3 e_omega = x.Omega - x.R.matrix().transpose() * att.R_d.matrix() * out.Omega_d;
  out.e_R_dot = transport_matrix(x.R, att.R_d) * e_omega;
  out.Omega_dot = p.inertia.llt().solve(-g.k_R * e.e_R - g.k_Omega * x.Omega);
  return out;
}

/// Everything the controller computes at one sampling instant.
struct ControllerEvaluation {
  Vec3 f_r;
  DesiredAttitude attitude;
  Vec3 tau_r;
  ControlInput input;
  Vec3 v_dot;    // model acceleration under `input`
  Vec3 f_r_dot;
  Vec3 Omega_d;
  Vec3 X;
  ErrorState errors;
};

inline ControllerEvaluation evaluate_controller(const Platform& p, const GainSet& g,
                                                const Reference& ref, const BodyState& x) {
  require_d1_minimal(p);
  const Vec3 d_star = preferential_direction(p);
  ControllerEvaluation ev;
  ev.f_r = reference_force(p, g, x, ref);
  ev.attitude = desired_attitude(ev.f_r, ref, d_star, min_thrust(p));
  ev.tau_r = reference_moment(p, g, x, ev.attitude.R_d);
  ev.input = wrench_map(p, x, ev.f_r, ev.tau_r);
  // The control law has no Ω_d feedforward, so the acceleration under the
  // current input is exact and ḟ_r needs no numerical differentiation.
  ev.v_dot = model_acceleration(p, x.R, ev.input);
  ev.f_r_dot = reference_force_rate(g, x, ev.v_dot);
  ev.Omega_d = desired_angular_velocity(ev.f_r, ev.f_r_dot, ref, ev.attitude.R_d);
  ev.X = misalignment_term(ev.f_r, x.R, ev.attitude.R_d, d_star);
  ev.errors = error_state(x, ref, ev.attitude.R_d);
  return ev;
}

/// Stateful feedback law for rollouts. Keeps the last evaluation for inspection.
class HoverController {
 public:
  HoverController(Platform platform, GainSet gains, Reference reference)
      : platform_(std::move(platform)), gains_(gains), reference_(std::move(reference)) {
    require_d1_minimal(platform_);
  }

  ControlStep operator()(double /*t*/, const BodyState& x) {
    last_ = evaluate_controller(platform_, gains_, reference_, x);
    const ErrorState& e = last_->errors;
    ControlStep out;
    out.input = last_->input;
    const double v1 = lyapunov_v1(platform_, gains_, e);
    const double v2 = lyapunov_v2(platform_, gains_, e);
    out.diagnostics = {
        {"V", v1 + v2},
        {"V1", v1},
        {"V2", v2},
        {"norm_e_p", e.e_p.norm()},
        {"norm_v", e.v.norm()},
        {"norm_e_R", e.e_R.norm()},
        {"norm_Omega", e.Omega.norm()},
        {"norm_Omega_d", last_->Omega_d.norm()},
        {"psi", e.psi},
        {"norm_f_r", last_->f_r.norm()},
        {"norm_X", last_->X.norm()},
    };
    return out;
  }

  ControlCallback callback() {
    return [this](double t, const BodyState& x) { return (*this)(t, x); };
  }

  const std::optional<ControllerEvaluation>& last() const { return last_; }
  const Platform& platform() const { return platform_; }
  const GainSet& gains() const { return gains_; }
  const Reference& reference() const { return reference_; }

 private:
  Platform platform_;
  GainSet gains_;
  Reference reference_;
  std::optional<ControllerEvaluation> last_;
};

/// Hover equilibrium for a reference: p = p_r, v = Ω = 0, R = R_d(mg e₃).
inline BodyState hover_state(const Platform& p, const Reference& ref) {
  BodyState x;
  x.p = ref.p_r;
  x.R = desired_attitude(p.weight() * Vec3::UnitZ(), ref, preferential_direction(p), min_thrust(p)).R_d;
  return x;
}

}  // namespace coupled_hover
