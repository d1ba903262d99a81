#pragma once

// Canonical floating-body model as a vector field, a fixed-step Lie-group
// Runge–Kutta integrator, and zero-order-hold closed-loop rollouts.

#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "coupled_hover/error.hpp"
#include "coupled_hover/platform.hpp"
#include "coupled_hover/so3.hpp"

namespace coupled_hover {

inline constexpr double kDefaultStep = 1e-3;

struct BodyState {
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  Rotation R;
  Vec3 Omega = Vec3::Zero();
};

struct ControlInput {
  double u_f = 0.0;
  Vec3 u_tau = Vec3::Zero();
};

/// (ṗ, v̇, body rate driving Ṙ = R Ω×, Ω̇).
struct StateDerivative {
  Vec3 p_dot;
  Vec3 v_dot;
  Vec3 body_rate;
  Vec3 Omega_dot;
};

inline bool all_finite(const BodyState& x) {
  return x.p.allFinite() && x.v.allFinite() && x.R.matrix().allFinite() && x.Omega.allFinite();
}

inline Vec3 model_acceleration(const Platform& p, const Rotation& r, const ControlInput& u) {
  const Vec3 body_force = p.force_alloc.col(0) * u.u_f + p.spurious_alloc * u.u_tau;
  return -p.gravity * Vec3::UnitZ() + r * body_force / p.mass;
}

inline StateDerivative state_derivative(const Platform& p, const BodyState& x,
                                        const ControlInput& u) {
  require_d1_minimal(p);
  StateDerivative d;
  d.p_dot = x.v;
  d.v_dot = model_acceleration(p, x.R, u);
  d.body_rate = x.Omega;
  const Vec3 torque = p.moment_alloc * u.u_tau;
  d.Omega_dot = p.inertia.llt().solve(torque - x.Omega.cross(p.inertia * x.Omega));
  return d;
}

/// Body-frame inverse differential of exp on so(3): if R = R₀ exp(u) and
/// Ṙ = R w×, then u̇ = w + ½ u×w + (1 − (θ/2)cot(θ/2))/θ² · u×(u×w).
inline Vec3 dexp_inv_body(const Vec3& u, const Vec3& w) {
  const double theta = u.norm();
  double coeff;
  if (theta < 1e-4) {
    coeff = 1.0 / 12.0 + theta * theta / 720.0;
  } else {
    const double half = 0.5 * theta;
    coeff = (1.0 - half * std::cos(half) / std::sin(half)) / (theta * theta);
  }
  const Vec3 uw = u.cross(w);
  return w + 0.5 * uw + coeff * u.cross(uw);
}

/// One RK4 step in the Munthe-Kaas form: (p, v, Ω) advance with the
/// classical tableau, R ← R exp(u) where u combines the stage body rates
/// after dexp⁻¹ correction. Throws NonFiniteState.
inline BodyState step(const Platform& p, const BodyState& x, const ControlInput& u, double h) {
  if (!(h > 0.0)) throw Error(ErrorCode::kInvalidArgument, "step size must be positive");

  auto stage = [&](const Vec3& dp, const Vec3& dv, const Vec3& du, const Vec3& dw) {
    BodyState s;
    s.p = x.p + dp;
    s.v = x.v + dv;
    s.R = Rotation::from_matrix_projected((x.R * exp_so3(du)).matrix());
    s.Omega = x.Omega + dw;
    return s;
  };

  const StateDerivative k1 = state_derivative(p, x, u);
  const Vec3 w1 = k1.body_rate;

  const Vec3 u2 = 0.5 * h * w1;
  const StateDerivative k2 =
      state_derivative(p, stage(0.5 * h * k1.p_dot, 0.5 * h * k1.v_dot, u2, 0.5 * h * k1.Omega_dot), u);
  const Vec3 w2 = dexp_inv_body(u2, k2.body_rate);

  const Vec3 u3 = 0.5 * h * w2;
  const StateDerivative k3 =
      state_derivative(p, stage(0.5 * h * k2.p_dot, 0.5 * h * k2.v_dot, u3, 0.5 * h * k2.Omega_dot), u);
  const Vec3 w3 = dexp_inv_body(u3, k3.body_rate);

  const Vec3 u4 = h * w3;
  const StateDerivative k4 =
      state_derivative(p, stage(h * k3.p_dot, h * k3.v_dot, u4, h * k3.Omega_dot), u);
  const Vec3 w4 = dexp_inv_body(u4, k4.body_rate);

  BodyState out;
  out.p = x.p + h / 6.0 * (k1.p_dot + 2.0 * k2.p_dot + 2.0 * k3.p_dot + k4.p_dot);
  out.v = x.v + h / 6.0 * (k1.v_dot + 2.0 * k2.v_dot + 2.0 * k3.v_dot + k4.v_dot);
  out.Omega = x.Omega + h / 6.0 * (k1.Omega_dot + 2.0 * k2.Omega_dot + 2.0 * k3.Omega_dot + k4.Omega_dot);
  const Vec3 rot = h / 6.0 * (w1 + 2.0 * w2 + 2.0 * w3 + w4);
  const Mat3 r_next = (x.R * exp_so3(rot)).matrix();
  if (!r_next.allFinite() || !out.p.allFinite() || !out.v.allFinite() || !out.Omega.allFinite()) {
    throw Error(ErrorCode::kNonFiniteState, "state became non-finite during integration");
  }
  out.R = Rotation::from_matrix_projected(r_next);
  return out;
}

using Diagnostics = std::map<std::string, double>;

struct Sample {
  double t = 0.0;
  BodyState state;
  ControlInput input;
  Diagnostics diagnostics;
};

struct Trajectory {
  double h = kDefaultStep;
  std::vector<Sample> samples;
};

/// What a feedback law returns for one sampling instant.
struct ControlStep {
  ControlInput input;
  Diagnostics diagnostics;
};

using ControlCallback = std::function<ControlStep(double t, const BodyState& x)>;

inline std::size_t sample_count(double h, double horizon) {
  return static_cast<std::size_t>(std::floor(horizon / h + 1e-9)) + 1;
}

/// Zero-order-hold closed loop: the controller runs once per step on the
/// sampled state. Errors are rethrown with the failing time prepended.
inline Trajectory rollout(const Platform& p, const BodyState& x0, const ControlCallback& controller,
                          double h, double horizon) {
  if (!(h > 0.0) || !(horizon >= h)) {
    throw Error(ErrorCode::kInvalidArgument, "rollout requires T >= h > 0");
  }
  const std::size_t n = sample_count(h, horizon);
  Trajectory traj;
  traj.h = h;
  traj.samples.reserve(n);
  BodyState x = x0;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) * h;
    try {
      ControlStep cs = controller(t, x);
      traj.samples.push_back(Sample{t, x, cs.input, std::move(cs.diagnostics)});
      if (k + 1 < n) x = step(p, x, cs.input, h);
    } catch (const Error& e) {
      throw Error(e.code(), "t = " + std::to_string(t) + " s: " + e.detail());
    }
  }
  return traj;
}

}  // namespace coupled_hover
