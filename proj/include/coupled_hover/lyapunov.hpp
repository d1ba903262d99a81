#pragma once

// Composite Lyapunov candidate V = V₁(e_p, v) + V₂(e_R, Ω).

#include "coupled_hover/gains.hpp"
#include "coupled_hover/platform.hpp"
#include "coupled_hover/so3.hpp"

namespace coupled_hover {

/// Tracking errors about a hover reference, with R_d already resolved.
struct ErrorState {
  Vec3 e_p = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  Vec3 e_R = Vec3::Zero();
  Vec3 Omega = Vec3::Zero();
  double psi = 0.0;

  Eigen::Vector2d z1() const { return {e_p.norm(), v.norm()}; }
  Eigen::Vector2d z2() const { return {e_R.norm(), Omega.norm()}; }
  Eigen::Vector4d z() const {
    Eigen::Vector4d out;
    out << z1(), z2();
    return out;
  }
};

inline double lyapunov_v1(const Platform& p, const GainSet& g, const ErrorState& e) {
  return 0.5 * p.mass * e.v.squaredNorm() + 0.5 * g.k_p * e.e_p.squaredNorm() +
         g.c1 * e.e_p.dot(e.v);
}

inline double lyapunov_v2(const Platform& p, const GainSet& g, const ErrorState& e) {
  return 0.5 * e.Omega.dot(p.inertia * e.Omega) + g.k_R * e.psi + g.c2 * e.e_R.dot(e.Omega);
}

inline double lyapunov_v(const Platform& p, const GainSet& g, const ErrorState& e) {
  return lyapunov_v1(p, g, e) + lyapunov_v2(p, g, e);
}

}  // namespace coupled_hover
