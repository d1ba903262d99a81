#pragma once

#include <random>

#include "coupled_hover.hpp"

namespace fixtures {

using namespace coupled_hover;

/// A = e₃, B = 0.05·e₁(0, 0, 1), C = diag(0.02, 0.02, 0.04).
inline Platform reference_platform() {
  Platform p;
  p.mass = 1.0;
  p.gravity = 9.81;
  p.inertia = Eigen::Vector3d(0.01, 0.01, 0.02).asDiagonal();
  p.force_alloc = Eigen::Vector3d::UnitZ();
  p.spurious_alloc = Eigen::Matrix3d::Zero();
  p.spurious_alloc(0, 2) = 0.05;
  p.moment_alloc = Eigen::Vector3d(0.02, 0.02, 0.04).asDiagonal();
  return p;
}

inline Platform decoupled_platform() {
  Platform p = reference_platform();
  p.inertia = 0.01 * Mat3::Identity();
  p.spurious_alloc.setZero();
  return p;
}

/// Tilted force axis, full spurious matrix, non-diagonal inertia and moment map.
inline Platform tilted_platform() {
  Platform p;
  p.mass = 1.7;
  p.gravity = 9.81;
  p.inertia << 0.03, 0.002, -0.001, 0.002, 0.025, 0.0015, -0.001, 0.0015, 0.05;
  p.force_alloc = Eigen::Vector3d(0.1, -0.2, 2.0);
  p.spurious_alloc = Eigen::Matrix3d::Zero();
  p.spurious_alloc << 0.01, -0.02, 0.03, 0.02, 0.01, -0.01, 0.0, 0.005, 0.01;
  p.moment_alloc << 0.2, 0.01, 0.0, -0.02, 0.25, 0.01, 0.0, 0.03, 0.1;
  return p;
}

inline Platform heavy_platform() {
  Platform p = reference_platform();
  p.mass = 4.2;
  p.inertia = Eigen::Vector3d(0.08, 0.11, 0.15).asDiagonal();
  p.spurious_alloc.setZero();
  p.spurious_alloc(1, 0) = 0.3;
  p.spurious_alloc(0, 1) = -0.1;
  return p;
}

inline Platform inverted_axis_platform() {
  Platform p = reference_platform();
  p.force_alloc = Eigen::Vector3d(0.0, 0.0, -1.5);
  return p;
}

inline GainSet reference_gains() {
  GainSet g;
  g.k_p = 4.0;
  g.k_v = 4.0;
  g.k_R = 0.5;
  g.k_Omega = 0.1;
  g.c1 = 0.2;
  g.c2 = 0.05;
  return g;
}

inline DomainBounds reference_domain() {
  DomainBounds d;
  d.psi = 0.05;
  d.delta = 0.2;
  d.e_p_max = 0.1;
  d.v_max = 0.1;
  d.Omega_max = 0.5;
  return d;
}

inline Reference reference(double yaw = 0.0) {
  Reference r;
  r.p_r = Vec3(0.0, 0.0, 1.0);
  r.R_r = exp_so3(Vec3(0.0, 0.0, yaw));
  return r;
}

inline Rotation random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  return Rotation::from_matrix_projected(q.toRotationMatrix());
}

inline Vec3 random_vector(std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return Vec3(u(rng), u(rng), u(rng));
}

}  // namespace fixtures
