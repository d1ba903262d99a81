#pragma once

// Rotation-group primitives and the attitude-error quantities used by the
// hovering controller and its Lyapunov analysis.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

#include "coupled_hover/error.hpp"

namespace coupled_hover {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat2 = Eigen::Matrix2d;

inline constexpr double kOrthonormalTol = 1e-9;

inline Mat3 hat(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

/// Inverse of hat(). Throws NotSkew when ‖M + Mᵀ‖ > 1e-9.
inline Vec3 vee(const Mat3& m) {
  if ((m + m.transpose()).norm() > 1e-9) {
    throw Error(ErrorCode::kNotSkew, "matrix is not skew-symmetric");
  }
  return Vec3(m(2, 1), m(0, 2), m(1, 0));
}

inline double orthonormality_residual(const Mat3& m) {
  return (m.transpose() * m - Mat3::Identity()).cwiseAbs().maxCoeff();
}

inline bool is_rotation(const Mat3& m, double tol = kOrthonormalTol) {
  return m.allFinite() && orthonormality_residual(m) <= tol &&
         std::abs(m.determinant() - 1.0) <= tol;
}

/// Closest rotation in the Frobenius sense (polar factor with det fixed to +1).
inline Mat3 project_to_so3(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 u = svd.matrixU();
  const Mat3& v = svd.matrixV();
  if ((u * v.transpose()).determinant() < 0.0) u.col(2) *= -1.0;
  return u * v.transpose();
}

/// A 3×3 orthonormal matrix with det = +1.
class Rotation {
 public:
  Rotation() : m_(Mat3::Identity()) {}

  static Rotation identity() { return Rotation(); }

  /// Validates orthonormality and orientation to kOrthonormalTol.
  static Rotation from_matrix(const Mat3& m) {
    if (!m.allFinite() || orthonormality_residual(m) > kOrthonormalTol) {
      throw Error(ErrorCode::kNotOrthonormal, "matrix is not orthonormal");
    }
    if (std::abs(m.determinant() - 1.0) > kOrthonormalTol) {
      throw Error(ErrorCode::kNotOrthonormal, "matrix has det != +1");
    }
    return Rotation(m);
  }

  /// Re-orthonormalizes only when the residual exceeds kOrthonormalTol.
  static Rotation from_matrix_projected(const Mat3& m) {
    if (orthonormality_residual(m) > kOrthonormalTol) return Rotation(project_to_so3(m));
    return Rotation(m);
  }

  const Mat3& matrix() const { return m_; }
  Rotation transpose() const { return Rotation(m_.transpose()); }

  Rotation operator*(const Rotation& other) const { return Rotation(m_ * other.m_); }
  Vec3 operator*(const Vec3& v) const { return m_ * v; }

 private:
  explicit Rotation(const Mat3& m) : m_(m) {}
  friend Rotation exp_so3(const Vec3& v);
  friend Rotation rotation_from_columns(const Vec3&, const Vec3&, const Vec3&);

  Mat3 m_;
};

/// Unit axis plus angle in [0, π).
struct AxisAngle {
  Vec3 axis = Vec3::UnitZ();
  double angle = 0.0;
};

/// Rodrigues formula; second-order Taylor coefficients below ‖v‖ = 1e-8.
inline Rotation exp_so3(const Vec3& v) {
  const double theta = v.norm();
  const Mat3 k = hat(v);
  double a;
  double b;
  if (theta < 1e-8) {
    a = 1.0 - theta * theta / 6.0;
    b = 0.5 - theta * theta / 24.0;
  } else {
    a = std::sin(theta) / theta;
    b = (1.0 - std::cos(theta)) / (theta * theta);
  }
  return Rotation(Mat3::Identity() + a * k + b * k * k);
}

inline Rotation exp_so3(const AxisAngle& aa) { return exp_so3(aa.angle * aa.axis.normalized()); }

/// Rotation vector with angle in [0, π].
inline Vec3 log_so3(const Rotation& r) {
  const Eigen::AngleAxisd aa(r.matrix());
  return aa.angle() * aa.axis();
}

inline Rotation rotation_from_columns(const Vec3& c0, const Vec3& c1, const Vec3& c2) {
  Mat3 m;
  m.col(0) = c0;
  m.col(1) = c1;
  m.col(2) = c2;
  return Rotation(m);
}

/// Ψ(R, Rd) = ½(3 − Tr[Rdᵀ R]) = 1 − cos θ, clamped to [0, 2].
inline double psi(const Rotation& r, const Rotation& rd) {
  const double value = 0.5 * (3.0 - (rd.matrix().transpose() * r.matrix()).trace());
  return std::clamp(value, 0.0, 2.0);
}

/// e_R = ½[Rdᵀ R − Rᵀ Rd]∨. Meaningful only away from Ψ = 2.
inline Vec3 attitude_error(const Rotation& r, const Rotation& rd) {
  const Mat3 e = rd.matrix().transpose() * r.matrix();
  const Mat3 skew = 0.5 * (e - e.transpose());
  return Vec3(skew(2, 1), skew(0, 2), skew(1, 0));
}

/// C(Rdᵀ R) = ½(Tr[Rᵀ Rd] I − Rᵀ Rd), which maps e_ω to ė_R.
inline Mat3 transport_matrix(const Rotation& r, const Rotation& rd) {
  const Mat3 q = r.matrix().transpose() * rd.matrix();
  return 0.5 * (q.trace() * Mat3::Identity() - q);
}

}  // namespace coupled_hover
