#pragma once

// Platform description and actuation analysis: rank conditions, the
// FD/PC and D1/D2/FA classification, the preferential direction, the
// spurious-coupling gain γ, and the static-hoverability check.

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "coupled_hover/error.hpp"
#include "coupled_hover/so3.hpp"

namespace coupled_hover {

inline constexpr double kDefaultRankTol = 1e-9;

/// Rigid body with allocation m v̇ = −mg e₃ + R(A u_f + B u_τ), J Ω̇ = −Ω×JΩ + C u_τ.
struct Platform {
  double mass = 1.0;
  double gravity = 9.81;
  Mat3 inertia = Mat3::Identity();
  Eigen::MatrixXd force_alloc = Eigen::Vector3d::UnitZ();      // A, 3×n_f
  Eigen::MatrixXd spurious_alloc = Eigen::Matrix3d::Zero();    // B, 3×n_τ
  Eigen::MatrixXd moment_alloc = Eigen::Matrix3d::Identity();  // C, 3×n_τ
  double rank_tol = kDefaultRankTol;

  Eigen::Index n_f() const { return force_alloc.cols(); }
  Eigen::Index n_tau() const { return moment_alloc.cols(); }
  double weight() const { return mass * gravity; }
};

inline Eigen::VectorXd singular_values(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return Eigen::VectorXd();
  return Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues();
}

/// Number of singular values above tol·σ_max.
inline int numeric_rank(const Eigen::MatrixXd& m, double tol = kDefaultRankTol) {
  const Eigen::VectorXd s = singular_values(m);
  if (s.size() == 0) return 0;
  const double cutoff = tol * s(0);
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > cutoff) ++rank;
  }
  return rank;
}

inline Eigen::Vector3d inertia_eigenvalues(const Mat3& j) {
  return Eigen::SelfAdjointEigenSolver<Mat3>(j, Eigen::EigenvaluesOnly).eigenvalues();
}
inline double lambda_min(const Mat3& j) { return inertia_eigenvalues(j)(0); }
inline double lambda_max(const Mat3& j) { return inertia_eigenvalues(j)(2); }

/// Physical invariants: m, g > 0, J symmetric positive definite, three-row
/// allocation matrices with matching B/C widths. Rank conditions are left to
/// classify() and static_hoverability() so deficient platforms can be reported.
inline void validate(const Platform& p) {
  if (!(p.mass > 0.0) || !std::isfinite(p.mass)) {
    throw ValidationError("platform.mass", "must be positive and finite");
  }
  if (!(p.gravity > 0.0) || !std::isfinite(p.gravity)) {
    throw ValidationError("platform.gravity", "must be positive and finite");
  }
  if (!p.inertia.allFinite()) throw ValidationError("platform.inertia", "non-finite entry");
  if ((p.inertia - p.inertia.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw ValidationError("platform.inertia", "must be symmetric");
  }
  if (!(lambda_min(p.inertia) > 0.0)) {
    throw ValidationError("platform.inertia", "must be positive definite");
  }
  if (p.force_alloc.rows() != 3) throw ValidationError("platform.force_alloc", "must have 3 rows");
  if (p.spurious_alloc.rows() != 3) {
    throw ValidationError("platform.spurious_alloc", "must have 3 rows");
  }
  if (p.moment_alloc.rows() != 3) throw ValidationError("platform.moment_alloc", "must have 3 rows");
  if (p.spurious_alloc.cols() != p.moment_alloc.cols()) {
    throw ValidationError("platform.spurious_alloc", "must have as many columns as moment_alloc");
  }
  if (!p.force_alloc.allFinite()) throw ValidationError("platform.force_alloc", "non-finite entry");
  if (!p.spurious_alloc.allFinite()) {
    throw ValidationError("platform.spurious_alloc", "non-finite entry");
  }
  if (!p.moment_alloc.allFinite()) throw ValidationError("platform.moment_alloc", "non-finite entry");
  if (!(p.rank_tol > 0.0 && p.rank_tol < 1.0)) {
    throw ValidationError("platform.rank_tolerance", "must lie in (0, 1)");
  }
}

enum class Coupling { kFullyDecoupled, kPartiallyCoupled };

inline const char* to_string(Coupling c) {
  return c == Coupling::kFullyDecoupled ? "FullyDecoupled" : "PartiallyCoupled";
}

struct PlatformClass {
  Coupling coupling = Coupling::kFullyDecoupled;
  int force_rank = 0;
  bool d1 = false;
  bool d2 = false;
  bool fa = false;

  /// e.g. "PC-D1" or "FD-D1-D2-FA".
  std::string label() const {
    std::string s = coupling == Coupling::kFullyDecoupled ? "FD" : "PC";
    if (d1) s += "-D1";
    if (d2) s += "-D2";
    if (fa) s += "-FA";
    return s;
  }
};

inline void require_full_moment_authority(const Platform& p) {
  if (numeric_rank(p.moment_alloc, p.rank_tol) < 3) {
    throw Error(ErrorCode::kRankDeficientC, "rank(C) < 3");
  }
}

/// FD iff rank([A B]) = rank(A): every spurious force lies in Im(A).
inline PlatformClass classify(const Platform& p) {
  require_full_moment_authority(p);
  PlatformClass out;
  out.force_rank = numeric_rank(p.force_alloc, p.rank_tol);
  Eigen::MatrixXd ab(3, p.n_f() + p.n_tau());
  ab << p.force_alloc, p.spurious_alloc;
  out.coupling = numeric_rank(ab, p.rank_tol) == out.force_rank ? Coupling::kFullyDecoupled
                                                                : Coupling::kPartiallyCoupled;
  out.d1 = out.force_rank >= 1;
  out.d2 = out.force_rank >= 2;
  out.fa = out.force_rank == 3;
  return out;
}

/// The minimal class the controller handles: n_f = 1, n_τ = 3.
inline void require_d1_minimal(const Platform& p) {
  if (p.n_f() != 1 || p.n_tau() != 3) {
    throw Error(ErrorCode::kNotD1Minimal, "requires n_f = 1 and n_tau = 3, got n_f = " +
                                              std::to_string(p.n_f()) +
                                              ", n_tau = " + std::to_string(p.n_tau()));
  }
}

/// d⋆ = a/‖a‖ for the single force column a.
inline Vec3 preferential_direction(const Platform& p) {
  if (p.n_f() != 1) throw Error(ErrorCode::kNotD1Minimal, "preferential direction needs n_f = 1");
  const Vec3 a = p.force_alloc.col(0);
  const double n = a.norm();
  if (n < 1e-12) throw Error(ErrorCode::kZeroColumn, "force column is zero");
  return a / n;
}

/// γ = σ_max(B) / σ_min(C).
inline double spurious_gain(const Platform& p) {
  require_full_moment_authority(p);
  const Eigen::VectorXd sc = singular_values(p.moment_alloc);
  const Eigen::VectorXd sb = singular_values(p.spurious_alloc);
  const double sigma_b = sb.size() ? sb(0) : 0.0;
  return sigma_b / sc(2);
}

struct HoverabilityReport {
  bool hoverable = false;
  std::vector<std::string> violations;
};

inline HoverabilityReport static_hoverability(const Platform& p) {
  HoverabilityReport r;
  const auto n = p.n_f() + p.n_tau();
  if (n < 4) r.violations.push_back("n = " + std::to_string(n) + " < 4 inputs");
  const int rc = numeric_rank(p.moment_alloc, p.rank_tol);
  if (rc != 3) r.violations.push_back("rank(C) = " + std::to_string(rc) + " != 3");
  const int ra = numeric_rank(p.force_alloc, p.rank_tol);
  if (ra < 1) r.violations.push_back("rank(A) = " + std::to_string(ra) + " < 1");
  r.hoverable = r.violations.empty();
  return r;
}

}  // namespace coupled_hover
