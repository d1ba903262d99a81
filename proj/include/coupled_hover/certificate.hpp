#pragma once

// Stability certificate for the hover controller: the quadratic sandwich
// matrices M₁₁…M₂₂, the derivative-bound matrices W₁, W₁₂, W₂, W₂₁, the c₂
// feasibility window, the gain conditions, the assembled W, and the
// sublevel-set region-of-attraction estimate. Also a grid gain search.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "coupled_hover/error.hpp"
#include "coupled_hover/gains.hpp"
#include "coupled_hover/parallel.hpp"
#include "coupled_hover/platform.hpp"
#include "coupled_hover/so3.hpp"

namespace coupled_hover {

using Mat4 = Eigen::Matrix4d;

/// Analysis domain: ‖e_p‖ ≤ e_p_max, ‖v‖ ≤ v_max, Ψ ≤ psi, ‖Ω‖ ≤ Omega_max,
/// and the heading guard |r̂₁ᵀw₃| ≤ delta.
struct DomainBounds {
  double psi = 0.05;
  double delta = 0.2;
  double e_p_max = 0.1;
  double v_max = 0.1;
  double Omega_max = 0.5;

  double e_R_max() const { return std::sqrt(psi * (2.0 - psi)); }
  /// f̲ = mg − k_p e_p_max − k_v v_max.
  double f_lower(const Platform& p, const GainSet& g) const {
    return p.weight() - g.k_p * e_p_max - g.k_v * v_max;
  }
};

inline void validate(const DomainBounds& d) {
  auto open_unit = [](double x, const char* field) {
    if (!(x > 0.0 && x < 1.0)) throw ValidationError(field, "must lie in (0, 1)");
  };
  auto positive = [](double x, const char* field) {
    if (!(x > 0.0) || !std::isfinite(x)) throw ValidationError(field, "must be positive");
  };
  open_unit(d.psi, "domain.psi");
  open_unit(d.delta, "domain.delta");
  positive(d.e_p_max, "domain.e_p_max");
  positive(d.v_max, "domain.v_max");
  positive(d.Omega_max, "domain.Omega_max");
}

struct AlphaBeta {
  double alpha = 0.0;
  double beta = 0.0;
};

/// α = (1 + δ/(1−δ²))/(m f̲), β = λ_max(J) Ω_max. Throws InfeasibleDomain if f̲ ≤ 0.
inline AlphaBeta alpha_beta(const Platform& p, const GainSet& g, const DomainBounds& d) {
  const double f = d.f_lower(p, g);
  if (!(f > 0.0)) {
    throw Error(ErrorCode::kInfeasibleDomain,
                "mg - k_p e_p_max - k_v v_max = " + std::to_string(f) + " is not positive");
  }
  const double prefactor = 1.0 + d.delta / (1.0 - d.delta * d.delta);
  return {prefactor / (p.mass * f), lambda_max(p.inertia) * d.Omega_max};
}

struct VBoundMatrices {
  Mat2 M11, M12, M21, M22;
};

/// ½z₁ᵀM₁₁z₁ ≤ V₁ ≤ ½z₁ᵀM₁₂z₁ and ½z₂ᵀM₂₁z₂ ≤ V₂ ≤ ½z₂ᵀM₂₂z₂.
inline VBoundMatrices build_V_bound_matrices(const Platform& p, const GainSet& g,
                                             const DomainBounds& d) {
  const Eigen::Vector3d lam = inertia_eigenvalues(p.inertia);
  VBoundMatrices out;
  out.M11 << g.k_p, -g.c1, -g.c1, p.mass;
  out.M12 << g.k_p, g.c1, g.c1, p.mass;
  out.M21 << g.k_R, -g.c2, -g.c2, lam(0);
  out.M22 << 2.0 * g.k_R / (2.0 - d.psi), g.c2, g.c2, lam(2);
  return out;
}

struct TranslationalBounds {
  Mat2 W1, W12;
};

/// V̇₁ ≤ −z₁ᵀW₁z₁ + z₁ᵀW₁₂z₂.
inline TranslationalBounds build_W1_W12(const Platform& p, const GainSet& g, const DomainBounds& d) {
  const double m = p.mass;
  const double e = d.e_R_max();
  const double gamma = spurious_gain(p);
  const AlphaBeta ab = alpha_beta(p, g, d);
  TranslationalBounds out;
  const double off = -g.c1 * g.k_v / (2.0 * m) * (1.0 + e);
  out.W1 << g.c1 * g.k_p / m * (1.0 - e), off, off, g.k_v * (1.0 - e) - g.c1;
  out.W12 << g.c1 * (p.gravity + g.k_R * gamma / m), g.c1 * gamma / m * (ab.beta + g.k_Omega),
      g.k_p * d.e_p_max + p.weight() + gamma * g.k_R, gamma * (ab.beta + g.k_Omega);
  return out;
}

struct AttitudeBounds {
  Mat2 W2, W21;
  double sigma_ROmega = 0.0;
};

/// V̇₂ ≤ −z₂ᵀW₂z₂ + z₁ᵀW₂₁z₂.
inline AttitudeBounds build_W2_W21(const Platform& p, const GainSet& g, const DomainBounds& d) {
  const double m = p.mass;
  const double e = d.e_R_max();
  const double gamma = spurious_gain(p);
  const AlphaBeta ab = alpha_beta(p, g, d);
  const Eigen::Vector3d lam = inertia_eigenvalues(p.inertia);
  const double alpha = ab.alpha;
  const double mg_kr = p.weight() + g.k_R * gamma;
  const double q = 1.0 + g.k_v * gamma * alpha * (ab.beta + g.k_Omega);

  AttitudeBounds out;
  out.sigma_ROmega = g.c2 * (g.k_Omega / lam(0) + g.k_v * gamma * alpha * mg_kr) +
                     g.k_R * g.k_v * gamma * alpha * (ab.beta + g.k_Omega);
  out.W2 << g.c2 * g.k_R / lam(2) - g.k_R * g.k_v * alpha * mg_kr, -0.5 * out.sigma_ROmega,
      -0.5 * out.sigma_ROmega, g.k_Omega - g.c2 * q;
  const double kk = std::abs(g.k_v * g.k_v / m - g.k_p) + g.k_v * g.k_v / m * e;
  out.W21 << g.k_R * g.k_p * g.k_v * alpha * (1.0 + e), g.c2 * g.k_p * g.k_v * alpha * (1.0 + e),
      g.k_R * alpha * m * kk, g.c2 * alpha * m * kk;
  return out;
}

/// det(W₂) as a function of c₂ is −A c₂² + B c₂ − C.
struct C2Window {
  double A = 0.0;
  double B = 0.0;
  double C = 0.0;
  double discriminant = 0.0;
  double c2_minus = std::numeric_limits<double>::quiet_NaN();
  double c2_plus = std::numeric_limits<double>::quiet_NaN();

  /// Two positive roots exist.
  bool nonempty() const { return discriminant > 0.0 && B > 0.0; }
  double value(double c2) const { return -A * c2 * c2 + B * c2 - C; }
};

inline C2Window c2_window(const Platform& p, const GainSet& g, const DomainBounds& d) {
  const double gamma = spurious_gain(p);
  const AlphaBeta ab = alpha_beta(p, g, d);
  const Eigen::Vector3d lam = inertia_eigenvalues(p.inertia);
  const double alpha = ab.alpha;
  const double mg_kr = p.weight() + g.k_R * gamma;
  const double q = 1.0 + g.k_v * gamma * alpha * (ab.beta + g.k_Omega);
  // σ = S c₂ + T
  const double s = g.k_Omega / lam(0) + g.k_v * gamma * alpha * mg_kr;
  const double t = g.k_R * g.k_v * gamma * alpha * (ab.beta + g.k_Omega);

  C2Window w;
  w.A = 0.25 * s * s + g.k_R / lam(2) * q;
  w.B = g.k_R * g.k_v * alpha * mg_kr * q + g.k_R * g.k_Omega / lam(2) - 0.5 * s * t;
  w.C = g.k_R * g.k_v * alpha *
        (0.25 * g.k_R * g.k_v * gamma * gamma * alpha * std::pow(ab.beta + g.k_Omega, 2) +
         g.k_Omega * mg_kr);
  w.discriminant = w.B * w.B - 4.0 * w.A * w.C;
  if (w.discriminant >= 0.0) {
    const double root = std::sqrt(w.discriminant);
    const double qq = 0.5 * (w.B + std::copysign(root, w.B));
    double r1 = qq / w.A;
    double r2 = qq != 0.0 ? w.C / qq : r1;
    if (r1 > r2) std::swap(r1, r2);
    w.c2_minus = r1;
    w.c2_plus = r2;
  }
  return w;
}

enum class Relation { kLess, kGreater };

/// One strict inequality lhs < rhs (or lhs > rhs). Boundary equality and NaN fail.
struct Condition {
  std::string name;
  std::string expression;
  double lhs = 0.0;
  double rhs = 0.0;
  Relation relation = Relation::kLess;
  double margin = 0.0;
  bool pass = false;

  /// margin / max(|lhs|, |rhs|), or −1 when undefined.
  double normalized_margin() const {
    const double scale = std::max(std::abs(lhs), std::abs(rhs));
    if (!std::isfinite(margin)) return -1.0;
    return scale > 0.0 ? margin / scale : (margin > 0.0 ? 1.0 : -1.0);
  }
};

inline constexpr double kStrictMargin = 1e-12;

inline Condition make_condition(std::string name, std::string expression, double lhs,
                                Relation rel, double rhs) {
  Condition c{std::move(name), std::move(expression), lhs, rhs, rel, 0.0, false};
  c.margin = rel == Relation::kLess ? rhs - lhs : lhs - rhs;
  const double scale = std::max(std::abs(lhs), std::abs(rhs));
  c.pass = std::isfinite(c.margin) && c.margin > kStrictMargin * scale;
  return c;
}

inline const char* to_string(Relation r) { return r == Relation::kLess ? "<" : ">"; }

/// The same W₂ quantities as read off the unabbreviated V̇₂ bound. σ's c₂
/// coefficient there carries k_vα(mg + k_Rγ) where the compact form carries
/// k_vγα(mg + k_Rγ); both are reported so the difference is visible.
struct CrossAudit {
  double sigma_printed = 0.0;
  double sigma_expanded = 0.0;
  double W2_11_printed = 0.0;
  double W2_11_expanded = 0.0;
  double W2_22_printed = 0.0;
  double W2_22_expanded = 0.0;

  double max_discrepancy() const {
    return std::max({std::abs(sigma_printed - sigma_expanded),
                     std::abs(W2_11_printed - W2_11_expanded),
                     std::abs(W2_22_printed - W2_22_expanded)});
  }
};

struct CertificateReport {
  GainSet gains;
  DomainBounds domain;
  Mat2 M11, M12, M21, M22, W1, W12, W2, W21;
  Mat4 W;
  double gamma = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double e_R_max = 0.0;
  double f_lower = 0.0;
  double sigma_ROmega = 0.0;
  C2Window window;
  std::vector<Condition> conditions;
  double lambda_min_W = 0.0;
  double lambda_max_M2 = 0.0;
  /// λ_min(W)/λ_max(M₂): lower bound on the exponential decay rate of ‖z‖².
  double decay_rate = 0.0;
  bool feasible = false;
  double roa_level = 0.0;  // zero unless feasible
  CrossAudit cross_audit;

  std::vector<const Condition*> violated() const {
    std::vector<const Condition*> out;
    for (const auto& c : conditions) {
      if (!c.pass) out.push_back(&c);
    }
    return out;
  }
  const Condition* find(const std::string& name) const {
    for (const auto& c : conditions) {
      if (c.name == name) return &c;
    }
    return nullptr;
  }
  /// Smallest normalized margin over all conditions.
  double worst_normalized_margin() const {
    double w = std::numeric_limits<double>::infinity();
    for (const auto& c : conditions) w = std::min(w, c.normalized_margin());
    return w;
  }
};

inline double lambda_min_sym(const Eigen::MatrixXd& m) {
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m, Eigen::EigenvaluesOnly).eigenvalues()(0);
}
inline double lambda_max_sym(const Eigen::MatrixXd& m) {
  const auto ev =
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m, Eigen::EigenvaluesOnly).eigenvalues();
  return ev(ev.size() - 1);
}

/// {V ≤ c} ⊂ 𝒟 without requiring the decrease conditions:
/// c = min{½λ_min(M₁₁)min(e_p_max, v_max)², ½λ_min(M₂₁)min(e_R_max, Ω_max)², ψ(k_R − c₂²/λ_min(J))}.
/// The last term keeps Ψ ≤ ψ, since V₂ ≥ Ψ(k_R − c₂²/λ_min(J)). Returns 0
/// when M₁₁ or M₂₁ is not positive definite.
inline double sublevel_bound(const Platform& p, const GainSet& g, const DomainBounds& d) {
  const VBoundMatrices m = build_V_bound_matrices(p, g, d);
  const double l11 = lambda_min_sym(m.M11);
  const double l21 = lambda_min_sym(m.M21);
  const double jmin = lambda_min(p.inertia);
  const double psi_room = g.k_R - g.c2 * g.c2 / jmin;
  if (!(l11 > 0.0) || !(l21 > 0.0) || !(psi_room > 0.0)) return 0.0;
  const double r1 = std::min(d.e_p_max, d.v_max);
  const double r2 = std::min(d.e_R_max(), d.Omega_max);
  return std::min({0.5 * l11 * r1 * r1, 0.5 * l21 * r2 * r2, d.psi * psi_room});
}

/// Evaluates every gain condition in a fixed order with no early exit.
inline CertificateReport certify(const Platform& p, const GainSet& g, const DomainBounds& d) {
  validate(p);
  validate(g);
  validate(d);
  require_d1_minimal(p);

  CertificateReport r;
  r.gains = g;
  r.domain = d;
  r.gamma = spurious_gain(p);
  const AlphaBeta ab = alpha_beta(p, g, d);
  r.alpha = ab.alpha;
  r.beta = ab.beta;
  r.e_R_max = d.e_R_max();
  r.f_lower = d.f_lower(p, g);

  const VBoundMatrices vb = build_V_bound_matrices(p, g, d);
  r.M11 = vb.M11;
  r.M12 = vb.M12;
  r.M21 = vb.M21;
  r.M22 = vb.M22;
  const TranslationalBounds tb = build_W1_W12(p, g, d);
  r.W1 = tb.W1;
  r.W12 = tb.W12;
  const AttitudeBounds rb = build_W2_W21(p, g, d);
  r.W2 = rb.W2;
  r.W21 = rb.W21;
  r.sigma_ROmega = rb.sigma_ROmega;
  r.window = c2_window(p, g, d);

  const Mat2 cross = r.W12 + r.W21;
  r.W.topLeftCorner<2, 2>() = r.W1;
  r.W.topRightCorner<2, 2>() = -0.5 * cross;
  r.W.bottomLeftCorner<2, 2>() = -0.5 * cross.transpose();
  r.W.bottomRightCorner<2, 2>() = r.W2;

  const double m = p.mass;
  const double e = r.e_R_max;
  const Eigen::Vector3d lam = inertia_eigenvalues(p.inertia);
  const double q = 1.0 + g.k_v * r.gamma * r.alpha * (r.beta + g.k_Omega);
  const double mg_kr = p.weight() + g.k_R * r.gamma;
  auto& cs = r.conditions;

  cs.push_back(make_condition("c1_sqrt_m_kp", "c1 < sqrt(m k_p)", g.c1, Relation::kLess,
                              std::sqrt(m * g.k_p)));
  cs.push_back(make_condition("c1_kv", "c1 < k_v (1 - e_R_max)", g.c1, Relation::kLess,
                              g.k_v * (1.0 - e)));
  cs.push_back(make_condition(
      "c1_W1_det", "c1 < 4 k_p k_v m (1-e)^2 / (k_v^2 (1+e)^2 + 4 k_p m (1-e))", g.c1,
      Relation::kLess,
      4.0 * g.k_p * g.k_v * m * (1.0 - e) * (1.0 - e) /
          (g.k_v * g.k_v * (1.0 + e) * (1.0 + e) + 4.0 * g.k_p * m * (1.0 - e))));

  cs.push_back(make_condition("c2_sqrt_Jmin_kR", "c2 < sqrt(lambda_min(J) k_R)", g.c2,
                              Relation::kLess, std::sqrt(lam(0) * g.k_R)));
  cs.push_back(make_condition("c2_W2_diag", "c2 < k_Omega / (1 + k_v gamma alpha (beta + k_Omega))",
                              g.c2, Relation::kLess, g.k_Omega / q));
  cs.push_back(make_condition("c2_window_discriminant", "B^2 > 4 A C", r.window.B * r.window.B,
                              Relation::kGreater, 4.0 * r.window.A * r.window.C));
  cs.push_back(make_condition("c2_window_positive", "B > 0", r.window.B, Relation::kGreater, 0.0));
  cs.push_back(make_condition("c2_plus", "c2 < c2_plus", g.c2, Relation::kLess, r.window.c2_plus));

  cs.push_back(make_condition("c2_W2_lower", "c2 > k_v lambda_max(J) alpha (mg + k_R gamma)", g.c2,
                              Relation::kGreater, g.k_v * lam(2) * r.alpha * mg_kr));
  cs.push_back(
      make_condition("c2_minus", "c2 > c2_minus", g.c2, Relation::kGreater, r.window.c2_minus));

  cs.push_back(make_condition("c2_M22", "c2 < sqrt(lambda_max(J) k_R 2/(2 - psi))", g.c2,
                              Relation::kLess, std::sqrt(lam(2) * g.k_R * 2.0 / (2.0 - d.psi))));

  cs.push_back(make_condition("W2_det", "det(W2) > 0", r.W2.determinant(), Relation::kGreater, 0.0));
  const double cross_norm = Eigen::JacobiSVD<Mat2>(cross).singularValues()(0);
  const double l1 = lambda_min_sym(r.W1);
  const double l2 = lambda_min_sym(r.W2);
  cs.push_back(make_condition("W_cross",
                              "||W12 + W21||^2 < 4 lambda_min(W1) lambda_min(W2)",
                              cross_norm * cross_norm, Relation::kLess, 4.0 * l1 * l2));

  r.lambda_min_W = lambda_min_sym(r.W);
  cs.push_back(make_condition("lambda_min_W", "lambda_min(W) > 0", r.lambda_min_W,
                              Relation::kGreater, 0.0));

  r.lambda_max_M2 = std::max(lambda_max_sym(r.M12), lambda_max_sym(r.M22));
  r.decay_rate = r.lambda_min_W / r.lambda_max_M2;
  r.feasible = std::all_of(cs.begin(), cs.end(), [](const Condition& c) { return c.pass; });
  if (r.feasible) r.roa_level = sublevel_bound(p, g, d);

  r.cross_audit.sigma_printed = r.sigma_ROmega;
  r.cross_audit.sigma_expanded =
      g.c2 * (g.k_Omega / lam(0) + g.k_v * r.alpha * mg_kr) +
      g.k_R * g.k_v * r.gamma * r.alpha * (r.beta + g.k_Omega);
  r.cross_audit.W2_11_printed = r.W2(0, 0);
  r.cross_audit.W2_11_expanded = g.c2 * g.k_R / lam(2) - r.alpha * g.k_R * g.k_v * m *
                                                             (p.gravity + g.k_R * r.gamma / m);
  r.cross_audit.W2_22_printed = r.W2(1, 1);
  r.cross_audit.W2_22_expanded =
      g.k_Omega - g.c2 * (1.0 + r.alpha * g.k_v * r.gamma * (r.beta + g.k_Omega));
  return r;
}

/// c for 𝒟₀ = {V ≤ c}. Throws NotCertified unless the gains certify.
inline double estimate_roa_level(const Platform& p, const GainSet& g, const DomainBounds& d) {
  const CertificateReport r = certify(p, g, d);
  if (!r.feasible) {
    std::string names;
    for (const Condition* c : r.violated()) names += (names.empty() ? "" : ", ") + c->name;
    throw Error(ErrorCode::kNotCertified, "violated: " + names);
  }
  return r.roa_level;
}

struct GridAxis {
  double lo = 0.1;
  double hi = 10.0;
  int count = 5;

  /// Logarithmically spaced points; a single point sits at lo.
  std::vector<double> points() const {
    std::vector<double> out;
    if (count <= 1) return {lo};
    for (int i = 0; i < count; ++i) {
      const double s = static_cast<double>(i) / (count - 1);
      out.push_back(lo * std::pow(hi / lo, s));
    }
    return out;
  }
};

struct SearchRanges {
  GridAxis k_p{0.5, 20.0, 7};
  GridAxis k_v{0.5, 20.0, 7};
  GridAxis k_R{0.01, 10.0, 7};
  GridAxis k_Omega{0.01, 10.0, 7};
};

inline void validate(const SearchRanges& s) {
  auto axis = [](const GridAxis& a, const std::string& field) {
    if (!(a.lo > 0.0) || !(a.hi >= a.lo) || !std::isfinite(a.hi)) {
      throw ValidationError(field, "needs 0 < lo <= hi");
    }
    if (a.count < 1) throw ValidationError(field + ".count", "must be at least 1");
  };
  axis(s.k_p, "search.k_p");
  axis(s.k_v, "search.k_v");
  axis(s.k_R, "search.k_R");
  axis(s.k_Omega, "search.k_Omega");
}

struct SearchResult {
  bool feasible = false;
  GainSet gains;              // best feasible point, else the nearest miss
  CertificateReport report;   // certificate of `gains`
  std::size_t evaluated = 0;
  std::size_t feasible_count = 0;
  double score = 0.0;  // decay-rate proxy when feasible, worst normalized margin otherwise
};

/// Completes (k_p, k_v, k_R, k_Ω) with c₁ = ½·(tightest c₁ bound) and c₂ at the
/// midpoint of its admissible interval. When that interval is empty c₂ is half
/// its upper bound, which keeps V positive definite.
inline GainSet complete_gains(const Platform& p, const DomainBounds& d, GainSet g) {
  g.c1 = 0.0;
  g.c2 = 0.0;
  const double m = p.mass;
  const double e = d.e_R_max();
  const double c1_max = std::min(
      {std::sqrt(m * g.k_p), g.k_v * (1.0 - e),
       4.0 * g.k_p * g.k_v * m * (1.0 - e) * (1.0 - e) /
           (g.k_v * g.k_v * (1.0 + e) * (1.0 + e) + 4.0 * g.k_p * m * (1.0 - e))});
  g.c1 = 0.5 * std::max(c1_max, 0.0);

  const double gamma = spurious_gain(p);
  const AlphaBeta ab = alpha_beta(p, g, d);
  const Eigen::Vector3d lam = inertia_eigenvalues(p.inertia);
  const double q = 1.0 + g.k_v * gamma * ab.alpha * (ab.beta + g.k_Omega);
  const C2Window w = c2_window(p, g, d);
  double hi = std::min({std::sqrt(lam(0) * g.k_R), g.k_Omega / q,
                        std::sqrt(lam(2) * g.k_R * 2.0 / (2.0 - d.psi))});
  double lo = g.k_v * lam(2) * ab.alpha * (p.weight() + g.k_R * gamma);
  if (w.nonempty()) {
    hi = std::min(hi, w.c2_plus);
    lo = std::max(lo, w.c2_minus);
  }
  g.c2 = lo < hi ? 0.5 * (lo + hi) : 0.5 * hi;
  return g;
}

/// Logarithmic grid search. Feasible points are ranked by the decay-rate
/// proxy λ_min(W)/λ_max(M₂); if none exists the point with the largest worst
/// normalized margin is returned. Ties resolve to the lowest grid index.
inline SearchResult gain_search(const Platform& p, const DomainBounds& d,
                                const SearchRanges& ranges) {
  validate(p);
  validate(d);
  validate(ranges);
  require_d1_minimal(p);
  const auto kp = ranges.k_p.points();
  const auto kv = ranges.k_v.points();
  const auto kr = ranges.k_R.points();
  const auto ko = ranges.k_Omega.points();
  const std::size_t n = kp.size() * kv.size() * kr.size() * ko.size();

  struct Slot {
    bool valid = false;
    bool feasible = false;
    double score = -std::numeric_limits<double>::infinity();
    GainSet gains;
  };
  std::vector<Slot> slots(n);
  parallel_for(n, [&](std::size_t idx) {
    std::size_t rem = idx;
    GainSet g;
    g.k_Omega = ko[rem % ko.size()];
    rem /= ko.size();
    g.k_R = kr[rem % kr.size()];
    rem /= kr.size();
    g.k_v = kv[rem % kv.size()];
    rem /= kv.size();
    g.k_p = kp[rem];
    if (!(d.f_lower(p, g) > 0.0)) return;
    g = complete_gains(p, d, g);
    const CertificateReport r = certify(p, g, d);
    Slot& s = slots[idx];
    s.valid = true;
    s.feasible = r.feasible;
    s.score = r.feasible ? r.decay_rate : r.worst_normalized_margin();
    s.gains = g;
  });

  SearchResult out;
  out.evaluated = n;
  std::size_t best = n;
  for (std::size_t i = 0; i < n; ++i) {
    const Slot& s = slots[i];
    if (!s.valid) continue;
    if (s.feasible) ++out.feasible_count;
    if (best == n) {
      best = i;
      continue;
    }
    const Slot& b = slots[best];
    if ((s.feasible && !b.feasible) || (s.feasible == b.feasible && s.score > b.score)) best = i;
  }
  if (best == n) {
    throw Error(ErrorCode::kInfeasibleDomain, "no grid point keeps mg - k_p e_p_max - k_v v_max > 0");
  }
  out.feasible = slots[best].feasible;
  out.gains = slots[best].gains;
  out.score = slots[best].score;
  out.report = certify(p, out.gains, d);
  return out;
}

}  // namespace coupled_hover
