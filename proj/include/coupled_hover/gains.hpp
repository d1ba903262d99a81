#pragma once

#include <cmath>

#include "coupled_hover/error.hpp"

namespace coupled_hover {

/// Isotropic feedback gains plus the Lyapunov cross-term weights c₁, c₂.
struct GainSet {
  double k_p = 1.0;
  double k_v = 1.0;
  double k_R = 1.0;
  double k_Omega = 1.0;
  double c1 = 0.0;
  double c2 = 0.0;
};

inline void validate(const GainSet& g) {
  auto positive = [](double x, const char* field) {
    if (!(x > 0.0) || !std::isfinite(x)) throw ValidationError(field, "must be positive");
  };
  auto nonnegative = [](double x, const char* field) {
    if (!(x >= 0.0) || !std::isfinite(x)) throw ValidationError(field, "must be nonnegative");
  };
  positive(g.k_p, "gains.k_p");
  positive(g.k_v, "gains.k_v");
  positive(g.k_R, "gains.k_R");
  positive(g.k_Omega, "gains.k_Omega");
  nonnegative(g.c1, "gains.c1");
  nonnegative(g.c2, "gains.c2");
}

}  // namespace coupled_hover
