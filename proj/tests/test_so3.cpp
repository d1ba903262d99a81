#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"

using namespace coupled_hover;
using fixtures::random_rotation;
using fixtures::random_vector;

TEST(Hat, ZeroVectorGivesZeroMatrix) { EXPECT_TRUE(hat(Vec3::Zero()).isZero()); }

TEST(Hat, BasisCrossProduct) {
  EXPECT_TRUE((hat(Vec3::UnitZ()) * Vec3::UnitX()).isApprox(Vec3::UnitY()));
}

TEST(Hat, MatchesCrossProduct) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 200; ++i) {
    const Vec3 v = random_vector(rng);
    const Vec3 w = random_vector(rng);
    EXPECT_LT((hat(v) * w - v.cross(w)).norm(), 1e-15);
    EXPECT_LT((hat(v) + hat(v).transpose()).norm(), 1e-15);
  }
}

TEST(Vee, InvertsHat) {
  EXPECT_TRUE(vee(hat(Vec3(1, 2, 3))).isApprox(Vec3(1, 2, 3)));
  EXPECT_TRUE(vee(hat(Vec3::UnitX())).isApprox(Vec3::UnitX()));
  EXPECT_TRUE(vee(Mat3::Zero()).isZero());
  EXPECT_TRUE(vee(hat(Vec3(-1, 0.5, 2))).isApprox(Vec3(-1, 0.5, 2)));
}

TEST(Vee, RejectsNonSkew) {
  Mat3 m = hat(Vec3(1, 2, 3));
  m(0, 0) = 0.1;
  try {
    vee(m);
    FAIL() << "expected NotSkew";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotSkew);
  }
}

TEST(Rotation, RejectsReflectionAndShear) {
  Mat3 reflection = Mat3::Identity();
  reflection(2, 2) = -1.0;
  EXPECT_THROW(Rotation::from_matrix(reflection), Error);
  Mat3 shear = Mat3::Identity();
  shear(0, 1) = 1e-6;
  EXPECT_THROW(Rotation::from_matrix(shear), Error);
  EXPECT_NO_THROW(Rotation::from_matrix(Mat3::Identity()));
}

TEST(Rotation, ProjectionRestoresOrthonormality) {
  std::mt19937_64 rng(2);
  const Rotation r = random_rotation(rng);
  const Mat3 drifted = r.matrix() + 1e-6 * Mat3::Random();
  const Rotation fixed = Rotation::from_matrix_projected(drifted);
  EXPECT_LT(orthonormality_residual(fixed.matrix()), 1e-12);
  EXPECT_NEAR(fixed.matrix().determinant(), 1.0, 1e-12);
  EXPECT_LT((fixed.matrix() - r.matrix()).norm(), 1e-5);
}

TEST(ExpSo3, ZeroIsIdentity) { EXPECT_TRUE(exp_so3(Vec3::Zero()).matrix().isIdentity()); }

TEST(ExpSo3, QuarterTurn) {
  const Vec3 r = exp_so3(M_PI / 2 * Vec3::UnitZ()) * Vec3::UnitX();
  EXPECT_LT((r - Vec3::UnitY()).norm(), 1e-15);
}

TEST(ExpSo3, InverseComposition) {
  const Vec3 v(0.3, -0.2, 0.1);
  EXPECT_LT(((exp_so3(v) * exp_so3(-v)).matrix() - Mat3::Identity()).norm(), 1e-15);
}

TEST(ExpSo3, SmallAngleSeriesIsContinuous) {
  const Vec3 axis = Vec3(1, -2, 0.5).normalized();
  const Mat3 below = exp_so3(0.99e-8 * axis).matrix();
  const Mat3 above = exp_so3(1.01e-8 * axis).matrix();
  EXPECT_LT((below - above).norm(), 1e-9);
  EXPECT_LT(orthonormality_residual(below), 1e-15);
}

TEST(ExpSo3, MatchesEigenAngleAxis) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    const Vec3 v = random_vector(rng, 2.0);
    const Mat3 oracle = Eigen::AngleAxisd(v.norm(), v.normalized()).toRotationMatrix();
    EXPECT_LT((exp_so3(v).matrix() - oracle).norm(), 1e-14);
  }
}

TEST(ExpSo3, LogRoundTrip) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> angle(1e-6, M_PI - 0.1);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 v = angle(rng) * random_vector(rng).normalized();
    EXPECT_LT((log_so3(exp_so3(v)) - v).norm(), 1e-9);
  }
}

TEST(Psi, ZeroForEqualRotations) {
  std::mt19937_64 rng(5);
  const Rotation r = random_rotation(rng);
  EXPECT_NEAR(psi(r, r), 0.0, 1e-15);
}

TEST(Psi, SixtyDegreesGivesOneHalf) {
  EXPECT_NEAR(psi(exp_so3(M_PI / 3 * Vec3::UnitX()), Rotation::identity()), 0.5, 1e-15);
}

TEST(Psi, ApproachesTwoNearHalfTurn) {
  const double value = psi(exp_so3(0.999999 * M_PI * Vec3::UnitY()), Rotation::identity());
  EXPECT_GT(value, 2.0 - 1e-10);
  EXPECT_LE(value, 2.0);
}

TEST(Psi, EqualsOneMinusCosineOfEigenAngle) {
  std::mt19937_64 rng(6);
  for (int i = 0; i < 500; ++i) {
    const Rotation r = random_rotation(rng);
    const Rotation rd = random_rotation(rng);
    const double theta = Eigen::AngleAxisd(rd.matrix().transpose() * r.matrix()).angle();
    EXPECT_NEAR(psi(r, rd), 1.0 - std::cos(theta), 1e-12);
  }
}

TEST(AttitudeError, ZeroForEqualRotations) {
  std::mt19937_64 rng(7);
  const Rotation r = random_rotation(rng);
  EXPECT_LT(attitude_error(r, r).norm(), 1e-15);
}

TEST(AttitudeError, QuarterTurnHasUnitNorm) {
  EXPECT_NEAR(attitude_error(exp_so3(M_PI / 2 * Vec3::UnitZ()), Rotation::identity()).norm(), 1.0,
              1e-15);
}

TEST(AttitudeError, NormSquaredMatchesPsiIdentity) {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 1000; ++i) {
    const Rotation r = random_rotation(rng);
    const Rotation rd = random_rotation(rng);
    const double p = psi(r, rd);
    EXPECT_NEAR(attitude_error(r, rd).squaredNorm(), p * (2.0 - p), 1e-10);
  }
}

TEST(AttitudeError, QuadraticPsiBoundsInsideSublevel) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const double psi_max : {0.01, 0.3, 0.9}) {
    const double theta_max = std::acos(1.0 - psi_max);
    for (int i = 0; i < 1000; ++i) {
      const Rotation rd = random_rotation(rng);
      const Vec3 axis = random_vector(rng).normalized();
      const Rotation r = rd * exp_so3(theta_max * u(rng) * axis);
      const double p = psi(r, rd);
      const double er2 = attitude_error(r, rd).squaredNorm();
      EXPECT_LE(0.5 * er2, p + 1e-15);
      EXPECT_LE(p, er2 / (2.0 - psi_max) + 1e-15);
    }
  }
}

TEST(TransportMatrix, IdentityForEqualRotations) {
  std::mt19937_64 rng(10);
  const Rotation r = random_rotation(rng);
  EXPECT_LT((transport_matrix(r, r) - Mat3::Identity()).norm(), 1e-14);
}

TEST(TransportMatrix, EigenvaluesOfGram) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 100; ++i) {
    const Rotation rd = random_rotation(rng);
    const double theta = 3.0 * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const Rotation r = exp_so3(theta * random_vector(rng).normalized()) * rd;
    const Mat3 c = transport_matrix(r, rd);
    Eigen::Vector3d ev = Eigen::SelfAdjointEigenSolver<Mat3>(c.transpose() * c).eigenvalues();
    Eigen::Vector3d expected(std::pow(std::cos(theta), 2), 0.5 * (1 + std::cos(theta)),
                             0.5 * (1 + std::cos(theta)));
    std::sort(expected.data(), expected.data() + 3);
    EXPECT_LT((ev - expected).norm(), 1e-12);
  }
}

TEST(TransportMatrix, OperatorNormAtMostOne) {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 10000; ++i) {
    const Mat3 c = transport_matrix(random_rotation(rng), random_rotation(rng));
    EXPECT_LE(c.jacobiSvd().singularValues()(0), 1.0 + 1e-12);
  }
}

TEST(TransportMatrix, DrivesAttitudeErrorRate) {
  // R(t) = R₀ exp(tΩ), R_d(t) = R_d0 exp(tΩ_d); ė_R = C(Ω − RᵀR_d Ω_d).
  std::mt19937_64 rng(13);
  for (int i = 0; i < 100; ++i) {
    const Rotation r0 = random_rotation(rng);
    const Rotation rd0 = r0 * exp_so3(0.8 * random_vector(rng).normalized());
    const Vec3 omega = random_vector(rng);
    const Vec3 omega_d = random_vector(rng);
    const double dt = 1e-6;
    auto e_at = [&](double t) { return attitude_error(r0 * exp_so3(t * omega), rd0 * exp_so3(t * omega_d)); };
    const Vec3 numeric = (e_at(dt) - e_at(-dt)) / (2 * dt);
    const Vec3 closed =
        transport_matrix(r0, rd0) * (omega - r0.matrix().transpose() * rd0.matrix() * omega_d);
    EXPECT_LT((numeric - closed).norm(), 1e-8);
  }
}
