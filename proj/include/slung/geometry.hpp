#pragma once

#include <Eigen/Dense>

#include "slung/errors.hpp"

namespace slung {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Tolerances shared by the manifold types. The rotation/bearing tolerance is
// an order below the per-step integration drift at dt = 1e-3, so a state that
// passes reprojection always validates.
inline constexpr double kManifoldTol = 1e-9;
inline constexpr double kSkewRelTol = 1e-6;

/// Skew-symmetric matrix of v, i.e. hat(v) * w == v.cross(w).
Mat3 hat(const Vec3& v);

/// Inverse of hat. The input is antisymmetrized first; throws SymmetricInput
/// when the symmetric part dominates (relative tolerance kSkewRelTol).
Vec3 vee(const Mat3& m);

/// Proper rotation matrix. Validates orthonormality and det on construction.
class Rotation {
 public:
  Rotation() : m_(Mat3::Identity()) {}
  explicit Rotation(const Mat3& m);

  static Rotation identity() { return Rotation(); }

  const Mat3& matrix() const { return m_; }
  Rotation transposed() const;

  Rotation operator*(const Rotation& rhs) const;
  Vec3 operator*(const Vec3& v) const { return m_ * v; }

 private:
  struct Unchecked {};
  Rotation(const Mat3& m, Unchecked) : m_(m) {}

  Mat3 m_;
};

/// Exponential map of so(3); rotation by angle ||v|| about v. Uses the series
/// form of sin(t)/t and (1-cos t)/t^2 below t = 1e-5.
Rotation exp_so3(const Vec3& v);

/// Nearest rotation in the polar-decomposition sense (via SVD). Idempotent on
/// rotations. Throws Degenerate when det(m) <= 1e-12.
Rotation project_so3(const Mat3& m);

/// One cable link: unit direction q and angular velocity omega with
/// q . omega = 0 (omega expressed in the inertial frame).
struct Bearing {
  Bearing() : q(0, 0, 1), omega(Vec3::Zero()) {}
  Bearing(const Vec3& q_in, const Vec3& omega_in);

  Vec3 qdot() const { return omega.cross(q); }

  Vec3 q;
  Vec3 omega;
};

/// Renormalizes q and removes the q-component of omega. Idempotent. Throws
/// DegenerateBearing when ||q|| <= 1e-9.
Bearing sphere_project(const Vec3& q, const Vec3& omega);

/// Diagonal weight diag(g1, g2, g3) of the attitude error function; the
/// critical-point analysis requires distinct positive entries.
class ErrorGainMatrix {
 public:
  ErrorGainMatrix(double g1, double g2, double g3);

  // Close enough to identity that the weighting is effectively uniform while
  // keeping the entries distinct.
  static ErrorGainMatrix near_identity() { return {0.99, 1.0, 1.01}; }

  double g1() const { return g1_; }
  double g2() const { return g2_; }
  double g3() const { return g3_; }
  Mat3 matrix() const { return Vec3(g1_, g2_, g3_).asDiagonal(); }

 private:
  double g1_, g2_, g3_;
};

/// Configuration error 1/2 tr{G (I - Rd^T R)}; zero iff R == Rd.
double attitude_error_value(const Rotation& R, const Rotation& Rd,
                            const ErrorGainMatrix& G);

/// Attitude error vector 1/2 (G Rd^T R - R^T Rd G)^vee.
Vec3 attitude_error_vector(const Rotation& R, const Rotation& Rd,
                           const ErrorGainMatrix& G);

/// Angular velocity error Omega - R^T Rd Omega_d (body frame of R).
Vec3 angular_velocity_error(const Vec3& Omega, const Rotation& R,
                            const Rotation& Rd, const Vec3& Omega_d);

// Identity-weight versions used by the tracking controllers and metrics.
double psi_identity(const Rotation& R, const Rotation& Rd);
Vec3 attitude_error_identity(const Rotation& R, const Rotation& Rd);

/// Quadratic sandwich constants for the attitude error function:
/// b1 ||e_R||^2 <= Psi always, and Psi <= b2 ||e_R||^2 whenever
/// Psi < psi_cap. Throws CapTooLarge when psi_cap >= h1.
struct PsiBounds {
  double b1, b2;
  double h1, h2, h3, h4, h5;
};
PsiBounds psi_bounds(const ErrorGainMatrix& G, double psi_cap);

}  // namespace slung
