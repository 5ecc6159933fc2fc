#include "slung/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace slung {

Mat3 hat(const Vec3& v) {
  Mat3 m;
  // clang-format off
  m <<     0, -v.z(),  v.y(),
       v.z(),      0, -v.x(),
      -v.y(),  v.x(),      0;
  // clang-format on
  return m;
}

Vec3 vee(const Mat3& m) {
  const double sym = (m + m.transpose()).norm();
  if (sym > kSkewRelTol * std::max(m.norm(), 1e-300)) {
    throw SymmetricInput("vee: input is not skew-symmetric (||m + m^T|| = " +
                         std::to_string(sym) + ")");
  }
  const Mat3 a = 0.5 * (m - m.transpose());
  return {a(2, 1), a(0, 2), a(1, 0)};
}

Rotation::Rotation(const Mat3& m) : m_(m) {
  const double ortho = (m.transpose() * m - Mat3::Identity()).norm();
  const double det = m.determinant();
  if (ortho > kManifoldTol || std::abs(det - 1.0) > kManifoldTol) {
    throw InvalidRotation("rotation invariant violated: ||R^T R - I|| = " +
                          std::to_string(ortho) +
                          ", det = " + std::to_string(det));
  }
}

Rotation Rotation::transposed() const {
  return Rotation(m_.transpose(), Unchecked{});
}

Rotation Rotation::operator*(const Rotation& rhs) const {
  // Product of two validated rotations; drift is at rounding level.
  return Rotation(m_ * rhs.m_, Unchecked{});
}

Rotation exp_so3(const Vec3& v) {
  const double theta = v.norm();
  const double t2 = theta * theta;
  double a, b;  // sin(t)/t and (1 - cos t)/t^2
  if (theta < 1e-5) {
    a = 1.0 - t2 / 6.0;
    b = 0.5 - t2 / 24.0;
  } else {
    a = std::sin(theta) / theta;
    b = (1.0 - std::cos(theta)) / t2;
  }
  const Mat3 vh = hat(v);
  return Rotation(Mat3::Identity() + a * vh + b * vh * vh);
}

Rotation project_so3(const Mat3& m) {
  if (m.determinant() <= 1e-12) {
    throw Degenerate("project_so3: det(m) = " +
                     std::to_string(m.determinant()));
  }
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 uv = svd.matrixU() * svd.matrixV().transpose();
  if (uv.determinant() < 0) {
    // det(m) > 0 makes this unreachable, but keep the polar factor proper.
    Mat3 flip = Vec3(1, 1, -1).asDiagonal();
    uv = svd.matrixU() * flip * svd.matrixV().transpose();
  }
  return Rotation(uv);
}

Bearing::Bearing(const Vec3& q_in, const Vec3& omega_in)
    : q(q_in), omega(omega_in) {
  if (std::abs(q.norm() - 1.0) > kManifoldTol ||
      std::abs(q.dot(omega)) > kManifoldTol) {
    throw ValidationError("bearing invariant violated: ||q|| = " +
                          std::to_string(q.norm()) +
                          ", q.omega = " + std::to_string(q.dot(omega)));
  }
}

Bearing sphere_project(const Vec3& q, const Vec3& omega) {
  const double n = q.norm();
  if (n <= 1e-9) {
    throw DegenerateBearing("sphere_project: ||q|| = " + std::to_string(n));
  }
  const Vec3 qu = q / n;
  return Bearing(qu, omega - qu.dot(omega) * qu);
}

ErrorGainMatrix::ErrorGainMatrix(double g1, double g2, double g3)
    : g1_(g1), g2_(g2), g3_(g3) {
  if (!(g1 > 0 && g2 > 0 && g3 > 0)) {
    throw ValidationError("attitude error gains must be positive");
  }
  if (g1 == g2 || g2 == g3 || g3 == g1) {
    throw ValidationError("attitude error gains must be pairwise distinct");
  }
}

double attitude_error_value(const Rotation& R, const Rotation& Rd,
                            const ErrorGainMatrix& G) {
  const Mat3 Q = Rd.matrix().transpose() * R.matrix();
  return 0.5 * (G.matrix() * (Mat3::Identity() - Q)).trace();
}

Vec3 attitude_error_vector(const Rotation& R, const Rotation& Rd,
                           const ErrorGainMatrix& G) {
  const Mat3 Q = Rd.matrix().transpose() * R.matrix();
  const Mat3 m = G.matrix() * Q - Q.transpose() * G.matrix();  // exactly skew
  return 0.5 * Vec3(m(2, 1), m(0, 2), m(1, 0));
}

Vec3 angular_velocity_error(const Vec3& Omega, const Rotation& R,
                            const Rotation& Rd, const Vec3& Omega_d) {
  return Omega - R.matrix().transpose() * Rd.matrix() * Omega_d;
}

double psi_identity(const Rotation& R, const Rotation& Rd) {
  return 0.5 *
         (Mat3::Identity() - Rd.matrix().transpose() * R.matrix()).trace();
}

Vec3 attitude_error_identity(const Rotation& R, const Rotation& Rd) {
  const Mat3 Q = Rd.matrix().transpose() * R.matrix();
  const Mat3 m = Q - Q.transpose();
  return 0.5 * Vec3(m(2, 1), m(0, 2), m(1, 0));
}

PsiBounds psi_bounds(const ErrorGainMatrix& G, double psi_cap) {
  const double g1 = G.g1(), g2 = G.g2(), g3 = G.g3();
  PsiBounds b;
  b.h1 = std::min({g1 + g2, g2 + g3, g3 + g1});
  b.h2 = std::max({(g1 - g2) * (g1 - g2), (g2 - g3) * (g2 - g3),
                   (g3 - g1) * (g3 - g1)});
  b.h3 = std::max({(g1 + g2) * (g1 + g2), (g2 + g3) * (g2 + g3),
                   (g3 + g1) * (g3 + g1)});
  b.h4 = std::max({g1 + g2, g2 + g3, g3 + g1});
  b.h5 = std::min({(g1 + g2) * (g1 + g2), (g2 + g3) * (g2 + g3),
                   (g3 + g1) * (g3 + g1)});
  if (!(psi_cap > 0) || psi_cap >= b.h1) {
    throw CapTooLarge("psi_bounds: need 0 < psi_cap < " +
                      std::to_string(b.h1) + ", got " +
                      std::to_string(psi_cap));
  }
  b.b1 = b.h1 / (b.h2 + b.h3);
  b.b2 = b.h1 * b.h4 / (b.h5 * (b.h1 - psi_cap));
  return b;
}

}  // namespace slung
