#include <cmath>
#include <random>

#include "doctest.h"
#include "slung/batch.hpp"
#include "slung/geometry.hpp"

using namespace slung;

namespace {

std::mt19937_64 rng(42);

Vec3 random_vec(double scale = 1.0) {
  std::normal_distribution<double> n01;
  return scale * Vec3(n01(rng), n01(rng), n01(rng));
}

Rotation random_rotation() {
  std::uniform_real_distribution<double> uang(0.0, M_PI);
  Vec3 axis = random_vec();
  while (axis.norm() < 1e-6) axis = random_vec();
  return exp_so3(uang(rng) * axis.normalized());
}

Rotation rz(double th) { return exp_so3(th * Vec3(0, 0, 1)); }

}  // namespace

TEST_CASE("hat produces the cross-product matrix") {
  CHECK(hat(Vec3::Zero()).norm() == 0.0);

  const Vec3 v(1.5, -2.0, 0.25);
  Mat3 expected;
  expected << 0, -0.25, -2.0, 0.25, 0, -1.5, 2.0, 1.5, 0;
  CHECK((hat(v) - expected).norm() == 0.0);

  CHECK((hat(Vec3(1, 2, 3)) * Vec3(4, 5, 6) - Vec3(-3, 6, -3)).norm() ==
        doctest::Approx(0.0));

  for (int i = 0; i < 10000; ++i) {
    const Vec3 a = random_vec(), b = random_vec();
    CHECK((hat(a) * b - a.cross(b)).norm() <= 1e-12);
    CHECK((vee(hat(a)) - a).norm() <= 1e-12);
  }
}

TEST_CASE("vee inverts hat and rejects symmetric input") {
  CHECK(vee(Mat3::Zero()).norm() == 0.0);

  Mat3 A = Mat3::Zero();
  A(0, 1) = 1.0;
  CHECK((vee(A - A.transpose()) - Vec3(0, 0, -1)).norm() == 0.0);

  Mat3 sym = Mat3::Identity();
  CHECK_THROWS_AS(vee(sym), SymmetricInput);
}

TEST_CASE("exp_so3 matches Rodrigues evaluations") {
  CHECK((exp_so3(Vec3::Zero()).matrix() - Mat3::Identity()).norm() == 0.0);

  Mat3 quarter;
  quarter << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  CHECK((exp_so3(Vec3(0, 0, M_PI / 2)).matrix() - quarter).norm() <= 1e-15);

  for (int i = 0; i < 50; ++i) {
    const Vec3 s = random_vec().normalized();
    CHECK(exp_so3(M_PI * s).matrix().trace() == doctest::Approx(-1.0));
  }

  // Rotation invariants hold out to large angles, including the small-angle
  // series branch.
  std::uniform_real_distribution<double> u(0, 4 * M_PI);
  for (int i = 0; i < 2000; ++i) {
    const Vec3 v = u(rng) * random_vec().normalized();
    const Mat3 R = exp_so3(v).matrix();
    CHECK((R.transpose() * R - Mat3::Identity()).norm() <= 1e-9);
    CHECK(std::abs(R.determinant() - 1.0) <= 1e-9);
  }
  CHECK((exp_so3(Vec3(1e-9, 0, 0)).matrix() - Mat3::Identity()).norm() <=
        2e-9);
}

TEST_CASE("project_so3 is the polar factor") {
  const Rotation R = random_rotation();
  CHECK((project_so3(R.matrix()).matrix() - R.matrix()).norm() <= 1e-14);

  Mat3 wobble = Mat3::Identity();
  wobble(0, 1) += 1e-6;
  wobble(1, 0) += 1e-6;
  CHECK((project_so3(wobble).matrix() - Mat3::Identity()).norm() <= 1e-9);

  CHECK((project_so3(2.0 * Mat3::Identity()).matrix() - Mat3::Identity())
            .norm() <= 1e-14);

  Mat3 degenerate = Mat3::Zero();
  degenerate(0, 0) = 1.0;
  CHECK_THROWS_AS(project_so3(degenerate), Degenerate);
}

TEST_CASE("attitude error function and vector") {
  const ErrorGainMatrix G(1, 2, 3);
  const Rotation Rd = random_rotation();

  CHECK(attitude_error_value(Rd, Rd, G) == doctest::Approx(0.0));
  CHECK(attitude_error_vector(Rd, Rd, G).norm() <= 1e-15);

  // Quarter turn about the third axis: Psi = (g1 + g2)/2 * (1 - cos).
  const Rotation R = Rd * rz(M_PI / 2);
  CHECK(attitude_error_value(R, Rd, G) == doctest::Approx(1.5));

  // e_R for a yaw offset stays on the third axis.
  for (double th : {0.3, -0.9, 2.2}) {
    const Vec3 eR = attitude_error_vector(Rd * rz(th), Rd, G);
    CHECK(std::abs(eR.x()) <= 1e-12);
    CHECK(std::abs(eR.y()) <= 1e-12);
    CHECK(eR.z() == doctest::Approx(0.5 * (1 + 2) * std::sin(th)));
  }

  // The three antipodal critical points (pi flips about the weight axes)
  // carry zero error vector; a generic axis flip does not.
  for (const Vec3& axis : {Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)}) {
    const Rotation Rc = Rd * exp_so3(M_PI * axis);
    CHECK(attitude_error_vector(Rc, Rd, G).norm() <= 1e-9);
  }
  const Rotation Roff = Rd * exp_so3(M_PI * Vec3(1, 1, 0).normalized());
  CHECK(attitude_error_vector(Roff, Rd, G).norm() > 0.1);

  // Directional-derivative identity, checked by finite differences.
  for (int i = 0; i < 200; ++i) {
    const Rotation Ra = random_rotation(), Rb = random_rotation();
    const Vec3 eta = random_vec().normalized();
    const double eps = 1e-6;
    const double dpsi =
        (attitude_error_value(Ra * exp_so3(eps * eta), Rb, G) -
         attitude_error_value(Ra * exp_so3(-eps * eta), Rb, G)) /
        (2 * eps);
    const double expected = attitude_error_vector(Ra, Rb, G).dot(eta);
    CHECK(dpsi == doctest::Approx(expected).epsilon(1e-4));
  }
}

TEST_CASE("angular velocity error") {
  const Rotation Rd = random_rotation();
  const Vec3 Om = random_vec();
  CHECK(angular_velocity_error(Om, Rd, Rd, Om).norm() <= 1e-14);
  CHECK((angular_velocity_error(Om, random_rotation(), Rd, Vec3::Zero()) - Om)
            .norm() == 0.0);

  // R = Rd * Rz(pi), Omega = 0, Omega_d = e1.
  const Vec3 e = angular_velocity_error(Vec3::Zero(), Rd * rz(M_PI), Rd,
                                        Vec3(1, 0, 0));
  CHECK((e - Vec3(1, 0, 0)).norm() <= 1e-12);
}

TEST_CASE("psi bounds constants") {
  const ErrorGainMatrix G(1, 2, 3);
  const PsiBounds b = psi_bounds(G, 1.0);
  CHECK(b.h1 == 3.0);
  CHECK(b.h2 == 4.0);
  CHECK(b.h3 == 25.0);
  CHECK(b.h4 == 5.0);
  CHECK(b.h5 == 9.0);
  CHECK(b.b1 == doctest::Approx(3.0 / 29.0));
  CHECK(b.b2 == doctest::Approx(5.0 / 6.0));

  CHECK_THROWS_AS(psi_bounds(G, 3.0), CapTooLarge);
  CHECK_THROWS_AS(psi_bounds(G, -0.1), CapTooLarge);
}

TEST_CASE("error-function sandwich holds on random attitude pairs") {
  const auto sweep =
      manifold_sweep(10000, ErrorGainMatrix(1, 2, 3), 1.0, 99u, false);
  CHECK(sweep.samples == 10000);
  CHECK(sweep.lower_bound_violations == 0);
  CHECK(sweep.upper_bound_violations == 0);
  CHECK(sweep.upper_bound_checked > 0);
  CHECK(sweep.max_psi_negative >= -1e-12);

  // The parallel kernel is a bit-identical replica of the serial one.
  const auto par =
      manifold_sweep(10000, ErrorGainMatrix(1, 2, 3), 1.0, 99u, true);
  CHECK(par.max_hatvee_error == sweep.max_hatvee_error);
  CHECK(par.upper_bound_checked == sweep.upper_bound_checked);
}

TEST_CASE("sphere projection") {
  const Bearing ok(Vec3(0, 0, 1), Vec3(0.3, -0.2, 0));
  const Bearing same = sphere_project(ok.q, ok.omega);
  CHECK((same.q - ok.q).norm() == 0.0);
  CHECK((same.omega - ok.omega).norm() == 0.0);

  const Bearing b = sphere_project(Vec3(0, 0, 2), Vec3(1, 0, 3));
  CHECK((b.q - Vec3(0, 0, 1)).norm() <= 1e-15);
  CHECK((b.omega - Vec3(1, 0, 0)).norm() <= 1e-15);

  CHECK(sphere_project(Vec3(0, 0, 1), Vec3(0, 0, 5)).omega.norm() == 0.0);
  CHECK_THROWS_AS(sphere_project(Vec3(0, 0, 1e-10), Vec3(1, 0, 0)),
                  DegenerateBearing);
}

TEST_CASE("validated types reject bad input") {
  Mat3 not_rot = Mat3::Identity();
  not_rot(0, 0) = 1.1;
  CHECK_THROWS_AS(Rotation{not_rot}, InvalidRotation);

  CHECK_THROWS_AS(Bearing(Vec3(0, 0, 1.1), Vec3::Zero()), ValidationError);
  CHECK_THROWS_AS(Bearing(Vec3(0, 0, 1), Vec3(0, 0, 1)), ValidationError);

  CHECK_THROWS_AS(ErrorGainMatrix(1, 1, 2), ValidationError);
  CHECK_THROWS_AS(ErrorGainMatrix(-1, 1, 2), ValidationError);
  CHECK_NOTHROW(ErrorGainMatrix::near_identity());
}
