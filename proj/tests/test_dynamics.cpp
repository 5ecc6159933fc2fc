#include <cmath>
#include <random>

#include "doctest.h"
#include "slung/dynamics.hpp"
#include "slung/oracle.hpp"
#include "slung/sim.hpp"

using namespace slung;

namespace {

std::mt19937_64 rng(7);

Vec3 random_vec(double scale = 1.0) {
  std::normal_distribution<double> n01;
  return scale * Vec3(n01(rng), n01(rng), n01(rng));
}

QuadParams test_quad(double m = 0.5) {
  QuadParams q;
  q.m = m;
  q.J = Vec3(0.557e-2, 0.557e-2, 1.05e-2).asDiagonal();
  q.d = 0.169;
  q.c_tau_f = 0.1056;
  return q;
}

CableParams uniform_cable(int n, double mass, double length) {
  CableParams c;
  c.link_masses.assign(n, mass);
  c.link_lengths.assign(n, length);
  return c;
}

Bearing random_bearing(double max_tilt = 1.2, double max_rate = 2.0) {
  std::uniform_real_distribution<double> ut(0, max_tilt), up(0, 2 * M_PI);
  const double th = ut(rng), ph = up(rng);
  const Vec3 q(std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph),
               std::cos(th));
  return sphere_project(q, random_vec(max_rate));
}

const DisturbanceSet kNoDist;

}  // namespace

TEST_CASE("chain inertia constants") {
  const ChainInertia c =
      chain_inertia_constants(test_quad(0.5), uniform_cable(2, 0.1, 0.1));
  CHECK(c.M00 == doctest::Approx(0.7));
  CHECK(c.M0i(0) == doctest::Approx(0.02));
  CHECK(c.M0i(1) == doctest::Approx(0.01));
  CHECK(c.Mij(0, 0) == doctest::Approx(0.002));
  CHECK(c.Mij(0, 1) == doctest::Approx(0.001));
  CHECK(c.Mij(1, 0) == doctest::Approx(0.001));
  CHECK(c.Mij(1, 1) == doctest::Approx(0.001));

  const ChainInertia single =
      chain_inertia_constants(test_quad(), uniform_cable(1, 0.25, 0.4));
  CHECK(single.Mij(0, 0) == doctest::Approx(0.25 * 0.4 * 0.4));

  std::uniform_real_distribution<double> u(0.05, 0.5);
  for (int trial = 0; trial < 20; ++trial) {
    CableParams cab;
    for (int i = 0; i < 6; ++i) {
      cab.link_masses.push_back(u(rng));
      cab.link_lengths.push_back(u(rng));
    }
    const ChainInertia ci = chain_inertia_constants(test_quad(), cab);
    CHECK((ci.Mij - ci.Mij.transpose()).norm() == 0.0);
  }
}

TEST_CASE("payload mass constants") {
  PayloadParams p;
  p.m0 = 0.5;
  p.J0 = Mat3::Identity();
  p.attach_points.assign(4, Vec3(0.1, 0.1, 0));
  std::vector<QuadParams> quads(4, test_quad(0.755));
  std::vector<CableParams> cables(4, uniform_cable(5, 0.01, 0.15));
  const MultiMass mm = multi_mass_constants(p, quads, cables);
  CHECK(mm.M_iT[0] == doctest::Approx(0.805));
  CHECK(mm.M_T == doctest::Approx(3.72));
  for (int i = 0; i < 4; ++i) {
    CHECK(mm.M_0ij[i][0] == doctest::Approx(0.755));  // empty prefix sum
    CHECK(mm.M_0ij[i][4] < mm.M_iT[i]);
  }
}

TEST_CASE("single quadrotor equations of motion") {
  const SingleModel model{test_quad(0.755), kDefaultGravity};
  SingleQuadState hover;

  SUBCASE("hover equilibrium") {
    const auto d = single_quad_derivative(
        hover, model, 0.755 * kDefaultGravity, Vec3::Zero(), kNoDist);
    CHECK(d.dv.norm() <= 1e-14);
    CHECK(d.dOmega.norm() == 0.0);
  }
  SUBCASE("free fall") {
    const auto d =
        single_quad_derivative(hover, model, 0.0, Vec3::Zero(), kNoDist);
    CHECK((d.dv - kDefaultGravity * Vec3(0, 0, 1)).norm() == 0.0);
  }
  SUBCASE("identity uncertainty forces the stated acceleration") {
    DisturbanceSet dist;
    dist.W_mode = UncertaintyMode::kIdentity;
    dist.theta_x = Vec3(0.25, 0.125, 0.2);
    dist.theta_R = Vec3::Zero();
    const auto d = single_quad_derivative(
        hover, model, 0.755 * kDefaultGravity, Vec3::Zero(), dist);
    CHECK((0.755 * d.dv - Vec3(0.25, 0.125, 0.2)).norm() <= 1e-14);
  }
}

TEST_CASE("chain equations of motion") {
  const ChainModel model =
      ChainModel::make(test_quad(0.5), uniform_cable(5, 0.1, 0.1));

  SUBCASE("hanging rest is an equilibrium") {
    ChainState s;
    s.links.assign(5, Bearing(Vec3(0, 0, 1), Vec3::Zero()));
    const auto d = solve_chain(s, model, model.inertia.M00 * kDefaultGravity,
                               Vec3::Zero(), kNoDist);
    CHECK(d.dv.norm() <= 1e-12);
    for (const auto& w : d.domega) CHECK(w.norm() <= 1e-12);
  }

  SUBCASE("empty cable reduces to the bare quadrotor") {
    const ChainModel empty =
        ChainModel::make(test_quad(0.5), CableParams{}, kDefaultGravity);
    ChainState s;
    s.v = random_vec();
    const double f = 2.345;
    const auto d = solve_chain(s, empty, f, Vec3::Zero(), kNoDist);
    const SingleModel single{test_quad(0.5), kDefaultGravity};
    SingleQuadState ss;
    ss.v = s.v;
    const auto ds = single_quad_derivative(ss, single, f, Vec3::Zero(), kNoDist);
    CHECK((d.dv - ds.dv).norm() <= 1e-14);
  }

  SUBCASE("one link matches the minimal-coordinate pendulum") {
    const ChainModel one =
        ChainModel::make(test_quad(0.5), uniform_cable(1, 0.1, 0.1));
    PendulumRefConfig cfg;
    cfg.m = 0.5;
    cfg.m1 = 0.1;
    cfg.l = 0.1;
    const double f = one.inertia.M00 * kDefaultGravity;
    cfg.force = -f * Vec3(0, 0, 1);

    PendulumRefState p;
    p.theta = 0.7;
    p.phi = 0.3;
    p.theta_dot = -0.4;
    p.phi_dot = 1.1;
    p.vb = random_vec();

    ChainState s;
    s.x = p.xb;
    s.v = p.vb;
    s.links.push_back(
        sphere_project(pendulum_ref_direction(p), pendulum_ref_omega(p)));
    const auto d = solve_chain(s, one, f, Vec3::Zero(), kNoDist);

    // Independent acceleration from the spherical-angle chart, by a central
    // difference of short forward/backward oracle integrations.
    const double eps = 1e-6;
    auto omega_at = [&](double dt) {
      const auto refs = spherical_pendulum_reference(p, cfg, dt, dt / 4);
      return pendulum_ref_omega(refs.back().s);
    };
    const Vec3 wdot_ref = (omega_at(eps) - omega_at(-eps)) / (2 * eps);
    CHECK((d.domega[0] - wdot_ref).norm() <= 1e-6);
  }

  SUBCASE("solved rates stay tangent and the matrix is well conditioned") {
    for (int trial = 0; trial < 50; ++trial) {
      ChainState s;
      s.v = random_vec();
      s.Omega = random_vec();
      for (int i = 0; i < 5; ++i) s.links.push_back(random_bearing());
      const auto d =
          solve_chain(s, model, 3.0 + trial * 0.1, random_vec(0.01), kNoDist);
      for (int i = 0; i < 5; ++i) {
        CHECK(std::abs(d.domega[i].dot(s.links[i].q)) <= 1e-9);
      }
      CHECK(d.rcond > 1e-8);
      CHECK(std::isfinite(d.rcond));
    }
  }

  SUBCASE("near-zero link masses make the solve singular") {
    CableParams degenerate = uniform_cable(2, 1e-20, 0.1);
    const ChainModel bad = ChainModel::make(test_quad(0.5), degenerate);
    ChainState s;
    s.links.assign(2, Bearing(Vec3(0, 0, 1), Vec3::Zero()));
    CHECK_THROWS_AS(
        solve_chain(s, bad, 1.0, Vec3::Zero(), kNoDist), SingularMass);
  }
}

namespace {

MultiModel box_model() {
  PayloadParams p;
  p.m0 = 0.5;
  p.J0 = Vec3(0.5 / 12 * 0.68, 0.5 / 12 * 0.40, 0.5 / 12 * 1.0).asDiagonal();
  p.attach_points = {Vec3(0.3, -0.4, -0.1), Vec3(0.3, 0.4, -0.1),
                     Vec3(-0.3, -0.4, -0.1), Vec3(-0.3, 0.4, -0.1)};
  std::vector<QuadParams> quads(4, test_quad(0.755));
  std::vector<CableParams> cables(4, uniform_cable(5, 0.01, 0.15));
  return MultiModel::make(p, quads, cables);
}

MultiQuadState box_equilibrium(const MultiModel& model) {
  MultiQuadState s;
  s.quads.resize(model.n_quads());
  for (int i = 0; i < model.n_quads(); ++i) {
    s.quads[i].links.assign(model.cables[i].n(),
                            Bearing(Vec3(0, 0, 1), Vec3::Zero()));
  }
  return s;
}

}  // namespace

TEST_CASE("payload-system equations of motion") {
  const MultiModel model = box_model();

  SUBCASE("equilibrium thrusts produce zero acceleration") {
    MultiQuadState s = box_equilibrium(model);
    std::vector<double> f(4);
    for (int i = 0; i < 4; ++i)
      f[i] = (model.mass.M_iT[i] + model.payload.m0 / 4) * kDefaultGravity;
    const auto d =
        solve_multi(s, model, f, std::vector<Vec3>(4, Vec3::Zero()), kNoDist);
    CHECK(d.dv0.norm() <= 1e-10);
    CHECK(d.dOmega0.norm() <= 1e-10);
    for (const auto& per_quad : d.domega)
      for (const auto& w : per_quad) CHECK(w.norm() <= 1e-10);
  }

  SUBCASE("effective payload inertia is positive definite") {
    Mat3 Jbar = model.payload.J0;
    for (int i = 0; i < 4; ++i) {
      const Mat3 rh = hat(model.payload.attach_points[i]);
      Jbar -= model.mass.M_iT[i] * rh * rh;
    }
    Eigen::SelfAdjointEigenSolver<Mat3> es(Jbar);
    CHECK(es.eigenvalues().minCoeff() > 0);
  }

  SUBCASE("solved link accelerations satisfy the unit constraint") {
    MultiQuadState s = box_equilibrium(model);
    for (auto& q : s.quads) {
      for (auto& b : q.links) b = random_bearing(0.9, 1.5);
      q.Omega = random_vec();
    }
    s.v0 = random_vec();
    s.Omega0 = random_vec(0.5);
    std::vector<double> f = {8.0, 9.0, 8.5, 9.5};
    const auto d =
        solve_multi(s, model, f, std::vector<Vec3>(4, Vec3::Zero()), kNoDist);
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 5; ++j) {
        const Bearing& b = s.quads[i].links[j];
        CHECK(std::abs(b.q.dot(d.qdd[i][j]) + b.qdot().squaredNorm()) <= 1e-8);
      }
    }
  }
}

TEST_CASE("single-cable payload system reduces to the chain") {
  // One quadrotor attached at the payload center; the payload acts as a
  // point mass co-located with the last link mass.
  const int n = 4;
  const double half = 0.05;
  PayloadParams p;
  p.m0 = half;
  p.J0 = 1e-6 * Mat3::Identity();
  p.attach_points = {Vec3::Zero()};
  CableParams cab = uniform_cable(n, 0.1, 0.1);
  cab.link_masses[n - 1] = half;  // the other half rides at the joint
  const MultiModel mm =
      MultiModel::make(p, {test_quad(0.5)}, {cab});

  CableParams chain_cab = uniform_cable(n, 0.1, 0.1);
  const ChainModel cm = ChainModel::make(test_quad(0.5), chain_cab);

  std::uniform_real_distribution<double> uf(3.0, 12.0);
  for (int trial = 0; trial < 100; ++trial) {
    ChainState cs;
    cs.x = random_vec();
    cs.v = random_vec();
    for (int i = 0; i < n; ++i) cs.links.push_back(random_bearing(1.0, 1.5));
    const double f = uf(rng);

    MultiQuadState ms;
    ms.v0 = cs.v;
    ms.x0 = cs.x;
    for (int i = 0; i < n; ++i) {
      ms.x0 += cm.cable.link_lengths[i] * cs.links[i].q;
      ms.v0 += cm.cable.link_lengths[i] * cs.links[i].qdot();
    }
    ms.quads.resize(1);
    ms.quads[0].links = cs.links;

    const auto dc = solve_chain(cs, cm, f, Vec3::Zero(), kNoDist);
    const auto dm = solve_multi(ms, mm, {f}, {Vec3::Zero()}, kNoDist);

    for (int i = 0; i < n; ++i) {
      CHECK((dm.domega[0][i] - dc.domega[i]).norm() <= 1e-9);
    }
    // Translate the payload acceleration back to the quadrotor end.
    Vec3 quad_acc = dm.dv0;
    for (int i = 0; i < n; ++i) {
      quad_acc -= cm.cable.link_lengths[i] * dm.qdd[0][i];
    }
    CHECK((quad_acc - dc.dv).norm() <= 1e-9);
  }
}

TEST_CASE("spherical pendulum oracle") {
  SUBCASE("planar small swing has the textbook period") {
    PendulumRefConfig cfg;
    cfg.pinned = true;
    cfg.l = 0.1;
    cfg.m1 = 0.1;
    PendulumRefState s0;
    s0.theta = 0.1;
    const double T_expected = 2 * M_PI * std::sqrt(cfg.l / cfg.g);
    const auto traj = spherical_pendulum_reference(s0, cfg, 1.0, 1e-4);
    // The rate first turns positive at the far extremum, half a period in.
    double period = 0;
    for (size_t k = 1; k < traj.size(); ++k) {
      if (traj[k - 1].s.theta_dot <= 0 && traj[k].s.theta_dot > 0) {
        period = 2.0 * traj[k].t;
        break;
      }
    }
    CHECK(period == doctest::Approx(T_expected).epsilon(0.01));
    CHECK(period == doctest::Approx(0.634).epsilon(0.01));
  }
  SUBCASE("hanging rest stays put") {
    PendulumRefConfig cfg;
    cfg.pinned = true;
    PendulumRefState s0;
    s0.theta = 0.5;  // away from the pole, at rest
    const auto traj = spherical_pendulum_reference(s0, cfg, 0.2, 1e-3);
    CHECK(traj.back().s.theta <= 0.5);  // swings down, never up past start
  }
  SUBCASE("azimuthal motion near the pole is rejected") {
    PendulumRefConfig cfg;
    cfg.pinned = true;
    PendulumRefState s0;
    s0.theta = 5e-4;
    s0.phi_dot = 3.0;
    s0.theta_dot = 0.2;
    CHECK_THROWS_AS(spherical_pendulum_reference(s0, cfg, 0.1, 1e-3),
                    GimbalNear);
  }
}

TEST_CASE("energy bookkeeping") {
  const ChainModel model =
      ChainModel::make(test_quad(0.5), uniform_cable(5, 0.1, 0.1));

  ChainState rest;
  rest.links.assign(5, Bearing(Vec3(0, 0, 1), Vec3::Zero()));
  const Energy e0 = energy(rest, model);
  CHECK(e0.T == 0.0);
  CHECK(e0.V == doctest::Approx(-1.4715));

  // Uniform-field property: shifting down by dz lowers V by M00 g dz.
  ChainState shifted = rest;
  shifted.x += Vec3(0, 0, 0.37);
  CHECK(energy(shifted, model).V - e0.V ==
        doctest::Approx(-model.inertia.M00 * kDefaultGravity * 0.37));
}

TEST_CASE("unforced multibody rollouts conserve energy") {
  SUBCASE("chain") {
    const ChainModel model =
        ChainModel::make(test_quad(0.5), uniform_cable(3, 0.1, 0.1));
    ChainState s;
    s.links = {random_bearing(0.8, 1.0), random_bearing(0.8, 1.0),
               random_bearing(0.8, 1.0)};
    std::vector<double> E{energy(s, model).total()};
    for (int k = 0; k < 10000; ++k) {
      s = step_chain(s, model, 0.0, Vec3::Zero(), kNoDist, 1e-4);
      E.push_back(energy(s, model).total());
    }
    CHECK(energy_drift(E) <= 1e-6);
  }
  SUBCASE("payload system") {
    PayloadParams p;
    p.m0 = 0.4;
    p.J0 = Vec3(2e-3, 3e-3, 4e-3).asDiagonal();
    p.attach_points = {Vec3(0.2, 0, -0.05), Vec3(-0.2, 0, -0.05)};
    const MultiModel model = MultiModel::make(
        p, {test_quad(0.755), test_quad(0.755)},
        {uniform_cable(2, 0.02, 0.2), uniform_cable(2, 0.02, 0.2)});
    MultiQuadState s;
    s.Omega0 = Vec3(0.3, -0.2, 0.4);
    s.quads.resize(2);
    for (auto& q : s.quads) {
      q.links = {random_bearing(0.6, 0.8), random_bearing(0.6, 0.8)};
      q.Omega = random_vec(0.5);
    }
    std::vector<double> f(2, 0.0);
    std::vector<Vec3> M(2, Vec3::Zero());
    std::vector<double> E{energy(s, model).total()};
    for (int k = 0; k < 20000; ++k) {
      s = step_multi(s, model, f, M, kNoDist, 1e-4);
      E.push_back(energy(s, model).total());
    }
    CHECK(energy_drift(E) <= 1e-6);
  }
}

TEST_CASE("unforced zero-gravity rollouts conserve linear momentum") {
  // Energy conservation alone cannot see antisymmetric assembly errors;
  // momentum drift can.
  SUBCASE("chain") {
    const ChainModel model = ChainModel::make(
        test_quad(0.5), uniform_cable(4, 0.08, 0.12), /*g=*/0.0);
    ChainState s;
    s.v = Vec3(0.3, -0.1, 0.2);
    for (int i = 0; i < 4; ++i) s.links.push_back(random_bearing(1.0, 2.0));
    auto momentum = [&](const ChainState& st) {
      Vec3 p = model.inertia.M00 * st.v;
      for (int i = 0; i < 4; ++i) p += model.inertia.M0i(i) * st.links[i].qdot();
      return p;
    };
    const Vec3 p0 = momentum(s);
    for (int k = 0; k < 5000; ++k)
      s = step_chain(s, model, 0.0, Vec3::Zero(), kNoDist, 1e-4);
    CHECK((momentum(s) - p0).norm() <= 1e-9 * (1.0 + p0.norm()));
  }
  SUBCASE("payload system") {
    PayloadParams p;
    p.m0 = 0.4;
    p.J0 = Vec3(2e-3, 3e-3, 4e-3).asDiagonal();
    p.attach_points = {Vec3(0.2, 0.1, -0.05), Vec3(-0.2, -0.1, -0.05)};
    const MultiModel model = MultiModel::make(
        p, {test_quad(0.755), test_quad(0.6)},
        {uniform_cable(2, 0.02, 0.2), uniform_cable(3, 0.03, 0.15)},
        /*g=*/0.0);
    MultiQuadState s;
    s.v0 = Vec3(0.1, 0.2, -0.3);
    s.Omega0 = Vec3(0.4, -0.3, 0.5);
    s.quads.resize(2);
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < model.cables[i].n(); ++j)
        s.quads[i].links.push_back(random_bearing(0.9, 1.5));
    }
    auto momentum = [&](const MultiQuadState& st) {
      Vec3 p_lin = model.mass.M_T * st.v0;
      for (int i = 0; i < 2; ++i) {
        const Vec3 rho = model.payload.attach_points[i];
        p_lin += model.mass.M_iT[i] *
                 (st.R0.matrix() * st.Omega0.cross(rho));
        for (int j = 0; j < model.cables[i].n(); ++j) {
          p_lin -= model.mass.M_0ij[i][j] * model.cables[i].link_lengths[j] *
                   st.quads[i].links[j].qdot();
        }
      }
      return p_lin;
    };
    const Vec3 p0 = momentum(s);
    std::vector<double> f(2, 0.0);
    std::vector<Vec3> M(2, Vec3::Zero());
    for (int k = 0; k < 5000; ++k)
      s = step_multi(s, model, f, M, kNoDist, 1e-4);
    CHECK((momentum(s) - p0).norm() <= 1e-9 * (1.0 + p0.norm()));
  }
}
