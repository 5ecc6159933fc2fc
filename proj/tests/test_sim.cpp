#include <cmath>

#include "doctest.h"
#include "slung/emit.hpp"
#include "slung/batch.hpp"
#include "slung/scenario.hpp"
#include "slung/sim.hpp"

using namespace slung;

namespace {

QuadParams test_quad(double m = 0.755) {
  QuadParams q;
  q.m = m;
  q.J = Vec3(0.557e-2, 0.557e-2, 1.05e-2).asDiagonal();
  q.d = 0.169;
  q.c_tau_f = 0.1056;
  return q;
}

const DisturbanceSet kNoDist;
const Vec3 kE3{0, 0, 1};

}  // namespace

TEST_CASE("ballistic closed form") {
  const SingleModel model{test_quad(), kDefaultGravity};
  SingleQuadState s;
  for (int k = 0; k < 1000; ++k)
    s = step_single(s, model, 0.0, Vec3::Zero(), kNoDist, 1e-3);
  CHECK(std::abs(s.x.z() - 0.5 * kDefaultGravity) <= 1e-9);
  CHECK(std::abs(s.v.z() - kDefaultGravity) <= 1e-9);
}

TEST_CASE("equilibrium is a fixed point of the stepper") {
  const ChainModel model = ChainModel::make(
      test_quad(0.5),
      [] {
        CableParams c;
        c.link_masses.assign(5, 0.1);
        c.link_lengths.assign(5, 0.1);
        return c;
      }());
  ChainState s;
  s.links.assign(5, Bearing(kE3, Vec3::Zero()));
  const Eigen::VectorXd before = flatten(SystemState(s));
  for (int k = 0; k < 100; ++k) {
    s = step_chain(s, model, model.inertia.M00 * kDefaultGravity,
                   Vec3::Zero(), kNoDist, 1e-3);
  }
  CHECK((flatten(SystemState(s)) - before).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("manifold invariants hold along rollouts") {
  Scenario sc = builtin_scenario("chain5_integral");
  sc.sim.t_final = 1.0;
  const Trajectory tr = run(sc);
  for (int k = 0; k < tr.samples(); k += 50) {
    Mat3 R;
    int idx = 6;  // x(3), v(3), then R row-major
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) R(r, c) = tr.state[k](idx++);
    CHECK((R.transpose() * R - Mat3::Identity()).norm() <= 1e-7);
    idx = 18;
    for (int link = 0; link < 5; ++link) {
      const Vec3 q(tr.state[k](idx), tr.state[k](idx + 1),
                   tr.state[k](idx + 2));
      CHECK(std::abs(q.norm() - 1.0) <= 1e-7);
      idx += 6;
    }
  }

  // A single unprojected step stays within the stated drift budget.
  ChainState s = std::get<ChainState>(sc.initial);
  const ChainModel model = ChainModel::make(sc.quad, sc.cable, sc.gravity);
  s = step_chain(s, model, 5.0, Vec3(0.01, 0, 0), kNoDist, 1e-3,
                 /*reproject=*/false);
  CHECK((s.R.matrix().transpose() * s.R.matrix() - Mat3::Identity()).norm() <=
        1e-7);
  for (const auto& b : s.links) CHECK(std::abs(b.q.norm() - 1.0) <= 1e-7);
}

TEST_CASE("rollouts are deterministic and batch order independent") {
  Scenario sc = builtin_scenario("chain5_integral");
  sc.sim.t_final = 0.5;
  const Trajectory a = run(sc);
  const Trajectory b = run(sc);
  REQUIRE(a.samples() == b.samples());
  for (int k = 0; k < a.samples(); ++k) {
    CHECK((a.state[k] - b.state[k]).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.metric[k] - b.metric[k]).cwiseAbs().maxCoeff() == 0.0);
  }

  std::vector<Scenario> batch(4, sc);
  for (int i = 0; i < 4; ++i) batch[i].name += "_" + std::to_string(i);
  const auto serial = run_batch(batch, false);
  const auto parallel = run_batch(batch, true);
  for (int i = 0; i < 4; ++i) {
    REQUIRE(serial[i].ok);
    REQUIRE(parallel[i].ok);
    for (int k = 0; k < serial[i].traj.samples(); ++k) {
      CHECK((serial[i].traj.state[k] - parallel[i].traj.state[k])
                .cwiseAbs()
                .maxCoeff() == 0.0);
    }
  }
}

TEST_CASE("metrics on a resting rollout are identically zero") {
  Scenario sc = builtin_scenario("chain5_integral");
  sc.integral = false;
  sc.dist = DisturbanceSet{};
  auto& st = std::get<ChainState>(sc.initial);
  st.x = Vec3::Zero();
  st.links.assign(5, Bearing(kE3, Vec3::Zero()));
  sc.sim.t_final = 0.2;
  const Trajectory tr = run(sc);
  for (const char* name : {"e_x_norm", "e_v_norm", "e_q", "e_omega", "psi"}) {
    for (double v : tr.series(name)) CHECK(std::abs(v) <= 1e-9);
  }
}

TEST_CASE("metrics summary") {
  Scenario sc = builtin_scenario("chain5_integral");
  sc.sim.t_final = 1.0;
  const Trajectory tr = run(sc);
  const MetricsSummary ms = metrics(tr, 0.05);
  CHECK(ms.series.count("e_q") == 1);
  CHECK(ms.series.at("e_q").peak >= ms.series.at("e_q").terminal);
  CHECK(ms.series.at("e_x_norm").peak > 0);

  // Row-count contract: floor(t_final / (dt * record_every)) + 1.
  CHECK(tr.samples() == 1001);
  Scenario every5 = sc;
  every5.sim.record_every = 5;
  CHECK(run(every5).samples() == 201);
}

TEST_CASE("divergence is reported with a timestamp") {
  Scenario sc = builtin_scenario("chain5_integral");
  // Positive feedback: flip the sign of the position gain.
  sc.gains.kx = -200.0;
  sc.gains.kv = -50.0;
  sc.sim.t_final = 20.0;
  CHECK_THROWS_AS(run(sc), Error);  // Diverged or NonFinite, both carry t
}

TEST_CASE("flight-mode schedule switches controllers") {
  Scenario sc = builtin_scenario("flip_adaptive");
  sc.sim.t_final = 0.6;
  const Trajectory tr = run(sc);
  const auto mode = tr.series("mode");
  CHECK(mode.front() == 0.0);
  CHECK(mode.back() == 1.0);
  // The switch lands at the configured time.
  for (int k = 0; k < tr.samples(); ++k) {
    if (tr.t[k] < 0.375 - 1e-9) CHECK(mode[k] == 0.0);
    if (tr.t[k] > 0.375 + 1e-9) CHECK(mode[k] == 1.0);
  }
}

TEST_CASE("sparse reprojection still keeps drift bounded") {
  Scenario sc = builtin_scenario("chain5_integral");
  sc.sim.t_final = 0.5;
  sc.sim.reprojection_every = 10;
  const Trajectory tr = run(sc);
  for (int k = 0; k < tr.samples(); k += 25) {
    Mat3 R;
    int idx = 6;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) R(r, c) = tr.state[k](idx++);
    CHECK((R.transpose() * R - Mat3::Identity()).norm() <= 1e-7);
  }
}

TEST_CASE("unknown metric series is rejected") {
  Scenario sc = builtin_scenario("chain5_integral");
  sc.sim.t_final = 0.01;
  const Trajectory tr = run(sc);
  CHECK_THROWS_AS(tr.series("no_such_series"), ValidationError);
}

TEST_CASE("flip attitude error peaks before the switch and decays") {
  const Trajectory tr = run(builtin_scenario("flip_adaptive"));
  const auto psi = tr.series("psi");
  double peak_before_switch = 0;
  for (int k = 0; k < tr.samples(); ++k) {
    if (tr.t[k] < 0.375) peak_before_switch = std::max(peak_before_switch, psi[k]);
  }
  CHECK(peak_before_switch > psi.back());
}

TEST_CASE("hanging initial configuration starts with zero link error") {
  Scenario sc = builtin_scenario("payload_box");
  sc.sim.t_final = 0.01;
  const Trajectory tr = run(sc);
  CHECK(tr.series("e_q").front() == 0.0);
  CHECK(tr.series("e_omega").front() == 0.0);
}

TEST_CASE("integral action shrinks the rod's steady payload offset") {
  const Trajectory with = run(builtin_scenario("rod_integral"));
  const Trajectory without = run(builtin_scenario("rod_plain"));
  const double ss_with = metrics(with).series.at("e_x_norm").steady_state;
  const double ss_without = metrics(without).series.at("e_x_norm").steady_state;
  CHECK(ss_with < ss_without);
  CHECK(ss_with < 0.05);
  CHECK(ss_without > 0.1);
}
