#include "slung/sim.hpp"

#include <algorithm>
#include <cmath>

#include "slung/scenario.hpp"

namespace slung {

namespace {

const Vec3 kE3{0, 0, 1};

Bearing bearing_unchecked(const Vec3& q, const Vec3& w) {
  // Stage states live slightly off the manifold; bypass the validated ctor.
  Bearing b;
  b.q = q;
  b.omega = w;
  return b;
}

}  // namespace

void SimConfig::validate() const {
  if (!(dt > 0)) throw ValidationError("sim.dt > 0");
  if (!(t_final > 0)) throw ValidationError("sim.t_final > 0");
  if (reprojection_every < 1)
    throw ValidationError("sim.reprojection_every >= 1");
  if (record_every < 1) throw ValidationError("sim.record_every >= 1");
}

int SimConfig::n_steps() const {
  return static_cast<int>(std::llround(t_final / dt));
}

int Trajectory::metric_index(const std::string& name) const {
  for (size_t i = 0; i < metric_names.size(); ++i)
    if (metric_names[i] == name) return static_cast<int>(i);
  throw ValidationError("unknown metric series: " + name);
}

std::vector<double> Trajectory::series(const std::string& name) const {
  const int idx = metric_index(name);
  std::vector<double> out(metric.size());
  for (size_t k = 0; k < metric.size(); ++k) out[k] = metric[k](idx);
  return out;
}

// ---------------------------------------------------------------------------
// RK4 steppers

SingleQuadState step_single(const SingleQuadState& s, const SingleModel& model,
                            double f, const Vec3& M, const DisturbanceSet& d,
                            double dt, bool reproject) {
  auto deriv = [&](const SingleQuadState& y) {
    return single_quad_derivative(y, model, f, M, d);
  };
  auto at = [&](const SingleQuadDeriv& k, double h) {
    SingleQuadState y;
    y.x = s.x + h * k.dx;
    y.v = s.v + h * k.dv;
    y.R = s.R * exp_so3(h * k.Omega);
    y.Omega = s.Omega + h * k.dOmega;
    return y;
  };
  const auto k1 = deriv(s);
  const auto k2 = deriv(at(k1, dt / 2));
  const auto k3 = deriv(at(k2, dt / 2));
  const auto k4 = deriv(at(k3, dt));

  SingleQuadState n;
  n.x = s.x + dt / 6 * (k1.dx + 2 * k2.dx + 2 * k3.dx + k4.dx);
  n.v = s.v + dt / 6 * (k1.dv + 2 * k2.dv + 2 * k3.dv + k4.dv);
  n.R = s.R * exp_so3(dt / 6 *
                      (k1.Omega + 2 * k2.Omega + 2 * k3.Omega + k4.Omega));
  n.Omega =
      s.Omega + dt / 6 * (k1.dOmega + 2 * k2.dOmega + 2 * k3.dOmega + k4.dOmega);
  if (reproject) n.R = project_so3(n.R.matrix());
  return n;
}

namespace {

ChainState chain_stage(const ChainState& s, const ChainDeriv& k, double h) {
  ChainState y;
  y.x = s.x + h * k.dx;
  y.v = s.v + h * k.dv;
  y.R = s.R * exp_so3(h * k.Omega);
  y.Omega = s.Omega + h * k.dOmega;
  y.links.resize(s.links.size());
  for (size_t i = 0; i < s.links.size(); ++i) {
    y.links[i] = bearing_unchecked(s.links[i].q + h * k.dq[i],
                                   s.links[i].omega + h * k.domega[i]);
  }
  return y;
}

}  // namespace

ChainState step_chain(const ChainState& s, const ChainModel& model, double f,
                      const Vec3& M, const DisturbanceSet& d, double dt,
                      bool reproject, double* rcond) {
  auto deriv = [&](const ChainState& y) {
    return solve_chain(y, model, f, M, d);
  };
  const auto k1 = deriv(s);
  if (rcond != nullptr) *rcond = k1.rcond;
  const auto k2 = deriv(chain_stage(s, k1, dt / 2));
  const auto k3 = deriv(chain_stage(s, k2, dt / 2));
  const auto k4 = deriv(chain_stage(s, k3, dt));

  ChainState n;
  n.x = s.x + dt / 6 * (k1.dx + 2 * k2.dx + 2 * k3.dx + k4.dx);
  n.v = s.v + dt / 6 * (k1.dv + 2 * k2.dv + 2 * k3.dv + k4.dv);
  n.R = s.R * exp_so3(dt / 6 *
                      (k1.Omega + 2 * k2.Omega + 2 * k3.Omega + k4.Omega));
  n.Omega =
      s.Omega + dt / 6 * (k1.dOmega + 2 * k2.dOmega + 2 * k3.dOmega + k4.dOmega);
  n.links.resize(s.links.size());
  for (size_t i = 0; i < s.links.size(); ++i) {
    const Vec3 q = s.links[i].q + dt / 6 * (k1.dq[i] + 2 * k2.dq[i] +
                                            2 * k3.dq[i] + k4.dq[i]);
    const Vec3 w =
        s.links[i].omega + dt / 6 * (k1.domega[i] + 2 * k2.domega[i] +
                                     2 * k3.domega[i] + k4.domega[i]);
    n.links[i] = reproject ? sphere_project(q, w) : bearing_unchecked(q, w);
  }
  if (reproject) n.R = project_so3(n.R.matrix());
  return n;
}

namespace {

MultiQuadState multi_stage(const MultiQuadState& s, const MultiDeriv& k,
                           double h) {
  MultiQuadState y;
  y.x0 = s.x0 + h * k.dx0;
  y.v0 = s.v0 + h * k.dv0;
  y.R0 = s.R0 * exp_so3(h * k.Omega0);
  y.Omega0 = s.Omega0 + h * k.dOmega0;
  y.quads.resize(s.quads.size());
  for (size_t i = 0; i < s.quads.size(); ++i) {
    y.quads[i].R = s.quads[i].R * exp_so3(h * k.Omega_quads[i]);
    y.quads[i].Omega = s.quads[i].Omega + h * k.dOmega_quads[i];
    y.quads[i].links.resize(s.quads[i].links.size());
    for (size_t j = 0; j < s.quads[i].links.size(); ++j) {
      y.quads[i].links[j] =
          bearing_unchecked(s.quads[i].links[j].q + h * k.dq[i][j],
                            s.quads[i].links[j].omega + h * k.domega[i][j]);
    }
  }
  return y;
}

}  // namespace

MultiQuadState step_multi(const MultiQuadState& s, const MultiModel& model,
                          const std::vector<double>& f,
                          const std::vector<Vec3>& M, const DisturbanceSet& d,
                          double dt, bool reproject, double* rcond) {
  auto deriv = [&](const MultiQuadState& y) {
    return solve_multi(y, model, f, M, d);
  };
  const auto k1 = deriv(s);
  if (rcond != nullptr) *rcond = k1.rcond;
  const auto k2 = deriv(multi_stage(s, k1, dt / 2));
  const auto k3 = deriv(multi_stage(s, k2, dt / 2));
  const auto k4 = deriv(multi_stage(s, k3, dt));

  MultiQuadState n;
  n.x0 = s.x0 + dt / 6 * (k1.dx0 + 2 * k2.dx0 + 2 * k3.dx0 + k4.dx0);
  n.v0 = s.v0 + dt / 6 * (k1.dv0 + 2 * k2.dv0 + 2 * k3.dv0 + k4.dv0);
  n.R0 = s.R0 * exp_so3(dt / 6 * (k1.Omega0 + 2 * k2.Omega0 + 2 * k3.Omega0 +
                                  k4.Omega0));
  n.Omega0 = s.Omega0 + dt / 6 * (k1.dOmega0 + 2 * k2.dOmega0 +
                                  2 * k3.dOmega0 + k4.dOmega0);
  n.quads.resize(s.quads.size());
  for (size_t i = 0; i < s.quads.size(); ++i) {
    n.quads[i].R =
        s.quads[i].R *
        exp_so3(dt / 6 * (k1.Omega_quads[i] + 2 * k2.Omega_quads[i] +
                          2 * k3.Omega_quads[i] + k4.Omega_quads[i]));
    n.quads[i].Omega =
        s.quads[i].Omega +
        dt / 6 * (k1.dOmega_quads[i] + 2 * k2.dOmega_quads[i] +
                  2 * k3.dOmega_quads[i] + k4.dOmega_quads[i]);
    n.quads[i].links.resize(s.quads[i].links.size());
    for (size_t j = 0; j < s.quads[i].links.size(); ++j) {
      const Vec3 q = s.quads[i].links[j].q +
                     dt / 6 * (k1.dq[i][j] + 2 * k2.dq[i][j] +
                               2 * k3.dq[i][j] + k4.dq[i][j]);
      const Vec3 w = s.quads[i].links[j].omega +
                     dt / 6 * (k1.domega[i][j] + 2 * k2.domega[i][j] +
                               2 * k3.domega[i][j] + k4.domega[i][j]);
      n.quads[i].links[j] =
          reproject ? sphere_project(q, w) : bearing_unchecked(q, w);
    }
    if (reproject) n.quads[i].R = project_so3(n.quads[i].R.matrix());
  }
  if (reproject) n.R0 = project_so3(n.R0.matrix());
  return n;
}

// ---------------------------------------------------------------------------
// Rollout drivers

namespace {

std::vector<std::string> control_names_single() {
  return {"f", "M_1", "M_2", "M_3", "ft_1", "ft_2", "ft_3", "ft_4"};
}

std::vector<std::string> control_names_multi(int nq) {
  std::vector<std::string> names;
  for (int i = 1; i <= nq; ++i) {
    const std::string s = std::to_string(i);
    names.push_back("f" + s);
    names.push_back("M" + s + "_1");
    names.push_back("M" + s + "_2");
    names.push_back("M" + s + "_3");
    for (int r = 1; r <= 4; ++r)
      names.push_back("ft" + s + "_" + std::to_string(r));
  }
  return names;
}

std::vector<std::string> metric_names_base() {
  return {"psi",     "e_R_norm", "e_Omega_norm", "e_x_norm",
          "e_v_norm", "e_q",      "e_omega",      "kinetic",
          "potential", "theta_x_norm", "theta_R_norm", "rotor_max",
          "saturated", "mass_rcond"};
}

VecX pack_control(const ControlOutput& o) {
  VecX c(8);
  c << o.f, o.M.x(), o.M.y(), o.M.z(), o.rotor_thrusts[0], o.rotor_thrusts[1],
      o.rotor_thrusts[2], o.rotor_thrusts[3];
  return c;
}

struct BaseMetrics {
  double psi = 0, e_R = 0, e_Om = 0, e_x = 0, e_v = 0, e_q = 0, e_w = 0;
  double kinetic = 0, potential = 0, th_x = 0, th_R = 0;
  double rotor_max = 0, saturated = 0, rcond = 1.0;
  VecX pack() const {
    VecX m(14);
    m << psi, e_R, e_Om, e_x, e_v, e_q, e_w, kinetic, potential, th_x, th_R,
        rotor_max, saturated, rcond;
    return m;
  }
};

void guard_state(const SystemState& s, double t) {
  if (!all_finite(s)) {
    throw NonFinite("state became non-finite at t = " + std::to_string(t));
  }
  if (state_inf_norm(s) > 1e6) {
    throw Diverged("state norm exceeded 1e6 at t = " + std::to_string(t));
  }
}

void euler_adaptive(AdaptiveState& a, const VecX& dtheta_x,
                    const VecX& dtheta_R, double dt, double B_theta) {
  if (a.theta_x.size() > 0 && dtheta_x.size() == a.theta_x.size()) {
    a.theta_x += dt * dtheta_x;
    const double n = a.theta_x.norm();
    if (B_theta > 0 && n > B_theta) a.theta_x *= B_theta / n;  // retraction
  }
  if (a.theta_R.size() > 0 && dtheta_R.size() == a.theta_R.size()) {
    a.theta_R += dt * dtheta_R;
    // The stability analysis assumes ||theta_R|| <= B_theta for the true
    // parameter; keep the estimate in the same ball so rotor saturation
    // cannot wind it up.
    const double n = a.theta_R.norm();
    if (B_theta > 0 && n > B_theta) a.theta_R *= B_theta / n;
  }
}

Trajectory run_single(const PreparedScenario& ps) {
  const Scenario& sc = ps.sc;
  const SingleModel& model = *ps.single;
  SingleQuadState s = std::get<SingleQuadState>(sc.initial);

  // One controller instance per flight mode; estimator state carries over.
  std::vector<std::unique_ptr<AttitudeModeController>> att;
  std::vector<std::unique_ptr<PositionModeController>> pos;
  struct Mode {
    double t_start;
    AttitudeModeController* att = nullptr;
    PositionModeController* pos = nullptr;
  };
  std::vector<Mode> modes;
  for (const auto& ph : sc.phases) {
    Mode m;
    m.t_start = ph.t_start;
    if (ph.kind == FlightPhase::Kind::kAttitudeSpin) {
      AttitudeCommand cmd;
      const Vec3 axis = ph.axis.normalized();
      const double rate = ph.rate;
      cmd.Rd = [axis, rate](double t) { return exp_so3(rate * t * axis); };
      cmd.Omega_d = [axis, rate](double) -> Vec3 { return rate * axis; };
      cmd.dOmega_d = [](double) -> Vec3 { return Vec3::Zero(); };
      att.push_back(std::make_unique<AttitudeModeController>(
          sc.quad, ps.gains, cmd, ph.thrust_cmd, sc.adaptive));
      m.att = att.back().get();
    } else {
      PositionCommand cmd;
      const Vec3 xd = ph.xd;
      cmd.xd = [xd](double) { return xd; };
      cmd.dxd = [](double) -> Vec3 { return Vec3::Zero(); };
      cmd.ddxd = [](double) -> Vec3 { return Vec3::Zero(); };
      cmd.b1d = ph.b1d;
      pos.push_back(std::make_unique<PositionModeController>(
          sc.quad, ps.gains, cmd, sc.sim.dt, sc.adaptive, sc.gravity));
      m.pos = pos.back().get();
    }
    modes.push_back(m);
  }

  AdaptiveState a;
  a.theta_x = VecX::Zero(3);
  a.theta_R = VecX::Zero(3);

  Trajectory traj;
  traj.state_names = state_column_names(sc.initial);
  traj.control_names = control_names_single();
  traj.metric_names = metric_names_base();
  // Tracking-error vectors and estimates, for the derivative-identity and
  // projection-invariant checks.
  for (const char* extra :
       {"e_R_1", "e_R_2", "e_R_3", "e_Omega_1", "e_Omega_2", "e_Omega_3",
        "theta_x_1", "theta_x_2", "theta_x_3", "theta_R_1", "theta_R_2",
        "theta_R_3", "mode", "Rc_11", "Rc_12", "Rc_13", "Rc_21", "Rc_22",
        "Rc_23", "Rc_31", "Rc_32", "Rc_33"}) {
    traj.metric_names.push_back(extra);
  }

  const int N = sc.sim.n_steps();
  double last_rcond = 1.0;
  for (int k = 0; k <= N; ++k) {
    const double t = k * sc.sim.dt;
    size_t mi = 0;
    for (size_t m = 0; m < modes.size(); ++m)
      if (t >= modes[m].t_start - 1e-12) mi = m;

    SingleControlResult r = modes[mi].att != nullptr
                                ? modes[mi].att->step(t, s, a)
                                : modes[mi].pos->step(t, s, a);

    if (k % sc.sim.record_every == 0 || k == N) {
      const Energy e = energy(s, model);
      BaseMetrics bm;
      bm.psi = r.aux.psi;
      bm.e_R = r.aux.e_R.norm();
      bm.e_Om = r.aux.e_Omega.norm();
      bm.e_x = r.aux.e_x.norm();
      bm.e_v = r.aux.e_v.norm();
      bm.kinetic = e.T;
      bm.potential = e.V;
      bm.th_x = a.theta_x.norm();
      bm.th_R = a.theta_R.norm();
      bm.rotor_max = *std::max_element(r.out.rotor_thrusts.begin(),
                                       r.out.rotor_thrusts.end());
      bm.saturated = r.out.saturated ? 1.0 : 0.0;
      bm.rcond = last_rcond;
      VecX row(traj.metric_names.size());
      row.head(14) = bm.pack();
      row.segment<3>(14) = r.aux.e_R;
      row.segment<3>(17) = r.aux.e_Omega;
      row.segment<3>(20) = a.theta_x.head<3>();
      row.segment<3>(23) = a.theta_R.head<3>();
      row(26) = static_cast<double>(mi);
      int rc = 27;
      for (int rr = 0; rr < 3; ++rr)
        for (int cc = 0; cc < 3; ++cc) row(rc++) = r.aux.Rc.matrix()(rr, cc);
      traj.t.push_back(t);
      traj.state.push_back(flatten(s));
      traj.control.push_back(pack_control(r.out));
      traj.metric.push_back(row);
    }
    if (k == N) break;

    s = step_single(s, model, r.out.f, r.out.M, sc.dist, sc.sim.dt,
                    (k + 1) % sc.sim.reprojection_every == 0);
    euler_adaptive(a, r.dtheta_x, r.dtheta_R, sc.sim.dt, ps.gains.B_theta);
    guard_state(SystemState(s), t + sc.sim.dt);
  }
  return traj;
}

Trajectory run_chain(const PreparedScenario& ps) {
  const Scenario& sc = ps.sc;
  const ChainModel& model = *ps.chain;
  ChainState s = std::get<ChainState>(sc.initial);
  const int n = static_cast<int>(s.links.size());

  ChainStabilizationController ctl(model, ps.gains, sc.xd, sc.b1d, ps.PB_t,
                                   sc.sim.dt, sc.integral);
  AdaptiveState a;
  a.theta_x = VecX::Zero(3);
  a.theta_R = VecX::Zero(3);
  a.e_bx = VecX::Zero(3 + 2 * n);

  Trajectory traj;
  traj.state_names = state_column_names(sc.initial);
  traj.control_names = control_names_single();
  traj.metric_names = metric_names_base();

  const int N = sc.sim.n_steps();
  double last_rcond = 1.0;
  for (int k = 0; k <= N; ++k) {
    const double t = k * sc.sim.dt;
    ChainControlResult r = ctl.step(t, s, a);

    if (k % sc.sim.record_every == 0 || k == N) {
      const Energy e = energy(s, model);
      BaseMetrics bm;
      bm.psi = r.aux.psi;
      bm.e_R = r.aux.e_R.norm();
      bm.e_Om = r.aux.e_Omega.norm();
      bm.e_x = r.aux.e_x.norm();
      bm.e_v = r.aux.e_v.norm();
      for (const auto& b : s.links) {
        bm.e_q += (b.q - kE3).norm();
        bm.e_w += b.omega.norm();
      }
      bm.kinetic = e.T;
      bm.potential = e.V;
      bm.rotor_max = *std::max_element(r.out.rotor_thrusts.begin(),
                                       r.out.rotor_thrusts.end());
      bm.saturated = r.out.saturated ? 1.0 : 0.0;
      bm.rcond = last_rcond;
      traj.t.push_back(t);
      traj.state.push_back(flatten(s));
      traj.control.push_back(pack_control(r.out));
      traj.metric.push_back(bm.pack());
    }
    if (k == N) break;

    s = step_chain(s, model, r.out.f, r.out.M, sc.dist, sc.sim.dt,
                   (k + 1) % sc.sim.reprojection_every == 0, &last_rcond);
    a.e_I += sc.sim.dt * r.de_I;
    // Stored integral authority is bounded: values beyond the saturation
    // box (or ball, for the attitude term) are authority the law can never
    // usefully release, and holding them is pure windup.
    if (sc.integral) {
      const double nI = a.e_I.norm();
      if (nI > ps.gains.sigma) a.e_I *= ps.gains.sigma / nI;
    }
    a.e_bx = sat_componentwise(a.e_bx + sc.sim.dt * r.de_bx, ps.gains.sigma);
    guard_state(SystemState(s), t + sc.sim.dt);
  }
  return traj;
}

Trajectory run_multi(const PreparedScenario& ps) {
  const Scenario& sc = ps.sc;
  const MultiModel& model = *ps.multi;
  MultiQuadState s = std::get<MultiQuadState>(sc.initial);
  const int nq = model.n_quads();

  MultiPayloadController ctl(model, ps.gains, sc.x0d, sc.b1d_multi, ps.PB_t,
                             sc.sim.dt, sc.integral);
  AdaptiveState a;
  a.e_bx = VecX::Zero(6 + 2 * model.total_links());
  a.e_I_quads.assign(nq, Vec3::Zero());

  Trajectory traj;
  traj.state_names = state_column_names(sc.initial);
  traj.control_names = control_names_multi(nq);
  traj.metric_names = metric_names_base();
  traj.metric_names.push_back("psi0");
  for (int i = 1; i <= nq; ++i)
    traj.metric_names.push_back("psi_q" + std::to_string(i));

  const int N = sc.sim.n_steps();
  std::vector<double> f(nq);
  std::vector<Vec3> M(nq);
  double last_rcond = 1.0;
  for (int k = 0; k <= N; ++k) {
    const double t = k * sc.sim.dt;
    MultiControlResult r = ctl.step(t, s, a);
    for (int i = 0; i < nq; ++i) {
      f[i] = r.out[i].f;
      M[i] = r.out[i].M;
    }

    if (k % sc.sim.record_every == 0 || k == N) {
      const Energy e = energy(s, model);
      BaseMetrics bm;
      bm.e_x = (s.x0 - sc.x0d).norm();
      bm.e_v = s.v0.norm();
      for (int i = 0; i < nq; ++i) {
        bm.psi = std::max(bm.psi, r.aux[i].psi);
        bm.e_R = std::max(bm.e_R, r.aux[i].e_R.norm());
        bm.e_Om = std::max(bm.e_Om, r.aux[i].e_Omega.norm());
        for (const auto& b : s.quads[i].links) {
          bm.e_q += (b.q - kE3).norm();
          bm.e_w += b.omega.norm();
        }
        bm.rotor_max =
            std::max(bm.rotor_max,
                     *std::max_element(r.out[i].rotor_thrusts.begin(),
                                       r.out[i].rotor_thrusts.end()));
        if (r.out[i].saturated) bm.saturated = 1.0;
      }
      bm.kinetic = e.T;
      bm.potential = e.V;
      bm.rcond = last_rcond;
      VecX row(traj.metric_names.size());
      row.head(14) = bm.pack();
      row(14) = r.psi0;
      for (int i = 0; i < nq; ++i) row(15 + i) = r.aux[i].psi;
      VecX ctrl(8 * nq);
      for (int i = 0; i < nq; ++i) ctrl.segment<8>(8 * i) = pack_control(r.out[i]);
      traj.t.push_back(t);
      traj.state.push_back(flatten(s));
      traj.control.push_back(ctrl);
      traj.metric.push_back(row);
    }
    if (k == N) break;

    s = step_multi(s, model, f, M, sc.dist, sc.sim.dt,
                   (k + 1) % sc.sim.reprojection_every == 0, &last_rcond);
    for (int i = 0; i < nq; ++i) {
      a.e_I_quads[i] += sc.sim.dt * r.de_I[i];
      const double nI = a.e_I_quads[i].norm();
      if (sc.integral && nI > ps.gains.sigma)
        a.e_I_quads[i] *= ps.gains.sigma / nI;
    }
    a.e_bx = sat_componentwise(a.e_bx + sc.sim.dt * r.de_bx, ps.gains.sigma);
    guard_state(SystemState(s), t + sc.sim.dt);
  }
  return traj;
}

}  // namespace

Trajectory run(const Scenario& scenario) {
  PreparedScenario ps = prepare_scenario(scenario);
  switch (scenario.kind) {
    case ModelKind::kSingleQuad:
      return run_single(ps);
    case ModelKind::kChain:
      return run_chain(ps);
    case ModelKind::kMultiQuad:
      return run_multi(ps);
  }
  throw ValidationError("unknown model kind");
}

MetricsSummary metrics(const Trajectory& traj, double settle_threshold) {
  if (traj.samples() == 0) throw ValidationError("metrics: empty trajectory");
  MetricsSummary out;
  out.settle_threshold = settle_threshold;
  const int ns = traj.samples();
  const int tail = std::max(1, ns / 10);
  for (size_t m = 0; m < traj.metric_names.size(); ++m) {
    SeriesSummary ss;
    double steady = 0;
    int settle_idx = -1;
    for (int k = 0; k < ns; ++k) {
      const double v = std::abs(traj.metric[k](m));
      ss.peak = std::max(ss.peak, v);
      if (k >= ns - tail) steady += v;
      if (v > settle_threshold) settle_idx = k;
    }
    ss.terminal = traj.metric[ns - 1](m);
    ss.steady_state = steady / tail;
    ss.settling_time =
        (settle_idx + 1 < ns) ? traj.t[settle_idx + 1] : -1.0;
    out.series[traj.metric_names[m]] = ss;
  }
  return out;
}

}  // namespace slung
