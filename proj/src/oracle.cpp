#include "slung/oracle.hpp"

#include <cmath>

namespace slung {

namespace {

const Vec3 kE3{0, 0, 1};

Vec3 u_vec(double th, double ph) {
  return {std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph),
          std::cos(th)};
}
Vec3 u_theta(double th, double ph) {
  return {std::cos(th) * std::cos(ph), std::cos(th) * std::sin(ph),
          -std::sin(th)};
}
Vec3 u_phi(double ph) { return {-std::sin(ph), std::cos(ph), 0}; }

struct PendulumDeriv {
  Vec3 dx, dv;
  double dth, dph, ddth, ddph;
};

PendulumDeriv pendulum_rhs(const PendulumRefState& s,
                           const PendulumRefConfig& c) {
  const double st = std::sin(s.theta), ct = std::cos(s.theta);
  const Vec3 u = u_vec(s.theta, s.phi);
  const Vec3 ut = u_theta(s.theta, s.phi);
  const Vec3 up = u_phi(s.phi);

  Vec3 xdd = Vec3::Zero();
  if (!c.pinned) {
    // [m I + m1 u u^T] xdd = (m+m1) g e3 + F + m1 g sin(th) u_th
    //                        + m1 l (th'^2 + ph'^2 sin^2 th) u
    const Vec3 rhs =
        (c.m + c.m1) * c.g * kE3 + c.force + c.m1 * c.g * st * ut +
        c.m1 * c.l *
            (s.theta_dot * s.theta_dot + s.phi_dot * s.phi_dot * st * st) * u;
    const Mat3 A = c.m * Mat3::Identity() + c.m1 * u * u.transpose();
    xdd = A.ldlt().solve(rhs);
  }

  PendulumDeriv d;
  d.dx = s.vb;
  d.dv = xdd;
  d.dth = s.theta_dot;
  d.dph = s.phi_dot;
  d.ddth = s.phi_dot * s.phi_dot * st * ct - (c.g / c.l) * st -
           xdd.dot(ut) / c.l;
  // The azimuth equation divides by sin(theta). A purely planar swing keeps
  // both numerators at zero through the pole; anything else needs a chart
  // switch this oracle does not provide.
  const double az_rate = 2.0 * s.phi_dot * s.theta_dot * ct;
  const double az_force = xdd.dot(up) / c.l;
  if (std::abs(st) < 1e-3) {
    if (std::abs(az_rate) > 1e-12 || std::abs(az_force) > 1e-12) {
      throw GimbalNear("spherical chart near singularity: sin(theta) = " +
                       std::to_string(st));
    }
    d.ddph = 0.0;
  } else {
    d.ddph = -(az_rate + az_force) / st;
  }
  return d;
}

PendulumRefState pendulum_advance(const PendulumRefState& s,
                                  const PendulumDeriv& k, double h) {
  PendulumRefState y = s;
  y.xb += h * k.dx;
  y.vb += h * k.dv;
  y.theta += h * k.dth;
  y.phi += h * k.dph;
  y.theta_dot += h * k.ddth;
  y.phi_dot += h * k.ddph;
  return y;
}

}  // namespace

Vec3 pendulum_ref_direction(const PendulumRefState& s) {
  return u_vec(s.theta, s.phi);
}

Vec3 pendulum_ref_omega(const PendulumRefState& s) {
  // omega = q x qdot for qdot = th' u_th + ph' sin(th) u_ph
  return s.theta_dot * u_phi(s.phi) -
         s.phi_dot * std::sin(s.theta) * u_theta(s.theta, s.phi);
}

PendulumRefState pendulum_ref_from_bearing(const Vec3& xb, const Vec3& vb,
                                           const Bearing& b) {
  PendulumRefState s;
  s.xb = xb;
  s.vb = vb;
  s.theta = std::acos(std::clamp(b.q.z(), -1.0, 1.0));
  s.phi = std::atan2(b.q.y(), b.q.x());
  const double st = std::sin(s.theta);
  if (std::abs(st) < 1e-3) {
    throw GimbalNear("bearing too close to the chart pole");
  }
  const Vec3 qdot = b.qdot();
  s.theta_dot = qdot.dot(u_theta(s.theta, s.phi));
  s.phi_dot = qdot.dot(u_phi(s.phi)) / st;
  return s;
}

std::vector<PendulumRefSample> spherical_pendulum_reference(
    const PendulumRefState& initial, const PendulumRefConfig& cfg,
    double t_final, double dt) {
  std::vector<PendulumRefSample> out;
  const int n = static_cast<int>(std::llround(t_final / dt));
  PendulumRefState s = initial;
  out.push_back({0.0, s});
  for (int k = 0; k < n; ++k) {
    const auto k1 = pendulum_rhs(s, cfg);
    const auto k2 = pendulum_rhs(pendulum_advance(s, k1, dt / 2), cfg);
    const auto k3 = pendulum_rhs(pendulum_advance(s, k2, dt / 2), cfg);
    const auto k4 = pendulum_rhs(pendulum_advance(s, k3, dt), cfg);
    PendulumRefState n1 = s;
    n1.xb += dt / 6 * (k1.dx + 2 * k2.dx + 2 * k3.dx + k4.dx);
    n1.vb += dt / 6 * (k1.dv + 2 * k2.dv + 2 * k3.dv + k4.dv);
    n1.theta += dt / 6 * (k1.dth + 2 * k2.dth + 2 * k3.dth + k4.dth);
    n1.phi += dt / 6 * (k1.dph + 2 * k2.dph + 2 * k3.dph + k4.dph);
    n1.theta_dot += dt / 6 * (k1.ddth + 2 * k2.ddth + 2 * k3.ddth + k4.ddth);
    n1.phi_dot += dt / 6 * (k1.ddph + 2 * k2.ddph + 2 * k3.ddph + k4.ddph);
    s = n1;
    out.push_back({(k + 1) * dt, s});
  }
  return out;
}

MatX finite_difference_jacobian(const std::function<VecX(const VecX&)>& f,
                                const VecX& x0, double eps) {
  const VecX f0 = f(x0);
  MatX J(f0.size(), x0.size());
  for (int c = 0; c < x0.size(); ++c) {
    VecX xp = x0, xm = x0;
    xp(c) += eps;
    xm(c) -= eps;
    J.col(c) = (f(xp) - f(xm)) / (2.0 * eps);
  }
  return J;
}

namespace {

Eigen::Matrix<double, 3, 2> cmat() {
  Eigen::Matrix<double, 3, 2> C;
  C << 1, 0, 0, 1, 0, 0;
  return C;
}

}  // namespace

VecX chain_reduced_dynamics(const ChainModel& model, const Vec3& xd,
                            const VecX& z, const Vec3& du) {
  const int n = model.cable.n();
  const int D = 3 + 2 * n;
  const auto C = cmat();

  ChainState s;
  s.x = xd + z.head<3>();
  s.v = z.segment<3>(D);
  for (int i = 0; i < n; ++i) {
    const Vec3 xi = C * z.segment<2>(3 + 2 * i);
    const Vec3 q = exp_so3(xi) * kE3;
    const Vec3 w_raw = C * z.segment<2>(D + 3 + 2 * i);
    s.links.push_back(sphere_project(q, w_raw - w_raw.dot(q) * q));
  }
  const Vec3 u = -model.inertia.M00 * model.g * kE3 + du;
  const ChainDeriv d =
      solve_chain_forced(s, model, u, Vec3::Zero(), Vec3::Zero());

  VecX zdot(2 * D);
  zdot.head(D) = z.tail(D);
  zdot.segment<3>(D) = d.dv;
  for (int i = 0; i < n; ++i)
    zdot.segment<2>(D + 3 + 2 * i) = C.transpose() * d.domega[i];
  return zdot;
}

VecX multi_reduced_dynamics(const MultiModel& model, const Vec3& x0d,
                            const VecX& z, const VecX& du) {
  const int nq = model.n_quads();
  const int D = 6 + 2 * model.total_links();
  const auto C = cmat();

  MultiQuadState s;
  s.x0 = x0d + z.head<3>();
  s.R0 = exp_so3(z.segment<3>(3));
  s.v0 = z.segment<3>(D);
  s.Omega0 = z.segment<3>(D + 3);
  s.quads.resize(nq);
  int r = 6;
  for (int i = 0; i < nq; ++i) {
    const int ni = model.cables[i].n();
    s.quads[i].R = Rotation::identity();
    s.quads[i].Omega = Vec3::Zero();
    for (int j = 0; j < ni; ++j) {
      const Vec3 xi = C * z.segment<2>(r);
      const Vec3 q = exp_so3(xi) * kE3;
      const Vec3 w_raw = C * z.segment<2>(D + r);
      s.quads[i].links.push_back(sphere_project(q, w_raw - w_raw.dot(q) * q));
      r += 2;
    }
  }

  std::vector<Vec3> u(nq);
  for (int i = 0; i < nq; ++i) {
    const double f_eq = (model.mass.M_iT[i] + model.payload.m0 / nq) * model.g;
    u[i] = -f_eq * kE3 + du.segment<3>(3 * i);
  }
  const MultiDeriv d = solve_multi_forced(s, model, u, Vec3::Zero());

  VecX zdot(2 * D);
  zdot.head(D) = z.tail(D);
  zdot.segment<3>(D) = d.dv0;
  zdot.segment<3>(D + 3) = d.dOmega0;
  r = 6;
  for (int i = 0; i < nq; ++i) {
    for (int j = 0; j < model.cables[i].n(); ++j) {
      zdot.segment<2>(D + r) = C.transpose() * d.domega[i][j];
      r += 2;
    }
  }
  return zdot;
}

double energy_drift(const std::vector<double>& total_energy) {
  if (total_energy.empty()) return 0.0;
  const double e0 = total_energy.front();
  double worst = 0;
  for (double e : total_energy)
    worst = std::max(worst, std::abs(e - e0));
  return worst / (std::abs(e0) + 1.0);
}

}  // namespace slung
