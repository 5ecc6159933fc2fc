#include "slung/control.hpp"

#include <algorithm>
#include <cmath>

namespace slung {

namespace {

const Vec3 kE3{0, 0, 1};

Eigen::Matrix<double, 2, 3> ct() {
  Eigen::Matrix<double, 2, 3> Ct;
  Ct << 1, 0, 0, 0, 1, 0;
  return Ct;
}

Vec3 vee_skew(const Mat3& m) { return {m(2, 1), m(0, 2), m(1, 0)}; }

// Central-difference rates at the middle of a three-sample history.
AttitudeRates lagged_rates(const std::vector<Rotation>& hist, double h) {
  if (hist.size() < 3) return {};
  return computed_attitude_rates(hist[hist.size() - 3], hist[hist.size() - 2],
                                 hist.back(), h);
}

void push_history(std::vector<Rotation>& hist, const Rotation& Rc) {
  hist.push_back(Rc);
  if (hist.size() > 3) hist.erase(hist.begin());
}

}  // namespace

Rotation computed_attitude(const Vec3& A_des, const Vec3& b1d) {
  const double na = A_des.norm();
  if (na <= 1e-9) {
    throw DegenerateThrust("computed_attitude: ||A|| = " + std::to_string(na));
  }
  const Vec3 b3 = -A_des / na;
  const Mat3 b3h = hat(b3);
  const Vec3 b2_raw = b3h * b1d;
  if (b2_raw.norm() <= 1e-6) {
    throw ParallelHeading("computed_attitude: b1d is parallel to the thrust axis");
  }
  const Vec3 b1 = -(b3h * b2_raw) / (b3h * b2_raw).norm();  // -b3^2 b1d, normalized
  const Vec3 b2 = b2_raw / b2_raw.norm();
  Mat3 R;
  R.col(0) = b1;
  R.col(1) = b2;
  R.col(2) = b3;
  return Rotation(R);
}

AttitudeRates computed_attitude_rates(const Rotation& prev, const Rotation& at,
                                      const Rotation& next, double h) {
  if (!(h > 0)) throw ValidationError("computed_attitude_rates: h > 0");
  const Mat3& Rm = at.matrix();
  const Mat3 Rdot = (next.matrix() - prev.matrix()) / (2.0 * h);
  const Mat3 Rddot =
      (next.matrix() - 2.0 * Rm + prev.matrix()) / (h * h);

  AttitudeRates r;
  const Mat3 w = Rm.transpose() * Rdot;
  r.Omega_c = vee_skew(0.5 * (w - w.transpose()));
  // Omega_dot^ is the skew part of R^T Rddot (the symmetric part is -Omega^2).
  const Mat3 a = Rm.transpose() * Rddot;
  r.dOmega_c = vee_skew(0.5 * (a - a.transpose()));
  return r;
}

AttitudeControlResult attitude_control(const SingleQuadState& s,
                                       const Rotation& Rd, const Vec3& Omega_d,
                                       const Vec3& dOmega_d,
                                       const QuadParams& quad, const Gains& g,
                                       const VecX& theta_R, bool adaptive) {
  AttitudeControlResult r;
  r.e_R = attitude_error_identity(s.R, Rd);
  r.e_Omega = angular_velocity_error(s.Omega, s.R, Rd, Omega_d);
  r.psi = psi_identity(s.R, Rd);

  const Mat3 RtRd = s.R.matrix().transpose() * Rd.matrix();
  const Vec3 w = RtRd * Omega_d;  // commanded rate seen from the body frame
  r.M = -g.kR * r.e_R - g.kOmega * r.e_Omega + w.cross(quad.J * w) +
        quad.J * (RtRd * dOmega_d);
  if (adaptive) {
    r.M -= theta_R.head<3>();
    r.dtheta_R = g.gamma_R * (r.e_Omega + g.c2 * r.e_R);
  } else {
    r.dtheta_R = VecX::Zero(theta_R.size());
  }
  return r;
}

VecX adaptive_law_projection(const VecX& theta_x, const Vec3& e_v,
                             const Vec3& e_x, double gamma_x, double c1,
                             double B_theta) {
  const VecX drive = gamma_x * (e_v + c1 * e_x);
  const double norm = theta_x.norm();
  const bool on_boundary = norm >= B_theta * (1.0 - 1e-12);
  if (!on_boundary || theta_x.dot(drive) <= 0) return drive;
  // Outward update on the boundary: remove the radial component.
  return drive - theta_x * (theta_x.dot(drive) / (norm * norm));
}

std::array<double, 4> rotor_mix(double f, const Vec3& M, double d,
                                double c_tau_f) {
  std::array<double, 4> t;
  t[0] = f / 4 - M.y() / (2 * d) - M.z() / (4 * c_tau_f);
  t[1] = f / 4 + M.x() / (2 * d) + M.z() / (4 * c_tau_f);
  t[2] = f / 4 + M.y() / (2 * d) - M.z() / (4 * c_tau_f);
  t[3] = f / 4 - M.x() / (2 * d) + M.z() / (4 * c_tau_f);
  return t;
}

std::pair<double, Vec3> rotor_unmix(const std::array<double, 4>& t, double d,
                                    double c_tau_f) {
  const double f = t[0] + t[1] + t[2] + t[3];
  const Vec3 M(d * (t[1] - t[3]), d * (t[2] - t[0]),
               c_tau_f * (-t[0] + t[1] - t[2] + t[3]));
  return {f, M};
}

ControlOutput saturate_rotors(double f, const Vec3& M, const QuadParams& quad) {
  ControlOutput out;
  const double cap = quad.f_rotor_max;
  double fr = f;
  Vec3 Mr = M;
  if (cap > 0) {
    // Moment keeps priority when the commands conflict with the rotor box:
    // shrink the moment only when no collective can realize it, then pull
    // the collective into the interval the moment differentials leave free.
    // A collective clamped with the moment intact keeps the attitude loop in
    // authority; clamping per-rotor directly would zero the differentials
    // whenever the collective pins all four rotors.
    const std::array<double, 4> d =
        rotor_mix(0.0, Mr, quad.d, quad.c_tau_f);
    const double dmax = *std::max_element(d.begin(), d.end());
    const double dmin = *std::min_element(d.begin(), d.end());
    if (dmax - dmin > cap) {
      Mr *= cap / (dmax - dmin);
      out.saturated = true;
    }
    const std::array<double, 4> ds =
        rotor_mix(0.0, Mr, quad.d, quad.c_tau_f);
    const double f_lo = -4.0 * *std::min_element(ds.begin(), ds.end());
    const double f_hi =
        4.0 * (cap - *std::max_element(ds.begin(), ds.end()));
    const double fc = std::clamp(fr, std::max(0.0, f_lo), f_hi);
    if (fc != fr) out.saturated = true;
    fr = fc;
  }
  out.rotor_thrusts = rotor_mix(fr, Mr, quad.d, quad.c_tau_f);
  if (cap > 0) {
    for (double& ti : out.rotor_thrusts) {
      const double clamped = std::clamp(ti, 0.0, cap);
      if (clamped != ti) out.saturated = true;
      ti = clamped;
    }
  }
  std::tie(out.f, out.M) = rotor_unmix(out.rotor_thrusts, quad.d, quad.c_tau_f);
  return out;
}

VecX sat_componentwise(const VecX& y, double sigma) {
  return y.cwiseMax(-sigma).cwiseMin(sigma);
}

// ---------------------------------------------------------------------------

AttitudeModeController::AttitudeModeController(QuadParams quad, Gains gains,
                                               AttitudeCommand cmd,
                                               double thrust_cmd,
                                               bool adaptive)
    : quad_(std::move(quad)),
      gains_(std::move(gains)),
      cmd_(std::move(cmd)),
      thrust_cmd_(thrust_cmd),
      adaptive_(adaptive) {}

SingleControlResult AttitudeModeController::step(double t,
                                                 const SingleQuadState& s,
                                                 const AdaptiveState& a) {
  const Rotation Rd = cmd_.Rd(t);
  const auto att = attitude_control(s, Rd, cmd_.Omega_d(t), cmd_.dOmega_d(t),
                                    quad_, gains_, a.theta_R, adaptive_);
  SingleControlResult r;
  r.out = saturate_rotors(thrust_cmd_, att.M, quad_);
  r.aux.Rc = Rd;
  r.aux.psi = att.psi;
  r.aux.e_R = att.e_R;
  r.aux.e_Omega = att.e_Omega;
  r.dtheta_R = att.dtheta_R;
  r.dtheta_x = VecX::Zero(a.theta_x.size());  // frozen in this flight mode
  return r;
}

PositionModeController::PositionModeController(QuadParams quad, Gains gains,
                                               PositionCommand cmd,
                                               double fd_step, bool adaptive,
                                               double g)
    : quad_(std::move(quad)),
      gains_(std::move(gains)),
      cmd_(std::move(cmd)),
      fd_step_(fd_step),
      adaptive_(adaptive),
      g_(g) {}

SingleControlResult PositionModeController::step(double t,
                                                 const SingleQuadState& s,
                                                 const AdaptiveState& a) {
  const Vec3 e_x = s.x - cmd_.xd(t);
  const Vec3 e_v = s.v - cmd_.dxd(t);
  const Vec3 wx = adaptive_ ? Vec3(a.theta_x.head<3>()) : Vec3::Zero();

  const Vec3 A = -gains_.kx * e_x - gains_.kv * e_v - wx -
                 quad_.m * g_ * kE3 + quad_.m * cmd_.ddxd(t);
  const double f = -A.dot(s.R.matrix() * kE3);
  const Rotation Rc = computed_attitude(A, cmd_.b1d);

  push_history(rc_history_, Rc);
  const AttitudeRates rates = lagged_rates(rc_history_, fd_step_);

  const auto att = attitude_control(s, Rc, rates.Omega_c, rates.dOmega_c,
                                    quad_, gains_, a.theta_R, adaptive_);

  SingleControlResult r;
  r.out = saturate_rotors(f, att.M, quad_);
  r.aux.Rc = Rc;
  r.aux.psi = att.psi;
  r.aux.e_R = att.e_R;
  r.aux.e_Omega = att.e_Omega;
  r.aux.e_x = e_x;
  r.aux.e_v = e_v;
  r.dtheta_R = att.dtheta_R;
  r.dtheta_x =
      adaptive_ ? adaptive_law_projection(a.theta_x, e_v, e_x, gains_.gamma_x,
                                          gains_.c1, gains_.B_theta)
                : VecX::Zero(a.theta_x.size());
  return r;
}

// ---------------------------------------------------------------------------

ChainStabilizationController::ChainStabilizationController(
    ChainModel model, Gains gains, Vec3 xd, Vec3 b1d, MatX PB_t,
    double fd_step, bool use_integral)
    : model_(std::move(model)),
      gains_(std::move(gains)),
      xd_(std::move(xd)),
      b1d_(std::move(b1d)),
      PB_t_(std::move(PB_t)),
      fd_step_(fd_step),
      use_integral_(use_integral) {}

VecX ChainStabilizationController::reduced_state(const ChainState& s) const {
  const int n = static_cast<int>(s.links.size());
  VecX x(3 + 2 * n);
  x.head<3>() = s.x - xd_;
  const auto Ct = ct();
  for (int i = 0; i < n; ++i)
    x.segment<2>(3 + 2 * i) = Ct * kE3.cross(s.links[i].q);
  return x;
}

VecX ChainStabilizationController::reduced_velocity(const ChainState& s) const {
  const int n = static_cast<int>(s.links.size());
  VecX xd(3 + 2 * n);
  xd.head<3>() = s.v;
  const auto Ct = ct();
  for (int i = 0; i < n; ++i)
    xd.segment<2>(3 + 2 * i) = Ct * s.links[i].omega;
  return xd;
}

ChainControlResult ChainStabilizationController::step(double /*t*/,
                                                      const ChainState& s,
                                                      const AdaptiveState& a) {
  const VecX xs = reduced_state(s);
  const VecX xds = reduced_velocity(s);

  // Equilibrium feed-forward points opposite gravity: the ideal force is
  // -M00 g e3 plus the stabilizing correction, so b3c = -A/||A|| stays at
  // +e3 for upright hover.
  Vec3 A = -model_.inertia.M00 * model_.g * kE3 - gains_.K_x * xs -
           gains_.K_xdot * xds;
  if (use_integral_) {
    A -= gains_.K_z * sat_componentwise(a.e_bx, gains_.sigma);
  }
  const double f = -A.dot(s.R.matrix() * kE3);
  const Rotation Rc = computed_attitude(A, b1d_);
  push_history(rc_history_, Rc);
  const AttitudeRates rates = lagged_rates(rc_history_, fd_step_);

  const Vec3 e_R = attitude_error_identity(s.R, Rc);
  const Vec3 e_Om = angular_velocity_error(s.Omega, s.R, Rc, rates.Omega_c);

  const Mat3 RtRc = s.R.matrix().transpose() * Rc.matrix();
  Vec3 M = -gains_.kR * e_R - gains_.kOmega * e_Om +
           s.Omega.cross(model_.quad.J * s.Omega) -
           model_.quad.J * (hat(s.Omega) * (RtRc * rates.Omega_c) -
                            RtRc * rates.dOmega_c);
  if (use_integral_) M -= gains_.kI * a.e_I;

  ChainControlResult r;
  r.out = saturate_rotors(f, M, model_.quad);
  r.aux.Rc = Rc;
  r.aux.psi = psi_identity(s.R, Rc);
  r.aux.e_R = e_R;
  r.aux.e_Omega = e_Om;
  r.aux.e_x = s.x - xd_;
  r.aux.e_v = s.v;
  r.de_I = e_Om + gains_.c2 * e_R;
  if (use_integral_) {
    VecX z1(2 * xs.size());
    z1 << xs, xds;
    r.de_bx = PB_t_ * z1;
  } else {
    r.de_bx = VecX::Zero(xs.size());
  }
  return r;
}

// ---------------------------------------------------------------------------

MultiPayloadController::MultiPayloadController(MultiModel model, Gains gains,
                                               Vec3 x0d, std::vector<Vec3> b1d,
                                               MatX PB_t, double fd_step,
                                               bool use_integral)
    : model_(std::move(model)),
      gains_(std::move(gains)),
      x0d_(std::move(x0d)),
      b1d_(std::move(b1d)),
      PB_t_(std::move(PB_t)),
      fd_step_(fd_step),
      use_integral_(use_integral) {
  rc_history_.resize(model_.n_quads());
}

VecX MultiPayloadController::reduced_state(const MultiQuadState& s) const {
  VecX x(6 + 2 * model_.total_links());
  x.head<3>() = s.x0 - x0d_;
  x.segment<3>(3) = attitude_error_identity(s.R0, Rotation::identity());
  const auto Ct = ct();
  int r = 6;
  for (const auto& q : s.quads) {
    for (const auto& b : q.links) {
      x.segment<2>(r) = Ct * kE3.cross(b.q);
      r += 2;
    }
  }
  return x;
}

VecX MultiPayloadController::reduced_velocity(const MultiQuadState& s) const {
  VecX xd(6 + 2 * model_.total_links());
  xd.head<3>() = s.v0;
  xd.segment<3>(3) = s.Omega0;
  const auto Ct = ct();
  int r = 6;
  for (const auto& q : s.quads) {
    for (const auto& b : q.links) {
      xd.segment<2>(r) = Ct * b.omega;
      r += 2;
    }
  }
  return xd;
}

MultiControlResult MultiPayloadController::step(double /*t*/,
                                                const MultiQuadState& s,
                                                const AdaptiveState& a) {
  const int nq = model_.n_quads();
  const VecX xs = reduced_state(s);
  const VecX xds = reduced_velocity(s);
  const VecX du = -gains_.K_x * xs - gains_.K_xdot * xds;
  VecX dz = VecX::Zero(3 * nq);
  if (use_integral_) {
    dz = -gains_.K_z * sat_componentwise(a.e_bx, gains_.sigma);
  }

  MultiControlResult r;
  r.out.resize(nq);
  r.aux.resize(nq);
  r.de_I.resize(nq, Vec3::Zero());
  r.psi0 = psi_identity(s.R0, Rotation::identity());

  for (int i = 0; i < nq; ++i) {
    const double f_eq =
        (model_.mass.M_iT[i] + model_.payload.m0 / nq) * model_.g;
    const Vec3 Ai = du.segment<3>(3 * i) + dz.segment<3>(3 * i) -
                    f_eq * kE3;  // u_i* = -f_i* e3
    const Rotation& Ri = s.quads[i].R;
    const double fi = -Ai.dot(Ri.matrix() * kE3);
    const Rotation Rc = computed_attitude(Ai, b1d_[i]);
    push_history(rc_history_[i], Rc);
    const AttitudeRates rates = lagged_rates(rc_history_[i], fd_step_);

    const Vec3 e_R = attitude_error_identity(Ri, Rc);
    const Vec3 e_Om =
        angular_velocity_error(s.quads[i].Omega, Ri, Rc, rates.Omega_c);
    const Mat3 RtRc = Ri.matrix().transpose() * Rc.matrix();
    const Vec3 w = RtRc * rates.Omega_c;
    Vec3 Mi = -gains_.kR * e_R - gains_.kOmega * e_Om +
              w.cross(model_.quads[i].J * w) +
              model_.quads[i].J * (RtRc * rates.dOmega_c);
    if (use_integral_) {
      Mi -= gains_.kI * a.e_I_quads[i];
      r.de_I[i] = e_Om + gains_.c2 * e_R;
    }

    r.out[i] = saturate_rotors(fi, Mi, model_.quads[i]);
    r.aux[i].Rc = Rc;
    r.aux[i].psi = psi_identity(Ri, Rc);
    r.aux[i].e_R = e_R;
    r.aux[i].e_Omega = e_Om;
    r.aux[i].e_x = s.x0 - x0d_;
    r.aux[i].e_v = s.v0;
  }

  if (use_integral_) {
    VecX z1(2 * xs.size());
    z1 << xs, xds;
    r.de_bx = PB_t_ * z1;
  } else {
    r.de_bx = VecX::Zero(xs.size());
  }
  return r;
}

}  // namespace slung
