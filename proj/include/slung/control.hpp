#pragma once

#include <array>
#include <functional>
#include <optional>
#include <vector>

#include "slung/dynamics.hpp"
#include "slung/linearize.hpp"

namespace slung {

// ---------------------------------------------------------------------------
// Commands

struct AttitudeCommand {
  std::function<Rotation(double)> Rd;
  std::function<Vec3(double)> Omega_d;
  std::function<Vec3(double)> dOmega_d;
};

struct PositionCommand {
  std::function<Vec3(double)> xd;
  std::function<Vec3(double)> dxd;
  std::function<Vec3(double)> ddxd;
  Vec3 b1d = Vec3(1, 0, 0);
};

// ---------------------------------------------------------------------------
// Gains and controller bookkeeping

struct Gains {
  double kx = 0, kv = 0, kR = 0, kOmega = 0, c1 = 0, c2 = 0;
  double gamma_x = 0, gamma_R = 0;
  double kI = 0, kz = 0, sigma = 0;
  double B_theta = 0, B_Wx = 0, B1 = 0;
  MatX K_x, K_xdot, K_z;  // stacked gains (3 x D per quadrotor row block)
};

// Estimator/integrator state carried across steps by the simulator.
struct AdaptiveState {
  VecX theta_x;  // bounded by B_theta through the projection law
  VecX theta_R;
  Vec3 e_I = Vec3::Zero();
  VecX e_bx;                    // Lyapunov-weighted translational integral
  std::vector<Vec3> e_I_quads;  // per-quadrotor attitude integrals
};

struct ControlOutput {
  double f = 0;
  Vec3 M = Vec3::Zero();
  std::array<double, 4> rotor_thrusts{};
  bool saturated = false;
};

// Tracking-error snapshot recorded alongside the control.
struct ControlAux {
  Rotation Rc;
  double psi = 0;
  Vec3 e_R = Vec3::Zero();
  Vec3 e_Omega = Vec3::Zero();
  Vec3 e_x = Vec3::Zero();
  Vec3 e_v = Vec3::Zero();
};

// ---------------------------------------------------------------------------
// Primitive operations

/// Attitude whose third body axis carries the thrust: third column is
/// -A/||A||, first column the normalized projection of b1d onto the plane
/// normal to it. Throws DegenerateThrust / ParallelHeading.
Rotation computed_attitude(const Vec3& A_des, const Vec3& b1d);

/// Commanded angular velocity and acceleration from three attitude samples
/// spaced h apart (central differences; O(h^2)).
struct AttitudeRates {
  Vec3 Omega_c = Vec3::Zero();
  Vec3 dOmega_c = Vec3::Zero();
};
AttitudeRates computed_attitude_rates(const Rotation& prev, const Rotation& at,
                                      const Rotation& next, double h);

/// Moment law for attitude tracking with the adaptive compensation term.
struct AttitudeControlResult {
  Vec3 M;
  VecX dtheta_R;
  Vec3 e_R, e_Omega;
  double psi = 0;
};
AttitudeControlResult attitude_control(const SingleQuadState& s,
                                       const Rotation& Rd, const Vec3& Omega_d,
                                       const Vec3& dOmega_d,
                                       const QuadParams& quad, const Gains& g,
                                       const VecX& theta_R, bool adaptive);

/// Projection adaptive law for the translational estimate; keeps
/// ||theta_x|| <= B_theta.
VecX adaptive_law_projection(const VecX& theta_x, const Vec3& e_v,
                             const Vec3& e_x, double gamma_x, double c1,
                             double B_theta);

/// Plus-configuration mixer: rotors 1/3 on +-b1 at arm length d, 2/4 on +-b2,
/// reaction torque (-1)^i c_tau_f f_i about b3.
std::array<double, 4> rotor_mix(double f, const Vec3& M, double d,
                                double c_tau_f);
std::pair<double, Vec3> rotor_unmix(const std::array<double, 4>& thrusts,
                                    double d, double c_tau_f);

/// Mix, clamp each rotor to [0, f_max] (f_max <= 0 disables the cap), unmix.
ControlOutput saturate_rotors(double f, const Vec3& M, const QuadParams& quad);

// ---------------------------------------------------------------------------
// Controllers. Each is a deterministic map (t, state, adaptive) ->
// (output, adaptive rates); commanded-attitude rates are finite-differenced
// over the controller's own step history, so instances are per-rollout.

struct SingleControlResult {
  ControlOutput out;
  ControlAux aux;
  VecX dtheta_x, dtheta_R;
};

class AttitudeModeController {
 public:
  AttitudeModeController(QuadParams quad, Gains gains, AttitudeCommand cmd,
                         double thrust_cmd, bool adaptive);
  SingleControlResult step(double t, const SingleQuadState& s,
                           const AdaptiveState& a);

 private:
  QuadParams quad_;
  Gains gains_;
  AttitudeCommand cmd_;
  double thrust_cmd_;
  bool adaptive_;
};

class PositionModeController {
 public:
  PositionModeController(QuadParams quad, Gains gains, PositionCommand cmd,
                         double fd_step, bool adaptive,
                         double g = kDefaultGravity);
  SingleControlResult step(double t, const SingleQuadState& s,
                           const AdaptiveState& a);

 private:
  QuadParams quad_;
  Gains gains_;
  PositionCommand cmd_;
  double fd_step_;
  bool adaptive_;
  double g_;
  std::vector<Rotation> rc_history_;
};

struct ChainControlResult {
  ControlOutput out;
  ControlAux aux;
  Vec3 de_I;
  VecX de_bx;
};

class ChainStabilizationController {
 public:
  // PB_t is (P * Bss)^T, the weight of the translational integral; pass an
  // empty matrix (with use_integral = false) to disable both integral terms.
  ChainStabilizationController(ChainModel model, Gains gains, Vec3 xd,
                               Vec3 b1d, MatX PB_t, double fd_step,
                               bool use_integral);
  ChainControlResult step(double t, const ChainState& s,
                          const AdaptiveState& a);

  VecX reduced_state(const ChainState& s) const;      // [x - xd; C^T(e3 x q)]
  VecX reduced_velocity(const ChainState& s) const;   // [v; C^T omega]

 private:
  ChainModel model_;
  Gains gains_;
  Vec3 xd_, b1d_;
  MatX PB_t_;
  double fd_step_;
  bool use_integral_;
  std::vector<Rotation> rc_history_;
};

struct MultiControlResult {
  std::vector<ControlOutput> out;
  std::vector<ControlAux> aux;
  std::vector<Vec3> de_I;
  VecX de_bx;
  double psi0 = 0;  // payload attitude error about identity
};

class MultiPayloadController {
 public:
  MultiPayloadController(MultiModel model, Gains gains, Vec3 x0d,
                         std::vector<Vec3> b1d, MatX PB_t, double fd_step,
                         bool use_integral);
  MultiControlResult step(double t, const MultiQuadState& s,
                          const AdaptiveState& a);

  VecX reduced_state(const MultiQuadState& s) const;
  VecX reduced_velocity(const MultiQuadState& s) const;

 private:
  MultiModel model_;
  Gains gains_;
  Vec3 x0d_;
  std::vector<Vec3> b1d_;
  MatX PB_t_;
  double fd_step_;
  bool use_integral_;
  std::vector<std::vector<Rotation>> rc_history_;
};

VecX sat_componentwise(const VecX& y, double sigma);

}  // namespace slung
