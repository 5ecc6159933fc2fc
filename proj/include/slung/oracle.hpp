#pragma once

#include <functional>
#include <vector>

#include "slung/dynamics.hpp"

namespace slung {

// Independent cross-checks built on different derivations than the
// production models: minimal-coordinate integration, finite differences,
// and energy audits.

// Base body (mass m) under a constant applied force with one spherical
// pendulum (mass m1, length l) attached, integrated in spherical angles
// (theta from the downward vertical, phi azimuth). Derived from the
// generalized-coordinate Lagrangian, nothing shared with the chain assembly.
struct PendulumRefConfig {
  double m = 1.0;
  double m1 = 0.1;
  double l = 0.1;
  double g = kDefaultGravity;
  bool pinned = false;    // fix the base instead of applying a force
  Vec3 force = Vec3::Zero();  // constant applied force on the base (inertial)
};

struct PendulumRefState {
  Vec3 xb = Vec3::Zero();
  Vec3 vb = Vec3::Zero();
  double theta = 0, phi = 0;
  double theta_dot = 0, phi_dot = 0;
};

struct PendulumRefSample {
  double t;
  PendulumRefState s;
};

// Direction and link angular velocity for comparison with the chain model.
Vec3 pendulum_ref_direction(const PendulumRefState& s);
Vec3 pendulum_ref_omega(const PendulumRefState& s);
PendulumRefState pendulum_ref_from_bearing(const Vec3& xb, const Vec3& vb,
                                           const Bearing& b);

// RK4 at fixed dt. Throws GimbalNear when sin(theta) drops below 1e-3 while
// the azimuthal rate matters (the chart breaks down there).
std::vector<PendulumRefSample> spherical_pendulum_reference(
    const PendulumRefState& initial, const PendulumRefConfig& cfg,
    double t_final, double dt);

// Central-difference Jacobian of a generic vector map.
MatX finite_difference_jacobian(
    const std::function<VecX(const VecX&)>& f, const VecX& x0, double eps);

// Reduced-coordinate charts about the hanging equilibrium; both return the
// time derivative of z = [x; xdot] for the simplified (force-driven) models.
// Used to validate the analytic linearizations by finite differences.
VecX chain_reduced_dynamics(const ChainModel& model, const Vec3& xd,
                            const VecX& z, const Vec3& du);
VecX multi_reduced_dynamics(const MultiModel& model, const Vec3& x0d,
                            const VecX& z, const VecX& du);

// max |E(t) - E(0)| / (|E(0)| + 1) over a sampled energy series.
double energy_drift(const std::vector<double>& total_energy);

}  // namespace slung
