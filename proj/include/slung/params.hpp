#pragma once

#include <Eigen/Dense>
#include <vector>

#include "slung/errors.hpp"
#include "slung/geometry.hpp"

namespace slung {

// SI default; overridable per scenario.
inline constexpr double kDefaultGravity = 9.81;

struct QuadParams {
  double m = 0;          // kg
  Mat3 J = Mat3::Zero();  // kg m^2, body frame
  double d = 0;          // rotor arm length, m
  double c_tau_f = 0;    // reaction torque per unit thrust, m
  double f_rotor_max = 0;  // per-rotor cap, N; <= 0 means uncapped

  void validate() const;
};

struct CableParams {
  std::vector<double> link_masses;   // kg, numbered from the supported end
  std::vector<double> link_lengths;  // m

  int n() const { return static_cast<int>(link_masses.size()); }
  // Entries must be positive and the lists equal-length; scenario-level
  // validation additionally requires n >= 1.
  void validate(bool require_nonempty = true) const;
};

struct PayloadParams {
  double m0 = 0;           // kg
  Mat3 J0 = Mat3::Zero();  // kg m^2, payload body frame
  std::vector<Vec3> attach_points;  // rho_i, payload body frame, m

  int n_quads() const { return static_cast<int>(attach_points.size()); }
  void validate() const;
};

enum class UncertaintyMode { kZero, kIdentity };

struct DisturbanceSet {
  Vec3 delta_x = Vec3::Zero();  // N, inertial
  Vec3 delta_R = Vec3::Zero();  // N m, body
  Eigen::VectorXd theta_x;      // unknown-parameter vector, dim P
  Eigen::VectorXd theta_R;
  UncertaintyMode W_mode = UncertaintyMode::kZero;

  void validate() const;

  // W_x theta_x / W_R theta_R with the implemented W choices.
  Vec3 force_bias() const;
  Vec3 moment_bias() const;
};

void check_spd(const Mat3& m, const char* name);

}  // namespace slung
