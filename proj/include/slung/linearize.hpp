#pragma once

#include <Eigen/Dense>

#include "slung/dynamics.hpp"

namespace slung {

// Second-order model M xdd + G x = B du about the hanging equilibrium.
// Reduced coordinates drop the vertical component of each link variation:
// chain state [dx; C^T xi_i], payload state [dx0; eta0; C^T xi_ij] with
// C = [e1, e2].
struct LinearModel {
  MatX Mmat;
  MatX Gmat;
  MatX Bmat;
  int dim() const { return static_cast<int>(Mmat.rows()); }
  int input_dim() const { return static_cast<int>(Bmat.cols()); }
};

// First-order form over z = [x; xdot].
struct StateSpace {
  MatX A;
  MatX B;
};

LinearModel linearize_chain(const QuadParams& quad, const CableParams& cable,
                            double g = kDefaultGravity);
LinearModel linearize_multi(const PayloadParams& payload,
                            const std::vector<QuadParams>& quads,
                            const std::vector<CableParams>& cables,
                            double g = kDefaultGravity);

// A = [[0, I], [-M^-1 (G + B Kx), -M^-1 B Kxd]], B = [[0], [M^-1]].
// Pass empty gains for the open-loop matrices.
StateSpace state_space(const LinearModel& lm, const MatX& K_x,
                       const MatX& K_xdot);

bool is_hurwitz(const MatX& A, double margin = 1e-12);

// Solves A^T P + P A = -Q for SPD P. Kronecker path below the dimension
// threshold, Schur back-substitution above. Throws NotHurwitz.
MatX solve_lyapunov(const MatX& A, const MatX& Q);
MatX solve_lyapunov_kron(const MatX& A, const MatX& Q);       // n <= ~40
MatX solve_lyapunov_schur(const MatX& A, const MatX& Q);

// Continuous-time LQR for the linear model (open loop, K = 0). Returns the
// position/rate gain blocks; state_space(lm, K_x, K_xdot) is Hurwitz on
// success. Throws NotStabilizable.
struct LqrGains {
  MatX K_x;
  MatX K_xdot;
};
LqrGains synthesize_gains_lqr(const LinearModel& lm, const MatX& Qw,
                              const MatX& Rw);

// Riccati solution for z' = Az + Bu (used by the LQR synthesis and tests).
MatX solve_care(const MatX& A, const MatX& B, const MatX& Qw, const MatX& Rw);

// ---------------------------------------------------------------------------
// Gain-condition reports. These evaluate the sufficient stability conditions
// as stated; the example gain sets may violate the conservative bounds, so
// the result is a report, not an assertion.

struct AttitudeGainReport {
  double B2 = 0;
  double bound_lambda = 0;   // sqrt(kR lam_min)/lam_max
  double bound_damping = 0;  // 4 kOm / (8 kR lam_max + (kOm + B2)^2)
  double c2 = 0;
  bool pass = false;
  double margin = 0;  // min bound - c2
};
AttitudeGainReport check_attitude_gain_condition(const Mat3& J, double kR,
                                                 double kOmega, double c2,
                                                 double Omega_d_max);

struct PositionGainReport {
  double alpha = 0;
  double c1_bound = 0;
  bool c1_pass = false;
  Eigen::Matrix2d W1, W12, W2;
  double lm_W1 = 0, lm_W2 = 0, W12_norm = 0;
  double coupling_threshold = 0;  // ||W12||^2 / (4 lm(W1))
  bool coupling_pass = false;
  AttitudeGainReport attitude;
  bool pass = false;
};
struct PositionGainBounds {
  double B_theta = 0;
  double B_Wx = 0;
  double B1 = 0;
  double Omega_d_max = 0;
  double e_x_max = 10.0;
};
struct PositionGainInputs {
  double kx = 0, kv = 0, kR = 0, kOmega = 0, c1 = 0, c2 = 0;
};
PositionGainReport check_position_gain_condition(const PositionGainInputs& k,
                                                 const Mat3& J, double m,
                                                 double psi1,
                                                 const PositionGainBounds& b);

}  // namespace slung
