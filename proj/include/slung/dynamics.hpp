#pragma once

#include <Eigen/Dense>
#include <vector>

#include "slung/params.hpp"
#include "slung/state.hpp"

namespace slung {

using MatX = Eigen::MatrixXd;
using VecX = Eigen::VectorXd;

// ---------------------------------------------------------------------------
// Inertia constants

// Quadrotor-with-chain: M00 = m + sum m_i, M0i = (sum_{a>=i} m_a) l_i,
// Mij = (sum_{a>=max(i,j)} m_a) l_i l_j.
struct ChainInertia {
  double M00 = 0;
  VecX M0i;
  MatX Mij;
};
ChainInertia chain_inertia_constants(const QuadParams& quad,
                                     const CableParams& cable);

// Payload system: M_T = m0 + sum M_iT, M_iT = m_i + sum_j m_ij,
// M_0ij = m_i + sum_{a<j} m_ia (masses between the quadrotor and link j).
struct MultiMass {
  double M_T = 0;
  std::vector<double> M_iT;
  std::vector<std::vector<double>> M_0ij;
};
MultiMass multi_mass_constants(const PayloadParams& payload,
                               const std::vector<QuadParams>& quads,
                               const std::vector<CableParams>& cables);

// ---------------------------------------------------------------------------
// Model bundles (parameters + precomputed constants + gravity)

struct SingleModel {
  QuadParams quad;
  double g = kDefaultGravity;
};

struct ChainModel {
  QuadParams quad;
  CableParams cable;
  double g = kDefaultGravity;
  ChainInertia inertia;

  static ChainModel make(const QuadParams& q, const CableParams& c,
                         double g = kDefaultGravity);
};

struct MultiModel {
  PayloadParams payload;
  std::vector<QuadParams> quads;
  std::vector<CableParams> cables;
  double g = kDefaultGravity;
  MultiMass mass;

  int n_quads() const { return static_cast<int>(quads.size()); }
  int total_links() const;
  static MultiModel make(const PayloadParams& p,
                         const std::vector<QuadParams>& q,
                         const std::vector<CableParams>& c,
                         double g = kDefaultGravity);
};

// ---------------------------------------------------------------------------
// Equations of motion

struct SingleQuadDeriv {
  Vec3 dx, dv;
  Vec3 Omega;  // body rate driving Rdot = R hat(Omega)
  Vec3 dOmega;
};
SingleQuadDeriv single_quad_derivative(const SingleQuadState& s,
                                       const SingleModel& model, double f,
                                       const Vec3& M,
                                       const DisturbanceSet& dist);

// Angular-velocity form of the chain equations: unknowns [xdd; domega_i].
// Diagonal blocks are M_ii I3, so the solution automatically keeps
// q_i . domega_i = 0; the quadrotor rotational equation stays decoupled.
struct ChainEomSystem {
  MatX lhs;   // (3n+3) x (3n+3)
  VecX rhs;   // 3n+3
  Vec3 dOmega;
};
// u is the applied translational force on the quadrotor in the inertial
// frame (the -f R e3 + delta_x combination, or the fictitious input).
ChainEomSystem chain_eom_forced(const std::vector<Bearing>& links,
                                const ChainModel& model, const Vec3& u,
                                const Vec3& Omega, const Vec3& M,
                                const Vec3& delta_R);
ChainEomSystem chain_eom(const ChainState& s, const ChainModel& model,
                         double f, const Vec3& M, const DisturbanceSet& dist);

struct ChainDeriv {
  Vec3 dx, dv;
  Vec3 Omega;
  Vec3 dOmega;
  std::vector<Vec3> dq;      // omega_i x q_i
  std::vector<Vec3> domega;
  double rcond = 1.0;  // LU reciprocal condition estimate of the solve
};
ChainDeriv solve_chain(const ChainState& s, const ChainModel& model, double f,
                       const Vec3& M, const DisturbanceSet& dist);
ChainDeriv solve_chain_forced(const ChainState& s, const ChainModel& model,
                              const Vec3& u, const Vec3& M,
                              const Vec3& delta_R);

// Payload-system equations N xdd = P with unknowns ordered
// [xdd0; dOmega0; qdd_ij (by quadrotor, link-major)]; D = 6 + 3 sum n_i.
// Quadrotor attitude dynamics are decoupled and returned separately.
struct MultiEomSystem {
  MatX N;
  VecX P;
  std::vector<Vec3> dOmega_quads;
};
MultiEomSystem multi_eom(const MultiQuadState& s, const MultiModel& model,
                         const std::vector<double>& f,
                         const std::vector<Vec3>& M,
                         const DisturbanceSet& dist);
// Fictitious-input form: u_i replaces -f_i R_i e3.
MultiEomSystem multi_eom_forced(const MultiQuadState& s,
                                const MultiModel& model,
                                const std::vector<Vec3>& u,
                                const Vec3& delta_x);

struct MultiDeriv {
  Vec3 dx0, dv0;
  Vec3 Omega0;
  Vec3 dOmega0;
  std::vector<Vec3> Omega_quads;
  std::vector<Vec3> dOmega_quads;
  std::vector<std::vector<Vec3>> dq;      // per quad, per link
  std::vector<std::vector<Vec3>> qdd;     // solved second derivatives
  std::vector<std::vector<Vec3>> domega;  // q x qdd
  double rcond = 1.0;
};
MultiDeriv solve_multi(const MultiQuadState& s, const MultiModel& model,
                       const std::vector<double>& f,
                       const std::vector<Vec3>& M, const DisturbanceSet& dist);
MultiDeriv solve_multi_forced(const MultiQuadState& s, const MultiModel& model,
                              const std::vector<Vec3>& u, const Vec3& delta_x);

// ---------------------------------------------------------------------------
// Energy

struct Energy {
  double T = 0;
  double V = 0;
  double total() const { return T + V; }
};
Energy energy(const SingleQuadState& s, const SingleModel& model);
Energy energy(const ChainState& s, const ChainModel& model);
Energy energy(const MultiQuadState& s, const MultiModel& model);

}  // namespace slung
