#include "slung/dynamics.hpp"

#include <algorithm>
#include <cmath>

namespace slung {

namespace {

const Vec3 kE3{0, 0, 1};  // gravity direction

// Dense LU with a pivot-threshold singularity check.
VecX lu_solve(const MatX& A, const VecX& b, double* rcond_out) {
  Eigen::PartialPivLU<MatX> lu(A);
  const VecX diag = lu.matrixLU().diagonal().cwiseAbs();
  if (diag.minCoeff() < 1e-12) {
    throw SingularMass("mass-matrix solve: pivot " +
                       std::to_string(diag.minCoeff()));
  }
  if (rcond_out != nullptr) *rcond_out = lu.rcond();
  return lu.solve(b);
}

}  // namespace

void QuadParams::validate() const {
  if (!(m > 0)) throw ValidationError("m > 0");
  if (!(d > 0)) throw ValidationError("d > 0");
  if (!(c_tau_f > 0)) throw ValidationError("c_tau_f > 0");
  check_spd(J, "J");
}

void CableParams::validate(bool require_nonempty) const {
  if (link_masses.size() != link_lengths.size()) {
    throw ValidationError("link_masses and link_lengths must match in length");
  }
  if (require_nonempty && link_masses.empty()) {
    throw ValidationError("cable needs at least one link");
  }
  for (double m : link_masses)
    if (!(m > 0)) throw ValidationError("link masses must be > 0");
  for (double l : link_lengths)
    if (!(l > 0)) throw ValidationError("link lengths must be > 0");
}

void PayloadParams::validate() const {
  if (!(m0 > 0)) throw ValidationError("m0 > 0");
  check_spd(J0, "J0");
  if (attach_points.empty())
    throw ValidationError("payload needs attachment points");
}

void DisturbanceSet::validate() const {
  if (!delta_x.allFinite() || !delta_R.allFinite() || !theta_x.allFinite() ||
      !theta_R.allFinite()) {
    throw ValidationError("disturbance entries must be finite");
  }
  if (W_mode == UncertaintyMode::kIdentity &&
      (theta_x.size() != 3 || theta_R.size() != 3)) {
    throw ValidationError("identity uncertainty requires 3-dim theta");
  }
}

Vec3 DisturbanceSet::force_bias() const {
  if (W_mode == UncertaintyMode::kIdentity) return theta_x.head<3>();
  return Vec3::Zero();
}

Vec3 DisturbanceSet::moment_bias() const {
  if (W_mode == UncertaintyMode::kIdentity) return theta_R.head<3>();
  return Vec3::Zero();
}

void check_spd(const Mat3& m, const char* name) {
  if ((m - m.transpose()).norm() > 1e-9 * std::max(1.0, m.norm())) {
    throw ValidationError(std::string(name) + " must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Mat3> es(m);
  if (es.eigenvalues().minCoeff() <= 0) {
    throw ValidationError(std::string(name) + " must be positive-definite");
  }
}

// ---------------------------------------------------------------------------

ChainInertia chain_inertia_constants(const QuadParams& quad,
                                     const CableParams& cable) {
  const int n = cable.n();
  ChainInertia c;
  c.M0i = VecX::Zero(n);
  c.Mij = MatX::Zero(n, n);

  // tail(i) = sum of masses from link i (1-based) down to the payload
  std::vector<double> tail(n + 1, 0.0);
  for (int i = n - 1; i >= 0; --i)
    tail[i] = tail[i + 1] + cable.link_masses[i];

  c.M00 = quad.m + tail[0];
  for (int i = 0; i < n; ++i) c.M0i(i) = tail[i] * cable.link_lengths[i];
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      c.Mij(i, j) = tail[std::max(i, j)] * cable.link_lengths[i] *
                    cable.link_lengths[j];
      c.Mij(j, i) = c.Mij(i, j);
    }
  }
  return c;
}

MultiMass multi_mass_constants(const PayloadParams& payload,
                               const std::vector<QuadParams>& quads,
                               const std::vector<CableParams>& cables) {
  MultiMass m;
  m.M_T = payload.m0;
  m.M_iT.resize(quads.size());
  m.M_0ij.resize(quads.size());
  for (size_t i = 0; i < quads.size(); ++i) {
    double cable_mass = 0;
    for (double mm : cables[i].link_masses) cable_mass += mm;
    m.M_iT[i] = quads[i].m + cable_mass;
    m.M_T += m.M_iT[i];

    const int ni = cables[i].n();
    m.M_0ij[i].resize(ni);
    double prefix = quads[i].m;  // masses above link j: quad + links 1..j-1
    for (int j = 0; j < ni; ++j) {
      m.M_0ij[i][j] = prefix;
      prefix += cables[i].link_masses[j];
    }
  }
  return m;
}

ChainModel ChainModel::make(const QuadParams& q, const CableParams& c,
                            double g) {
  ChainModel m;
  m.quad = q;
  m.cable = c;
  m.g = g;
  m.inertia = chain_inertia_constants(q, c);
  return m;
}

int MultiModel::total_links() const {
  int n = 0;
  for (const auto& c : cables) n += c.n();
  return n;
}

MultiModel MultiModel::make(const PayloadParams& p,
                            const std::vector<QuadParams>& q,
                            const std::vector<CableParams>& c, double g) {
  MultiModel m;
  m.payload = p;
  m.quads = q;
  m.cables = c;
  m.g = g;
  m.mass = multi_mass_constants(p, q, c);
  return m;
}

// ---------------------------------------------------------------------------

SingleQuadDeriv single_quad_derivative(const SingleQuadState& s,
                                       const SingleModel& model, double f,
                                       const Vec3& M,
                                       const DisturbanceSet& dist) {
  const QuadParams& q = model.quad;
  SingleQuadDeriv d;
  d.dx = s.v;
  d.dv = model.g * kE3 - (f / q.m) * (s.R.matrix() * kE3) +
         dist.force_bias() / q.m;
  d.Omega = s.Omega;
  d.dOmega = q.J.ldlt().solve(M + dist.moment_bias() -
                              s.Omega.cross(q.J * s.Omega));
  return d;
}

ChainEomSystem chain_eom_forced(const std::vector<Bearing>& links,
                                const ChainModel& model, const Vec3& u,
                                const Vec3& Omega, const Vec3& M,
                                const Vec3& delta_R) {
  const int n = static_cast<int>(links.size());
  const ChainInertia& MI = model.inertia;
  const int dim = 3 * n + 3;

  ChainEomSystem sys;
  sys.lhs = MatX::Zero(dim, dim);
  sys.rhs = VecX::Zero(dim);

  std::vector<Mat3> qh(n);
  for (int i = 0; i < n; ++i) qh[i] = hat(links[i].q);

  sys.lhs.block<3, 3>(0, 0) = MI.M00 * Mat3::Identity();
  for (int i = 0; i < n; ++i) {
    sys.lhs.block<3, 3>(0, 3 + 3 * i) = -MI.M0i(i) * qh[i];
    sys.lhs.block<3, 3>(3 + 3 * i, 0) = MI.M0i(i) * qh[i];
    sys.lhs.block<3, 3>(3 + 3 * i, 3 + 3 * i) =
        MI.Mij(i, i) * Mat3::Identity();
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      sys.lhs.block<3, 3>(3 + 3 * i, 3 + 3 * j) = -MI.Mij(i, j) * qh[i] * qh[j];
    }
  }

  Vec3 row0 = u + MI.M00 * model.g * kE3;
  for (int j = 0; j < n; ++j)
    row0 += MI.M0i(j) * links[j].omega.squaredNorm() * links[j].q;
  sys.rhs.head<3>() = row0;
  for (int i = 0; i < n; ++i) {
    Vec3 row = model.g * MI.M0i(i) * (qh[i] * kE3);
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      row += MI.Mij(i, j) * links[j].omega.squaredNorm() * (qh[i] * links[j].q);
    }
    sys.rhs.segment<3>(3 + 3 * i) = row;
  }

  sys.dOmega = model.quad.J.ldlt().solve(
      M + delta_R - Omega.cross(model.quad.J * Omega));
  return sys;
}

ChainEomSystem chain_eom(const ChainState& s, const ChainModel& model,
                         double f, const Vec3& M, const DisturbanceSet& dist) {
  const Vec3 u =
      -f * (s.R.matrix() * kE3) + dist.delta_x + dist.force_bias();
  return chain_eom_forced(s.links, model, u, s.Omega, M,
                          dist.delta_R + dist.moment_bias());
}

namespace {

ChainDeriv solve_chain_system(const ChainState& s, const ChainEomSystem& sys) {
  const int n = static_cast<int>(s.links.size());
  ChainDeriv d;
  const VecX sol = lu_solve(sys.lhs, sys.rhs, &d.rcond);
  d.dx = s.v;
  d.dv = sol.head<3>();
  d.Omega = s.Omega;
  d.dOmega = sys.dOmega;
  d.dq.resize(n);
  d.domega.resize(n);
  for (int i = 0; i < n; ++i) {
    d.dq[i] = s.links[i].qdot();
    d.domega[i] = sol.segment<3>(3 + 3 * i);
  }
  return d;
}

}  // namespace

ChainDeriv solve_chain(const ChainState& s, const ChainModel& model, double f,
                       const Vec3& M, const DisturbanceSet& dist) {
  return solve_chain_system(s, chain_eom(s, model, f, M, dist));
}

ChainDeriv solve_chain_forced(const ChainState& s, const ChainModel& model,
                              const Vec3& u, const Vec3& M,
                              const Vec3& delta_R) {
  return solve_chain_system(
      s, chain_eom_forced(s.links, model, u, s.Omega, M, delta_R));
}

// ---------------------------------------------------------------------------

namespace {

MultiEomSystem multi_eom_impl(const MultiQuadState& s, const MultiModel& model,
                              const std::vector<Vec3>& u, const Vec3& delta_x,
                              const std::vector<Vec3>* M,
                              const Vec3& delta_R) {
  const int nq = model.n_quads();
  const int dim = 6 + 3 * model.total_links();
  const Mat3 R0 = s.R0.matrix();
  const MultiMass& mm = model.mass;

  MultiEomSystem sys;
  sys.N = MatX::Zero(dim, dim);
  sys.P = VecX::Zero(dim);

  // rho in the inertial frame only ever appears as R0 rho^ or rho^ R0^T.
  std::vector<Mat3> rho_hat(nq);
  for (int i = 0; i < nq; ++i)
    rho_hat[i] = hat(model.payload.attach_points[i]);

  Mat3 Jbar = model.payload.J0;
  for (int i = 0; i < nq; ++i)
    Jbar -= mm.M_iT[i] * rho_hat[i] * rho_hat[i];

  // Block row/column offsets per cable.
  std::vector<int> off(nq);
  int acc = 6;
  for (int i = 0; i < nq; ++i) {
    off[i] = acc;
    acc += 3 * model.cables[i].n();
  }

  sys.N.block<3, 3>(0, 0) = mm.M_T * Mat3::Identity();
  Mat3 Nx0W = Mat3::Zero();
  for (int i = 0; i < nq; ++i) Nx0W -= mm.M_iT[i] * R0 * rho_hat[i];
  sys.N.block<3, 3>(0, 3) = Nx0W;
  sys.N.block<3, 3>(3, 0) = Nx0W.transpose();
  sys.N.block<3, 3>(3, 3) = Jbar;

  const Mat3 Om0h = hat(s.Omega0);
  Vec3 Px0 = mm.M_T * model.g * kE3 + delta_x;
  Vec3 POm0 = -s.Omega0.cross(Jbar * s.Omega0);
  for (int i = 0; i < nq; ++i) {
    Px0 += u[i] - mm.M_iT[i] * R0 * (Om0h * (Om0h * model.payload.attach_points[i]));
    POm0 += rho_hat[i] * (R0.transpose() *
                          (u[i] + mm.M_iT[i] * model.g * kE3));
  }
  sys.P.head<3>() = Px0;
  sys.P.segment<3>(3) = POm0;

  for (int i = 0; i < nq; ++i) {
    const int ni = model.cables[i].n();
    const auto& links = s.quads[i].links;
    for (int j = 0; j < ni; ++j) {
      const double lij = model.cables[i].link_lengths[j];
      const double M0ij = mm.M_0ij[i][j];
      const double cij = M0ij * lij;
      const Mat3 qh = hat(links[j].q);
      const Mat3 qh2 = qh * qh;
      const int r = off[i] + 3 * j;

      sys.N.block<3, 3>(0, r) = -cij * Mat3::Identity();
      sys.N.block<3, 3>(3, r) = -cij * rho_hat[i] * R0.transpose();
      sys.N.block<3, 3>(r, 0) = -M0ij * qh2;
      sys.N.block<3, 3>(r, 3) = M0ij * qh2 * R0 * rho_hat[i];
      for (int k = 0; k < ni; ++k) {
        const double lik = model.cables[i].link_lengths[k];
        const double coeff = mm.M_0ij[i][std::min(j, k)] * lik;
        if (k == j) {
          sys.N.block<3, 3>(r, r) = -cij * Mat3::Identity();
        } else {
          sys.N.block<3, 3>(r, off[i] + 3 * k) = coeff * qh2;
        }
      }
      sys.P.segment<3>(r) =
          -qh2 * (u[i] + M0ij * model.g * kE3) +
          M0ij * qh2 * (R0 * (Om0h * (Om0h * model.payload.attach_points[i]))) +
          cij * links[j].qdot().squaredNorm() * links[j].q;
    }
  }

  sys.dOmega_quads.resize(nq);
  for (int i = 0; i < nq; ++i) {
    const Vec3 Mi = (M != nullptr) ? (*M)[i] : Vec3::Zero();
    const Vec3 Om = s.quads[i].Omega;
    sys.dOmega_quads[i] = model.quads[i].J.ldlt().solve(
        Mi + delta_R - Om.cross(model.quads[i].J * Om));
  }
  return sys;
}

}  // namespace

MultiEomSystem multi_eom(const MultiQuadState& s, const MultiModel& model,
                         const std::vector<double>& f,
                         const std::vector<Vec3>& M,
                         const DisturbanceSet& dist) {
  std::vector<Vec3> u(model.n_quads());
  for (int i = 0; i < model.n_quads(); ++i)
    u[i] = -f[i] * (s.quads[i].R.matrix() * kE3);
  return multi_eom_impl(s, model, u, dist.delta_x, &M, dist.delta_R);
}

MultiEomSystem multi_eom_forced(const MultiQuadState& s,
                                const MultiModel& model,
                                const std::vector<Vec3>& u,
                                const Vec3& delta_x) {
  return multi_eom_impl(s, model, u, delta_x, nullptr, Vec3::Zero());
}

namespace {

MultiDeriv solve_multi_system(const MultiQuadState& s, const MultiModel& model,
                              const MultiEomSystem& sys) {
  const int nq = model.n_quads();
  MultiDeriv d;
  const VecX sol = lu_solve(sys.N, sys.P, &d.rcond);
  d.dx0 = s.v0;
  d.dv0 = sol.head<3>();
  d.Omega0 = s.Omega0;
  d.dOmega0 = sol.segment<3>(3);
  d.Omega_quads.resize(nq);
  d.dOmega_quads = sys.dOmega_quads;
  d.dq.resize(nq);
  d.qdd.resize(nq);
  d.domega.resize(nq);
  int r = 6;
  for (int i = 0; i < nq; ++i) {
    const int ni = model.cables[i].n();
    d.Omega_quads[i] = s.quads[i].Omega;
    d.dq[i].resize(ni);
    d.qdd[i].resize(ni);
    d.domega[i].resize(ni);
    for (int j = 0; j < ni; ++j) {
      const Bearing& b = s.quads[i].links[j];
      d.dq[i][j] = b.qdot();
      d.qdd[i][j] = sol.segment<3>(r);
      d.domega[i][j] = b.q.cross(d.qdd[i][j]);
      r += 3;
    }
  }
  return d;
}

}  // namespace

MultiDeriv solve_multi(const MultiQuadState& s, const MultiModel& model,
                       const std::vector<double>& f,
                       const std::vector<Vec3>& M,
                       const DisturbanceSet& dist) {
  return solve_multi_system(s, model, multi_eom(s, model, f, M, dist));
}

MultiDeriv solve_multi_forced(const MultiQuadState& s, const MultiModel& model,
                              const std::vector<Vec3>& u,
                              const Vec3& delta_x) {
  return solve_multi_system(s, model,
                            multi_eom_forced(s, model, u, delta_x));
}

// ---------------------------------------------------------------------------

Energy energy(const SingleQuadState& s, const SingleModel& model) {
  Energy e;
  e.T = 0.5 * model.quad.m * s.v.squaredNorm() +
        0.5 * s.Omega.dot(model.quad.J * s.Omega);
  e.V = -model.quad.m * model.g * kE3.dot(s.x);
  return e;
}

Energy energy(const ChainState& s, const ChainModel& model) {
  const int n = static_cast<int>(s.links.size());
  const ChainInertia& MI = model.inertia;
  Energy e;
  e.T = 0.5 * MI.M00 * s.v.squaredNorm() +
        0.5 * s.Omega.dot(model.quad.J * s.Omega);
  for (int i = 0; i < n; ++i) {
    e.T += MI.M0i(i) * s.v.dot(s.links[i].qdot());
    for (int j = 0; j < n; ++j)
      e.T += 0.5 * MI.Mij(i, j) * s.links[i].qdot().dot(s.links[j].qdot());
  }
  e.V = -MI.M00 * model.g * kE3.dot(s.x);
  for (int i = 0; i < n; ++i)
    e.V -= model.g * MI.M0i(i) * kE3.dot(s.links[i].q);
  return e;
}

Energy energy(const MultiQuadState& s, const MultiModel& model) {
  const int nq = model.n_quads();
  const Mat3 R0 = s.R0.matrix();
  const MultiMass& mm = model.mass;
  Energy e;
  e.T = 0.5 * mm.M_T * s.v0.squaredNorm() +
        0.5 * s.Omega0.dot(model.payload.J0 * s.Omega0);
  e.V = -mm.M_T * model.g * kE3.dot(s.x0);
  for (int i = 0; i < nq; ++i) {
    const Vec3 rho = model.payload.attach_points[i];
    const Vec3 att_vel = R0 * s.Omega0.cross(rho);
    e.T += 0.5 * mm.M_iT[i] * att_vel.squaredNorm() +
           mm.M_iT[i] * s.v0.dot(att_vel) +
           0.5 * s.quads[i].Omega.dot(model.quads[i].J * s.quads[i].Omega);
    e.V -= mm.M_iT[i] * model.g * kE3.dot(R0 * rho);
    const int ni = model.cables[i].n();
    for (int j = 0; j < ni; ++j) {
      const double lij = model.cables[i].link_lengths[j];
      const Vec3 qdj = s.quads[i].links[j].qdot();
      e.T -= mm.M_0ij[i][j] * lij * (s.v0 + att_vel).dot(qdj);
      for (int k = 0; k < ni; ++k) {
        e.T += 0.5 * mm.M_0ij[i][std::min(j, k)] * lij *
               model.cables[i].link_lengths[k] *
               qdj.dot(s.quads[i].links[k].qdot());
      }
      e.V += mm.M_0ij[i][j] * lij * model.g * kE3.dot(s.quads[i].links[j].q);
    }
  }
  return e;
}

}  // namespace slung
