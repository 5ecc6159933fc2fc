#include "slung/linearize.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

namespace slung {

namespace {

const Vec3 kE3{0, 0, 1};

Eigen::Matrix<double, 3, 2> cmat() {
  Eigen::Matrix<double, 3, 2> C;
  C << 1, 0, 0, 1, 0, 0;
  return C;
}

}  // namespace

LinearModel linearize_chain(const QuadParams& quad, const CableParams& cable,
                            double g) {
  const int n = cable.n();
  const int dim = 3 + 2 * n;
  const ChainInertia MI = chain_inertia_constants(quad, cable);
  const auto C = cmat();
  const Mat3 e3h = hat(kE3);

  LinearModel lm;
  lm.Mmat = MatX::Zero(dim, dim);
  lm.Gmat = MatX::Zero(dim, dim);
  lm.Bmat = MatX::Zero(dim, 3);

  lm.Mmat.block<3, 3>(0, 0) = MI.M00 * Mat3::Identity();
  for (int i = 0; i < n; ++i) {
    const Eigen::Matrix<double, 3, 2> blk = -MI.M0i(i) * e3h * C;
    lm.Mmat.block<3, 2>(0, 3 + 2 * i) = blk;
    lm.Mmat.block<2, 3>(3 + 2 * i, 0) = blk.transpose();
    for (int j = 0; j < n; ++j) {
      lm.Mmat.block<2, 2>(3 + 2 * i, 3 + 2 * j) =
          MI.Mij(i, j) * Eigen::Matrix2d::Identity();
    }
    // Restoring weight: (sum of masses carried by link i) * g * l_i.
    lm.Gmat.block<2, 2>(3 + 2 * i, 3 + 2 * i) =
        g * MI.M0i(i) * Eigen::Matrix2d::Identity();
  }
  lm.Bmat.block<3, 3>(0, 0) = Mat3::Identity();
  return lm;
}

LinearModel linearize_multi(const PayloadParams& payload,
                            const std::vector<QuadParams>& quads,
                            const std::vector<CableParams>& cables,
                            double g) {
  const int nq = static_cast<int>(quads.size());
  const MultiMass mm = multi_mass_constants(payload, quads, cables);
  const auto C = cmat();
  const Mat3 e3h = hat(kE3);

  int total_links = 0;
  for (const auto& c : cables) total_links += c.n();
  const int dim = 6 + 2 * total_links;

  LinearModel lm;
  lm.Mmat = MatX::Zero(dim, dim);
  lm.Gmat = MatX::Zero(dim, dim);
  lm.Bmat = MatX::Zero(dim, 3 * nq);

  Mat3 Jbar = payload.J0;
  Mat3 Mx0W = Mat3::Zero();
  Mat3 G00 = Mat3::Zero();
  for (int i = 0; i < nq; ++i) {
    const Mat3 rh = hat(payload.attach_points[i]);
    Jbar -= mm.M_iT[i] * rh * rh;
    Mx0W -= mm.M_iT[i] * rh;
    G00 += (payload.m0 / nq) * g * rh * e3h;
  }
  lm.Mmat.block<3, 3>(0, 0) = mm.M_T * Mat3::Identity();
  lm.Mmat.block<3, 3>(0, 3) = Mx0W;
  lm.Mmat.block<3, 3>(3, 0) = Mx0W.transpose();
  lm.Mmat.block<3, 3>(3, 3) = Jbar;
  lm.Gmat.block<3, 3>(3, 3) = G00;

  int r = 6;
  for (int i = 0; i < nq; ++i) {
    const Mat3 rh = hat(payload.attach_points[i]);
    const int ni = cables[i].n();
    lm.Bmat.block<3, 3>(0, 3 * i) = Mat3::Identity();
    lm.Bmat.block<3, 3>(3, 3 * i) = rh;
    for (int j = 0; j < ni; ++j) {
      const double lij = cables[i].link_lengths[j];
      const double cij = mm.M_0ij[i][j] * lij;
      const int rj = r + 2 * j;

      const Eigen::Matrix<double, 3, 2> mx0 = cij * e3h * C;
      const Eigen::Matrix<double, 3, 2> mom = cij * rh * e3h * C;
      lm.Mmat.block<3, 2>(0, rj) = mx0;
      lm.Mmat.block<2, 3>(rj, 0) = mx0.transpose();
      lm.Mmat.block<3, 2>(3, rj) = mom;
      lm.Mmat.block<2, 3>(rj, 3) = mom.transpose();
      for (int k = 0; k < ni; ++k) {
        lm.Mmat.block<2, 2>(rj, r + 2 * k) =
            mm.M_0ij[i][std::min(j, k)] * lij * cables[i].link_lengths[k] *
            Eigen::Matrix2d::Identity();
      }
      // Hanging link under tension from the quadrotor share above it.
      lm.Gmat.block<2, 2>(rj, rj) =
          (mm.M_iT[i] + payload.m0 / nq - mm.M_0ij[i][j]) * g * lij *
          Eigen::Matrix2d::Identity();
      lm.Bmat.block<2, 3>(rj, 3 * i) = -lij * C.transpose() * e3h;
    }
    r += 2 * ni;
  }
  return lm;
}

StateSpace state_space(const LinearModel& lm, const MatX& K_x,
                       const MatX& K_xdot) {
  const int d = lm.dim();
  Eigen::PartialPivLU<MatX> lu(lm.Mmat);
  if (lu.matrixLU().diagonal().cwiseAbs().minCoeff() < 1e-12) {
    throw SingularMass("state_space: mass matrix is singular");
  }
  MatX Gcl = lm.Gmat;
  MatX damping = MatX::Zero(d, d);
  if (K_x.size() > 0) Gcl += lm.Bmat * K_x;
  if (K_xdot.size() > 0) damping = lm.Bmat * K_xdot;

  StateSpace ss;
  ss.A = MatX::Zero(2 * d, 2 * d);
  ss.A.topRightCorner(d, d).setIdentity();
  ss.A.bottomLeftCorner(d, d) = -lu.solve(Gcl);
  ss.A.bottomRightCorner(d, d) = -lu.solve(damping);
  ss.B = MatX::Zero(2 * d, d);
  ss.B.bottomRows(d) = lu.solve(MatX::Identity(d, d));
  return ss;
}

bool is_hurwitz(const MatX& A, double margin) {
  Eigen::EigenSolver<MatX> es(A, /*computeEigenvectors=*/false);
  return es.eigenvalues().real().maxCoeff() < -margin;
}

namespace {

constexpr int kLyapunovKronThreshold = 40;

void require_hurwitz(const MatX& A) {
  if (!is_hurwitz(A)) {
    throw NotHurwitz("solve_lyapunov: A has an eigenvalue with Re >= -1e-12");
  }
}

}  // namespace

MatX solve_lyapunov_kron(const MatX& A, const MatX& Q) {
  const int n = static_cast<int>(A.rows());
  MatX K = MatX::Zero(n * n, n * n);
  const MatX At = A.transpose();
  // vec(A^T P) = (I (x) A^T) vec(P); vec(P A) = (A^T (x) I) vec(P).
  for (int c = 0; c < n; ++c) K.block(c * n, c * n, n, n) += At;
  for (int bc = 0; bc < n; ++bc)
    for (int br = 0; br < n; ++br)
      K.block(br * n, bc * n, n, n).diagonal().array() += At(br, bc);
  const VecX q = Eigen::Map<const VecX>(Q.data(), n * n);
  const VecX p = Eigen::PartialPivLU<MatX>(K).solve(-q);
  MatX P = Eigen::Map<const MatX>(p.data(), n, n);
  return 0.5 * (P + P.transpose());
}

MatX solve_lyapunov_schur(const MatX& A, const MatX& Q) {
  const int n = static_cast<int>(A.rows());
  Eigen::RealSchur<MatX> schur(A);
  const MatX& T = schur.matrixT();
  const MatX& U = schur.matrixU();

  // Quasi-triangular block partition.
  std::vector<int> starts;
  std::vector<int> sizes;
  for (int i = 0; i < n;) {
    const int w = (i + 1 < n && std::abs(T(i + 1, i)) > 1e-14) ? 2 : 1;
    starts.push_back(i);
    sizes.push_back(w);
    i += w;
  }
  const int nb = static_cast<int>(starts.size());

  const MatX C = -U.transpose() * Q * U;
  MatX Y = MatX::Zero(n, n);

  // T^T Y + Y T = C, solved one block column at a time; each diagonal step is
  // a small Sylvester handled through its Kronecker form.
  for (int k = 0; k < nb; ++k) {
    const int ck = starts[k], w = sizes[k];
    MatX rhs = C.middleCols(ck, w);
    if (ck > 0) rhs -= Y.leftCols(ck) * T.block(0, ck, ck, w);
    const MatX Tkk = T.block(ck, ck, w, w);
    for (int i = 0; i < nb; ++i) {
      const int ri = starts[i], h = sizes[i];
      MatX r = rhs.middleRows(ri, h);
      if (ri > 0) {
        r -= T.block(0, ri, ri, h).transpose() * Y.block(0, ck, ri, w);
      }
      MatX S = MatX::Zero(h * w, h * w);
      const MatX Tii = T.block(ri, ri, h, h);
      for (int c = 0; c < w; ++c)
        S.block(c * h, c * h, h, h) += Tii.transpose();
      // vec(W Tkk) = (Tkk^T (x) I) vec(W)
      for (int bc = 0; bc < w; ++bc)
        for (int br = 0; br < w; ++br)
          S.block(br * h, bc * h, h, h).diagonal().array() += Tkk(bc, br);
      const VecX rv = Eigen::Map<const VecX>(r.data(), h * w);
      const VecX yv = Eigen::FullPivLU<MatX>(S).solve(rv);
      Y.block(ri, ck, h, w) = Eigen::Map<const MatX>(yv.data(), h, w);
    }
  }
  MatX P = U * Y * U.transpose();
  return 0.5 * (P + P.transpose());
}

MatX solve_lyapunov(const MatX& A, const MatX& Q) {
  require_hurwitz(A);
  if (A.rows() <= kLyapunovKronThreshold) return solve_lyapunov_kron(A, Q);
  return solve_lyapunov_schur(A, Q);
}

MatX solve_care(const MatX& A, const MatX& B, const MatX& Qw, const MatX& Rw) {
  const int n = static_cast<int>(A.rows());
  const MatX Rinv = Rw.inverse();
  MatX H = MatX::Zero(2 * n, 2 * n);
  H.topLeftCorner(n, n) = A;
  H.topRightCorner(n, n) = -B * Rinv * B.transpose();
  H.bottomLeftCorner(n, n) = -Qw;
  H.bottomRightCorner(n, n) = -A.transpose();

  Eigen::ComplexEigenSolver<MatX> es(H);
  if (es.info() != Eigen::Success) {
    throw NotStabilizable("care: Hamiltonian eigensolve failed");
  }
  Eigen::MatrixXcd X1(n, n), X2(n, n);
  int found = 0;
  for (int i = 0; i < 2 * n && found < n; ++i) {
    if (es.eigenvalues()(i).real() < 0) {
      X1.col(found) = es.eigenvectors().block(0, i, n, 1);
      X2.col(found) = es.eigenvectors().block(n, i, n, 1);
      ++found;
    }
  }
  if (found != n) {
    throw NotStabilizable("care: stable subspace has dimension " +
                          std::to_string(found) + ", expected " +
                          std::to_string(n));
  }
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(X1.transpose());
  if (!lu.isInvertible()) {
    throw NotStabilizable("care: stable subspace is defective");
  }
  const MatX P = lu.solve(X2.transpose()).transpose().real();  // X2 X1^-1
  return 0.5 * (P + P.transpose());
}

LqrGains synthesize_gains_lqr(const LinearModel& lm, const MatX& Qw,
                              const MatX& Rw) {
  const int d = lm.dim();
  const StateSpace ol = state_space(lm, MatX(), MatX());
  // Riccati input matrix maps the physical input du, not a generalized force.
  MatX Bu = MatX::Zero(2 * d, lm.input_dim());
  Bu.bottomRows(d) =
      Eigen::PartialPivLU<MatX>(lm.Mmat).solve(lm.Bmat);

  const MatX P = solve_care(ol.A, Bu, Qw, Rw);
  const MatX K = Rw.inverse() * Bu.transpose() * P;

  LqrGains gains;
  gains.K_x = K.leftCols(d);
  gains.K_xdot = K.rightCols(d);
  const StateSpace cl = state_space(lm, gains.K_x, gains.K_xdot);
  if (!is_hurwitz(cl.A, 0.0)) {
    throw NotStabilizable("lqr: closed loop is not Hurwitz");
  }
  return gains;
}

AttitudeGainReport check_attitude_gain_condition(const Mat3& J, double kR,
                                                 double kOmega, double c2,
                                                 double Omega_d_max) {
  Eigen::SelfAdjointEigenSolver<Mat3> es(J);
  const double lam_m = es.eigenvalues().minCoeff();
  const double lam_M = es.eigenvalues().maxCoeff();

  AttitudeGainReport rep;
  const Mat3 D = 2.0 * J - J.trace() * Mat3::Identity();
  rep.B2 = D.jacobiSvd().singularValues()(0) * Omega_d_max;
  rep.bound_lambda = std::sqrt(kR * lam_m) / lam_M;
  rep.bound_damping =
      4.0 * kOmega / (8.0 * kR * lam_M + std::pow(kOmega + rep.B2, 2));
  rep.c2 = c2;
  const double bound = std::min(rep.bound_lambda, rep.bound_damping);
  rep.margin = bound - c2;
  rep.pass = c2 > 0 && c2 < bound;
  return rep;
}

PositionGainReport check_position_gain_condition(const PositionGainInputs& k,
                                                 const Mat3& J, double m,
                                                 double psi1,
                                                 const PositionGainBounds& b) {
  if (!(psi1 > 0 && psi1 < 1)) {
    throw ValidationError("check_position_gain_condition: 0 < psi1 < 1");
  }
  PositionGainReport rep;
  rep.alpha = std::sqrt(psi1 * (2.0 - psi1));
  const double a = rep.alpha;

  rep.c1_bound = std::min(
      4.0 * k.kx * k.kv * (1 - a) * (1 - a) /
          (k.kv * k.kv * (1 + a) * (1 + a) + 4.0 * m * k.kx * (1 - a)),
      std::sqrt(k.kx / m));
  rep.c1_pass = k.c1 > 0 && k.c1 < rep.c1_bound;

  rep.attitude =
      check_attitude_gain_condition(J, k.kR, k.kOmega, k.c2, b.Omega_d_max);

  const double ub = b.B_Wx * b.B_theta + b.B1;
  rep.W1 << k.c1 * k.kx * (1 - a), -k.c1 * k.kv * (1 + a) / 2,
      -k.c1 * k.kv * (1 + a) / 2, k.kv * (1 - a) - m * k.c1;
  rep.W12 << k.c1 * ub, 0, ub + k.kx * b.e_x_max, 0;
  Eigen::SelfAdjointEigenSolver<Mat3> es(J);
  const double lam_M = es.eigenvalues().maxCoeff();
  rep.W2 << k.c2 * k.kR, -k.c2 * (k.kOmega + rep.attitude.B2) / 2,
      -k.c2 * (k.kOmega + rep.attitude.B2) / 2,
      k.kOmega - 2.0 * k.c2 * lam_M;

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> w1(rep.W1), w2(rep.W2);
  rep.lm_W1 = w1.eigenvalues().minCoeff();
  rep.lm_W2 = w2.eigenvalues().minCoeff();
  rep.W12_norm = rep.W12.jacobiSvd().singularValues()(0);
  rep.coupling_threshold =
      rep.W12_norm * rep.W12_norm / (4.0 * std::max(rep.lm_W1, 1e-300));
  rep.coupling_pass = rep.lm_W1 > 0 && rep.lm_W2 > rep.coupling_threshold;
  rep.pass = rep.c1_pass && rep.attitude.pass && rep.coupling_pass;
  return rep;
}

}  // namespace slung
