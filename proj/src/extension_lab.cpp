#include "dlab/extension_lab.hpp"

#include <algorithm>
#include <cmath>

#include "dlab/errors.hpp"

namespace dlab {

TripleModel build_discrete_triple(int n, double h, const std::optional<RVec>& potential) {
  if (n < 4) throw InvalidArgument("build_discrete_triple: n must be >= 4");
  if (!(h > 0.0)) throw InvalidArgument("build_discrete_triple: h must be positive");
  if (potential && potential->size() != n)
    throw InvalidArgument("build_discrete_triple: potential must have n entries");

  TripleModel M;
  M.n = n;
  M.m = 2;
  M.h = h;
  M.potential = potential ? *potential : RVec::Zero(n);
  const int N = n + 2;
  const double s = 1.0 / (h * h);

  M.Astar = CMat::Zero(n, N);
  M.iota = CMat::Zero(n, N);
  for (int i = 0; i < n; ++i) {
    const int node = i + 1;
    M.Astar(i, node - 1) = -s;
    M.Astar(i, node) = 2.0 * s + M.potential(i);
    M.Astar(i, node + 1) = -s;
    M.iota(i, node) = 1.0;
  }
  M.Gamma0 = CMat::Zero(2, N);
  M.Gamma0(0, 0) = 1.0;
  M.Gamma0(1, N - 1) = 1.0;
  M.Gamma1 = CMat::Zero(2, N);
  M.Gamma1(0, 1) = 1.0 / h;
  M.Gamma1(0, 0) = -1.0 / h;
  M.Gamma1(1, N - 2) = 1.0 / h;
  M.Gamma1(1, N - 1) = -1.0 / h;
  M.W = CMat::Identity(2, 2);
  return M;
}

TripleModel with_weight(TripleModel model, const CMat& W) {
  if (W.rows() != model.m || W.cols() != model.m)
    throw InvalidArgument("with_weight: W must be m x m");
  Eigen::JacobiSVD<CMat> svd(W);
  const auto& sv = svd.singularValues();
  if (sv(sv.size() - 1) <= 1e-12 * sv(0)) throw InvalidArgument("with_weight: W is singular");
  model.W = W;
  return model;
}

double green_identity_residual(const TripleModel& M, const CVec& f, const CVec& g) {
  const CVec Af = M.Astar * f, Ag = M.Astar * g;
  const CVec xf = M.iota * f, xg = M.iota * g;
  const CVec g0f = M.Gamma0 * f, g1f = M.Gamma1 * f;
  const CVec g0g = M.Gamma0 * g, g1g = M.Gamma1 * g;
  const cplx t1 = M.inner(Af, xg), t2 = M.inner(xf, Ag);
  const cplx t3 = g0g.dot(g1f), t4 = g1g.dot(g0f);
  const double scale = std::abs(t1) + std::abs(t2) + std::abs(t3) + std::abs(t4);
  return std::abs((t1 - t2) - (t3 - t4)) / std::max(scale, 1e-300);
}

int boundary_rank(const TripleModel& M) {
  CMat G(2 * M.m, M.N());
  G << M.Gamma0, M.Gamma1;
  return numerical_rank(G, 1e-12);
}

ContractionOp ContractionOp::make(const CMat& K) {
  if (K.rows() != K.cols() || K.rows() == 0) throw InvalidArgument("contraction must be square");
  if (!K.allFinite()) throw InvalidArgument("contraction has non-finite entries");
  const double nk = opnorm(K);
  if (nk > 1.0 + 1e-12)
    throw InvalidArgument("not a contraction: norm " + std::to_string(nk));
  ContractionOp c;
  c.K = K;
  const CMat E = K.adjoint() * K - CMat::Identity(K.rows(), K.cols());
  c.unitary = opnorm(E) <= 1e-10;
  return c;
}

CMat constraint_map(const TripleModel& M, const ContractionOp& K) {
  if (K.K.rows() != M.m) throw InvalidArgument("contraction size does not match boundary dimension");
  const CMat Id = CMat::Identity(M.m, M.m);
  const CMat Winv = M.W.inverse();
  return (K.K + Id) * Winv * M.Gamma0 + I_unit * (K.K - Id) * M.W.adjoint() * M.Gamma1;
}

ExtensionOp extension_from_contraction(const TripleModel& M, const ContractionOp& K) {
  const CMat C = constraint_map(M, K);
  ExtensionOp E;
  E.K = K;
  E.basis = orthonormal_kernel(C, M.N() - M.m);
  E.constraint_residual = (C * E.basis).cwiseAbs().maxCoeff();
  const CMat P = M.iota * E.basis;
  Eigen::FullPivLU<CMat> lu(P);
  lu.setThreshold(1e-11);
  if (!lu.isInvertible())
    throw SpectralPointError("extension is multivalued: domain meets ker(iota)");
  E.T = M.Astar * E.basis * lu.inverse();
  return E;
}

CMat defect_basis(const TripleModel& M, cplx z) {
  const CMat B = M.Astar - z * M.iota;
  Eigen::JacobiSVD<CMat> svd(B, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > 1e-12 * s(0)) ++rank;
  const int dim = M.N() - rank;
  if (dim != M.m)
    throw SpectralPointError("defect space has dimension " + std::to_string(dim));
  return svd.matrixV().rightCols(M.m);
}

namespace {

// Inverse of the m x m block with an explicit singularity test.
CMat checked_inverse(const CMat& A, const char* what) {
  Eigen::JacobiSVD<CMat> svd(A);
  const auto& s = svd.singularValues();
  if (s(0) == 0.0 || s(s.size() - 1) <= 1e-12 * s(0))
    throw SpectralPointError(std::string(what) + " is singular");
  return A.inverse();
}

}  // namespace

WeylSample weyl_function(const TripleModel& M, cplx z) {
  if (z.imag() == 0.0) throw InvalidArgument("weyl_function: Im z must be nonzero");
  const CMat F = defect_basis(M, z);
  const CMat G0 = M.W.inverse() * M.Gamma0 * F;
  const CMat G1 = M.W.adjoint() * M.Gamma1 * F;
  return {z, G1 * checked_inverse(G0, "Gamma0 on the defect space")};
}

CMat resolvent(const ExtensionOp& ext, cplx z) {
  const Eigen::Index n = ext.T.rows();
  return checked_inverse(ext.T - z * CMat::Identity(n, n), "T - z");
}

KreinTerms krein_terms(const TripleModel& M, const ContractionOp& K, cplx z) {
  const int m = M.m;
  const CMat Id = CMat::Identity(m, m);
  const ExtensionOp E0ext = extension_from_contraction(M, ContractionOp::make(Id));
  const ExtensionOp EK = extension_from_contraction(M, K);
  const CMat R0 = resolvent(E0ext, z);
  const CMat RK = resolvent(EK, z);

  // gamma(z): W^-1 Gamma0 data -> interior values of the defect element
  const CMat F = defect_basis(M, z);
  const CMat G0F = M.W.inverse() * M.Gamma0 * F;
  const CMat G0inv = checked_inverse(G0F, "Gamma0 on the defect space");
  const CMat gamma = M.iota * F * G0inv;
  const CMat Mz = M.W.adjoint() * M.Gamma1 * F * G0inv;

  // L0: X -> C^N, zero boundary values
  const CMat L0 = M.iota.adjoint();

  const CMat E0 = K.K + Id;
  const CMat E1 = I_unit * (K.K - Id);
  const CMat B = checked_inverse(E0 + E1 * Mz, "E0 + E1 M(z)");

  KreinTerms t;
  t.direct = RK - R0;
  t.krein = -gamma * B * E1 * M.W.adjoint() * M.Gamma1 * L0 * R0;
  return t;
}

double krein_residual(const TripleModel& M, const ContractionOp& K, cplx z) {
  if (!(z.imag() > 0.0)) throw InvalidArgument("krein_residual: z must lie in the upper half-plane");
  const KreinTerms t = krein_terms(M, K, z);
  double r = 0.0;
  for (Eigen::Index i = 0; i < t.direct.rows(); ++i)
    for (Eigen::Index j = 0; j < t.direct.cols(); ++j)
      r = std::max(r, std::abs(t.direct(i, j) - t.krein(i, j)) / (1.0 + std::abs(t.direct(i, j))));
  return r;
}

int resolvent_difference_rank(const TripleModel& M, const ContractionOp& K1,
                              const ContractionOp& K2, cplx z) {
  const CMat R1 = resolvent(extension_from_contraction(M, K1), z);
  const CMat R2 = resolvent(extension_from_contraction(M, K2), z);
  const CMat D = R2 - R1;
  if (D.cwiseAbs().maxCoeff() <= 1e-13 * std::max(R1.cwiseAbs().maxCoeff(), 1.0)) return 0;
  return numerical_rank(D, 1e-8);
}

}  // namespace dlab
