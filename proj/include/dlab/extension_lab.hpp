#pragma once

#include <optional>

#include "dlab/linalg.hpp"

namespace dlab {

// Second-difference chain on nodes 0..n+1. The state space X = C^n holds the
// interior nodes with inner product (x|y) = h * y^H x. A* maps the full vector
// f in C^N (N = n+2) to X; iota is the interior projection.
struct TripleModel {
  int n = 0;
  int m = 2;
  double h = 0.0;
  RVec potential;
  CMat Astar;   // n x N
  CMat iota;    // n x N
  CMat Gamma0;  // m x N
  CMat Gamma1;  // m x N
  CMat W;       // m x m, invertible

  int N() const { return n + 2; }
  cplx inner(const CVec& x, const CVec& y) const { return h * y.dot(x); }
};

TripleModel build_discrete_triple(int n, double h, const std::optional<RVec>& potential = std::nullopt);

// Same model with the boundary weight W replaced.
TripleModel with_weight(TripleModel model, const CMat& W);

// |(A*f|g) - (f|A*g) - <G1 f, G0 g> + <G0 f, G1 g>| relative to the magnitude of the terms.
double green_identity_residual(const TripleModel& model, const CVec& f, const CVec& g);

int boundary_rank(const TripleModel& model);

struct ContractionOp {
  CMat K;
  bool unitary = false;

  // Validates sigma_max(K) <= 1 + 1e-12 and sets the unitary flag.
  static ContractionOp make(const CMat& K);
};

struct ExtensionOp {
  CMat basis;  // N x n, orthonormal basis of the domain subspace in C^N
  CMat T;      // n x n, the extension acting on X
  ContractionOp K;
  double constraint_residual = 0.0;
};

// (K+I) W^-1 Gamma0 + i (K-I) W^H Gamma1
CMat constraint_map(const TripleModel& model, const ContractionOp& K);

// Throws NumericalFailure on a kernel dimension mismatch and SpectralPointError
// when the domain subspace does not project injectively onto X (multivalued extension).
ExtensionOp extension_from_contraction(const TripleModel& model, const ContractionOp& K);

struct WeylSample {
  cplx z;
  CMat M;
};

// Defect basis ker(A* - z iota), N x m.
CMat defect_basis(const TripleModel& model, cplx z);

WeylSample weyl_function(const TripleModel& model, cplx z);

// (T - z)^-1, SpectralPointError if z is numerically an eigenvalue.
CMat resolvent(const ExtensionOp& ext, cplx z);

struct KreinTerms {
  CMat direct;  // R_K(z) - R_0(z)
  CMat krein;   // -gamma(z) [E0 + E1 M(z)]^-1 E1 W^H Gamma1 L0 R0(z)
};

KreinTerms krein_terms(const TripleModel& model, const ContractionOp& K, cplx z);

// max_{ij} |direct_ij - krein_ij| / (1 + |direct_ij|)
double krein_residual(const TripleModel& model, const ContractionOp& K, cplx z);

int resolvent_difference_rank(const TripleModel& model, const ContractionOp& K1,
                              const ContractionOp& K2, cplx z);

}  // namespace dlab
