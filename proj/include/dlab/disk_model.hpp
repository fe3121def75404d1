#pragma once

#include <string>
#include <vector>

#include "dlab/linalg.hpp"
#include "dlab/specfun.hpp"

namespace dlab {

// alpha = a I, beta = b on the unit disk (dim 2) or unit ball (dim 3).
struct MaterialParams {
  double a = 1.0;
  double b = 1.0;
  int dim = 2;

  void validate() const;
};

// Laplace-Beltrami eigenvalue of boundary mode |mode|: k^2 on the circle, l(l+1) on the sphere.
double mode_mu(int mode, int dim);

struct ModeProblem {
  int mode = 0;
  double mu = 0.0;
  cplx zeta;
  MaterialParams params;

  static ModeProblem make(int mode, cplx zeta, const MaterialParams& params);
};

// Radial solution regular at 0 (J_k or j_l) and its derivative at argument kappa.
BesselEval radial_solution(int mode, cplx kappa, int dim);

struct NtDSample {
  cplx lambda;
  int mode = 0;
  cplx value;
  bool pole = false;  // Dirichlet resonance: m_DtN has a pole, NtD value is 0
};

// Per-mode DtN value m(w) = gamma_n(alpha^-1 grad p) / gamma_0(p) for -div(alpha^-1 grad p) = w beta p.
cplx dtn_mode(int mode, cplx w, const MaterialParams& params);

NtDSample ntd_mode(int mode, cplx lambda, const MaterialParams& params);

// sqrt(b/a) R'(kappa) - i zeta R(kappa), kappa = sqrt(ab) lambda.
cplx secular_equation(int mode, cplx zeta, cplx lambda, const MaterialParams& params);

// |secular| relative to (sqrt(b/a) + |zeta|)(|R| + |R'|).
double secular_residual(int mode, cplx zeta, cplx lambda, const MaterialParams& params);

struct SolveBudget {
  int max_roots = 64;
  double im_depth = 10.0;  // lower edge of the search rectangle is -im_depth
};

struct ModeSpectrum {
  std::vector<cplx> eigenvalues;  // sorted by real part, Re lambda in the window
  std::vector<double> residuals;
  std::string method;             // "real-bracket", "continuation", "continuation+contour"
  int neumann_count = 0;          // zeta = 0 count in the window
  int contour_count = -1;         // argument-principle count (Re zeta > 0 only)
  bool lost_roots = false;        // continuation missed roots that the contour count found
};

ModeSpectrum solve_mode_eigenvalues(int mode, cplx zeta, const MaterialParams& params,
                                    double lo, double hi, const SolveBudget& budget = {});

struct FdOptions {
  int grid = 1000;         // coarse grid; the refined grid is twice as fine
  int count = 3;           // number of lowest eigenvalues returned
  double re_lo = 0.05;
  double re_hi = 20.0;
  double im_lo = -10.0;
  double im_hi = 0.5;
};

// Radial finite-volume discretization, quadratic pencil S - i lambda zeta E - lambda^2 b M,
// zeros of the pencil determinant located by contour counting, Richardson across two grids.
std::vector<cplx> fd_oracle(int mode, cplx zeta, const MaterialParams& params, const FdOptions& opt = {});

// NtD value of the discretized radial problem (Neumann data 1, Dirichlet response), grid n.
cplx fd_ntd(int mode, cplx lambda, const MaterialParams& params, int grid);

// Cayley entry xi = (zeta - s)/(zeta + s), s = sqrt(1 + mu).
cplx cayley_entry(cplx zeta, double mu);

// Boundary condition in contraction form: (xi+1) s^{1/2} p(1) - (xi-1) s^{-1/2} gamma_n(v).
cplx contraction_condition(int mode, cplx zeta, cplx lambda, const MaterialParams& params);

// Impedance form zeta p(1) + gamma_n(v) (= i * secular_equation).
cplx impedance_condition(int mode, cplx zeta, cplx lambda, const MaterialParams& params);

// Discrepancy between the two forms near lambda: proportionality defect at lambda
// plus the normalized residual of each form at the zero of the other found from lambda.
double contraction_route_equivalence(int mode, cplx zeta, const MaterialParams& params, cplx lambda);

}  // namespace dlab
