#pragma once

#include <functional>
#include <vector>

#include "dlab/linalg.hpp"

namespace dlab {

struct BesselEval {
  int k = 0;
  cplx x;
  cplx value;
  cplx derivative;
};

// J_0 .. J_kmax at x. Requires |x| <= 1e4 and kmax <= 200.
std::vector<cplx> bessel_j_sequence(int kmax, cplx x);

BesselEval bessel_j(int k, cplx x);

// Spherical Bessel j_l and its derivative, l <= 200.
BesselEval spherical_bessel_j(int l, cplx x);

struct RootBracket {
  double lo, hi, f_lo, f_hi;
};

struct RealRootResult {
  std::vector<double> roots;
  std::vector<double> suspected_double;  // |f| tiny without a sign change
  std::vector<double> poles;             // sign changes where |f| blows up
};

// Roots of a continuous real function on [a, b]. step <= 0 picks (b-a)/400.
RealRootResult find_real_roots(const std::function<double(double)>& f, double a, double b,
                               int max_roots, double step = 0.0);

struct PolishResult {
  cplx root;
  bool converged = false;
  int iterations = 0;
  double residual = 0.0;  // |f(root)| / (|f'(root)| (1 + |root|))
};

PolishResult complex_root_polish(const std::function<cplx(cplx)>& f, cplx seed,
                                 int max_iter = 100);

struct Rect {
  double re_lo, re_hi, im_lo, im_hi;
  bool contains(cplx z) const {
    return z.real() >= re_lo && z.real() <= re_hi && z.imag() >= im_lo && z.imag() <= im_hi;
  }
};

// Winding number of f around the boundary of r. Throws SpectralPointError when f
// vanishes (numerically) on the contour.
int winding_count(const std::function<cplx(cplx)>& f, const Rect& r);

// Zeros of an analytic f inside r via argument principle, subdivision and Newton.
// Multiple zeros are returned with multiplicity.
std::vector<cplx> rectangle_roots(const std::function<cplx(cplx)>& f, const Rect& r,
                                  int max_depth = 40);

}  // namespace dlab
