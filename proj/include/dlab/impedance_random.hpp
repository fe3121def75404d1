#pragma once

#include <string>
#include <utility>
#include <vector>

#include "dlab/counter_rng.hpp"
#include "dlab/extension_lab.hpp"
#include "dlab/linalg.hpp"

namespace dlab {

enum class DistKind {
  point_mass,
  uniform_disc,
  uniform_segment_imaginary,
  pareto_imaginary,
  half_normal_real,
  bounded_custom
};

const char* dist_kind_name(DistKind k);
DistKind parse_dist_kind(const std::string& s);

// Law of zeta in the closed right half-plane; cdf/survival refer to |zeta|.
struct ImpedanceDistribution {
  DistKind kind = DistKind::point_mass;
  cplx z0;                 // point_mass
  double r = 0.0;          // uniform_disc radius
  cplx center;             // uniform_disc center, Re center >= r
  double c_lo = 0.0, c_hi = 0.0;  // uniform_segment_imaginary: zeta = i y, y in [c_lo, c_hi]
  double a = 1.0, s_min = 1.0;    // pareto_imaginary: zeta = i S, P{S > s} = (s_min/s)^a
  double sigma = 1.0;             // half_normal_real: zeta = |N(0, sigma^2)|
  std::vector<std::pair<double, double>> table;  // bounded_custom: (s, F(s)), piecewise linear
  double phase = 0.0;                            // bounded_custom: arg zeta in [-pi/2, pi/2]

  static ImpedanceDistribution point(cplx z);
  static ImpedanceDistribution disc(double r, cplx center);
  static ImpedanceDistribution segment(double lo, double hi);
  static ImpedanceDistribution pareto(double a, double s_min);
  static ImpedanceDistribution half_normal(double sigma);
  static ImpedanceDistribution custom(std::vector<std::pair<double, double>> table, double phase = 0.0);

  void validate() const;
  std::string describe() const;

  double cdf(double s) const;          // P{|zeta| <= s}
  double survival_ge(double s) const;  // P{|zeta| >= s}
  bool bounded() const;                // support of |zeta| is bounded
  double support_max() const;          // sup of the support of |zeta| (inf if unbounded)
  bool table_complete() const;         // bounded_custom: last F equals 1

  // Draw from two uniforms, u1 in (0,1], u2 in [0,1).
  cplx draw(double u1, double u2) const;
};

std::vector<cplx> sample_sequence(const ImpedanceDistribution& dist, std::size_t M, const SeededStream& stream);

cplx cayley_zeta_to_xi(cplx zeta, double mu);
cplx cayley_xi_to_zeta(cplx xi, double mu);

struct DiagonalContraction {
  std::vector<cplx> xi;
  static DiagonalContraction make(std::vector<cplx> xi);
};

struct AdmissibleResult {
  bool admissible = false;
  double c_max = 0.0;  // largest c with ||-I + c D|| <= 1
  double c1 = 0.0;     // largest c1 with c1 (Im D)^2 <= Re D (0 if not admissible)
};

AdmissibleResult admissible_direction_check(const CMat& D);

struct CompactnessStats {
  double tail_max = 0.0;
  double tail_mean = 0.0;
  double slope = 0.0;  // least-squares slope of log block-max |xi_j + 1| against log j
  bool slope_valid = false;
};

CompactnessStats compactness_proxy(const DiagonalContraction& xi, double window);

CMat haar_unitary(int m, const SeededStream& stream, std::uint64_t index = 0);

enum class ContractionKind { shifted_hs, quasi_uniform, admissible_mix };

struct MatrixContractionSpec {
  ContractionKind kind = ContractionKind::shifted_hs;
  CMat K0;                        // base (ignored for admissible_mix, which starts at -I)
  std::vector<double> weights;    // w_j, a_j or b_j
  std::vector<CMat> directions;   // D_j (quasi_uniform, admissible_mix)
};

// shifted_hs: K0 + sum w_j g_j E_j with E_j the j-th matrix unit and g_j uniform on the unit disc
// quasi_uniform: K0 + sum a_j g_j D_j with g_j uniform on the unit disc
// admissible_mix: -I + sum b_j t_j c_max(D_j) D_j with t_j uniform on [0,1]
ContractionOp sample_matrix_contraction(const MatrixContractionSpec& spec, int m, const SeededStream& stream,
                                        std::uint64_t index = 0);

}  // namespace dlab
