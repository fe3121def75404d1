#include "dlab/impedance_random.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

#include "dlab/errors.hpp"

namespace dlab {

namespace {
constexpr double kPi = std::numbers::pi;
}

const char* dist_kind_name(DistKind k) {
  switch (k) {
    case DistKind::point_mass: return "point_mass";
    case DistKind::uniform_disc: return "uniform_disc";
    case DistKind::uniform_segment_imaginary: return "uniform_segment_imaginary";
    case DistKind::pareto_imaginary: return "pareto_imaginary";
    case DistKind::half_normal_real: return "half_normal_real";
    case DistKind::bounded_custom: return "bounded_custom";
  }
  return "?";
}

DistKind parse_dist_kind(const std::string& s) {
  for (auto k : {DistKind::point_mass, DistKind::uniform_disc, DistKind::uniform_segment_imaginary,
                 DistKind::pareto_imaginary, DistKind::half_normal_real, DistKind::bounded_custom})
    if (s == dist_kind_name(k)) return k;
  throw InvalidArgument("unknown distribution kind: " + s);
}

ImpedanceDistribution ImpedanceDistribution::point(cplx z) {
  ImpedanceDistribution d;
  d.kind = DistKind::point_mass;
  d.z0 = z;
  d.validate();
  return d;
}

ImpedanceDistribution ImpedanceDistribution::disc(double r, cplx center) {
  ImpedanceDistribution d;
  d.kind = DistKind::uniform_disc;
  d.r = r;
  d.center = center;
  d.validate();
  return d;
}

ImpedanceDistribution ImpedanceDistribution::segment(double lo, double hi) {
  ImpedanceDistribution d;
  d.kind = DistKind::uniform_segment_imaginary;
  d.c_lo = lo;
  d.c_hi = hi;
  d.validate();
  return d;
}

ImpedanceDistribution ImpedanceDistribution::pareto(double a, double s_min) {
  ImpedanceDistribution d;
  d.kind = DistKind::pareto_imaginary;
  d.a = a;
  d.s_min = s_min;
  d.validate();
  return d;
}

ImpedanceDistribution ImpedanceDistribution::half_normal(double sigma) {
  ImpedanceDistribution d;
  d.kind = DistKind::half_normal_real;
  d.sigma = sigma;
  d.validate();
  return d;
}

ImpedanceDistribution ImpedanceDistribution::custom(std::vector<std::pair<double, double>> table, double phase) {
  ImpedanceDistribution d;
  d.kind = DistKind::bounded_custom;
  d.table = std::move(table);
  d.phase = phase;
  d.validate();
  return d;
}

void ImpedanceDistribution::validate() const {
  auto fin = [](double v) { return std::isfinite(v); };
  switch (kind) {
    case DistKind::point_mass:
      if (!fin(z0.real()) || !fin(z0.imag()) || z0.real() < 0.0)
        throw InvalidArgument("point_mass: need finite z0 with Re z0 >= 0");
      break;
    case DistKind::uniform_disc:
      if (!(r >= 0.0) || !fin(r) || !fin(center.real()) || !fin(center.imag()))
        throw InvalidArgument("uniform_disc: need finite r >= 0 and center");
      if (center.real() < r - 1e-12) throw InvalidArgument("uniform_disc: need Re center >= r");
      break;
    case DistKind::uniform_segment_imaginary:
      if (!fin(c_lo) || !fin(c_hi) || c_lo > c_hi) throw InvalidArgument("uniform_segment_imaginary: need c_lo <= c_hi");
      break;
    case DistKind::pareto_imaginary:
      if (!(a > 0.0) || !(s_min > 0.0) || !fin(a) || !fin(s_min))
        throw InvalidArgument("pareto_imaginary: need a > 0 and s_min > 0");
      break;
    case DistKind::half_normal_real:
      if (!(sigma > 0.0) || !fin(sigma)) throw InvalidArgument("half_normal_real: need sigma > 0");
      break;
    case DistKind::bounded_custom: {
      if (table.empty()) throw InvalidArgument("bounded_custom: empty cdf table");
      if (!(std::abs(phase) <= kPi / 2 + 1e-15)) throw InvalidArgument("bounded_custom: phase outside [-pi/2, pi/2]");
      double ps = -1.0, pf = 0.0;
      for (auto [s, F] : table) {
        if (!fin(s) || s < 0.0 || s <= ps) throw InvalidArgument("bounded_custom: abscissae must increase from >= 0");
        if (!(F >= pf) || F > 1.0) throw InvalidArgument("bounded_custom: cdf values must be nondecreasing in [0,1]");
        ps = s;
        pf = F;
      }
      break;
    }
  }
}

std::string ImpedanceDistribution::describe() const {
  char buf[256];
  switch (kind) {
    case DistKind::point_mass:
      std::snprintf(buf, sizeof buf, "point_mass(z0=%.17g%+.17gi)", z0.real(), z0.imag());
      break;
    case DistKind::uniform_disc:
      std::snprintf(buf, sizeof buf, "uniform_disc(r=%.17g,center=%.17g%+.17gi)", r, center.real(), center.imag());
      break;
    case DistKind::uniform_segment_imaginary:
      std::snprintf(buf, sizeof buf, "uniform_segment_imaginary(c_lo=%.17g,c_hi=%.17g)", c_lo, c_hi);
      break;
    case DistKind::pareto_imaginary:
      std::snprintf(buf, sizeof buf, "pareto_imaginary(a=%.17g,s_min=%.17g)", a, s_min);
      break;
    case DistKind::half_normal_real:
      std::snprintf(buf, sizeof buf, "half_normal_real(sigma=%.17g)", sigma);
      break;
    case DistKind::bounded_custom:
      std::snprintf(buf, sizeof buf, "bounded_custom(points=%zu,phase=%.17g)", table.size(), phase);
      break;
  }
  return buf;
}

namespace {

// Area of D(c, r) intersected with D(0, s), |c| = d >= r.
double lens_area(double d, double r, double s) {
  if (s <= 0.0) return 0.0;
  if (r == 0.0) return 0.0;
  if (s >= d + r) return kPi * r * r;
  if (s <= d - r) return 0.0;
  if (d == 0.0) return kPi * std::min(r, s) * std::min(r, s);
  auto cl = [](double v) { return std::clamp(v, -1.0, 1.0); };
  const double a1 = r * r * std::acos(cl((d * d + r * r - s * s) / (2 * d * r)));
  const double a2 = s * s * std::acos(cl((d * d + s * s - r * r) / (2 * d * s)));
  const double k = (-d + r + s) * (d + r - s) * (d - r + s) * (d + r + s);
  return a1 + a2 - 0.5 * std::sqrt(std::max(0.0, k));
}

double segment_mass(double lo, double hi, double s) {
  // fraction of [lo, hi] inside [-s, s]
  if (hi == lo) return std::abs(lo) <= s ? 1.0 : 0.0;
  const double a = std::max(lo, -s), b = std::min(hi, s);
  return b > a ? (b - a) / (hi - lo) : 0.0;
}

}  // namespace

double ImpedanceDistribution::cdf(double s) const {
  if (s < 0.0) return 0.0;
  switch (kind) {
    case DistKind::point_mass: return s >= std::abs(z0) ? 1.0 : 0.0;
    case DistKind::uniform_disc:
      if (r == 0.0) return s >= std::abs(center) ? 1.0 : 0.0;
      return std::min(1.0, lens_area(std::abs(center), r, s) / (kPi * r * r));
    case DistKind::uniform_segment_imaginary: return segment_mass(c_lo, c_hi, s);
    case DistKind::pareto_imaginary: return s <= s_min ? 0.0 : -std::expm1(a * std::log(s_min / s));
    case DistKind::half_normal_real: return std::erf(s / (sigma * std::sqrt(2.0)));
    case DistKind::bounded_custom: {
      if (s < table.front().first) return 0.0;
      if (s >= table.back().first) return table.back().second;
      auto it = std::upper_bound(table.begin(), table.end(), s,
                                 [](double v, const std::pair<double, double>& p) { return v < p.first; });
      const auto& [s1, F1] = *it;
      const auto& [s0, F0] = *(it - 1);
      return F0 + (F1 - F0) * (s - s0) / (s1 - s0);
    }
  }
  return 0.0;
}

double ImpedanceDistribution::survival_ge(double s) const {
  if (s <= 0.0) return 1.0;
  switch (kind) {
    case DistKind::point_mass: return s <= std::abs(z0) ? 1.0 : 0.0;
    case DistKind::uniform_disc:
      if (r == 0.0) return s <= std::abs(center) ? 1.0 : 0.0;
      return 1.0 - cdf(s);
    case DistKind::uniform_segment_imaginary: {
      if (c_hi == c_lo) return std::abs(c_lo) >= s ? 1.0 : 0.0;
      return 1.0 - segment_mass(c_lo, c_hi, s);
    }
    case DistKind::pareto_imaginary: return s <= s_min ? 1.0 : std::pow(s_min / s, a);
    case DistKind::half_normal_real: return std::erfc(s / (sigma * std::sqrt(2.0)));
    case DistKind::bounded_custom:
      if (s <= table.front().first) return 1.0;
      return 1.0 - cdf(s);
  }
  return 0.0;
}

bool ImpedanceDistribution::bounded() const {
  return kind != DistKind::pareto_imaginary && kind != DistKind::half_normal_real;
}

double ImpedanceDistribution::support_max() const {
  switch (kind) {
    case DistKind::point_mass: return std::abs(z0);
    case DistKind::uniform_disc: return std::abs(center) + r;
    case DistKind::uniform_segment_imaginary: return std::max(std::abs(c_lo), std::abs(c_hi));
    case DistKind::bounded_custom: return table.back().first;
    default: return std::numeric_limits<double>::infinity();
  }
}

bool ImpedanceDistribution::table_complete() const {
  return kind != DistKind::bounded_custom || table.back().second >= 1.0;
}

cplx ImpedanceDistribution::draw(double u1, double u2) const {
  switch (kind) {
    case DistKind::point_mass: return z0;
    case DistKind::uniform_disc: {
      const double rho = r * std::sqrt(u1);
      return center + std::polar(rho, 2 * kPi * u2);
    }
    case DistKind::uniform_segment_imaginary: return {0.0, c_lo + (c_hi - c_lo) * u2};
    case DistKind::pareto_imaginary: return {0.0, s_min * std::pow(u1, -1.0 / a)};
    case DistKind::half_normal_real:
      return sigma * std::abs(std::sqrt(-2.0 * std::log(u1)) * std::cos(2 * kPi * u2));
    case DistKind::bounded_custom: {
      const double u = u1;
      if (u > table.back().second) throw InvalidArgument("bounded_custom: cdf table does not reach 1");
      double s = table.front().first;
      if (u > table.front().second) {
        for (std::size_t i = 1; i < table.size(); ++i) {
          if (table[i].second >= u) {
            const auto [s0, F0] = table[i - 1];
            const auto [s1, F1] = table[i];
            s = s0 + (s1 - s0) * (u - F0) / (F1 - F0);
            break;
          }
        }
      }
      return std::polar(s, phase);
    }
  }
  return 0.0;
}

std::vector<cplx> sample_sequence(const ImpedanceDistribution& dist, std::size_t M, const SeededStream& stream) {
  dist.validate();
  if (M < 1) throw InvalidArgument("sample_sequence: M must be >= 1");
  std::vector<cplx> out(M);
  for (std::size_t j = 0; j < M; ++j) out[j] = dist.draw(stream.uniform_pos(j, 0), stream.uniform(j, 1));
  return out;
}

cplx cayley_zeta_to_xi(cplx zeta, double mu) {
  if (zeta.real() < -1e-12) throw InvalidArgument("cayley: Re zeta must be >= 0");
  if (mu < 0.0) throw InvalidArgument("cayley: mu must be >= 0");
  const double s = std::sqrt(1.0 + mu);
  return (zeta - s) / (zeta + s);
}

cplx cayley_xi_to_zeta(cplx xi, double mu) {
  if (xi == cplx(1.0)) throw InvalidArgument("cayley inverse undefined at xi = 1");
  const double s = std::sqrt(1.0 + mu);
  return s * (1.0 + xi) / (1.0 - xi);
}

DiagonalContraction DiagonalContraction::make(std::vector<cplx> xi) {
  for (cplx v : xi)
    if (!(std::abs(v) <= 1.0 + 1e-12)) throw InvalidArgument("diagonal contraction entry with |xi| > 1");
  return {std::move(xi)};
}

AdmissibleResult admissible_direction_check(const CMat& D) {
  if (D.rows() != D.cols() || D.rows() == 0) throw InvalidArgument("direction must be a square matrix");
  const Eigen::Index n = D.rows();
  const CMat ReD = 0.5 * (D + D.adjoint());
  const CMat ImD = (D - D.adjoint()) / (2.0 * I_unit);
  const double nd = opnorm(D);
  AdmissibleResult res;
  if (nd == 0.0) return res;
  const double tol = 1e-10 * nd;

  Eigen::SelfAdjointEigenSolver<CMat> es(ReD);
  const RVec ev = es.eigenvalues();
  const CMat V = es.eigenvectors();
  if (ev.minCoeff() < -tol) return res;

  std::vector<Eigen::Index> ker, ran;
  for (Eigen::Index i = 0; i < n; ++i) (ev(i) <= tol ? ker : ran).push_back(i);
  for (auto i : ker)
    if ((ImD * V.col(i)).norm() > tol) return res;
  res.admissible = true;

  // c1 = 1 / lambda_max(Re D^{-1/2} (Im D)^2 Re D^{-1/2}) on the range of Re D
  if (!ran.empty()) {
    CMat B(n, ran.size());
    for (std::size_t k = 0; k < ran.size(); ++k) B.col(k) = V.col(ran[k]) / std::sqrt(ev(ran[k]));
    const CMat G = B.adjoint() * ImD * ImD * B;
    Eigen::SelfAdjointEigenSolver<CMat> eg(G);
    const double top = eg.eigenvalues().maxCoeff();
    res.c1 = top > 1e-300 ? 1.0 / top : std::numeric_limits<double>::infinity();
  }

  const CMat Id = CMat::Identity(n, n);
  auto ok = [&](double c) { return opnorm(-Id + c * D) <= 1.0 + 1e-12; };
  double lo = 0.0, hi = 2.0 / nd;
  if (ok(hi)) {
    res.c_max = hi;
    return res;
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (ok(mid) ? lo : hi) = mid;
  }
  res.c_max = lo;
  return res;
}

CompactnessStats compactness_proxy(const DiagonalContraction& xi, double window) {
  const std::size_t L = xi.xi.size();
  if (L < 100) throw InvalidArgument("compactness_proxy: need at least 100 entries");
  if (!(window > 0.0 && window <= 1.0)) throw InvalidArgument("compactness_proxy: window must lie in (0, 1]");
  CompactnessStats st;
  const std::size_t tail = std::max<std::size_t>(1, std::size_t(std::floor(window * L)));
  double sum = 0.0;
  for (std::size_t j = L - tail; j < L; ++j) {
    const double v = std::abs(xi.xi[j] + 1.0);
    st.tail_max = std::max(st.tail_max, v);
    sum += v;
  }
  st.tail_mean = sum / tail;

  // dyadic blocks [2^b, 2^{b+1}) in 1-based index, b >= 2
  std::vector<double> xs, ys;
  for (std::size_t lo = 4; lo <= L; lo *= 2) {
    const std::size_t hi = std::min(L, 2 * lo - 1);
    double m = 0.0;
    for (std::size_t j = lo; j <= hi; ++j) m = std::max(m, std::abs(xi.xi[j - 1] + 1.0));
    if (m > 0.0) {
      xs.push_back(0.5 * (std::log(double(lo)) + std::log(double(hi))));
      ys.push_back(std::log(m));
    }
  }
  if (xs.size() >= 2) {
    const double n = xs.size();
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      mx += xs[i] / n;
      my += ys[i] / n;
    }
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sxx += (xs[i] - mx) * (xs[i] - mx);
      sxy += (xs[i] - mx) * (ys[i] - my);
    }
    st.slope = sxy / sxx;
    st.slope_valid = true;
  }
  return st;
}

CMat haar_unitary(int m, const SeededStream& stream, std::uint64_t index) {
  if (m < 1) throw InvalidArgument("haar_unitary: m must be >= 1");
  const SeededStream s = stream.child(index);
  CMat G(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      const std::uint64_t c = std::uint64_t(i) * m + j;
      G(i, j) = cplx(s.normal(c, 0), s.normal(c, 1)) / std::sqrt(2.0);
    }
  Eigen::HouseholderQR<CMat> qr(G);
  CMat Q = qr.householderQ() * CMat::Identity(m, m);
  const CMat R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < m; ++j) {
    const cplx d = R(j, j);
    Q.col(j) *= std::abs(d) > 0 ? d / std::abs(d) : cplx(1.0);
  }
  return Q;
}

ContractionOp sample_matrix_contraction(const MatrixContractionSpec& spec, int m, const SeededStream& stream,
                                        std::uint64_t index) {
  if (m < 1) throw InvalidArgument("sample_matrix_contraction: m must be >= 1");
  const SeededStream s = stream.child(index);
  auto disc_draw = [&](std::uint64_t j) { return std::polar(std::sqrt(s.uniform_pos(j, 0)), 2 * kPi * s.uniform(j, 1)); };
  CMat K;
  double budget = 0.0;
  switch (spec.kind) {
    case ContractionKind::shifted_hs: {
      K = spec.K0.size() ? spec.K0 : CMat::Zero(m, m);
      if (K.rows() != m || K.cols() != m) throw InvalidArgument("shifted_hs: K0 must be m x m");
      if ((long)spec.weights.size() > (long)m * m) throw InvalidArgument("shifted_hs: more weights than matrix units");
      budget = opnorm(K);
      for (std::size_t j = 0; j < spec.weights.size(); ++j) {
        K(j / m, j % m) += spec.weights[j] * disc_draw(j);
        budget += std::abs(spec.weights[j]);
      }
      break;
    }
    case ContractionKind::quasi_uniform: {
      K = spec.K0.size() ? spec.K0 : CMat::Zero(m, m);
      if (K.rows() != m || K.cols() != m) throw InvalidArgument("quasi_uniform: K0 must be m x m");
      if (spec.directions.size() != spec.weights.size()) throw InvalidArgument("quasi_uniform: one direction per weight");
      budget = opnorm(K);
      for (std::size_t j = 0; j < spec.weights.size(); ++j) {
        const CMat& D = spec.directions[j];
        if (D.rows() != m || D.cols() != m) throw InvalidArgument("quasi_uniform: direction must be m x m");
        if (opnorm(D) > 1.0 + 1e-12) throw InvalidArgument("quasi_uniform: direction norm exceeds 1");
        K += spec.weights[j] * disc_draw(j) * D;
        budget += spec.weights[j];
      }
      break;
    }
    case ContractionKind::admissible_mix: {
      K = -CMat::Identity(m, m);
      if (spec.directions.size() != spec.weights.size()) throw InvalidArgument("admissible_mix: one direction per weight");
      for (std::size_t j = 0; j < spec.weights.size(); ++j) {
        const CMat& D = spec.directions[j];
        if (D.rows() != m || D.cols() != m) throw InvalidArgument("admissible_mix: direction must be m x m");
        const auto ad = admissible_direction_check(D);
        if (!ad.admissible) throw InvalidArgument("admissible_mix: direction is not admissible");
        K += spec.weights[j] * s.uniform(j, 0) * ad.c_max * D;
        budget += spec.weights[j];
      }
      break;
    }
  }
  const double nk = opnorm(K);
  if (nk > 1.0 + 1e-10) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "sampled matrix has norm %.17g > 1 (budget sum %.17g)", nk, budget);
    throw InvalidArgument(buf);
  }
  if (nk > 1.0) K /= nk;
  return ContractionOp::make(K);
}

}  // namespace dlab
