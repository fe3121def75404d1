#include "dlab/disk_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dlab/errors.hpp"

namespace dlab {

void MaterialParams::validate() const {
  if (!(a > 0.0) || !std::isfinite(a)) throw InvalidArgument("material parameter a must be positive");
  if (!(b > 0.0) || !std::isfinite(b)) throw InvalidArgument("material parameter b must be positive");
  if (dim != 2 && dim != 3) throw InvalidArgument("dimension must be 2 or 3");
}

double mode_mu(int mode, int dim) {
  const double k = std::abs(mode);
  return dim == 2 ? k * k : k * (k + 1.0);
}

ModeProblem ModeProblem::make(int mode, cplx zeta, const MaterialParams& params) {
  params.validate();
  if (params.dim == 3 && mode < 0) throw InvalidArgument("sphere mode index must be nonnegative");
  if (zeta.real() < -1e-12) throw InvalidArgument("impedance must satisfy Re zeta >= 0");
  if (!std::isfinite(std::abs(zeta))) throw InvalidArgument("impedance must be finite");
  return {mode, mode_mu(mode, params.dim), zeta, params};
}

BesselEval radial_solution(int mode, cplx kappa, int dim) {
  return dim == 2 ? bessel_j(std::abs(mode), kappa) : spherical_bessel_j(std::abs(mode), kappa);
}

cplx dtn_mode(int mode, cplx w, const MaterialParams& P) {
  P.validate();
  const cplx kappa = std::sqrt(P.a * P.b * w);
  if (kappa == cplx(0.0)) {
    // limit of kappa R'/R at 0 is the mode order
    return std::abs(mode) / P.a;
  }
  const BesselEval R = radial_solution(mode, kappa, P.dim);
  if (R.value == cplx(0.0)) throw SpectralPointError("Dirichlet resonance: DtN pole");
  return kappa * R.derivative / (P.a * R.value);
}

NtDSample ntd_mode(int mode, cplx lambda, const MaterialParams& P) {
  P.validate();
  if (lambda == cplx(0.0)) throw InvalidArgument("ntd_mode: lambda must be nonzero");
  NtDSample s{lambda, mode, 0.0, false};
  const cplx kappa = std::sqrt(P.a * P.b) * lambda;
  const BesselEval R = radial_solution(mode, kappa, P.dim);
  if (std::abs(R.value) <= 1e-11 * std::abs(R.derivative)) {
    s.pole = true;
    return s;
  }
  const cplx m = kappa * R.derivative / (P.a * R.value);  // m_DtN(lambda^2)
  const cplx M_dtn = -m / lambda;
  if (M_dtn == cplx(0.0)) throw SpectralPointError("Neumann eigenvalue: NtD pole");
  s.value = -1.0 / M_dtn;
  return s;
}

cplx secular_equation(int mode, cplx zeta, cplx lambda, const MaterialParams& P) {
  const cplx kappa = std::sqrt(P.a * P.b) * lambda;
  const BesselEval R = radial_solution(mode, kappa, P.dim);
  return std::sqrt(P.b / P.a) * R.derivative - I_unit * zeta * R.value;
}

double secular_residual(int mode, cplx zeta, cplx lambda, const MaterialParams& P) {
  const cplx kappa = std::sqrt(P.a * P.b) * lambda;
  const BesselEval R = radial_solution(mode, kappa, P.dim);
  const cplx t1 = std::sqrt(P.b / P.a) * R.derivative, t2 = I_unit * zeta * R.value;
  const double scale = (std::sqrt(P.b / P.a) + std::abs(zeta)) * (std::abs(R.derivative) + std::abs(R.value));
  return scale > 0 ? std::abs(t1 - t2) / scale : 0.0;
}

namespace {

using CFun = std::function<cplx(cplx)>;

void sort_by_real(std::vector<cplx>& v) {
  std::sort(v.begin(), v.end(), [](cplx p, cplx q) {
    return p.real() != q.real() ? p.real() < q.real() : p.imag() < q.imag();
  });
}

std::vector<cplx> dedupe(std::vector<cplx> v, double tol) {
  sort_by_real(v);
  std::vector<cplx> out;
  for (cplx z : v) {
    bool dup = false;
    for (cplx w : out)
      if (std::abs(z - w) <= tol * (1.0 + std::abs(z))) dup = true;
    if (!dup) out.push_back(z);
  }
  return out;
}

std::vector<double> real_roots(int mode, double c, const MaterialParams& P, double lo, double hi,
                               int max_roots) {
  const double sab = std::sqrt(P.a * P.b), sba = std::sqrt(P.b / P.a);
  auto f = [&](double x) {
    const BesselEval R = radial_solution(mode, sab * x, P.dim);
    return (sba * R.derivative + c * R.value).real();
  };
  const double step = std::min((hi - lo) / 50.0, std::numbers::pi / (16.0 * sab));
  return find_real_roots(f, lo, hi, max_roots, step).roots;
}

// Tracks zeros of secular(zeta(t)) along a segment zeta(t), t in [0,1].
bool continue_segment(int mode, const MaterialParams& P, cplx za, cplx zb, std::vector<cplx>& roots,
                      double re_cut, double im_cut) {
  const double span = std::abs(zb - za);
  const bool geometric = span > 10.0;
  const double L = std::log1p(span);
  auto zeta_at = [&](double t) {
    if (t >= 1.0) return zb;
    const double s = geometric ? std::expm1(t * L) / std::expm1(L) : t;
    return za + (zb - za) * s;
  };
  double t = 0.0, dt = 0.02;
  bool all_ok = true;
  std::vector<cplx> prev = roots;
  double dt_prev = 0.0;
  while (t < 1.0 && !roots.empty()) {
    const double tn = std::min(1.0, t + dt);
    const cplx z = zeta_at(tn);
    auto f = [&](cplx lam) { return secular_equation(mode, z, lam, P); };
    std::vector<cplx> next(roots.size());
    bool ok = true;
    for (std::size_t i = 0; i < roots.size() && ok; ++i) {
      cplx pred = roots[i];
      if (dt_prev > 0.0) pred += (roots[i] - prev[i]) * (dt / dt_prev);
      const auto p = complex_root_polish(f, pred, 60);
      if (!p.converged) {
        ok = false;
        break;
      }
      double sep = 1.0;
      for (std::size_t j = 0; j < roots.size(); ++j)
        if (j != i) sep = std::min(sep, std::abs(roots[i] - roots[j]));
      if (std::abs(p.root - roots[i]) > 0.3 * sep + 1e-12) ok = false;
      next[i] = p.root;
    }
    if (ok) {
      for (std::size_t i = 0; i < next.size() && ok; ++i)
        for (std::size_t j = i + 1; j < next.size(); ++j)
          if (std::abs(next[i] - next[j]) <= 1e-8 * (1.0 + std::abs(next[i]))) ok = false;
    }
    if (!ok) {
      dt *= 0.5;
      if (dt < 1e-9) {
        // drop the root whose step failed; the contour count recovers it
        all_ok = false;
        roots.pop_back();
        prev = roots;
        dt_prev = 0.0;
        dt = 0.02;
      }
      continue;
    }
    prev = roots;
    roots = next;
    dt_prev = tn - t;
    t = tn;
    dt = std::min(dt * 1.5, 0.1);
    // stop tracking roots that escaped far from the window
    std::vector<cplx> keep, keep_prev;
    for (std::size_t i = 0; i < roots.size(); ++i) {
      if (roots[i].imag() < im_cut || roots[i].real() > re_cut || roots[i].real() < -re_cut) continue;
      keep.push_back(roots[i]);
      keep_prev.push_back(prev[i]);
    }
    if (keep.size() != roots.size()) dt_prev = 0.0;
    roots = keep;
    prev = keep_prev;
  }
  return all_ok;
}

}  // namespace

ModeSpectrum solve_mode_eigenvalues(int mode, cplx zeta, const MaterialParams& P, double lo, double hi,
                                    const SolveBudget& budget) {
  const ModeProblem mp = ModeProblem::make(mode, zeta, P);
  (void)mp;
  if (!(hi > lo) || lo < 0.0) throw InvalidArgument("eigenvalue window must satisfy 0 <= lo < hi");
  const double lo_eff = std::max(lo, 1e-8);
  const double sab = std::sqrt(P.a * P.b);
  const double spacing = std::numbers::pi / sab;

  ModeSpectrum out;
  out.neumann_count = (int)real_roots(mode, 0.0, P, lo_eff, hi, budget.max_roots).size();

  if (std::abs(zeta.real()) <= 1e-14) {
    const auto r = real_roots(mode, zeta.imag(), P, lo_eff, hi, budget.max_roots);
    for (double x : r) out.eigenvalues.emplace_back(x, 0.0);
    out.method = "real-bracket";
  } else {
    const double sba = std::sqrt(P.b / P.a);
    const cplx w = zeta / sba;
    std::vector<cplx> path;
    if (std::abs(w.imag()) < 0.5 && w.real() > 0.5) {
      // avoid the impedance match zeta = sqrt(b/a), where zeros escape to -i infinity
      const double c0 = zeta.imag() + (zeta.imag() >= 0 ? 1.0 : -1.0) * sba;
      path = {cplx(0.0, c0), cplx(zeta.real(), c0), zeta};
    } else {
      path = {cplx(0.0, zeta.imag()), zeta};
    }
    const double ext_lo = std::max(lo_eff - 3 * spacing, 1e-6);
    const double ext_hi = hi + 3 * spacing;
    std::vector<cplx> roots;
    for (double x : real_roots(mode, path.front().imag(), P, ext_lo, ext_hi, budget.max_roots + 16))
      roots.emplace_back(x, 0.0);
    for (std::size_t s = 0; s + 1 < path.size(); ++s)
      continue_segment(mode, P, path[s], path[s + 1], roots, ext_hi + 10 * spacing,
                       -3.0 * budget.im_depth - 10.0);
    out.method = "continuation";

    Rect rect{lo_eff, hi, -budget.im_depth, 0.25};
    auto f = [&](cplx lam) { return secular_equation(mode, zeta, lam, P); };
    int count = -1;
    for (int attempt = 0; attempt < 6 && count < 0; ++attempt) {
      try {
        count = winding_count(f, rect);
      } catch (const SpectralPointError&) {
        const double nudge = 1e-7 * (attempt + 1) * (1.0 + hi);
        rect.re_hi = hi + nudge;
        rect.im_lo = -budget.im_depth - nudge;
        rect.re_lo = lo_eff + 1e-3 * nudge;
      }
    }
    if (count < 0) throw NumericalFailure("could not place a zero-free contour around the window");
    out.contour_count = count;

    std::vector<cplx> inside;
    for (cplx z : roots)
      if (rect.contains(z)) inside.push_back(z);
    inside = dedupe(inside, 1e-8);
    if ((int)inside.size() != count) {
      out.lost_roots = (int)inside.size() < count;
      inside = dedupe(rectangle_roots(f, rect), 1e-10);
      out.method = "continuation+contour";
      if ((int)inside.size() != count)
        throw NumericalFailure("contour recovery found " + std::to_string(inside.size()) +
                               " zeros, expected " + std::to_string(count));
    }
    out.eigenvalues = inside;
  }

  sort_by_real(out.eigenvalues);
  if ((int)out.eigenvalues.size() > budget.max_roots) out.eigenvalues.resize(budget.max_roots);
  for (cplx z : out.eigenvalues) {
    if (z.imag() > 1e-8)
      throw InvariantViolation("eigenvalue in the upper half-plane: Im = " + std::to_string(z.imag()));
    out.residuals.push_back(secular_residual(mode, zeta, z, P));
  }
  return out;
}

namespace {

// Vertex-centred finite volumes on r_i = i/n with weight r^{d-1}; node 0 is
// pinned when mu > 0.
struct RadialFd {
  int first = 0;
  std::vector<double> sdiag, soff, mass;  // soff[i] couples i and i+1 (local indices)

  RadialFd(int mode, const MaterialParams& P, int n) {
    const int d = P.dim;
    const double mu = mode_mu(mode, d);
    const double h = 1.0 / n;
    first = mu > 0.0 ? 1 : 0;
    auto flux = [&](int i) {  // between node i and i+1
      return std::pow((i + 0.5) * h, d - 1) / (h * P.a);
    };
    for (int i = first; i <= n; ++i) {
      const double rm = i == 0 ? 0.0 : (i - 0.5) * h;
      const double rp = i == n ? 1.0 : (i + 0.5) * h;
      mass.push_back(P.b * (std::pow(rp, d) - std::pow(rm, d)) / d);
      double s = 0.0;
      if (i >= 1) s += flux(i - 1);
      if (i < n) s += flux(i);
      if (mu > 0.0) s += (mu / P.a) * (d == 2 ? std::log(rp / rm) : rp - rm);
      sdiag.push_back(s);
      if (i < n) soff.push_back(-flux(i));
    }
  }

  std::size_t size() const { return sdiag.size(); }

  cplx diag(std::size_t i, cplx lambda, cplx zeta) const {
    cplx v = sdiag[i] - lambda * lambda * mass[i];
    if (i + 1 == size()) v -= I_unit * lambda * zeta;
    return v;
  }

  // det Q(lambda) / det Q(ref) as a product of pivot ratios with rescaling.
  cplx det_ratio(cplx lambda, cplx ref, cplx zeta) const {
    cplx d = diag(0, lambda, zeta), dr = diag(0, ref, zeta);
    cplx acc = d / dr;
    int e = 0;
    for (std::size_t i = 1; i < size(); ++i) {
      const double o2 = soff[i - 1] * soff[i - 1];
      if (d == cplx(0.0)) d = 1e-300;
      if (dr == cplx(0.0)) dr = 1e-300;
      d = diag(i, lambda, zeta) - o2 / d;
      dr = diag(i, ref, zeta) - o2 / dr;
      acc *= d / dr;
      if ((i & 31) == 0) {
        int ex;
        std::frexp(std::abs(acc), &ex);
        acc = std::ldexp(1.0, -ex) * acc;
        e += ex;
      }
    }
    const double mag = std::abs(acc);
    if (mag == 0.0) return 0.0;
    int ex;
    std::frexp(mag, &ex);
    e += ex;
    acc = std::ldexp(1.0, -ex) * acc;
    if (e > 1000) e = 1000;
    if (e < -1000) e = -1000;
    return std::ldexp(1.0, e) * acc;
  }

  // Solve (S - lambda^2 M) u = e_last, return u_last.
  cplx boundary_response(cplx lambda) const {
    const std::size_t n = size();
    std::vector<cplx> c(n), rhs(n, 0.0);
    rhs[n - 1] = 1.0;
    cplx dprev = diag(0, lambda, 0.0);
    c[0] = rhs[0] / dprev;
    std::vector<cplx> dd(n);
    dd[0] = dprev;
    for (std::size_t i = 1; i < n; ++i) {
      const double o = soff[i - 1];
      dd[i] = diag(i, lambda, 0.0) - o * o / dd[i - 1];
      c[i] = (rhs[i] - o * c[i - 1]) / dd[i];
    }
    return c[n - 1];
  }
};

}  // namespace

std::vector<cplx> fd_oracle(int mode, cplx zeta, const MaterialParams& P, const FdOptions& opt) {
  ModeProblem::make(mode, zeta, P);
  if (opt.grid < 1000) throw InvalidArgument("fd_oracle: grid must be at least 1000");
  const cplx ref{0.0, 1.0 + opt.im_hi};

  // locate on a coarse grid, then polish on grid and 2*grid
  const RadialFd coarse(mode, P, 256), fine(mode, P, opt.grid), finer(mode, P, 2 * opt.grid);
  auto fc = [&](cplx l) { return coarse.det_ratio(l, ref, zeta); };
  auto f1 = [&](cplx l) { return fine.det_ratio(l, ref, zeta); };
  auto f2 = [&](cplx l) { return finer.det_ratio(l, ref, zeta); };

  Rect rect{opt.re_lo, opt.re_hi, opt.im_lo, opt.im_hi};
  std::vector<cplx> seeds;
  for (int attempt = 0;; ++attempt) {
    try {
      seeds = rectangle_roots(fc, rect);
      break;
    } catch (const SpectralPointError&) {
      if (attempt >= 5) throw;
      rect.re_hi += 1e-6 * (1.0 + opt.re_hi);
      rect.im_lo -= 1e-6;
    }
  }
  std::vector<cplx> out;
  for (cplx s : seeds) {
    const auto p1 = complex_root_polish(f1, s);
    if (!p1.converged) continue;
    const auto p2 = complex_root_polish(f2, p1.root);
    out.push_back(p2.converged ? (4.0 * p2.root - p1.root) / 3.0 : p1.root);
  }
  out = dedupe(out, 1e-9);
  if ((int)out.size() > opt.count) out.resize(opt.count);
  return out;
}

cplx fd_ntd(int mode, cplx lambda, const MaterialParams& P, int grid) {
  P.validate();
  if (grid < 10) throw InvalidArgument("fd_ntd: grid too small");
  const RadialFd g1(mode, P, grid), g2(mode, P, 2 * grid);
  const cplx u1 = g1.boundary_response(lambda), u2 = g2.boundary_response(lambda);
  return lambda * (4.0 * u2 - u1) / 3.0;
}

cplx cayley_entry(cplx zeta, double mu) {
  const double s = std::sqrt(1.0 + mu);
  return (zeta - s) / (zeta + s);
}

namespace {

struct ModeTerms {
  cplx p1;  // gamma_0(p)
  cplx gn;  // gamma_n(alpha^-1 grad u) with p = -i lambda u
};

ModeTerms mode_terms(int mode, cplx lambda, const MaterialParams& P) {
  const cplx kappa = std::sqrt(P.a * P.b) * lambda;
  const BesselEval R = radial_solution(mode, kappa, P.dim);
  return {R.value, I_unit * std::sqrt(P.b / P.a) * R.derivative};
}

}  // namespace

cplx contraction_condition(int mode, cplx zeta, cplx lambda, const MaterialParams& P) {
  const double mu = mode_mu(mode, P.dim);
  const double s = std::sqrt(1.0 + mu), rs = std::sqrt(s);
  const cplx xi = cayley_entry(zeta, mu);
  const ModeTerms t = mode_terms(mode, lambda, P);
  return (xi + 1.0) * rs * t.p1 - (xi - 1.0) * t.gn / rs;
}

cplx impedance_condition(int mode, cplx zeta, cplx lambda, const MaterialParams& P) {
  const ModeTerms t = mode_terms(mode, lambda, P);
  return zeta * t.p1 + t.gn;
}

namespace {

double contraction_scale(int mode, cplx zeta, cplx lambda, const MaterialParams& P) {
  const double mu = mode_mu(mode, P.dim);
  const double s = std::sqrt(1.0 + mu), rs = std::sqrt(s);
  const cplx xi = cayley_entry(zeta, mu);
  const ModeTerms t = mode_terms(mode, lambda, P);
  return std::abs(xi + 1.0) * rs * std::abs(t.p1) + std::abs(xi - 1.0) * std::abs(t.gn) / rs;
}

double impedance_scale(cplx zeta, cplx lambda, int mode, const MaterialParams& P) {
  const ModeTerms t = mode_terms(mode, lambda, P);
  return std::abs(zeta) * std::abs(t.p1) + std::abs(t.gn);
}

// Newton to the limit of rounding after a converged polish.
cplx sharpen(const CFun& f, cplx z) {
  cplx fz = f(z);
  for (int i = 0; i < 4; ++i) {
    const double eta = 1e-6 * (1.0 + std::abs(z));
    const cplx d = (f(z + eta) - f(z - eta)) / (2.0 * eta);
    if (d == cplx(0.0)) break;
    const cplx zn = z - fz / d;
    const cplx fn = f(zn);
    if (!(std::abs(fn) < std::abs(fz))) break;
    z = zn;
    fz = fn;
  }
  return z;
}

}  // namespace

double contraction_route_equivalence(int mode, cplx zeta, const MaterialParams& P, cplx lambda) {
  ModeProblem::make(mode, zeta, P);
  const double mu = mode_mu(mode, P.dim);
  const double s = std::sqrt(1.0 + mu);
  if (std::abs(zeta + s) <= 1e-14 * s) throw InvalidArgument("zeta = -(1+mu)^{1/2} has no Cayley entry");
  const cplx c = 2.0 * std::sqrt(s) / (zeta + s);

  auto fK = [&](cplx l) { return contraction_condition(mode, zeta, l, P); };
  auto fZ = [&](cplx l) { return impedance_condition(mode, zeta, l, P); };

  const double scaleK = contraction_scale(mode, zeta, lambda, P);
  double r = scaleK > 0 ? std::abs(fK(lambda) - c * fZ(lambda)) / scaleK : 0.0;

  // lambda = 0 is a trivial common zero for mode >= 1, not an eigenvalue
  auto usable = [&](const PolishResult& p) { return p.converged && std::abs(p.root) > 1e-6 * std::max(1.0, std::abs(lambda)); };
  const auto pz = complex_root_polish(fZ, lambda);
  if (usable(pz)) {
    const cplx z = sharpen(fZ, pz.root);
    const double sk = contraction_scale(mode, zeta, z, P);
    if (sk > 0) r = std::max(r, std::abs(fK(z)) / sk);
  }
  const auto pk = complex_root_polish(fK, lambda);
  if (usable(pk)) {
    const cplx z = sharpen(fK, pk.root);
    const double sz = impedance_scale(zeta, z, mode, P);
    if (sz > 0) r = std::max(r, std::abs(fZ(z)) / sz);
  }
  return r;
}

}  // namespace dlab
