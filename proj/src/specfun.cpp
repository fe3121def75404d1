#include "dlab/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dlab/errors.hpp"

namespace dlab {

namespace {

constexpr double kPi = std::numbers::pi;

void check_bessel_args(int kmax, cplx x) {
  if (kmax < 0) throw InvalidArgument("Bessel order must be nonnegative");
  if (kmax > 200) throw InvalidArgument("Bessel order above 200 is outside the guarded range");
  if (!std::isfinite(x.real()) || !std::isfinite(x.imag()))
    throw InvalidArgument("Bessel argument must be finite");
  if (std::abs(x) > 1e4 * (1 + 1e-12)) throw InvalidArgument("Bessel argument beyond |x| = 1e4");
}

cplx series_j(int k, cplx x) {
  const cplx half = x / 2.0;
  cplx t = std::exp(double(k) * std::log(half) - std::lgamma(k + 1.0));
  const cplx q = -half * half;
  cplx sum = t;
  for (int m = 0; m < 500; ++m) {
    t *= q / (double(m + 1) * double(m + k + 1));
    sum += t;
    if (std::abs(t) <= 1e-17 * std::abs(sum) && m > std::abs(x)) break;
  }
  return sum;
}

// Large-argument expansion for Re x >= 0. Returns false if the series does
// not reach full precision before diverging.
bool hankel_j(int k, cplx x, cplx& out) {
  const double mu = 4.0 * k * k;
  cplx P = 1.0, Q = 0.0;
  cplx term = 1.0;
  double prev = 1.0;
  bool ok = false;
  for (int m = 1; m < 200; ++m) {
    const double odd = 2.0 * m - 1.0;
    term *= (mu - odd * odd) / (m * 8.0) / x;
    const double a = std::abs(term);
    if (a > prev && m > 2) break;
    prev = a;
    switch (m % 4) {
      case 1: Q += term; break;
      case 2: P -= term; break;
      case 3: Q -= term; break;
      case 0: P += term; break;
    }
    if (a < 1e-17 * (std::abs(P) + std::abs(Q))) {
      ok = true;
      break;
    }
    if (a == 0.0) {
      ok = true;
      break;
    }
  }
  if (!ok) return false;
  const cplx w = x - (k * 0.5 + 0.25) * kPi;
  out = std::sqrt(2.0 / (kPi * x)) * (P * std::cos(w) - Q * std::sin(w));
  return true;
}

std::vector<cplx> miller_sequence(int kmax, cplx x) {
  const double ax = std::abs(x);
  int start = std::max(kmax, int(std::ceil(ax))) + 30 + int(std::ceil(6.0 * std::cbrt(ax)));
  if (start % 2) ++start;
  const bool real_arg = x.imag() == 0.0;
  // e^{-ix} = J0 + 2 sum (-i)^n J_n for Im x >= 0, e^{ix} = J0 + 2 sum i^n J_n otherwise
  const cplx unit = x.imag() >= 0.0 ? cplx(0, -1) : cplx(0, 1);

  std::vector<cplx> out(kmax + 1);
  cplx jp1 = 0.0, j = 1e-300;
  cplx sum = 0.0;
  // powers of unit cycle with period 4
  auto upow = [&](int n) {
    cplx p = 1.0;
    for (int i = 0; i < (n & 3); ++i) p *= unit;
    return p;
  };
  for (int n = start; n >= 0; --n) {
    if (n <= kmax) out[n] = j;
    if (real_arg) {
      if (n % 2 == 0) sum += (n == 0 ? 1.0 : 2.0) * j;
    } else {
      sum += (n == 0 ? 1.0 : 2.0) * upow(n) * j;
    }
    if (n == 0) break;
    const cplx jm1 = (2.0 * n / x) * j - jp1;
    jp1 = j;
    j = jm1;
    if (std::abs(j) > 1e250) {
      const double s = 1e-250;
      j *= s;
      jp1 *= s;
      sum *= s;
      for (int i = n; i <= kmax; ++i) out[i] *= s;
    }
  }
  const cplx target = real_arg ? cplx(1.0) : std::exp(unit * x);
  const cplx scale = target / sum;
  for (auto& v : out) v *= scale;
  return out;
}

}  // namespace

std::vector<cplx> bessel_j_sequence(int kmax, cplx x) {
  check_bessel_args(kmax, x);
  std::vector<cplx> out(kmax + 1, 0.0);
  const double ax = std::abs(x);
  if (ax == 0.0) {
    out[0] = 1.0;
    return out;
  }
  if (ax <= 12.0) {
    for (int k = 0; k <= kmax; ++k) out[k] = series_j(k, x);
    return out;
  }
  if (ax > 50.0) {
    const bool flip = x.real() < 0.0;
    const cplx y = flip ? -x : x;
    bool ok = true;
    for (int k = kmax; k >= 0 && ok; --k) {
      ok = hankel_j(k, y, out[k]);
      if (flip && (k % 2)) out[k] = -out[k];
    }
    if (ok) return out;
  }
  return miller_sequence(kmax, x);
}

BesselEval bessel_j(int k, cplx x) {
  const auto J = bessel_j_sequence(k + 1, x);
  BesselEval e;
  e.k = k;
  e.x = x;
  e.value = J[k];
  e.derivative = k == 0 ? -J[1] : 0.5 * (J[k - 1] - J[k + 1]);
  return e;
}

namespace {

std::vector<cplx> spherical_sequence(int L, cplx x) {
  std::vector<cplx> out(L + 1, 0.0);
  const double ax = std::abs(x);
  if (ax == 0.0) {
    out[0] = 1.0;
    return out;
  }
  if (ax <= 1.0) {
    const cplx q = -x * x / 2.0;
    for (int l = 0; l <= L; ++l) {
      const double logdf = std::lgamma(2.0 * l + 2.0) - l * std::log(2.0) - std::lgamma(l + 1.0);
      cplx t = std::exp(double(l) * std::log(x) - logdf);
      cplx sum = t;
      for (int m = 0; m < 200; ++m) {
        t *= q / (double(m + 1) * double(2 * l + 2 * m + 3));
        sum += t;
        if (std::abs(t) <= 1e-17 * std::abs(sum)) break;
      }
      out[l] = sum;
    }
    return out;
  }
  const cplx j0 = std::sin(x) / x;
  const cplx j1 = std::sin(x) / (x * x) - std::cos(x) / x;
  if (ax > L) {
    out[0] = j0;
    if (L >= 1) out[1] = j1;
    for (int l = 1; l < L; ++l) out[l + 1] = (2.0 * l + 1.0) / x * out[l] - out[l - 1];
    return out;
  }
  int start = std::max(L, int(std::ceil(ax))) + 30 + int(std::ceil(6.0 * std::cbrt(ax)));
  std::vector<cplx> tmp(L + 2);
  cplx jp1 = 0.0, j = 1e-300;
  for (int l = start; l >= 0; --l) {
    if (l <= std::max(L, 1)) tmp[l] = j;
    if (l == 0) break;
    const cplx jm1 = (2.0 * l + 1.0) / x * j - jp1;
    jp1 = j;
    j = jm1;
    if (std::abs(j) > 1e250) {
      j *= 1e-250;
      jp1 *= 1e-250;
      for (int i = l; i <= std::max(L, 1); ++i) tmp[i] *= 1e-250;
    }
  }
  // normalize against whichever closed form is better conditioned
  const cplx scale = std::abs(j0) * std::abs(tmp[1]) >= std::abs(j1) * std::abs(tmp[0])
                         ? j0 / tmp[0]
                         : j1 / tmp[1];
  for (int l = 0; l <= L; ++l) out[l] = tmp[l] * scale;
  return out;
}

}  // namespace

BesselEval spherical_bessel_j(int l, cplx x) {
  check_bessel_args(l, x);
  const auto j = spherical_sequence(l + 1, x);
  BesselEval e;
  e.k = l;
  e.x = x;
  e.value = j[l];
  if (l == 0)
    e.derivative = -j[1];
  else if (x == cplx(0.0))
    e.derivative = l == 1 ? 1.0 / 3.0 : 0.0;
  else
    e.derivative = j[l - 1] - (l + 1.0) / x * j[l];
  return e;
}

namespace {

int sgn(double v) { return (v > 0) - (v < 0); }

struct Scanner {
  const std::function<double(double)>& f;
  double min_width;
  std::vector<RootBracket> brackets;
  std::vector<std::pair<double, double>> dips;

  void visit(double x0, double f0, double x1, double f1, int depth) {
    const double xm = 0.5 * (x0 + x1);
    const double fm = f(xm);
    const int s0 = sgn(f0), sm = sgn(fm), s1 = sgn(f1);
    const int changes = (s0 * sm < 0) + (sm * s1 < 0);
    const bool deep = depth >= 40 || (x1 - x0) < min_width;
    if (changes == 2 && !deep) {
      visit(x0, f0, xm, fm, depth + 1);
      visit(xm, fm, x1, f1, depth + 1);
      return;
    }
    if (sm == 0) {
      brackets.push_back({xm, xm, 0.0, 0.0});
      return;
    }
    const bool dip = changes == 0 && std::abs(fm) < std::abs(f0) && std::abs(fm) < std::abs(f1);
    if (dip) {
      if (deep) {
        dips.emplace_back(x0, x1);
      } else {
        // a pair of close roots would hide between the samples
        visit(x0, f0, xm, fm, depth + 1);
        visit(xm, fm, x1, f1, depth + 1);
      }
      return;
    }
    if (s0 * sm < 0) brackets.push_back({x0, xm, f0, fm});
    if (sm * s1 < 0) brackets.push_back({xm, x1, fm, f1});
  }
};

}  // namespace

RealRootResult find_real_roots(const std::function<double(double)>& f, double a, double b,
                               int max_roots, double step) {
  if (!(b > a)) throw InvalidArgument("find_real_roots: empty window");
  if (max_roots <= 0) return {};
  const double h = step > 0.0 ? step : (b - a) / 400.0;
  Scanner sc{f, 1e-9 * (b - a), {}, {}};

  std::vector<double> xs, fs;
  for (double x = a;; x += h) {
    const double xx = std::min(x, b);
    xs.push_back(xx);
    fs.push_back(f(xx));
    if (xx >= b) break;
  }
  double scale = 0.0;
  for (double v : fs) scale = std::max(scale, std::abs(v));
  for (std::size_t i = 0; i < xs.size(); ++i)
    if (fs[i] == 0.0) sc.brackets.push_back({xs[i], xs[i], 0.0, 0.0});
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    if (fs[i] == 0.0 || fs[i + 1] == 0.0) continue;
    sc.visit(xs[i], fs[i], xs[i + 1], fs[i + 1], 0);
  }
  // local minima of |f| on the scan grid without a sign change: rescan finer,
  // keep as a dip if still no sign change shows up
  for (std::size_t i = 1; i + 1 < xs.size(); ++i) {
    if (sgn(fs[i - 1]) != sgn(fs[i]) || sgn(fs[i]) != sgn(fs[i + 1]) || fs[i] == 0.0) continue;
    if (!(std::abs(fs[i]) < std::abs(fs[i - 1]) && std::abs(fs[i]) <= std::abs(fs[i + 1]))) continue;
    const std::size_t before = sc.brackets.size();
    const int sub = 64;
    double xp = xs[i - 1], fp = fs[i - 1];
    for (int k = 1; k <= sub; ++k) {
      const double x = xs[i - 1] + (xs[i + 1] - xs[i - 1]) * k / sub;
      const double fx = k == sub ? fs[i + 1] : f(x);
      if (fp != 0.0 && fx != 0.0 && sgn(fp) != sgn(fx)) sc.visit(xp, fp, x, fx, 0);
      xp = x;
      fp = fx;
    }
    if (sc.brackets.size() == before) sc.dips.emplace_back(xs[i - 1], xs[i + 1]);
  }

  RealRootResult res;
  for (const auto& br : sc.brackets) {
    double lo = br.lo, hi = br.hi, flo = br.f_lo;
    if (lo != hi) {
      for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0) {
          lo = hi = mid;
          break;
        }
        if (sgn(fm) == sgn(flo)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
    }
    double x = 0.5 * (lo + hi);
    double fx = f(x);
    const double eta = 1e-7 * (1.0 + std::abs(x));
    const double d = (f(x + eta) - f(x - eta)) / (2 * eta);
    if (d != 0.0 && fx != 0.0) {
      const double xn = x - fx / d;
      const double tol = 1e-13 * (1.0 + std::abs(x));
      if (xn >= br.lo - tol && xn <= br.hi + tol) {
        const double fn = f(xn);
        if (std::abs(fn) <= std::abs(fx)) {
          x = xn;
          fx = fn;
        }
      }
    }
    if (std::abs(fx) > std::max(std::abs(br.f_lo), std::abs(br.f_hi)) && br.lo != br.hi)
      res.poles.push_back(x);
    else
      res.roots.push_back(x);
  }
  for (const auto& [x0, x1] : sc.dips) {
    // golden-section search for the minimum of |f|
    double lo = x0, hi = x1;
    const double g = (std::sqrt(5.0) - 1) / 2;
    for (int it = 0; it < 80; ++it) {
      const double c = hi - g * (hi - lo), d = lo + g * (hi - lo);
      if (std::abs(f(c)) < std::abs(f(d)))
        hi = d;
      else
        lo = c;
    }
    const double x = 0.5 * (lo + hi);
    if (std::abs(f(x)) < 1e-8 * std::max(scale, 1e-300)) res.suspected_double.push_back(x);
  }
  std::sort(res.suspected_double.begin(), res.suspected_double.end());
  res.suspected_double.erase(std::unique(res.suspected_double.begin(), res.suspected_double.end(),
                                         [&](double p, double q) { return std::abs(p - q) <= 2 * h; }),
                             res.suspected_double.end());
  std::sort(res.roots.begin(), res.roots.end());
  res.roots.erase(std::unique(res.roots.begin(), res.roots.end(),
                              [](double p, double q) {
                                return std::abs(p - q) <= 1e-14 * (1 + std::abs(p));
                              }),
                  res.roots.end());
  if ((int)res.roots.size() > max_roots) res.roots.resize(max_roots);
  return res;
}

PolishResult complex_root_polish(const std::function<cplx(cplx)>& f, cplx seed, int max_iter) {
  PolishResult r;
  cplx z = seed;
  auto deriv = [&](cplx w) {
    const double eta = 1e-7 * (1.0 + std::abs(w));
    return (f(w + eta) - f(w - eta)) / (2.0 * eta);
  };
  auto scaled = [&](cplx w, cplx fw, cplx dw) {
    const double s = std::abs(dw) * (1.0 + std::abs(w));
    return s > 0 ? std::abs(fw) / s : (fw == cplx(0.0) ? 0.0 : INFINITY);
  };
  cplx fz = f(z);
  for (int it = 1; it <= max_iter; ++it) {
    r.iterations = it;
    const cplx d = deriv(z);
    r.residual = scaled(z, fz, d);
    if (!std::isfinite(std::abs(fz))) break;
    if (r.residual <= 1e-10) {
      r.converged = true;
      // a few plain Newton steps to reach full precision
      cplx dz = d;
      for (int k = 0; k < 3 && dz != cplx(0.0); ++k) {
        const cplx zn = z - fz / dz, fn = f(zn);
        if (!(std::abs(fn) < std::abs(fz))) break;
        z = zn;
        fz = fn;
        dz = deriv(z);
      }
      r.residual = scaled(z, fz, dz);
      break;
    }
    if (d == cplx(0.0)) break;
    const cplx step = fz / d;
    double t = 1.0;
    cplx zn = z - step, fn = f(zn);
    for (int k = 0; k < 30 && !(std::abs(fn) < std::abs(fz)); ++k) {
      t *= 0.5;
      zn = z - t * step;
      fn = f(zn);
    }
    const bool tiny = std::abs(t * step) <= 1e-13 * (1.0 + std::abs(z));
    if (!(std::abs(fn) < std::abs(fz))) {
      r.converged = tiny && r.residual <= 1e-6;
      break;
    }
    z = zn;
    fz = fn;
    if (tiny) {
      r.residual = scaled(z, fz, deriv(z));
      r.converged = r.residual <= 1e-6;
      break;
    }
  }
  r.root = z;
  return r;
}

namespace {

struct ContourWalker {
  const std::function<cplx(cplx)>& f;
  double min_len;

  // Accepts a segment only when f is close to linear on it, so that a zero
  // hiding between two samples with similar values is not missed.
  double seg(cplx za, cplx fa, cplx zb, cplx fb, int depth) {
    const cplx zm = 0.5 * (za + zb);
    const cplx fm = f(zm);
    if (fm == cplx(0.0) || !std::isfinite(std::abs(fm)))
      throw SpectralPointError("zero of f on the contour");
    const double d1 = std::arg(fm / fa), d2 = std::arg(fb / fm);
    const double lin = std::abs(fm - 0.5 * (fa + fb));
    const double small = std::min({std::abs(fa), std::abs(fb), std::abs(fm)});
    if (std::abs(d1) < kPi / 4 && std::abs(d2) < kPi / 4 && lin <= 0.2 * small) return d1 + d2;
    if (depth > 60 || std::abs(zb - za) < min_len)
      throw SpectralPointError("zero of f on or near the contour");
    return seg(za, fa, zm, fm, depth + 1) + seg(zm, fm, zb, fb, depth + 1);
  }
};

}  // namespace

int winding_count(const std::function<cplx(cplx)>& f, const Rect& r) {
  const cplx c[4] = {{r.re_lo, r.im_lo}, {r.re_hi, r.im_lo}, {r.re_hi, r.im_hi}, {r.re_lo, r.im_hi}};
  const double size = std::max(r.re_hi - r.re_lo, r.im_hi - r.im_lo);
  ContourWalker w{f, 1e-12 * std::max(size, 1e-300)};
  constexpr int kInit = 16;
  double total = 0.0;
  for (int e = 0; e < 4; ++e) {
    const cplx a = c[e], b = c[(e + 1) % 4];
    cplx zp = a, fp = f(a);
    if (fp == cplx(0.0) || !std::isfinite(std::abs(fp)))
      throw SpectralPointError("zero of f on the contour");
    for (int i = 1; i <= kInit; ++i) {
      const cplx zn = a + (b - a) * (double(i) / kInit);
      const cplx fn = f(zn);
      if (fn == cplx(0.0) || !std::isfinite(std::abs(fn)))
        throw SpectralPointError("zero of f on the contour");
      total += w.seg(zp, fp, zn, fn, 0);
      zp = zn;
      fp = fn;
    }
  }
  const double turns = total / (2 * kPi);
  const double n = std::round(turns);
  if (std::abs(turns - n) > 0.1) throw NumericalFailure("winding number not close to an integer");
  return int(n);
}

namespace {

struct RectSolver {
  const std::function<cplx(cplx)>& f;
  double min_size;
  int max_depth;
  std::vector<cplx> out;

  void solve(const Rect& r, int count, int depth) {
    if (count <= 0) return;
    const cplx center{0.5 * (r.re_lo + r.re_hi), 0.5 * (r.im_lo + r.im_hi)};
    const double w = r.re_hi - r.re_lo, h = r.im_hi - r.im_lo;
    if (count == 1) {
      const auto p = complex_root_polish(f, center);
      if (p.converged && r.contains(p.root)) {
        out.push_back(p.root);
        return;
      }
    }
    if (depth >= max_depth || std::max(w, h) < min_size) {
      const auto p = complex_root_polish(f, center);
      for (int i = 0; i < count; ++i) out.push_back(p.root);
      return;
    }
    static constexpr double jitter[] = {0.0, 0.0371, -0.0533, 0.1129, -0.1417, 0.2093};
    for (double j : jitter) {
      Rect a = r, b = r;
      if (w >= h) {
        const double s = r.re_lo + (0.5 + j) * w;
        a.re_hi = s;
        b.re_lo = s;
      } else {
        const double s = r.im_lo + (0.5 + j) * h;
        a.im_hi = s;
        b.im_lo = s;
      }
      int na = 0, nb = 0;
      try {
        na = winding_count(f, a);
        nb = winding_count(f, b);
      } catch (const std::exception&) {
        continue;
      }
      if (na + nb != count || na < 0 || nb < 0) continue;
      solve(a, na, depth + 1);
      solve(b, nb, depth + 1);
      return;
    }
    throw NumericalFailure("rectangle subdivision could not separate the zeros");
  }
};

}  // namespace

std::vector<cplx> rectangle_roots(const std::function<cplx(cplx)>& f, const Rect& r, int max_depth) {
  const int n = winding_count(f, r);
  if (n < 0) throw NumericalFailure("negative winding number: f has poles in the rectangle");
  const double size = std::max(r.re_hi - r.re_lo, r.im_hi - r.im_lo);
  RectSolver s{f, 1e-9 * size, max_depth, {}};
  s.solve(r, n, 0);
  std::sort(s.out.begin(), s.out.end(), [](cplx p, cplx q) {
    return p.real() != q.real() ? p.real() < q.real() : p.imag() < q.imag();
  });
  return s.out;
}

}  // namespace dlab
