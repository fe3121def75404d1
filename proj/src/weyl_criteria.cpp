#include "dlab/weyl_criteria.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <thread>

#include "dlab/errors.hpp"

namespace dlab {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

const char* boundary_name(BoundaryModel m) { return m == BoundaryModel::circle ? "circle" : "sphere"; }

BoundaryModel parse_boundary(const std::string& s) {
  if (s == "circle") return BoundaryModel::circle;
  if (s == "sphere") return BoundaryModel::sphere;
  throw InvalidArgument("unknown boundary model: " + s);
}

int boundary_dim(BoundaryModel m) { return m == BoundaryModel::circle ? 2 : 3; }

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::compact_as: return "compact_as";
    case Verdict::not_compact_as: return "not_compact_as";
    default: return "inconclusive";
  }
}

SpectrumEntry spectrum_level(BoundaryModel model, long long n) {
  const double x = double(n);
  if (model == BoundaryModel::circle) return {x * x, n == 0 ? 1 : 2};
  return {x * (x + 1.0), 2 * n + 1};
}

namespace {

// eigenvalues (with multiplicity) in levels 0..n-1
long long count_before(BoundaryModel model, long long n) {
  if (n <= 0) return 0;
  return model == BoundaryModel::circle ? 2 * n - 1 : n * n;
}

long long effective_mult(BoundaryModel model, long long n, long long dropped) {
  const long long before = count_before(model, n);
  const long long after = before + spectrum_level(model, n).mult;
  return std::max(0LL, after - std::max(before, dropped));
}

// smallest level n with sqrt(mu_n) >= x (x >= 0)
long long first_level_at_least(BoundaryModel model, double x) {
  if (x <= 0.0) return 0;
  long long n;
  if (model == BoundaryModel::circle) {
    n = (long long)std::ceil(x);
  } else {
    n = (long long)std::ceil(-0.5 + std::sqrt(0.25 + x * x));
  }
  n = std::max(0LL, n - 2);
  while (std::sqrt(spectrum_level(model, n).mu) < x) ++n;
  return n;
}

// first level beyond the dropped prefix
long long level_of_dropped(BoundaryModel model, long long dropped) {
  long long n = 0;
  while (count_before(model, n + 1) <= dropped) ++n;
  return n + 1;
}

}  // namespace

long long BoundarySpectrum::total() const {
  long long t = 0;
  for (const auto& e : entries) t += e.mult;
  return t;
}

BoundarySpectrum boundary_spectrum(BoundaryModel model, double mu_max, long long dropped) {
  if (!(mu_max >= 1.0)) throw InvalidArgument("boundary_spectrum: mu_max must be >= 1");
  if (dropped < 0) throw InvalidArgument("boundary_spectrum: dropped prefix must be >= 0");
  BoundarySpectrum s;
  s.model = model;
  s.mu_max = mu_max;
  s.dropped = dropped;
  for (long long n = 0;; ++n) {
    const auto lev = spectrum_level(model, n);
    if (lev.mu > mu_max) break;
    const long long m = effective_mult(model, n, dropped);
    if (m > 0) s.entries.push_back({lev.mu, m});
  }
  return s;
}

long long CountingFunction::operator()(double lambda) const {
  long long c = 0;
  for (const auto& e : source.entries) {
    if (e.mu > lambda) break;
    c += e.mult;
  }
  return c;
}

ExponentFit weyl_exponent_fit(const CountingFunction& cf, double lo, double hi, int points) {
  if (!(lo > 0.0) || !(hi >= 1e3 * lo * (1 - 1e-12))) throw InvalidArgument("weyl_exponent_fit: range must span >= 3 decades");
  if (points < 3) throw InvalidArgument("weyl_exponent_fit: need >= 3 points");
  std::vector<double> xs, ys;
  for (int i = 0; i < points; ++i) {
    const double lam = lo * std::pow(hi / lo, double(i) / (points - 1));
    const long long N = cf(lam);
    if (N <= 0) continue;
    xs.push_back(std::log(lam));
    ys.push_back(std::log(double(N)));
  }
  ExponentFit fit;
  fit.points = (int)xs.size();
  if (xs.size() < 3) return fit;
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
  fit.exponent = sxy / sxx;
  double rss = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - my - fit.exponent * (xs[i] - mx);
    rss += r * r;
  }
  fit.stderr_ = std::sqrt(rss / (n - 2) / sxx);
  return fit;
}

namespace {

constexpr long long kMaxLevels = 50'000'000;
constexpr long long kParetoExtra = 20'000;

struct Plan {
  long long n_end = 0;        // levels 0..n_end-1 are enumerated
  bool certified = true;      // tail handled analytically or provably zero
  bool divergent = false;
  std::string note;
};

Plan plan_levels(const ImpedanceDistribution& dist, BoundaryModel model, long long dropped, double delta) {
  Plan p;
  const int d = boundary_dim(model);
  const long long base = level_of_dropped(model, dropped);
  switch (dist.kind) {
    case DistKind::pareto_imaginary:
      p.n_end = std::max(first_level_at_least(model, dist.s_min / delta), base) + kParetoExtra;
      p.divergent = !(dist.a > d - 1);
      break;
    case DistKind::half_normal_real:
      p.n_end = std::max(first_level_at_least(model, 40.0 * dist.sigma / delta) + 1, base);
      break;
    default: {
      const double smax = dist.support_max();
      // first level with delta sqrt(mu) strictly above the support
      long long n = first_level_at_least(model, smax / delta);
      while (delta * std::sqrt(spectrum_level(model, n).mu) <= smax) ++n;
      p.n_end = std::max(n, base);
      if (!dist.table_complete()) {
        p.certified = false;
        p.note = "cdf table does not reach 1; tail mass beyond the table is unknown";
      }
    }
  }
  if (p.n_end > kMaxLevels) {
    p.n_end = kMaxLevels;
    p.certified = false;
    p.note = "enumeration limit reached";
  }
  return p;
}

// Euler-Maclaurin tail sum over levels n >= N of mult_n (s_min / (delta sqrt(mu_n)))^a.
double pareto_series_tail(BoundaryModel model, double a, double s_min, double delta, long long N) {
  const double C = std::pow(s_min / delta, a);
  const double x = double(N);
  if (model == BoundaryModel::circle) {
    const double f = 2 * C * std::pow(x, -a);
    const double integral = 2 * C * std::pow(x, 1 - a) / (a - 1);
    const double f1 = -2 * a * C * std::pow(x, -a - 1);
    const double f3 = -2 * a * (a + 1) * (a + 2) * C * std::pow(x, -a - 3);
    return integral + f / 2 - f1 / 12 + f3 / 720;
  }
  const double u = x * (x + 1);
  const double f = C * (2 * x + 1) * std::pow(u, -a / 2);
  const double integral = C * std::pow(u, 1 - a / 2) / (a / 2 - 1);
  const double f1 = C * (2 * std::pow(u, -a / 2) - (a / 2) * (2 * x + 1) * (2 * x + 1) * std::pow(u, -a / 2 - 1));
  return integral + f / 2 - f1 / 12;
}

// E[ N_P(S^2/delta^2) ; S >= T ] for S Pareto, T = delta sqrt(mu_N) >= s_min,
// using the smoothed counting function plus its first correction.
double pareto_expectation_tail(BoundaryModel model, double a, double s_min, double delta, long long N, long long P) {
  const double T = delta * std::sqrt(spectrum_level(model, N).mu);
  const double A = a * std::pow(s_min, a);
  const double surv = std::pow(s_min / T, a);
  const double dens = A * std::pow(T, -a - 1);
  if (model == BoundaryModel::circle) {
    const double main = (2.0 / delta) * A * std::pow(T, 1 - a) / (a - 1);
    return main - double(P) * surv + delta * dens / 6.0;
  }
  const double main = A * std::pow(T, 2 - a) / ((a - 2) * delta * delta);
  const double y = double(N) + 0.5;
  const double gy = dens * delta * y / std::sqrt(y * y - 0.25);
  return main + (1.0 / 6.0 - double(P)) * surv + (y * gy + surv) / 6.0;
}

Verdict combine(const std::vector<double>& values, bool certified) {
  for (double v : values)
    if (!std::isfinite(v)) return Verdict::not_compact_as;
  return certified ? Verdict::compact_as : Verdict::inconclusive;
}

void check_grid(const std::vector<double>& grid) {
  if (grid.empty()) throw InvalidArgument("delta grid must be nonempty");
  for (double d : grid)
    if (!(d > 0.0) || !std::isfinite(d)) throw InvalidArgument("delta grid entries must be positive");
}

}  // namespace

CriterionVerdict series_criterion(const ImpedanceDistribution& dist, const BoundarySpectrum& spectrum,
                                  const std::vector<double>& delta_grid) {
  dist.validate();
  check_grid(delta_grid);
  CriterionVerdict v;
  v.criterion = "series";
  v.delta_grid = delta_grid;
  bool certified = true;
  const BoundaryModel model = spectrum.model;
  for (double delta : delta_grid) {
    const Plan p = plan_levels(dist, model, spectrum.dropped, delta);
    certified = certified && p.certified;
    if (!p.note.empty()) v.note = p.note;
    if (p.divergent) {
      v.values.push_back(kInf);
      v.tails.push_back(kInf);
      continue;
    }
    double sum = 0.0;
    for (long long n = 0; n < p.n_end; ++n) {
      const long long m = effective_mult(model, n, spectrum.dropped);
      if (m == 0) continue;
      sum += double(m) * dist.survival_ge(delta * std::sqrt(spectrum_level(model, n).mu));
    }
    double tail = 0.0;
    if (dist.kind == DistKind::pareto_imaginary)
      tail = pareto_series_tail(model, dist.a, dist.s_min, delta, p.n_end);
    v.values.push_back(sum + tail);
    v.tails.push_back(tail);
  }
  v.verdict = combine(v.values, certified);
  return v;
}

CriterionVerdict expectation_criterion(const ImpedanceDistribution& dist, const BoundarySpectrum& spectrum,
                                       const std::vector<double>& delta_grid) {
  dist.validate();
  check_grid(delta_grid);
  CriterionVerdict v;
  v.criterion = "expectation";
  v.delta_grid = delta_grid;
  bool certified = true;
  const BoundaryModel model = spectrum.model;
  const long long P = spectrum.dropped;
  for (double delta : delta_grid) {
    const Plan p = plan_levels(dist, model, P, delta);
    certified = certified && p.certified;
    if (!p.note.empty()) v.note = p.note;
    if (p.divergent) {
      v.values.push_back(kInf);
      v.tails.push_back(kInf);
      continue;
    }
    // sum_n N_P(mu_n) P{t_n <= S < t_{n+1}}
    double sum = 0.0;
    double s_here = dist.survival_ge(0.0);
    for (long long n = 0; n < p.n_end; ++n) {
      const long long cum = std::max(0LL, count_before(model, n + 1) - P);
      const double s_next = dist.survival_ge(delta * std::sqrt(spectrum_level(model, n + 1).mu));
      if (cum > 0) sum += double(cum) * (s_here - s_next);
      s_here = s_next;
    }
    double tail = 0.0;
    if (dist.kind == DistKind::pareto_imaginary)
      tail = pareto_expectation_tail(model, dist.a, dist.s_min, delta, p.n_end, P);
    v.values.push_back(sum + tail);
    v.tails.push_back(tail);
  }
  v.verdict = combine(v.values, certified);
  return v;
}

namespace {

double moment_value(const ImpedanceDistribution& dist, int p, bool& certified) {
  switch (dist.kind) {
    case DistKind::point_mass: return std::pow(std::abs(dist.z0), p);
    case DistKind::uniform_disc: {
      const double c = std::abs(dist.center), r = dist.r;
      if (p == 2) return c * c + r * r / 2;
      // Gauss-Legendre in rho, trapezoid in theta (periodic)
      static const double gx[] = {-0.9739065285171717, -0.8650633666889845, -0.6794095682990244,
                                  -0.4333953941292472, -0.1488743389816312, 0.1488743389816312,
                                  0.4333953941292472,  0.6794095682990244,  0.8650633666889845,
                                  0.9739065285171717};
      static const double gw[] = {0.0666713443086881, 0.1494513491505806, 0.2190863625159820,
                                  0.2692667193099963, 0.2955242247147529, 0.2955242247147529,
                                  0.2692667193099963, 0.2190863625159820, 0.1494513491505806,
                                  0.0666713443086881};
      const int nt = 256, nr = 32;
      double acc = 0.0;
      for (int ir = 0; ir < nr; ++ir) {
        const double a = r * ir / nr, b = r * (ir + 1) / nr;
        for (int g = 0; g < 10; ++g) {
          const double rho = 0.5 * (a + b) + 0.5 * (b - a) * gx[g];
          double ring = 0.0;
          for (int it = 0; it < nt; ++it) {
            const double th = 2 * std::numbers::pi * it / nt;
            ring += std::pow(std::abs(dist.center + std::polar(rho, th)), p);
          }
          acc += 0.5 * (b - a) * gw[g] * rho * ring * (2 * std::numbers::pi / nt);
        }
      }
      return r > 0 ? acc / (std::numbers::pi * r * r) : std::pow(c, p);
    }
    case DistKind::uniform_segment_imaginary: {
      const double lo = dist.c_lo, hi = dist.c_hi;
      if (hi == lo) return std::pow(std::abs(lo), p);
      auto F = [&](double y) { return (y < 0 ? -1.0 : 1.0) * std::pow(std::abs(y), p + 1) / (p + 1); };
      return (F(hi) - F(lo)) / (hi - lo);
    }
    case DistKind::pareto_imaginary:
      return dist.a > p ? dist.a * std::pow(dist.s_min, p) / (dist.a - p) : kInf;
    case DistKind::half_normal_real:
      if (p == 1) return dist.sigma * std::sqrt(2.0 / std::numbers::pi);
      if (p == 2) return dist.sigma * dist.sigma;
      return std::pow(dist.sigma, p) * std::pow(2.0, p / 2.0) * std::tgamma((p + 1) / 2.0) / std::sqrt(std::numbers::pi);
    case DistKind::bounded_custom: {
      const auto& t = dist.table;
      double m = t.front().second * std::pow(t.front().first, p);
      for (std::size_t i = 1; i < t.size(); ++i) {
        const auto [s0, F0] = t[i - 1];
        const auto [s1, F1] = t[i];
        m += (F1 - F0) / (s1 - s0) * (std::pow(s1, p + 1) - std::pow(s0, p + 1)) / (p + 1);
      }
      if (!dist.table_complete()) certified = false;
      return m;
    }
  }
  return kInf;
}

}  // namespace

CriterionVerdict moment_criterion(const ImpedanceDistribution& dist, int d) {
  dist.validate();
  if (d != 2 && d != 3) throw InvalidArgument("moment_criterion: d must be 2 or 3");
  CriterionVerdict v;
  v.criterion = "moment";
  bool certified = true;
  v.values.push_back(moment_value(dist, d - 1, certified));
  v.verdict = combine(v.values, certified);
  if (!certified) v.note = "cdf table does not reach 1";
  return v;
}

TransitionReport monte_carlo_transition(BoundaryModel model, const std::vector<double>& a_grid, double s_min,
                                        int trials, int modes, std::uint64_t seed, const std::vector<double>& eps,
                                        const std::vector<double>& delta_grid, int threads) {
  if (a_grid.empty()) throw InvalidArgument("transition: empty parameter grid");
  for (double a : a_grid)
    if (!(a > 0.0) || !std::isfinite(a)) throw InvalidArgument("transition: Pareto exponents must be positive");
  if (!(s_min > 0.0)) throw InvalidArgument("transition: s_min must be positive");
  if (trials < 100) throw InvalidArgument("transition: need at least 100 trials");
  if (modes < 1000) throw InvalidArgument("transition: need at least 1000 modes");
  if (eps.empty()) throw InvalidArgument("transition: empty eps list");
  for (double e : eps)
    if (!(e > 0.0)) throw InvalidArgument("transition: eps must be positive");
  check_grid(delta_grid);
  if (threads < 1) throw InvalidArgument("transition: threads must be >= 1");

  TransitionReport rep;
  rep.model = model;
  rep.s_min = s_min;
  rep.trials = trials;
  rep.modes = modes;
  rep.seed = seed;
  rep.truncations = {modes / 4, modes / 2, modes};
  rep.eps = eps;
  rep.delta_grid = delta_grid;

  // mu_j for j = 1..modes with multiplicity
  std::vector<double> mu(modes + 1, 0.0);
  {
    long long j = 1;
    for (long long n = 0; j <= modes; ++n) {
      const auto lev = spectrum_level(model, n);
      for (long long r = 0; r < lev.mult && j <= modes; ++r) mu[j++] = lev.mu;
    }
  }
  const std::size_t A = a_grid.size(), T = rep.truncations.size();
  std::vector<std::vector<double>> weight(A, std::vector<double>(modes + 1));
  for (std::size_t ia = 0; ia < A; ++ia)
    for (int j = 1; j <= modes; ++j) weight[ia][j] = std::pow(mu[j], a_grid[ia] / 2);

  // per trial: min over each truncation window of u_j mu_j^{a/2}
  std::vector<double> mins(std::size_t(trials) * A * T);
  const SeededStream base{seed, 0};
  auto work = [&](int t0, int t1) {
    std::vector<double> u(modes + 1);
    for (int t = t0; t < t1; ++t) {
      const SeededStream st = base.child(std::uint64_t(t));
      for (int j = 1; j <= modes; ++j) u[j] = st.uniform_pos(std::uint64_t(j), 0);
      for (std::size_t ia = 0; ia < A; ++ia)
        for (std::size_t it = 0; it < T; ++it) {
          const int Mt = rep.truncations[it];
          double m = std::numeric_limits<double>::infinity();
          for (int j = Mt / 2 + 1; j <= Mt; ++j) m = std::min(m, u[j] * weight[ia][j]);
          mins[(std::size_t(t) * A + ia) * T + it] = m;
        }
    }
  };
  const int nt = std::min(threads, trials);
  std::vector<std::thread> pool;
  for (int w = 0; w < nt; ++w) {
    const int t0 = int(std::int64_t(trials) * w / nt), t1 = int(std::int64_t(trials) * (w + 1) / nt);
    pool.emplace_back(work, t0, t1);
  }
  for (auto& th : pool) th.join();

  for (std::size_t ia = 0; ia < A; ++ia) {
    TransitionPoint pt;
    pt.a = a_grid[ia];
    const auto dist = ImpedanceDistribution::pareto(pt.a, s_min);
    pt.hits.assign(eps.size(), std::vector<int>(T, 0));
    pt.fraction.assign(eps.size(), std::vector<double>(T, 0.0));
    pt.predicted.assign(eps.size(), std::vector<double>(T, 0.0));
    for (std::size_t ie = 0; ie < eps.size(); ++ie)
      for (std::size_t it = 0; it < T; ++it) {
        int h = 0;
        for (int t = 0; t < trials; ++t) {
          const double m = mins[(std::size_t(t) * A + ia) * T + it];
          const double stat = s_min * std::pow(m, -1.0 / pt.a);
          if (stat < eps[ie]) ++h;
        }
        pt.hits[ie][it] = h;
        pt.fraction[ie][it] = double(h) / trials;
        const int Mt = rep.truncations[it];
        double logp = 0.0;
        for (int j = Mt / 2 + 1; j <= Mt; ++j) {
          const double q = dist.survival_ge(eps[ie] * std::sqrt(mu[j]));
          if (q >= 1.0) {
            logp = -kInf;
            break;
          }
          logp += std::log1p(-q);
        }
        pt.predicted[ie][it] = std::exp(logp);
      }
    const auto full = boundary_spectrum(model, 1.0);
    pt.series = series_criterion(dist, full, delta_grid).verdict;
    pt.expectation = expectation_criterion(dist, full, delta_grid).verdict;
    pt.moment = moment_criterion(dist, boundary_dim(model)).verdict;
    rep.points.push_back(std::move(pt));
  }
  return rep;
}

bool transition_trend_ok(const std::vector<int>& hits, int trials, bool expect_increase) {
  auto step_ok = [&](int h0, int h1) {
    const double n = trials;
    const double p = (h0 + h1) / (2.0 * n);
    const double se = std::sqrt(std::max(0.0, 2.0 * p * (1 - p) / n));
    const double diff = (h1 - h0) / n;
    return expect_increase ? diff >= -2.0 * se - 1e-12 : diff <= 2.0 * se + 1e-12;
  };
  for (std::size_t i = 0; i + 1 < hits.size(); ++i)
    if (!step_ok(hits[i], hits[i + 1])) return false;
  return hits.empty() || step_ok(hits.front(), hits.back());
}

}  // namespace dlab
