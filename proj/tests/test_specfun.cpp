#include <doctest.h>

#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/bessel_prime.hpp>
#include <cmath>
#include <numbers>

#include "dlab/counter_rng.hpp"
#include "dlab/errors.hpp"
#include "dlab/specfun.hpp"

using namespace dlab;

namespace {

// Power series for J_k in long double, used where it converges well.
std::complex<long double> series_j(int k, std::complex<long double> x) {
  std::complex<long double> term = 1.0L, sum = 0.0L;
  const auto h = x / 2.0L;
  for (int i = 1; i <= k; ++i) term *= h / (long double)i;
  const auto q = -h * h;
  for (int m = 0; m < 400; ++m) {
    sum += term;
    term *= q / ((long double)(m + 1) * (long double)(m + 1 + k));
    if (std::abs(term) < 1e-30L * std::abs(sum)) break;
  }
  return sum;
}

double rel(cplx a, cplx b) { return std::abs(a - b) / std::max(1e-300, std::abs(b)); }

}  // namespace

TEST_SUITE("specfun") {
  TEST_CASE("values at the origin") {
    const auto j0 = bessel_j(0, 0.0);
    CHECK(j0.value == cplx(1.0));
    CHECK(std::abs(j0.derivative) == 0.0);
    CHECK(std::abs(bessel_j(1, 0.0).value) == 0.0);
    CHECK(std::abs(bessel_j(1, 0.0).derivative - 0.5) < 1e-15);
  }

  TEST_CASE("first zero of J0") {
    CHECK(std::abs(bessel_j(0, 2.404825557695773).value) <= 1e-12);
    const auto r = find_real_roots([](double x) { return bessel_j(0, x).value.real(); }, 2, 3, 4);
    REQUIRE(r.roots.size() == 1);
    CHECK(std::abs(series_j(0, (long double)r.roots[0])) < 1e-14L);
    CHECK(r.roots[0] == doctest::Approx(2.404825557695773).epsilon(1e-14));
  }

  TEST_CASE("real arguments against Boost") {
    const SeededStream st{31, 0};
    double worst = 0.0, worst_d = 0.0;
    for (int i = 0; i < 10000; ++i) {
      const int k = int(st.uniform(i, 0) * 51);
      const double x = 0.1 + 99.9 * st.uniform(i, 1);
      const auto b = bessel_j(k, x);
      const double ref = boost::math::cyl_bessel_j(k, x);
      const double refd = boost::math::cyl_bessel_j_prime(k, x);
      const double scale = std::max({std::abs(ref), std::abs(refd), 1e-300});
      worst = std::max(worst, std::abs(b.value.real() - ref) / scale);
      worst_d = std::max(worst_d, std::abs(b.derivative.real() - refd) / scale);
    }
    CHECK(worst < 1e-10);
    CHECK(worst_d < 1e-10);
  }

  TEST_CASE("spherical Bessel against Boost") {
    const SeededStream st{32, 0};
    double worst = 0.0;
    for (int i = 0; i < 5000; ++i) {
      const int l = int(st.uniform(i, 0) * 41);
      const double x = 0.05 + 80 * st.uniform(i, 1);
      const auto b = spherical_bessel_j(l, x);
      const double ref = boost::math::sph_bessel(l, x), refd = boost::math::sph_bessel_prime(l, x);
      const double scale = std::max({std::abs(ref), std::abs(refd), 1e-300});
      worst = std::max({worst, std::abs(b.value.real() - ref) / scale, std::abs(b.derivative.real() - refd) / scale});
    }
    CHECK(worst < 1e-10);
  }

  TEST_CASE("complex arguments against a long double series") {
    const SeededStream st{33, 0};
    double worst = 0.0;
    for (int i = 0; i < 2000; ++i) {
      const int k = int(st.uniform(i, 0) * 20);
      const cplx x = std::polar(0.1 + 14.9 * st.uniform(i, 1), 2 * std::numbers::pi * st.uniform(i + 100000, 0));
      const auto ref = series_j(k, std::complex<long double>(x));
      const cplx r(double(ref.real()), double(ref.imag()));
      // series loses digits as |x| grows; normalize by the largest term size
      const double scale = std::max(std::abs(r), std::exp(std::abs(x.imag())) * 1e-3);
      worst = std::max(worst, std::abs(bessel_j(k, x).value - r) / scale);
    }
    CHECK(worst < 1e-10);
  }

  TEST_CASE("recurrence and derivative identities") {
    const SeededStream st{34, 0};
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
      const int k = 1 + int(st.uniform(i, 0) * 50);
      const double mod = 0.1 + 99.9 * st.uniform(i, 1);
      const cplx x = std::polar(mod, (st.uniform(i + 50000, 0) - 0.5) * 0.8);
      const auto seq = bessel_j_sequence(k + 1, x);
      const cplx lhs = seq[k - 1] + seq[k + 1], rhs = (2.0 * k / x) * seq[k];
      const double sc = std::abs(seq[k - 1]) + std::abs(seq[k + 1]) + std::abs(rhs);
      worst = std::max(worst, std::abs(lhs - rhs) / sc);
      const auto b = bessel_j(k, x);
      const cplx d = 0.5 * (seq[k - 1] - seq[k + 1]);
      worst = std::max(worst, std::abs(b.derivative - d) / (std::abs(seq[k - 1]) + std::abs(seq[k + 1])));
      worst = std::max(worst, rel(b.value, seq[k]));
    }
    CHECK(worst <= 1e-10);
  }

  TEST_CASE("large arguments") {
    for (double x : {500.0, 2000.0, 9999.0}) {
      for (int k : {0, 1, 7}) {
        const double ref = boost::math::cyl_bessel_j(k, x);
        CHECK(std::abs(bessel_j(k, x).value.real() - ref) < 1e-10 / std::sqrt(x) * 10);
      }
    }
  }

  TEST_CASE("domain guards") {
    CHECK_THROWS(bessel_j(201, 1.0));
    CHECK_THROWS(bessel_j(0, 2e4));
  }

  TEST_CASE("interlacing of zeros") {
    for (int k = 0; k <= 10; ++k) {
      auto zk = find_real_roots([k](double x) { return bessel_j(k, x).value.real(); }, 0.5, 60, 64).roots;
      auto zk1 = find_real_roots([k](double x) { return bessel_j(k + 1, x).value.real(); }, 0.5, 60, 64).roots;
      REQUIRE(zk.size() >= 11);
      for (int i = 0; i < 10; ++i) {
        int between = 0;
        for (double z : zk1) between += (z > zk[i] && z < zk[i + 1]);
        CHECK(between == 1);
      }
    }
  }

  TEST_CASE("real roots: derivative of J0 on [1, 10]") {
    auto f = [](double x) { return bessel_j(0, x).derivative.real(); };
    const auto r = find_real_roots(f, 1, 10, 10);
    REQUIRE(r.roots.size() == 2);
    // brute oracle: 1e6-point scan and bisection
    std::vector<double> oracle;
    const int NS = 1000000;
    double xp = 1, fp = f(1);
    for (int i = 1; i <= NS; ++i) {
      const double x = 1 + 9.0 * i / NS, fx = f(x);
      if (fp * fx < 0) {
        double lo = xp, hi = x;
        for (int it = 0; it < 60; ++it) {
          const double mid = 0.5 * (lo + hi);
          (f(lo) * f(mid) <= 0 ? hi : lo) = mid;
        }
        oracle.push_back(0.5 * (lo + hi));
      }
      xp = x;
      fp = fx;
    }
    REQUIRE(oracle.size() == 2);
    for (int i = 0; i < 2; ++i) CHECK(std::abs(r.roots[i] - oracle[i]) <= 1e-10 * oracle[i]);
    CHECK(r.roots[0] == doctest::Approx(3.8317059702075125).epsilon(1e-10));
    CHECK(r.roots[1] == doctest::Approx(7.0155866698156188).epsilon(1e-10));
  }

  TEST_CASE("real roots: linear and J0 windows") {
    const auto lin = find_real_roots([](double x) { return x - 5; }, 0, 10, 4);
    REQUIRE(lin.roots.size() == 1);
    CHECK(lin.roots[0] == doctest::Approx(5.0).epsilon(1e-14));
    const auto r = find_real_roots([](double x) { return bessel_j(0, x).value.real(); }, 2, 6, 4);
    REQUIRE(r.roots.size() == 2);
    CHECK(r.roots[0] == doctest::Approx(2.404825557695773).epsilon(1e-10));
    CHECK(r.roots[1] == doctest::Approx(5.520078110286311).epsilon(1e-10));
  }

  TEST_CASE("real roots: residual is small relative to the slope") {
    auto f = [](double x) { return std::sin(3 * x) * std::exp(0.1 * x); };
    const auto r = find_real_roots(f, 0.1, 20, 100);
    CHECK(r.roots.size() == 19);
    for (double x : r.roots) {
      const double slope = std::abs(3 * std::cos(3 * x) * std::exp(0.1 * x));
      CHECK(std::abs(f(x)) <= 1e-9 * slope);
    }
  }

  TEST_CASE("real roots: double root is reported separately") {
    const auto r = find_real_roots([](double x) { return (x - 2) * (x - 2); }, 0.5, 4, 4);
    CHECK(r.roots.empty());
    REQUIRE(r.suspected_double.size() == 1);
    CHECK(std::abs(r.suspected_double[0] - 2) < 1e-4);
  }

  TEST_CASE("real roots: poles are not roots") {
    const auto r = find_real_roots([](double x) { return 1.0 / (x - 2.5); }, 1, 4, 4);
    CHECK(r.roots.empty());
    CHECK(r.poles.size() == 1);
  }

  TEST_CASE("complex polish") {
    const auto p = complex_root_polish([](cplx z) { return z * z + 1.0; }, cplx(0, 0.9));
    CHECK(p.converged);
    CHECK(std::abs(p.root - cplx(0, 1)) <= 1e-12);
    const cplx c(1, -0.5);
    const auto t = complex_root_polish([c](cplx z) { return (z - c) * (z - c) * (z - c); }, cplx(1, -0.4));
    CHECK((!t.converged || std::abs(t.root - c) <= 1e-4));
  }

  TEST_CASE("argument principle counts and locates zeros") {
    auto f = [](cplx z) { return (z - cplx(1, -1)) * (z - cplx(2.5, -0.3)) * (z - cplx(4, 2)); };
    CHECK(winding_count(f, Rect{0, 3, -2, 0.5}) == 2);
    CHECK(winding_count(f, Rect{0, 5, -2, 3}) == 3);
    auto roots = rectangle_roots(f, Rect{0, 3, -2, 0.5});
    REQUIRE(roots.size() == 2);
    std::sort(roots.begin(), roots.end(), [](cplx a, cplx b) { return a.real() < b.real(); });
    CHECK(std::abs(roots[0] - cplx(1, -1)) < 1e-10);
    CHECK(std::abs(roots[1] - cplx(2.5, -0.3)) < 1e-10);
    CHECK_THROWS_AS(winding_count(f, Rect{1, 3, -2, 0.5}), SpectralPointError);
  }
}
