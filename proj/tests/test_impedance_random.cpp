#include <doctest.h>

#include <cmath>

#include "dlab/errors.hpp"
#include "dlab/extension_lab.hpp"
#include "dlab/impedance_random.hpp"
#include "helpers.hpp"

using namespace dlab;

namespace {

std::vector<ImpedanceDistribution> family() {
  return {ImpedanceDistribution::point(cplx(0.3, -1.2)),
          ImpedanceDistribution::disc(1.0, cplx(1.5, 0.5)),
          ImpedanceDistribution::segment(-2.0, 3.0),
          ImpedanceDistribution::pareto(2.5, 0.5),
          ImpedanceDistribution::half_normal(1.7),
          ImpedanceDistribution::custom({{0.0, 0.0}, {1.0, 0.3}, {2.0, 0.9}, {4.0, 1.0}}, 0.4)};
}

// largest c with ||-I + c D|| <= 1 by scanning then bisecting
double brute_cmax(const CMat& D) {
  const CMat I = CMat::Identity(D.rows(), D.cols());
  auto ok = [&](double c) { return opnorm(-I + c * D) <= 1 + 1e-12; };
  const double top = 4.0 / opnorm(D);
  double lo = 0.0, hi = -1;
  for (int i = 1; i <= 4000; ++i) {
    const double c = top * i / 4000;
    if (!ok(c)) {
      hi = c;
      break;
    }
    lo = c;
  }
  if (hi < 0) return lo;
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    (ok(mid) ? lo : hi) = mid;
  }
  return lo;
}

}  // namespace

TEST_SUITE("impedance_random") {
  TEST_CASE("point mass sequence") {
    const auto z = sample_sequence(ImpedanceDistribution::point(cplx(0, 2.5)), 5, SeededStream{1, 2});
    REQUIRE(z.size() == 5);
    for (cplx v : z) CHECK(v == cplx(0, 2.5));
  }

  TEST_CASE("Pareto mean") {
    const auto z = sample_sequence(ImpedanceDistribution::pareto(2.0, 1.0), 1000000, SeededStream{2024, 0});
    double s = 0;
    for (cplx v : z) {
      CHECK(v.real() == 0.0);
      s += std::abs(v);
    }
    CHECK(std::abs(s / z.size() - 2.0) <= 0.01);
  }

  TEST_CASE("supports lie in the closed right half-plane") {
    for (const auto& d : family()) {
      for (cplx v : sample_sequence(d, 20000, SeededStream{3, 0})) REQUIRE(v.real() >= 0.0);
    }
    for (cplx v : sample_sequence(ImpedanceDistribution::disc(1.0, 1.0), 20000, SeededStream{3, 1})) {
      CHECK(v.real() >= 0.0);
      CHECK(std::abs(v - 1.0) <= 1.0 + 1e-15);
    }
  }

  TEST_CASE("cdf is monotone with the right limits") {
    for (const auto& d : family()) {
      double prev = 0.0;
      CHECK(d.cdf(-1.0) == 0.0);
      for (int i = 0; i <= 2000; ++i) {
        const double s = 0.005 * i;
        const double F = d.cdf(s);
        CHECK(F >= prev - 1e-15);
        CHECK(F <= 1.0);
        prev = F;
      }
      CHECK(d.cdf(1e9) == doctest::Approx(1.0).epsilon(1e-9));
    }
  }

  TEST_CASE("empirical distribution of |zeta| matches the cdf") {
    for (const auto& d : family()) {
      if (d.kind == DistKind::point_mass) continue;
      const int N = 100000;
      auto z = sample_sequence(d, N, SeededStream{4, 0});
      std::vector<double> s(N);
      for (int i = 0; i < N; ++i) s[i] = std::abs(z[i]);
      std::sort(s.begin(), s.end());
      double ks = 0;
      for (int i = 0; i < N; ++i) ks = std::max({ks, std::abs(d.cdf(s[i]) - (i + 1.0) / N), std::abs(d.cdf(s[i]) - double(i) / N)});
      CHECK(ks < 1.63 / std::sqrt(N) * 1.5);
    }
  }

  TEST_CASE("survival is the complement of the cdf for continuous laws") {
    for (const auto& d : family()) {
      if (d.kind == DistKind::point_mass) continue;
      for (double s : {0.1, 0.7, 1.3, 2.9, 5.0}) CHECK(std::abs(d.survival_ge(s) + d.cdf(s) - 1.0) < 1e-12);
    }
    const auto p = ImpedanceDistribution::point(cplx(0, 2));
    CHECK(p.survival_ge(2.0) == 1.0);
    CHECK(p.survival_ge(2.0000001) == 0.0);
    const auto par = ImpedanceDistribution::pareto(3.0, 2.0);
    CHECK(par.survival_ge(4.0) == doctest::Approx(0.125));
  }

  TEST_CASE("invalid parameters are rejected") {
    CHECK_THROWS_AS(ImpedanceDistribution::disc(1.0, cplx(0.5, 0)).validate(), InvalidArgument);
    CHECK_THROWS_AS(ImpedanceDistribution::pareto(0.0, 1.0).validate(), InvalidArgument);
    CHECK_THROWS_AS(ImpedanceDistribution::pareto(1.0, 0.0).validate(), InvalidArgument);
    CHECK_THROWS_AS(ImpedanceDistribution::point(cplx(-1, 0)).validate(), InvalidArgument);
    CHECK_THROWS_AS(ImpedanceDistribution::segment(2.0, 1.0).validate(), InvalidArgument);
    CHECK_THROWS_AS(ImpedanceDistribution::custom({{0.0, 0.5}, {1.0, 0.2}}).validate(), InvalidArgument);
  }

  TEST_CASE("sequences are reproducible and stream dependent") {
    const auto d = ImpedanceDistribution::disc(0.5, cplx(1, 1));
    CHECK(sample_sequence(d, 100, SeededStream{9, 1}) == sample_sequence(d, 100, SeededStream{9, 1}));
    CHECK(sample_sequence(d, 100, SeededStream{9, 1}) != sample_sequence(d, 100, SeededStream{9, 2}));
    // prefix property: a longer sequence extends a shorter one
    const auto a = sample_sequence(d, 50, SeededStream{9, 1}), b = sample_sequence(d, 100, SeededStream{9, 1});
    CHECK(std::equal(a.begin(), a.end(), b.begin()));
  }

  TEST_CASE("Cayley examples") {
    CHECK(cayley_zeta_to_xi(0.0, 3.0) == cplx(-1.0));
    CHECK(std::abs(cayley_zeta_to_xi(std::sqrt(4.0), 3.0)) < 1e-16);
    CHECK(std::abs(std::abs(cayley_zeta_to_xi(cplx(0, 1), 0.0)) - 1.0) == 0.0);
  }

  TEST_CASE("Cayley range and round trip") {
    const SeededStream st{5, 0};
    int bad = 0;
    for (int i = 0; i < 100000; ++i) {
      const double re = i % 10 == 0 ? 0.0 : std::pow(10.0, 6 * st.uniform(i, 0) - 3);
      const cplx zeta(re, 20 * (st.uniform(i, 1) - 0.5));
      const double mu = i % 7 == 0 ? 0.0 : std::pow(10.0, 6 * st.uniform(i + 200000, 0));
      const cplx xi = cayley_zeta_to_xi(zeta, mu);
      if (std::abs(xi) > 1 + 1e-15) ++bad;
      const bool on_circle = std::abs(std::abs(xi) - 1.0) <= 1e-12;
      if (on_circle != (re <= 1e-12)) ++bad;
      if (std::abs(xi - 1.0) > 1e-6 && std::abs(xi + 1.0) > 1e-6) {
        const cplx back = cayley_xi_to_zeta(xi, mu);
        if (std::abs(back - zeta) > 1e-10 * std::max(1.0, std::abs(zeta)) * (1 + std::sqrt(1 + mu) / std::abs(1.0 - xi))) ++bad;
      }
    }
    CHECK(bad == 0);
  }

  TEST_CASE("diagonal contraction validation") {
    CHECK_NOTHROW(DiagonalContraction::make({cplx(-1), cplx(0, 1), cplx(0.3, 0.2)}));
    CHECK_THROWS_AS(DiagonalContraction::make({cplx(1.1)}), InvalidArgument);
  }

  TEST_CASE("admissible direction examples") {
    CMat P = CMat::Zero(3, 3);
    P(0, 0) = 1.0;
    auto r = admissible_direction_check(P);
    CHECK(r.admissible);
    CHECK(r.c_max == doctest::Approx(2.0).epsilon(1e-9));
    CMat E = CMat::Zero(2, 2);
    E(0, 1) = 1.0;
    CHECK_FALSE(admissible_direction_check(E).admissible);
    CMat H(2, 2);
    H << 1.0, cplx(0.5, 0.2), cplx(0.5, -0.2), 2.0;
    CHECK_FALSE(admissible_direction_check(I_unit * H).admissible);
  }

  TEST_CASE("admissible direction check agrees with brute bisection") {
    const SeededStream st{6, 0};
    std::uint64_t idx = 0;
    int mismatches = 0;
    for (int s = 0; s < 200; ++s) {
      const int m = 2 + s % 4;
      const CMat A = testutil::gaussian(m, m - (s % 3 == 0 ? 1 : 0), st, idx);
      const CMat ReD = A * A.adjoint();
      CMat B = testutil::gaussian(m, m, st, idx);
      CMat ImD = 0.3 * (B + B.adjoint());
      if (s % 3 == 0 && s % 2 == 0) {
        // keep Im D inside the range of Re D
        Eigen::SelfAdjointEigenSolver<CMat> es(ReD);
        const CMat V = es.eigenvectors().rightCols(m - 1);
        ImD = V * V.adjoint() * ImD * V * V.adjoint();
      }
      const CMat D = ReD + I_unit * ImD;
      const auto r = admissible_direction_check(D);
      const double c = brute_cmax(D);
      // without admissibility the norm excess is second order in c, so the
      // brute value stalls near the square root of the norm slack
      const bool brute_adm = c > 1e-5;
      if (brute_adm != r.admissible) ++mismatches;
      if (brute_adm && std::abs(c - r.c_max) > 1e-6 * std::max(1.0, c)) ++mismatches;
    }
    CHECK(mismatches == 0);
  }

  TEST_CASE("compactness proxy examples") {
    const int L = 4000;
    DiagonalContraction flat = DiagonalContraction::make(std::vector<cplx>(L, cplx(-1.0)));
    CHECK(compactness_proxy(flat, 0.5).tail_max == 0.0);

    std::vector<cplx> xi;
    for (long long n = 0; (long long)xi.size() < L; ++n) {
      const double mu = double(n) * n;
      for (int r = 0; r < (n == 0 ? 1 : 2) && (long long)xi.size() < L; ++r) xi.push_back(cayley_zeta_to_xi(cplx(0, 1), mu));
    }
    const auto st = compactness_proxy(DiagonalContraction::make(xi), 0.5);
    REQUIRE(st.slope_valid);
    CHECK(st.slope == doctest::Approx(-1.0).epsilon(0.05));
    CHECK(st.tail_max < 2e-3);

    const SeededStream s{7, 0};
    int big = 0;
    for (int t = 0; t < 1000; ++t) {
      const auto c = s.child(t);
      std::vector<cplx> u(200);
      for (int j = 0; j < 200; ++j) u[j] = std::sqrt(c.uniform(j, 0)) * std::polar(1.0, 2 * M_PI * c.uniform(j, 1));
      big += compactness_proxy(DiagonalContraction::make(u), 0.5).tail_max > 0.5;
    }
    CHECK(big > 990);
    CHECK_THROWS_AS(compactness_proxy(DiagonalContraction::make(std::vector<cplx>(50, cplx(0))), 0.5), InvalidArgument);
  }

  TEST_CASE("Haar unitaries") {
    const SeededStream st{8, 0};
    for (int m : {1, 2, 5}) {
      const CMat U = haar_unitary(m, st, 3);
      CHECK((U.adjoint() * U - CMat::Identity(m, m)).norm() < 1e-13);
      CHECK((haar_unitary(m, st, 3) - U).norm() == 0.0);
    }
    // first entry phase is uniform: mean of U00 over many draws ~ 0
    cplx mean = 0;
    for (int i = 0; i < 4000; ++i) mean += haar_unitary(3, st, 100 + i)(0, 0);
    CHECK(std::abs(mean / 4000.0) < 0.03);
  }

  TEST_CASE("matrix contraction samplers") {
    const SeededStream st{9, 0};
    MatrixContractionSpec q;
    q.kind = ContractionKind::quasi_uniform;
    q.K0 = CMat::Zero(3, 3);
    q.weights = {1.0};
    q.directions = {CMat::Identity(3, 3)};
    for (int i = 0; i < 50; ++i) {
      const CMat K = sample_matrix_contraction(q, 3, st, i).K;
      CHECK((K - K(0, 0) * CMat::Identity(3, 3)).norm() < 1e-15);
      CHECK(std::abs(K(0, 0)) <= 1.0);
    }
    MatrixContractionSpec h;
    h.kind = ContractionKind::shifted_hs;
    h.K0 = 0.3 * haar_unitary(3, st, 0);
    h.weights = std::vector<double>(9, 0.0);
    CHECK((sample_matrix_contraction(h, 3, st, 1).K - h.K0).norm() == 0.0);

    MatrixContractionSpec a;
    a.kind = ContractionKind::admissible_mix;
    const int m = 8;
    for (int j = 0; j < 4; ++j) {
      const CMat v = haar_unitary(m, st, 50 + j).col(0);
      a.directions.push_back(v * v.adjoint());
      a.weights.push_back(0.25);
    }
    double worst = 0;
    for (int i = 0; i < 1000; ++i) worst = std::max(worst, opnorm(sample_matrix_contraction(a, m, st, i).K));
    CHECK(worst <= 1.0 + 1e-12);

    MatrixContractionSpec over = q;
    over.K0 = 0.9 * CMat::Identity(3, 3);
    bool thrown = false;
    for (int i = 0; i < 50 && !thrown; ++i) {
      try {
        sample_matrix_contraction(over, 3, st, i);
      } catch (const InvalidArgument&) {
        thrown = true;
      }
    }
    CHECK(thrown);
  }
}
