#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dlab/impedance_random.hpp"

namespace dlab {

enum class BoundaryModel { circle, sphere };

const char* boundary_name(BoundaryModel m);
BoundaryModel parse_boundary(const std::string& s);
int boundary_dim(BoundaryModel m);  // dimension d of the enclosed domain

struct SpectrumEntry {
  double mu;
  long long mult;
};

// Laplace-Beltrami eigenvalues up to mu_max with multiplicities. The first
// `dropped` eigenvalues (counted with multiplicity) are removed.
struct BoundarySpectrum {
  BoundaryModel model = BoundaryModel::circle;
  double mu_max = 0.0;
  long long dropped = 0;
  std::vector<SpectrumEntry> entries;

  long long total() const;
};

BoundarySpectrum boundary_spectrum(BoundaryModel model, double mu_max, long long dropped = 0);

// mu and multiplicity of level n (circle: k = n, sphere: l = n)
SpectrumEntry spectrum_level(BoundaryModel model, long long n);

struct CountingFunction {
  BoundarySpectrum source;
  long long operator()(double lambda) const;  // #{j : mu_j <= lambda} after the dropped prefix
};

struct ExponentFit {
  double exponent = 0.0;
  double stderr_ = 0.0;
  int points = 0;
};

ExponentFit weyl_exponent_fit(const CountingFunction& cf, double lo, double hi, int points = 200);

enum class Verdict { compact_as, not_compact_as, inconclusive };
const char* verdict_name(Verdict v);

struct CriterionVerdict {
  std::string criterion;          // series, expectation, moment, limit
  Verdict verdict = Verdict::inconclusive;
  std::vector<double> delta_grid;
  std::vector<double> values;     // per delta (or a single moment); inf when divergent
  std::vector<double> tails;      // analytic tail contribution per delta
  std::string note;
};

// Sum over the spectrum of mult * P{|zeta| >= delta sqrt(mu)}, analytic tail.
// The spectrum supplies the model and the dropped prefix; entries are
// regenerated as far as each delta requires.
CriterionVerdict series_criterion(const ImpedanceDistribution& dist, const BoundarySpectrum& spectrum,
                                  const std::vector<double>& delta_grid);

// E N(|zeta|^2 / delta^2) by a Stieltjes sum over the spectrum thresholds plus
// an analytic tail with the smoothed counting function.
CriterionVerdict expectation_criterion(const ImpedanceDistribution& dist, const BoundarySpectrum& spectrum,
                                       const std::vector<double>& delta_grid);

// E |zeta|^(d-1)
CriterionVerdict moment_criterion(const ImpedanceDistribution& dist, int d);

struct TransitionPoint {
  double a = 0.0;
  std::vector<std::vector<int>> hits;        // [eps][truncation] trials with statistic < eps
  std::vector<std::vector<double>> fraction; // hits / trials
  std::vector<std::vector<double>> predicted;// exact probability of the event
  Verdict series = Verdict::inconclusive, expectation = Verdict::inconclusive, moment = Verdict::inconclusive;
};

struct TransitionReport {
  BoundaryModel model = BoundaryModel::circle;
  double s_min = 0.1;
  int trials = 0;
  int modes = 0;
  std::uint64_t seed = 0;
  std::vector<int> truncations;  // M/4, M/2, M
  std::vector<double> eps;
  std::vector<double> delta_grid;
  std::vector<TransitionPoint> points;
};

// Pareto family zeta_j = i S_j over a grid of tail exponents a. For each trial
// and truncation Mt the statistic is max over Mt/2 < j <= Mt of |zeta_j| / sqrt(mu_j).
// Trials are split over `threads` workers; results depend only on (seed, trial, j).
TransitionReport monte_carlo_transition(BoundaryModel model, const std::vector<double>& a_grid, double s_min,
                                        int trials, int modes, std::uint64_t seed,
                                        const std::vector<double>& eps = {0.1, 0.01},
                                        const std::vector<double>& delta_grid = {1e-2, 1e-1, 1.0, 10.0},
                                        int threads = 1);

// Direction check across truncations: compact side nondecreasing, other side
// nonincreasing, each step allowed 2 pooled binomial standard errors of slack.
bool transition_trend_ok(const std::vector<int>& hits, int trials, bool expect_increase);

}  // namespace dlab
