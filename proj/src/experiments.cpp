#include "dlab/experiments.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dlab/counter_rng.hpp"
#include "dlab/disk_model.hpp"
#include "dlab/errors.hpp"
#include "dlab/extension_lab.hpp"
#include "dlab/linalg.hpp"

namespace dlab {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw NumericalFailure("sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

std::string RunManifest::to_json() const {
  ordered_json j;
  j["command"] = command;
  j["version"] = version;
  j["config_sha256"] = config_hash;
  j["seed"] = seed;
  j["files"] = ordered_json::array();
  for (const auto& f : files) j["files"].push_back({{"name", f.name}, {"sha256", f.sha256}, {"bytes", f.bytes}});
  j["stages"] = ordered_json::array();
  for (const auto& s : stages) j["stages"].push_back({{"stage", s.stage}, {"seconds", s.seconds}});
  return j.dump(2) + "\n";
}

namespace {

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", x);
  return buf;
}

ordered_json jnum(double x) {
  if (std::isfinite(x)) return x;
  return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
}

ordered_json jlist(const std::vector<double>& v) {
  ordered_json a = ordered_json::array();
  for (double x : v) a.push_back(jnum(x));
  return a;
}

class Outputs {
 public:
  Outputs(const ExperimentConfig& cfg, const std::string& dir) : cfg_(cfg), dir_(dir) {
    cfg.validate();
    fs::create_directories(dir_);
    man_.command = cfg.command;
    man_.seed = cfg.run.seed;
    man_.config_hash = sha256_hex(cfg.serialize());
    t0_ = std::chrono::steady_clock::now();
  }

  void stage(const std::string& name) {
    const auto now = std::chrono::steady_clock::now();
    man_.stages.push_back({name, std::chrono::duration<double>(now - t0_).count()});
    t0_ = now;
  }

  void write(const std::string& name, const std::string& content) {
    std::ofstream f(fs::path(dir_) / name, std::ios::binary);
    if (!f) throw InvalidArgument("cannot write " + (fs::path(dir_) / name).string());
    f << content;
    f.close();
    man_.files.push_back({name, sha256_hex(content), content.size()});
  }

  void csv(const std::string& name, const std::string& content) {
    if (cfg_.wants("csv")) write(name, content);
  }
  void json(const std::string& name, const ordered_json& j) {
    if (cfg_.wants("json")) write(name, j.dump(2) + "\n");
  }

  RunManifest finish() {
    stage("write");
    std::ofstream f(fs::path(dir_) / "manifest.json", std::ios::binary);
    f << man_.to_json();
    return man_;
  }

 private:
  const ExperimentConfig& cfg_;
  std::string dir_;
  RunManifest man_;
  std::chrono::steady_clock::time_point t0_;
};

// ---------------------------------------------------------------- lab

CMat gaussian_matrix(int r, int c, const SeededStream& st, std::uint64_t& idx) {
  CMat G(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) {
      const std::uint64_t k = idx++;
      G(i, j) = cplx(st.normal(k, 0), st.normal(k, 1));
    }
  return G;
}

CVec gaussian_vector(int n, const SeededStream& st, std::uint64_t& idx) {
  return gaussian_matrix(n, 1, st, idx).col(0);
}

CMat random_contraction(int m, const SeededStream& st, std::uint64_t& idx) {
  CMat G = gaussian_matrix(m, m, st, idx);
  const double r = st.uniform(idx++, 0);
  return G * (r / opnorm(G));
}

struct Check {
  std::string name;
  double tol;
  double worst = 0.0;
  long long count = 0, violations = 0;
};

}  // namespace

RunManifest run_lab(const ExperimentConfig& cfg, const std::string& out_dir) {
  Outputs out(cfg, out_dir);
  const int n = cfg.lab.n, m = 2;
  const double h = cfg.lab.h;
  const SeededStream base{cfg.run.seed, 0x1ab};

  std::vector<Check> checks = {
      {"green_identity", 1e-12},  {"krein_formula", 1e-9},        {"dissipative_spectrum", 1e-10},
      {"resolvent_bound", 1e-8},  {"selfadjoint_unitary_K", 1e-10}, {"rank_law", 0.5},
      {"weyl_weight_covariance", 1e-9}, {"extension_weight_independence", 1e-9}};
  auto record = [&](std::size_t c, double v) {
    checks[c].worst = std::max(checks[c].worst, v);
    ++checks[c].count;
    return v > checks[c].tol;
  };

  std::string failing;
  long long skipped = 0;
  for (int s = 0; s < cfg.lab.samples && failing.empty(); ++s) {
    const SeededStream st = base.child(std::uint64_t(s));
    std::uint64_t idx = 0;
    RVec pot(n);
    for (int i = 0; i < n; ++i) pot(i) = st.uniform(idx++, 0);
    const TripleModel model = build_discrete_triple(n, h, pot);
    const ContractionOp K = ContractionOp::make(random_contraction(m, st, idx));
    const cplx z(-3.0 + 6.0 * st.uniform(idx, 0), 0.1 + 1.9 * st.uniform(idx, 1));
    ++idx;
    std::vector<std::pair<std::size_t, double>> bad;
    auto test = [&](std::size_t c, double v) {
      if (record(c, v)) bad.push_back({c, v});
    };
    try {
      const CVec f = gaussian_vector(n + 2, st, idx), g = gaussian_vector(n + 2, st, idx);
      test(0, green_identity_residual(model, f, g));
      test(1, krein_residual(model, K, z));

      const ExtensionOp ext = extension_from_contraction(model, K);
      Eigen::ComplexEigenSolver<CMat> es(ext.T, false);
      double max_im = -1e300;
      for (int i = 0; i < n; ++i) max_im = std::max(max_im, es.eigenvalues()(i).imag());
      test(2, std::max(0.0, max_im));
      double ratio = 0.0;
      for (int k = 0; k < 10; ++k) {
        const cplx zk(-20.0 + 40.0 * k / 9.0, 0.05 * std::pow(1.8, k));
        ratio = std::max(ratio, opnorm(resolvent(ext, zk)) * zk.imag());
      }
      test(3, std::max(0.0, ratio - 1.0));

      const ContractionOp U = ContractionOp::make(haar_unitary(m, st, idx++));
      const ExtensionOp eu = extension_from_contraction(model, U);
      test(4, (eu.T - eu.T.adjoint()).norm() / std::max(1.0, eu.T.norm()));

      // K2 differs from K1 in r singular values
      Eigen::JacobiSVD<CMat> svd(K.K, Eigen::ComputeFullU | Eigen::ComputeFullV);
      RVec sv = svd.singularValues();
      const int r = s % (m + 1);
      for (int i = 0; i < r; ++i) sv(i) = std::fmod(sv(i) + 0.25 + 0.5 * st.uniform(idx++, 0), 1.0);
      const CMat K2m = r == 0 ? K.K : CMat(svd.matrixU() * sv.cast<cplx>().asDiagonal() * svd.matrixV().adjoint());
      const ContractionOp K2 = ContractionOp::make(K2m);
      const int expect = r;
      const int got = resolvent_difference_rank(model, K, K2, z);
      test(5, std::abs(got - expect));

      CMat W = gaussian_matrix(m, m, st, idx) + 2.0 * CMat::Identity(m, m);
      const TripleModel mw = with_weight(model, W);
      const CMat MI = weyl_function(model, z).M, MW = weyl_function(mw, z).M;
      const CMat Wi = W.inverse();
      test(6, (MI - Wi.adjoint() * MW * Wi).norm() / std::max(1.0, MI.norm()));
      double wdiff = 0.0;
      for (double sign : {1.0, -1.0}) {
        const ContractionOp E = ContractionOp::make(sign * CMat::Identity(m, m));
        const CMat T1 = extension_from_contraction(model, E).T, T2 = extension_from_contraction(mw, E).T;
        wdiff = std::max(wdiff, (T1 - T2).norm() / std::max(1.0, T1.norm()));
      }
      test(7, wdiff);
    } catch (const SpectralPointError&) {
      ++skipped;
      continue;
    }
    if (!bad.empty()) {
      std::ostringstream os;
      os << "sample " << s << "\n";
      for (auto [c, v] : bad) os << "violation " << checks[c].name << " " << num(v) << " tol " << num(checks[c].tol) << "\n";
      os << "n " << n << "\nh " << num(h) << "\nz " << num(z.real()) << "," << num(z.imag()) << "\npotential\n";
      write_matrix(os, pot.cast<cplx>().transpose());
      os << "K\n";
      write_matrix(os, K.K);
      failing = os.str();
    }
  }
  out.stage("battery");

  std::string csv = "invariant,max_residual,tolerance,samples,violations\n";
  ordered_json js;
  js["command"] = "lab";
  js["seed"] = cfg.run.seed;
  js["n"] = n;
  js["h"] = h;
  js["samples"] = cfg.lab.samples;
  js["skipped_spectral_points"] = skipped;
  js["invariants"] = ordered_json::array();
  bool ok = true;
  for (const auto& c : checks) {
    csv += c.name + "," + num(c.worst) + "," + num(c.tol) + "," + std::to_string(c.count) + "," +
           std::to_string(c.worst > c.tol ? 1 : 0) + "\n";
    js["invariants"].push_back({{"name", c.name}, {"max_residual", c.worst}, {"tolerance", c.tol},
                                {"samples", c.count}, {"pass", c.worst <= c.tol}});
    ok = ok && c.worst <= c.tol;
  }
  js["pass"] = ok;
  out.csv("lab_report.csv", csv);
  out.json("summary.json", js);
  if (!failing.empty()) out.write("failing_case.txt", failing);
  RunManifest man = out.finish();
  if (!failing.empty()) throw InvariantViolation("lab invariant violated; see failing_case.txt");
  return man;
}

// ---------------------------------------------------------------- disk spectrum

RunManifest run_disk_spectrum(const ExperimentConfig& cfg, const std::string& out_dir) {
  Outputs out(cfg, out_dir);
  const BoundaryModel bm = cfg.boundary();
  const int dim = boundary_dim(bm);
  const MaterialParams P{cfg.model.a, cfg.model.b, dim};
  const ImpedanceDistribution dist = cfg.make_distribution();

  // one impedance value per boundary eigenfunction with mode <= M
  std::vector<int> mode_of;
  for (int k = 0; k <= cfg.disk.modes; ++k) {
    const long long mult = spectrum_level(bm, k).mult;
    for (long long r = 0; r < mult; ++r) mode_of.push_back(k);
  }
  const auto zetas = sample_sequence(dist, mode_of.size(), SeededStream{cfg.run.seed, 1});
  const SolveBudget budget{64, cfg.disk.im_depth};
  const double lo = cfg.disk.lambda_min, hi = cfg.disk.lambda_max;

  std::string csv = "index,mode,mu,zeta_re,zeta_im,lambda_re,lambda_im,method,residual\n";
  std::vector<ModeSpectrum> spectra;
  long long total = 0;
  double min_im = std::numeric_limits<double>::infinity();
  ordered_json lost = ordered_json::array();
  for (std::size_t j = 0; j < mode_of.size(); ++j) {
    const int k = mode_of[j];
    ModeSpectrum ms = solve_mode_eigenvalues(k, zetas[j], P, lo, hi, budget);
    if (ms.lost_roots) lost.push_back({{"index", j}, {"mode", k}});
    for (std::size_t e = 0; e < ms.eigenvalues.size(); ++e) {
      const cplx l = ms.eigenvalues[e];
      csv += std::to_string(j) + "," + std::to_string(k) + "," + num(mode_mu(k, dim)) + "," + num(zetas[j].real()) +
             "," + num(zetas[j].imag()) + "," + num(l.real()) + "," + num(l.imag()) + "," + ms.method + "," +
             num(ms.residuals[e]) + "\n";
      min_im = std::min(min_im, l.imag());
      ++total;
    }
    spectra.push_back(std::move(ms));
  }
  out.stage("solve");

  ordered_json spots = ordered_json::array();
  double worst_spot = 0.0;
  const SeededStream pick{cfg.run.seed, 2};
  const int nspot = std::min<int>(cfg.disk.spot_checks, int(mode_of.size()));
  std::vector<std::size_t> chosen;
  for (std::uint64_t t = 0; int(chosen.size()) < nspot; ++t) {
    const auto j = std::size_t(pick.uniform(t, 0) * mode_of.size());
    if (std::find(chosen.begin(), chosen.end(), j) == chosen.end()) chosen.push_back(j);
  }
  for (std::size_t j : chosen) {
    ordered_json s{{"index", j}, {"mode", mode_of[j]}, {"zeta", {jnum(zetas[j].real()), jnum(zetas[j].imag())}}};
    try {
      FdOptions fo;
      fo.re_lo = std::max(0.05, lo * 0.5);
      fo.re_hi = std::max(hi * 1.5, fo.re_lo + 1.0);
      fo.im_lo = -cfg.disk.im_depth;
      const auto fd = fd_oracle(mode_of[j], zetas[j], P, fo);
      double worst = 0.0;
      int compared = 0;
      for (const cplx r : fd) {
        if (r.real() < lo + 1e-3 || r.real() > hi - 1e-3) continue;
        double best = 1.0;
        for (const cplx e : spectra[j].eigenvalues) best = std::min(best, std::abs(r - e) / std::abs(r));
        worst = std::max(worst, best);
        ++compared;
      }
      s["compared"] = compared;
      s["max_rel_diff"] = worst;
      worst_spot = std::max(worst_spot, worst);
    } catch (const std::exception& ex) {
      s["error"] = ex.what();
    }
    spots.push_back(s);
  }
  out.stage("oracle");

  ordered_json js;
  js["command"] = "disk-spectrum";
  js["seed"] = cfg.run.seed;
  js["boundary"] = boundary_name(bm);
  js["a"] = P.a;
  js["b"] = P.b;
  js["distribution"] = dist.describe();
  js["modes"] = cfg.disk.modes;
  js["eigenfunctions"] = mode_of.size();
  js["window"] = {lo, hi};
  js["eigenvalue_count"] = total;
  js["min_im_lambda"] = jnum(min_im);
  js["lost_roots"] = lost;
  js["spot_checks"] = spots;
  js["spot_check_max_rel_diff"] = worst_spot;
  out.csv("eigenvalues.csv", csv);
  out.json("summary.json", js);
  return out.finish();
}

// ---------------------------------------------------------------- weyl fit

RunManifest run_weyl_fit(const ExperimentConfig& cfg, const std::string& out_dir) {
  Outputs out(cfg, out_dir);
  const BoundaryModel bm = cfg.boundary();
  const double lo = cfg.weyl.lambda_min, hi = cfg.weyl.lambda_max;
  const CountingFunction cf{boundary_spectrum(bm, hi)};
  const ExponentFit fit = weyl_exponent_fit(cf, lo, hi, cfg.weyl.points);
  std::string csv = "lambda,count\n";
  for (int i = 0; i < cfg.weyl.points; ++i) {
    const double l = lo * std::pow(hi / lo, double(i) / (cfg.weyl.points - 1));
    csv += num(l) + "," + std::to_string(cf(l)) + "\n";
  }
  out.stage("fit");
  ordered_json js;
  js["command"] = "weyl-fit";
  js["boundary"] = boundary_name(bm);
  js["range"] = {lo, hi};
  js["points"] = fit.points;
  js["exponent"] = fit.exponent;
  js["stderr"] = fit.stderr_;
  js["target"] = (boundary_dim(bm) - 1) / 2.0;
  out.csv("counting.csv", csv);
  out.json("summary.json", js);
  return out.finish();
}

// ---------------------------------------------------------------- criteria

RunManifest run_criteria(const ExperimentConfig& cfg, const std::string& out_dir) {
  Outputs out(cfg, out_dir);
  const BoundaryModel bm = cfg.boundary();
  const ImpedanceDistribution dist = cfg.make_distribution();
  const auto& grid = cfg.criteria.delta_grid;
  std::string csv = "dropped,criterion,delta,value,tail,verdict\n";
  ordered_json runs = ordered_json::array();
  std::vector<Verdict> all;
  double worst_rel = 0.0;
  std::vector<long long> drops = cfg.criteria.prefix_drops;
  if (drops.empty()) drops.push_back(0);
  for (long long P : drops) {
    const auto spec = boundary_spectrum(bm, 1.0, P);
    const auto s = series_criterion(dist, spec, grid);
    const auto e = expectation_criterion(dist, spec, grid);
    const auto m = moment_criterion(dist, boundary_dim(bm));
    for (const auto* v : {&s, &e}) {
      for (std::size_t i = 0; i < grid.size(); ++i)
        csv += std::to_string(P) + "," + v->criterion + "," + num(grid[i]) + "," + num(v->values[i]) + "," +
               num(v->tails[i]) + "," + verdict_name(v->verdict) + "\n";
    }
    csv += std::to_string(P) + ",moment,," + num(m.values[0]) + ",," + verdict_name(m.verdict) + "\n";
    for (std::size_t i = 0; i < grid.size(); ++i)
      if (std::isfinite(s.values[i]) && std::isfinite(e.values[i]) && s.values[i] != 0.0)
        worst_rel = std::max(worst_rel, std::abs(s.values[i] - e.values[i]) / std::abs(s.values[i]));
    all.insert(all.end(), {s.verdict, e.verdict, m.verdict});
    ordered_json r;
    r["dropped"] = P;
    for (const auto* v : {&s, &e, &m}) {
      ordered_json c{{"verdict", verdict_name(v->verdict)}, {"values", jlist(v->values)}};
      if (!v->note.empty()) c["note"] = v->note;
      r[v->criterion] = c;
    }
    runs.push_back(r);
  }
  out.stage("criteria");
  ordered_json js;
  js["command"] = "criteria";
  js["boundary"] = boundary_name(bm);
  js["distribution"] = dist.describe();
  js["delta_grid"] = jlist(grid);
  js["runs"] = runs;
  js["consistent"] = std::all_of(all.begin(), all.end(), [&](Verdict v) { return v == all.front(); });
  js["series_expectation_max_rel_diff"] = worst_rel;
  js["external_spectrum"] = nullptr;
  out.csv("criteria.csv", csv);
  out.json("summary.json", js);
  return out.finish();
}

// ---------------------------------------------------------------- transition

RunManifest run_transition(const ExperimentConfig& cfg, const std::string& out_dir) {
  Outputs out(cfg, out_dir);
  const BoundaryModel bm = cfg.boundary();
  const auto& t = cfg.transition;
  const TransitionReport rep = monte_carlo_transition(bm, t.a_grid, t.s_min, t.trials, t.modes, cfg.run.seed, t.eps,
                                                      cfg.criteria.delta_grid, cfg.run.threads);
  out.stage("monte_carlo");
  const double ac = boundary_dim(bm) - 1;
  std::string csv = "a,eps,truncation,trials,hits,fraction,predicted,series,expectation,moment\n";
  ordered_json pts = ordered_json::array();
  for (const auto& p : rep.points) {
    ordered_json jp;
    jp["a"] = p.a;
    jp["series"] = verdict_name(p.series);
    jp["expectation"] = verdict_name(p.expectation);
    jp["moment"] = verdict_name(p.moment);
    ordered_json ev = ordered_json::array();
    for (std::size_t ie = 0; ie < rep.eps.size(); ++ie) {
      for (std::size_t it = 0; it < rep.truncations.size(); ++it)
        csv += num(p.a) + "," + num(rep.eps[ie]) + "," + std::to_string(rep.truncations[it]) + "," +
               std::to_string(rep.trials) + "," + std::to_string(p.hits[ie][it]) + "," + num(p.fraction[ie][it]) + "," +
               num(p.predicted[ie][it]) + "," + verdict_name(p.series) + "," + verdict_name(p.expectation) + "," +
               verdict_name(p.moment) + "\n";
      ordered_json e{{"eps", rep.eps[ie]}, {"hits", p.hits[ie]}, {"fraction", jlist(p.fraction[ie])},
                     {"predicted", jlist(p.predicted[ie])}};
      if (std::abs(p.a - ac) >= 0.5 - 1e-12)
        e["trend_ok"] = transition_trend_ok(p.hits[ie], rep.trials, p.a > ac);
      ev.push_back(e);
    }
    jp["evidence"] = ev;
    pts.push_back(jp);
  }
  ordered_json js;
  js["command"] = "transition";
  js["boundary"] = boundary_name(bm);
  js["critical_a"] = ac;
  js["s_min"] = rep.s_min;
  js["trials"] = rep.trials;
  js["modes"] = rep.modes;
  js["seed"] = rep.seed;
  js["truncations"] = rep.truncations;
  js["eps"] = jlist(rep.eps);
  js["delta_grid"] = jlist(rep.delta_grid);
  js["points"] = pts;
  js["external_spectrum"] = nullptr;
  out.csv("transition.csv", csv);
  out.json("summary.json", js);
  return out.finish();
}

RunManifest run_command(const ExperimentConfig& cfg, const std::string& out_dir) {
  if (cfg.command == "lab") return run_lab(cfg, out_dir);
  if (cfg.command == "disk-spectrum") return run_disk_spectrum(cfg, out_dir);
  if (cfg.command == "weyl-fit") return run_weyl_fit(cfg, out_dir);
  if (cfg.command == "criteria") return run_criteria(cfg, out_dir);
  if (cfg.command == "transition") return run_transition(cfg, out_dir);
  throw InvalidArgument("unknown command '" + cfg.command + "'");
}

bool verify_manifest(const std::string& out_dir, std::string* why) {
  auto fail = [&](const std::string& w) {
    if (why) *why = w;
    return false;
  };
  std::ifstream mf(fs::path(out_dir) / "manifest.json");
  if (!mf) return fail("manifest.json missing");
  const auto j = nlohmann::json::parse(mf, nullptr, false);
  if (j.is_discarded() || !j.contains("files")) return fail("manifest.json unreadable");
  for (const auto& f : j["files"]) {
    const std::string name = f["name"];
    std::ifstream in(fs::path(out_dir) / name, std::ios::binary);
    if (!in) return fail(name + " missing");
    std::stringstream ss;
    ss << in.rdbuf();
    if (sha256_hex(ss.str()) != f["sha256"].get<std::string>()) return fail(name + " checksum mismatch");
  }
  return true;
}

}  // namespace dlab
