#include "dlab/experiment_config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "dlab/disk_model.hpp"
#include "dlab/errors.hpp"

namespace dlab {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  if (trim(v).empty()) return out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double to_double(const std::string& key, const std::string& v) {
  // strtod accepts inf/nan and hex; reject partial parses
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size()) throw InvalidArgument("config: " + key + ": not a number: '" + v + "'");
  return x;
}

template <class Int>
Int to_int(const std::string& key, const std::string& v) {
  Int x{};
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size()) throw InvalidArgument("config: " + key + ": not an integer: '" + v + "'");
  return x;
}

struct Field {
  std::string section, key;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

Field dbl(const std::string& sec, const std::string& key, std::function<double&(ExperimentConfig&)> ref) {
  return {sec, key, [=](ExperimentConfig& c, const std::string& v) { ref(c) = to_double(sec + "." + key, v); },
          [=](const ExperimentConfig& c) { return fmt(ref(const_cast<ExperimentConfig&>(c))); }};
}

template <class Int>
Field integer(const std::string& sec, const std::string& key, std::function<Int&(ExperimentConfig&)> ref) {
  return {sec, key, [=](ExperimentConfig& c, const std::string& v) { ref(c) = to_int<Int>(sec + "." + key, v); },
          [=](const ExperimentConfig& c) { return std::to_string(ref(const_cast<ExperimentConfig&>(c))); }};
}

Field str(const std::string& sec, const std::string& key, std::function<std::string&(ExperimentConfig&)> ref) {
  return {sec, key, [=](ExperimentConfig& c, const std::string& v) { ref(c) = v; },
          [=](const ExperimentConfig& c) { return ref(const_cast<ExperimentConfig&>(c)); }};
}

Field dlist(const std::string& sec, const std::string& key, std::function<std::vector<double>&(ExperimentConfig&)> ref) {
  return {sec, key,
          [=](ExperimentConfig& c, const std::string& v) {
            auto& out = ref(c);
            out.clear();
            for (const auto& s : split_list(v)) out.push_back(to_double(sec + "." + key, s));
          },
          [=](const ExperimentConfig& c) {
            std::string s;
            for (double x : ref(const_cast<ExperimentConfig&>(c))) s += (s.empty() ? "" : ", ") + fmt(x);
            return s;
          }};
}

Field ilist(const std::string& sec, const std::string& key, std::function<std::vector<long long>&(ExperimentConfig&)> ref) {
  return {sec, key,
          [=](ExperimentConfig& c, const std::string& v) {
            auto& out = ref(c);
            out.clear();
            for (const auto& s : split_list(v)) out.push_back(to_int<long long>(sec + "." + key, s));
          },
          [=](const ExperimentConfig& c) {
            std::string s;
            for (long long x : ref(const_cast<ExperimentConfig&>(c))) s += (s.empty() ? "" : ", ") + std::to_string(x);
            return s;
          }};
}

Field slist(const std::string& sec, const std::string& key, std::function<std::vector<std::string>&(ExperimentConfig&)> ref) {
  return {sec, key, [=](ExperimentConfig& c, const std::string& v) { ref(c) = split_list(v); },
          [=](const ExperimentConfig& c) {
            std::string s;
            for (const auto& x : ref(const_cast<ExperimentConfig&>(c))) s += (s.empty() ? "" : ", ") + x;
            return s;
          }};
}

#define REF(path) [](ExperimentConfig& c) -> auto& { return c.path; }

const std::vector<Field>& fields() {
  static const std::vector<Field> f = {
      str("run", "command", REF(command)),
      integer<std::uint64_t>("run", "seed", REF(run.seed)),
      integer<int>("run", "threads", REF(run.threads)),
      str("run", "out", REF(run.out)),
      slist("run", "formats", REF(run.formats)),
      str("model", "boundary", REF(model.boundary)),
      dbl("model", "a", REF(model.a)),
      dbl("model", "b", REF(model.b)),
      str("distribution", "kind", REF(distribution.kind)),
      dbl("distribution", "z0_re", REF(distribution.z0_re)),
      dbl("distribution", "z0_im", REF(distribution.z0_im)),
      dbl("distribution", "r", REF(distribution.r)),
      dbl("distribution", "center_re", REF(distribution.center_re)),
      dbl("distribution", "center_im", REF(distribution.center_im)),
      dbl("distribution", "c_lo", REF(distribution.c_lo)),
      dbl("distribution", "c_hi", REF(distribution.c_hi)),
      dbl("distribution", "a", REF(distribution.a)),
      dbl("distribution", "s_min", REF(distribution.s_min)),
      dbl("distribution", "sigma", REF(distribution.sigma)),
      dlist("distribution", "table_s", REF(distribution.table_s)),
      dlist("distribution", "table_F", REF(distribution.table_F)),
      dbl("distribution", "phase", REF(distribution.phase)),
      integer<int>("lab", "n", REF(lab.n)),
      dbl("lab", "h", REF(lab.h)),
      integer<int>("lab", "samples", REF(lab.samples)),
      integer<int>("disk", "modes", REF(disk.modes)),
      dbl("disk", "lambda_min", REF(disk.lambda_min)),
      dbl("disk", "lambda_max", REF(disk.lambda_max)),
      dbl("disk", "im_depth", REF(disk.im_depth)),
      integer<int>("disk", "spot_checks", REF(disk.spot_checks)),
      dbl("weyl", "lambda_min", REF(weyl.lambda_min)),
      dbl("weyl", "lambda_max", REF(weyl.lambda_max)),
      integer<int>("weyl", "points", REF(weyl.points)),
      dlist("criteria", "delta_grid", REF(criteria.delta_grid)),
      ilist("criteria", "prefix_drops", REF(criteria.prefix_drops)),
      dlist("transition", "a_grid", REF(transition.a_grid)),
      dbl("transition", "s_min", REF(transition.s_min)),
      integer<int>("transition", "trials", REF(transition.trials)),
      integer<int>("transition", "modes", REF(transition.modes)),
      dlist("transition", "eps", REF(transition.eps)),
  };
  return f;
}

#undef REF

void require(bool ok, const std::string& msg) {
  if (!ok) throw InvalidArgument("config: " + msg);
}

}  // namespace

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
  ExperimentConfig c;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(lineno) + ": ";
    if (line.front() == '[') {
      require(line.back() == ']', where + "malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      bool known = false;
      for (const auto& f : fields()) known = known || f.section == section;
      require(known, where + "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    require(eq != std::string::npos, where + "expected key = value");
    require(!section.empty(), where + "key outside of a section");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const Field* hit = nullptr;
    for (const auto& f : fields())
      if (f.section == section && f.key == key) hit = &f;
    require(hit != nullptr, where + "unknown key " + section + "." + key);
    hit->set(c, value);
  }
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw InvalidArgument("config: cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse(ss.str());
}

std::string ExperimentConfig::serialize() const {
  std::string out, section;
  for (const auto& f : fields()) {
    if (f.section != section) {
      if (!section.empty()) out += "\n";
      section = f.section;
      out += "[" + section + "]\n";
    }
    out += f.key + " = " + f.get(*this) + "\n";
  }
  return out;
}

bool ExperimentConfig::wants(const std::string& format) const {
  for (const auto& f : run.formats)
    if (f == format) return true;
  return false;
}

ImpedanceDistribution ExperimentConfig::make_distribution() const {
  const auto& d = distribution;
  switch (parse_dist_kind(d.kind)) {
    case DistKind::point_mass: return ImpedanceDistribution::point({d.z0_re, d.z0_im});
    case DistKind::uniform_disc: return ImpedanceDistribution::disc(d.r, {d.center_re, d.center_im});
    case DistKind::uniform_segment_imaginary: return ImpedanceDistribution::segment(d.c_lo, d.c_hi);
    case DistKind::pareto_imaginary: return ImpedanceDistribution::pareto(d.a, d.s_min);
    case DistKind::half_normal_real: return ImpedanceDistribution::half_normal(d.sigma);
    case DistKind::bounded_custom: {
      require(d.table_s.size() == d.table_F.size(), "distribution.table_s and table_F differ in length");
      std::vector<std::pair<double, double>> t;
      for (std::size_t i = 0; i < d.table_s.size(); ++i) t.emplace_back(d.table_s[i], d.table_F[i]);
      return ImpedanceDistribution::custom(std::move(t), d.phase);
    }
  }
  throw InvalidArgument("config: bad distribution kind");
}

void ExperimentConfig::validate() const {
  static const std::vector<std::string> commands{"lab", "disk-spectrum", "weyl-fit", "criteria", "transition"};
  require(std::find(commands.begin(), commands.end(), command) != commands.end(), "unknown command '" + command + "'");
  require(run.threads >= 1 && run.threads <= 1024, "run.threads must be in [1, 1024]");
  require(!run.formats.empty(), "run.formats is empty");
  for (const auto& f : run.formats) require(f == "csv" || f == "json", "run.formats: unknown format '" + f + "'");
  const BoundaryModel bm = boundary();

  if (command == "lab") {
    require(lab.n >= 4 && lab.n <= 256, "lab.n must be in [4, 256]");
    require(lab.h > 0.0 && std::isfinite(lab.h), "lab.h must be positive");
    require(lab.samples >= 1, "lab.samples must be >= 1");
  } else if (command == "disk-spectrum") {
    MaterialParams{model.a, model.b, boundary_dim(bm)}.validate();
    make_distribution().validate();
    require(disk.modes >= 0 && disk.modes <= 200, "disk.modes must be in [0, 200]");
    require(disk.lambda_min > 0.0 && disk.lambda_max > disk.lambda_min && std::isfinite(disk.lambda_max),
            "disk window must satisfy 0 < lambda_min < lambda_max");
    require(disk.im_depth > 0.0, "disk.im_depth must be positive");
    require(disk.spot_checks >= 0, "disk.spot_checks must be >= 0");
  } else if (command == "weyl-fit") {
    require(weyl.lambda_min > 0.0 && weyl.lambda_max >= 1e3 * weyl.lambda_min, "weyl range must span 3 decades");
    require(weyl.lambda_max <= 1e10, "weyl.lambda_max must be <= 1e10");
    require(weyl.points >= 3, "weyl.points must be >= 3");
  } else if (command == "criteria") {
    make_distribution().validate();
    require(!criteria.delta_grid.empty(), "criteria.delta_grid is empty");
    for (double d : criteria.delta_grid) require(d > 0.0 && std::isfinite(d), "criteria.delta_grid entries must be positive");
    for (long long p : criteria.prefix_drops) require(p >= 0, "criteria.prefix_drops entries must be >= 0");
  } else if (command == "transition") {
    require(!transition.a_grid.empty(), "transition.a_grid is empty");
    for (double a : transition.a_grid) require(a > 0.0 && std::isfinite(a), "transition.a_grid entries must be positive");
    require(transition.s_min > 0.0, "transition.s_min must be positive");
    require(transition.trials >= 100, "transition.trials must be >= 100");
    require(transition.modes >= 1000, "transition.modes must be >= 1000");
    require(!transition.eps.empty(), "transition.eps is empty");
    for (double e : transition.eps) require(e > 0.0, "transition.eps entries must be positive");
    require(!criteria.delta_grid.empty(), "criteria.delta_grid is empty");
    for (double d : criteria.delta_grid) require(d > 0.0 && std::isfinite(d), "criteria.delta_grid entries must be positive");
  }
}

}  // namespace dlab
