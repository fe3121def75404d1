#pragma once
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "dlab/impedance_random.hpp"
#include "dlab/weyl_criteria.hpp"

namespace dlab {

// Text format: "[section]" headers and "key = value" lines, '#' starts a comment.
// Lists are comma separated. Every key has a default; unknown keys are errors.
struct ExperimentConfig {
  std::string command = "lab";

  struct Run {
    std::uint64_t seed = 20240901;
    int threads = 1;
    std::string out;  // empty: --out, then $DLAB_OUT, then ./dlab_out
    std::vector<std::string> formats{"csv", "json"};
    bool operator==(const Run&) const = default;
  } run;

  struct Model {
    std::string boundary = "circle";
    double a = 1.0;
    double b = 1.0;
    bool operator==(const Model&) const = default;
  } model;

  struct Distribution {
    std::string kind = "point_mass";
    double z0_re = 0.0, z0_im = 0.0;
    double r = 0.0, center_re = 0.0, center_im = 0.0;
    double c_lo = 0.0, c_hi = 0.0;
    double a = 3.0, s_min = 1.0;
    double sigma = 1.0;
    std::vector<double> table_s, table_F;
    double phase = 0.0;
    bool operator==(const Distribution&) const = default;
  } distribution;

  struct Lab {
    int n = 16;
    double h = 0.1;
    int samples = 200;
    bool operator==(const Lab&) const = default;
  } lab;

  struct Disk {
    int modes = 5;
    double lambda_min = 1.0;
    double lambda_max = 10.0;
    double im_depth = 10.0;
    int spot_checks = 5;
    bool operator==(const Disk&) const = default;
  } disk;

  struct Weyl {
    double lambda_min = 1e3;
    double lambda_max = 1e7;
    int points = 200;
    bool operator==(const Weyl&) const = default;
  } weyl;

  struct Criteria {
    std::vector<double> delta_grid{1e-2, 1e-1, 1.0, 10.0};
    std::vector<long long> prefix_drops{0, 10, 100, 1000};
    bool operator==(const Criteria&) const = default;
  } criteria;

  struct Transition {
    std::vector<double> a_grid{0.5, 1.0, 1.5, 2.0, 3.0};
    double s_min = 0.1;
    int trials = 1000;
    int modes = 10000;
    std::vector<double> eps{0.1, 0.01};
    bool operator==(const Transition&) const = default;
  } transition;

  bool operator==(const ExperimentConfig&) const = default;

  static ExperimentConfig parse(const std::string& text);
  static ExperimentConfig load(const std::string& path);
  std::string serialize() const;
  // Checks everything the selected command will touch; throws InvalidArgument.
  void validate() const;

  ImpedanceDistribution make_distribution() const;
  BoundaryModel boundary() const { return parse_boundary(model.boundary); }
  bool wants(const std::string& format) const;
};

}  // namespace dlab
