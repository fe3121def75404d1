#pragma once
#include <string>
#include <vector>

#include "dlab/experiment_config.hpp"

namespace dlab {

inline constexpr const char* kArtifactVersion = "0.1.0";

struct FileRecord {
  std::string name;
  std::string sha256;
  std::size_t bytes = 0;
};

struct StageTime {
  std::string stage;
  double seconds = 0.0;
};

struct RunManifest {
  std::string command;
  std::string version = kArtifactVersion;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::vector<FileRecord> files;
  std::vector<StageTime> stages;
  std::string to_json() const;
};

std::string sha256_hex(const std::string& bytes);

// Each runner validates the config, writes its outputs into out_dir and
// finishes with manifest.json. Module errors propagate unchanged; run_lab
// throws InvariantViolation after writing the report and failing_case.txt.
RunManifest run_lab(const ExperimentConfig& cfg, const std::string& out_dir);
RunManifest run_disk_spectrum(const ExperimentConfig& cfg, const std::string& out_dir);
RunManifest run_weyl_fit(const ExperimentConfig& cfg, const std::string& out_dir);
RunManifest run_criteria(const ExperimentConfig& cfg, const std::string& out_dir);
RunManifest run_transition(const ExperimentConfig& cfg, const std::string& out_dir);

RunManifest run_command(const ExperimentConfig& cfg, const std::string& out_dir);

// Recomputes the checksums of all files named in out_dir/manifest.json.
bool verify_manifest(const std::string& out_dir, std::string* why = nullptr);

}  // namespace dlab
