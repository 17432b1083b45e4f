#pragma once

#include <map>
#include <string>
#include <vector>

#include "moilab/linalg.hpp"

namespace moilab {

struct ExperimentConfig {
  std::string suite = "all";
  std::vector<int> dims;  // empty: per-suite defaults
  int trials = 0;         // 0: per-suite defaults
  Seed seed = 20240611;
  std::map<std::string, double> tolerances;  // check or monitor name -> threshold
  std::map<std::string, int> quadrature;     // t_quad, s_quad, dilation_depth, grid, fourier_degree
  std::string output_dir = "moilab_out";
};

const std::vector<std::string>& suite_names();
// Index caps per suite.
int suite_dim_cap(const std::string& suite);

// JSON text; unknown keys, bad dims or trials raise ConfigParse.
ExperimentConfig parse_config(const std::string& text);
void validate_config(const ExperimentConfig& c);

struct CheckRecord {
  std::string name;
  std::string anchor;
  std::string inputs_digest;
  double measured = 0.0;
  double threshold = 0.0;
  bool pass = false;
  std::string note;
};

struct MonitorRecord {
  std::string name;
  std::string anchor;
  double max = 0.0;
  double ceiling = 0.0;
  int samples = 0;
  bool all_finite = true;
  bool pass = false;
};

struct Artifact {
  std::string filename;
  std::string content;
};

struct Report {
  std::string suite;
  Seed seed = 0;
  std::vector<CheckRecord> checks;
  std::vector<MonitorRecord> monitors;
  std::vector<Artifact> artifacts;
  double wall_time = 0.0;

  int passed() const;
  int failed() const;
  bool all_pass() const { return failed() == 0; }
  // FNV-1a over the canonical JSON without wall time.
  std::string digest() const;
  std::string to_json() const;
};

Report run_suite(const ExperimentConfig& config);

enum class ExportKind { koplienko, unit, modified_sa, fdh };

struct ExportRequest {
  ExportKind kind = ExportKind::koplienko;
  int dim = 4;
  Seed seed = 1;
  double scale = 0.5;  // perturbation size; 0 gives the zero density
  int order = 2;       // modified_sa only
  int grid = 4096;     // fdh only
};

ExportKind parse_export_kind(const std::string& s);
std::string export_density_csv(const ExportRequest& r);
void write_file(const std::string& path, const std::string& content);

std::string fnv1a_hex(const std::string& s);

}  // namespace moilab
