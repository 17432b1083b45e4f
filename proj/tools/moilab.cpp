// moilab: run verification suites and export spectral shift densities.
#include <omp.h>

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "moilab/errors.hpp"
#include "moilab/suites.hpp"

namespace fs = std::filesystem;
using namespace moilab;

namespace {

void apply_thread_cap() {
  const char* env = std::getenv("MOILAB_THREADS");
  if (!env) return;
  const int n = std::atoi(env);
  if (n > 0) omp_set_num_threads(n);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::ConfigParse, "cannot read config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<int> parse_dims(const std::string& s) {
  std::vector<int> dims;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      dims.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      fail(ErrorCode::ConfigParse, "bad dims entry '" + item + "'");
    }
  }
  return dims;
}

}  // namespace

int main(int argc, char** argv) {
  apply_thread_cap();
  CLI::App app{"moilab: multiple operator integrals and spectral shift experiments"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run verification suites and write report.json");
  std::string config_path, suite, dims, out_dir;
  Seed seed = 0;
  int trials = 0;
  run->add_option("--config", config_path, "JSON config file");
  run->add_option("--suite", suite, "suite name (moi, taylor, koplienko, fdh, unitary2, modified_sa, "
                                    "modified_u, modified_c, positivity, sensitivity, all)");
  run->add_option("--seed", seed, "base seed");
  run->add_option("--dims", dims, "comma separated dimensions, e.g. 3,4,5");
  run->add_option("--trials", trials, "number of trials");
  run->add_option("--out", out_dir, "output directory");

  auto* exp = app.add_subcommand("export", "write a density as CSV");
  std::string kind = "koplienko", out_file;
  ExportRequest req;
  exp->add_option("--kind", kind, "koplienko | unit | modified_sa | fdh");
  exp->add_option("--dim", req.dim, "dimension");
  exp->add_option("--seed", req.seed, "seed");
  exp->add_option("--scale", req.scale, "perturbation size (0 gives a zero density)");
  exp->add_option("--order", req.order, "order n for modified_sa");
  exp->add_option("--grid", req.grid, "theta grid size for fdh");
  exp->add_option("--out", out_file, "output CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*run) {
      ExperimentConfig cfg = config_path.empty() ? ExperimentConfig{} : parse_config(read_text(config_path));
      // flags override the file
      if (!suite.empty()) cfg.suite = suite;
      if (run->count("--seed")) cfg.seed = seed;
      if (!dims.empty()) cfg.dims = parse_dims(dims);
      if (run->count("--trials")) {
        if (trials < 1) fail(ErrorCode::ConfigParse, "trials must be >= 1");
        cfg.trials = trials;
      }
      if (!out_dir.empty()) cfg.output_dir = out_dir;
      validate_config(cfg);

      const Report rep = run_suite(cfg);
      fs::create_directories(cfg.output_dir);
      write_file((fs::path(cfg.output_dir) / "report.json").string(), rep.to_json());
      for (const Artifact& a : rep.artifacts) write_file((fs::path(cfg.output_dir) / a.filename).string(), a.content);

      for (const CheckRecord& c : rep.checks)
        if (!c.pass) std::cerr << "FAIL " << c.name << " measured=" << c.measured << " threshold=" << c.threshold
                               << (c.note.empty() ? "" : " (" + c.note + ")") << "\n";
      for (const MonitorRecord& m : rep.monitors)
        std::cout << "monitor " << m.name << " max=" << m.max << " ceiling=" << m.ceiling
                  << (m.pass ? "" : " FAIL") << "\n";
      std::cout << "suite=" << rep.suite << " passed=" << rep.passed() << " failed=" << rep.failed()
                << " digest=" << rep.digest() << " wall=" << rep.wall_time << "s\n";
      return rep.all_pass() ? 0 : 1;
    }
    req.kind = parse_export_kind(kind);
    write_file(out_file, export_density_csv(req));
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    switch (e.code()) {
      case ErrorCode::ConfigParse:
      case ErrorCode::InvalidArgument:
        return 2;
      default:
        return 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
