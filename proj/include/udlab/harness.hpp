#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "udlab/decoding.hpp"
#include "udlab/estimation.hpp"
#include "udlab/model.hpp"
#include "udlab/verification.hpp"

namespace udlab {

// Model files are human-readable JSON documents holding alphabet sizes, state
// sizes, initial states, and the three kernels as flat arrays. Index order
// within each array: conditioning states vary slowest, then outputs.
//   G: [omega'][x][omega]      V: [x][theta'][y][theta]   W: [x][sigma'][z][sigma]
SystemModel load_model(const std::string& path);
void save_model(const SystemModel& model, const std::string& path);

void save_codebook(const Codebook& codebook, const std::string& path);
Codebook load_codebook(const std::string& path);

// Fitted observation-law persistence (flat kernel, [s'][y][s]).
void save_fitted(const PackedHmm& hmm, const std::string& path);
PackedHmm load_fitted(const std::string& path);

// I(Y;Z) in nats from the single-letter joint law. Only defined when every
// state space is a singleton.
double capacity_memoryless(const SystemModel& model);

struct ExperimentConfig {
  std::string model_path;
  std::vector<int> n_values{4};
  double rate = 0.1;  // nats per symbol
  // Families only: a threshold entry gets its alpha from alpha_override or,
  // when that is unset, from the prescribed per-n default.
  std::vector<DecoderFamily> decoders;
  std::string mode = "exact";  // exact | monte-carlo | bounds-check | estimate | parse
  long long trials = 10000;
  std::uint64_t seed = 1;
  std::string out_path;        // CSV destination; empty writes to stdout only
  double alpha_override = 0.0;  // 0 selects the prescribed default per n
  int workers = 0;              // 0 defers to UDLAB_WORKERS, then hardware
  // estimate mode
  int hidden_size = 2;
  double floor_value = 1e-6;
  int max_iters = 100;
  double tol = 1e-6;
  std::string codebook_path;  // training sequences for estimate mode
  std::string fitted_out;     // where estimate mode writes the fitted law
  // parse mode
  Sequence parse_y;
  Sequence parse_z;
};

struct RunResult {
  std::vector<std::string> rows;  // header first, then one line per record
  int bound_violations = 0;       // non-advisory failed checks (bounds-check mode)
};

// Fixed CSV schema shared by every mode; unused fields stay empty.
std::string csv_header();

// Dispatch on config.mode. Deterministic: same config and seed give identical
// rows, independent of worker count.
RunResult run(const ExperimentConfig& config);

// Worker-count resolution: explicit value, else UDLAB_WORKERS, else hardware.
int resolve_workers(int requested);

// Build/version stamp recorded in every CSV row.
std::string version_string();

// 17-significant-digit formatting used for all CSV numerics.
std::string format_double(double value);

}  // namespace udlab
