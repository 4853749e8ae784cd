#pragma once

#include "looplab/serialize.hpp"

namespace looplab {

struct RunOptions {
  std::uint64_t seed_override = 0;  // 0: use the config seed
  std::string out_dir;
  int threads = 2;
};

struct RunOutcome {
  std::vector<json> records;
  bool verdict_failure = false;  // science failed somewhere (exit stays 0)
  std::string config_hash;
};

// Schema validation; throws std::invalid_argument with a readable message.
void validate_config(const json& config);

// Executes one experiment config and returns its records (without writing).
RunOutcome run_experiment(const json& config, const RunOptions& opts);

// Fixed-seed generator of random finite events scaled to a lattice patch.
EventPtr random_patch_event(std::mt19937_64& rng, const HexLattice& patch);

struct OracleCalibration {
  int trials = 0;
  int within = 0;      // |MC - exact| <= 3 sigma
  double coverage = 0.0;
  std::vector<double> pulls;
};

// MC-vs-exact coverage over random events on small patches, for each n.
OracleCalibration run_oracle_calibration(const std::vector<int>& patch_faces,
                                         const std::vector<double>& n_values,
                                         int events_per_patch, long long states,
                                         std::uint64_t seed, int threads);

// Strip of `faces` hexagons in a row; &<= 5 faces keeps within 24 edges.
LatticeSpec strip_patch_spec(int faces);

// CSV for eps/lambda series records (render --csv).
std::string series_csv(const json& record);

}  // namespace looplab
