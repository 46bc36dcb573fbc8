// JSON configuration files and result serialisation.
//
// Config schema (unknown keys are rejected everywhere):
//   plant:      a, b, c, q, r (row-major nested arrays; a bare number is a 1x1
//               matrix), dA, dB, dC (lists of matrices, default empty), mu
//               (default 1)
//   channel:    alpha, beta (required)
//   simulation: trials, horizon, init_p1, init_pcm_scale, ergodic_length,
//               burn_in, seed, threads
//   binning:    n_e, delta_max, n_d, n_s
//   approx:     max_len, eps_p
//   rate:       checkpoints, reference_length
//   distance_log_base: 10 (default) or "e"
#pragma once

#include "pcmlab/experiments.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace pcmlab {

/// Throws ValidationError; JSON syntax errors carry line and column.
ExperimentConfig parse_config(const std::string& text, const std::string& origin = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical JSON text of a resolved config (all defaults filled in, keys
/// sorted, numbers in shortest round-trip form).
std::string canonical_config(const ExperimentConfig& cfg);

/// 64-bit FNV-1a of the canonical config, as 16 lowercase hex digits.
std::string config_digest(const ExperimentConfig& cfg);

/// Shortest decimal text that parses back to exactly `x` ("nan", "inf",
/// "-inf" for non-finite values).
std::string format_double(double x);

std::string word_to_string(const Word& w);

// CSV writers; every file starts with a header row.
void write_atoms_csv(const std::filesystem::path& path, const AtomicDistribution& dist);
void write_clusters_csv(const std::filesystem::path& path, const ClusterTable& table);
void write_histogram_csv(const std::filesystem::path& path, const Histogram& h);
void write_rate_csv(const std::filesystem::path& path, const std::vector<RatePoint>& rate);
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m);
void write_ladder_csv(const std::filesystem::path& path, const std::vector<double>& ladder);
void write_samples_csv(const std::filesystem::path& path, const std::vector<double>& samples);

struct RunManifest {
  std::string command;
  std::string config_digest;
  std::string tool_version;
  std::string timestamp;  // UTC, ISO 8601; from SOURCE_DATE_EPOCH when set
  std::uint64_t seed = 0;
  bool has_seed = false;
  std::vector<std::string> output_paths;
};

std::string current_timestamp();
void write_manifest(const std::filesystem::path& path, const RunManifest& m);

}  // namespace pcmlab
