// Monte-Carlo protocol: empirical stationary law over independent trials,
// single-trajectory time averages, cluster tables and the convergence-rate
// study.
#pragma once

#include "pcmlab/channel.hpp"
#include "pcmlab/plant.hpp"
#include "pcmlab/riccati.hpp"
#include "pcmlab/stationary.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace pcmlab {

struct Histogram {
  double delta_max = 0.0;
  int n_bins = 0;
  std::vector<std::uint64_t> counts;  // bin i covers [i h, (i + 1) h), h = delta_max / n_bins
  std::uint64_t overflow = 0;         // samples >= delta_max
  std::uint64_t total = 0;            // sum(counts) + overflow
  std::vector<double> normalized;     // counts / total

  double bin_lo(int i) const { return delta_max * i / n_bins; }
  double bin_hi(int i) const { return delta_max * (i + 1) / n_bins; }
};

Histogram make_histogram(std::span<const double> samples, double delta_max, int n_bins);

struct ExperimentConfig {
  ExperimentConfig(NominalPlant p, ChannelParams c) : plant(std::move(p)), channel(c) {}

  NominalPlant plant;
  ChannelParams channel;
  std::size_t trials = 5000;
  std::size_t horizon = 400;
  double init_p1 = 0.7;
  double init_pcm_scale = 1e3;
  std::size_t ergodic_length = 20000;
  std::size_t burn_in = 0;
  int n_e_bins = 200;
  double delta_max = 1.6;
  int n_d = 5;
  int n_s = 10;
  int max_len = 12;
  double eps_p = 1e-9;
  std::vector<std::size_t> checkpoints{1000, 10000, 100000};
  std::size_t reference_length = 1000000;
  LogBase base = LogBase::decimal;
  std::optional<std::uint64_t> master_seed;
  unsigned threads = 0;  // 0: one per hardware thread

  /// Throws ValidationError naming the offending field.
  void validate() const;
  std::uint64_t seed() const;
};

/// Modified plant, structure report and P*; rejects plants whose modified
/// plant is not controllable and observable.
struct PreparedModel {
  ModifiedPlant mp;
  StructureReport structure;
  RiccatiSolution dare;
};
PreparedModel prepare_model(const NominalPlant& plant);

struct SampleRun {
  std::vector<double> samples;  // distances to P* in cfg.base
  Histogram histogram;
};

/// Per trial t: word from stream derive_seed(seed, t) with gamma_0 ~
/// Bernoulli(init_p1) and `horizon` further letters; PCM from
/// init_pcm_scale * I; sample = delta(P_horizon, P*).
SampleRun run_empirical(const ExperimentConfig& cfg, const PreparedModel& model);

/// One trajectory from P* with gamma_0 at the stationary law and
/// ergodic_length updates; samples are delta(P_k, P*) for burn_in <= k <= n.
SampleRun run_ergodic(const ExperimentConfig& cfg, const PreparedModel& model);

/// Distances of the full ergodic trajectory of `length` steps (length + 1 values).
std::vector<double> ergodic_distances(const ExperimentConfig& cfg, const PreparedModel& model,
                                      std::size_t length);

struct ClusterFractions {
  std::vector<double> fractions;  // one per interval I_0 .. I_{N_d}
  double unassigned = 0.0;
};

/// Interval I_i around d_i:
///   I_0 = [0, d_1 / N_s],
///   I_i = (d_i - (d_i - d_{i-1}) / N_s, d_i + (d_{i+1} - d_i) / N_s],
///   I_{N_d} = (d_{N_d} - (d_{N_d} - d_{N_d-1}) / N_s, d_{N_d}].
/// A value belongs to the lowest-index interval containing it.
/// Returns -1 when no interval contains `x`.
int cluster_index(double x, std::span<const double> distances, int n_s);

ClusterFractions cluster_probabilities(std::span<const double> samples,
                                       std::span<const double> distances, int n_s);

/// Atom masses grouped by the same intervals; residual mass is unassigned.
ClusterFractions cluster_masses(const AtomicDistribution& dist, std::span<const double> distances,
                                int n_s);

struct ClusterTable {
  std::vector<double> distances;
  int n_s = 0;
  std::vector<double> empirical;
  std::vector<double> ergodic;
  std::vector<double> delta_approx;
  double unassigned_empirical = 0.0;
  double unassigned_ergodic = 0.0;
  double unassigned_delta = 0.0;
};

ClusterTable compare(const ExperimentConfig& cfg, const PreparedModel& model);

struct RatePoint {
  std::size_t n;
  double sup_gap;
  double envelope_ratio;  // sup_gap / (ln n / n)^{1/4}
};

/// Sup over the midpoints (d_i + d_{i+1}) / 2 of |F_n - F_ref|, with F_ref
/// the time average over `reference_length` steps of the same trajectory.
std::vector<RatePoint> rate_study(const ExperimentConfig& cfg, const PreparedModel& model);

/// Same statistic on an existing distance sequence (samples k = 0..len-1).
std::vector<RatePoint> rate_study(std::span<const double> distances,
                                  std::span<const double> grid,
                                  std::span<const std::size_t> checkpoints);

}  // namespace pcmlab
