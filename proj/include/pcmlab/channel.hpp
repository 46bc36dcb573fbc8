// Two-state Markov (Gilbert-Elliot) packet arrival channel.
#pragma once

#include "pcmlab/rng.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace pcmlab {

/// alpha = P(gamma_k = 1 | gamma_{k-1} = 1), beta = P(gamma_k = 0 | gamma_{k-1} = 0).
/// Both must lie strictly inside (0, 1).
struct ChannelParams {
  double alpha;
  double beta;

  ChannelParams(double alpha, double beta);
};

/// P(gamma = 1) under the stationary law: (1 - beta) / (2 - alpha - beta).
double stationary_probability(const ChannelParams& params);

/// gamma_0 ~ Bernoulli(init_p1), then Markov transitions. Returns `length`
/// letters (gamma_0 first).
std::vector<std::uint8_t> sample_chain(const ChannelParams& params, double init_p1,
                                       std::size_t length, std::uint64_t seed);
std::vector<std::uint8_t> sample_chain(const ChannelParams& params, double init_p1,
                                       std::size_t length, Rng& rng);

struct RecurrenceStats {
  int state = 1;
  double mean_recurrence = 0.0;  // average gap between successive visits
  double visit_fraction = 0.0;   // #visits / length
  double sigma_hat = 0.0;        // std of per-cycle (1 - visit_fraction * gap)
  std::size_t cycles = 0;
};

/// Throws ValidationError when `state` occurs fewer than twice.
RecurrenceStats recurrence_stats(std::span<const std::uint8_t> word, int state);

}  // namespace pcmlab
