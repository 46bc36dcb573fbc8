#include "pcmlab/channel.hpp"

#include "pcmlab/error.hpp"

#include <cmath>
#include <sstream>

namespace pcmlab {

ChannelParams::ChannelParams(double a, double b) : alpha(a), beta(b) {
  auto open_unit = [](double v) { return std::isfinite(v) && v > 0.0 && v < 1.0; };
  if (!open_unit(alpha)) {
    std::ostringstream os;
    os << "channel.alpha must lie in the open interval (0, 1), got " << alpha;
    throw ValidationError(os.str());
  }
  if (!open_unit(beta)) {
    std::ostringstream os;
    os << "channel.beta must lie in the open interval (0, 1), got " << beta;
    throw ValidationError(os.str());
  }
}

double stationary_probability(const ChannelParams& params) {
  return (1.0 - params.beta) / (2.0 - params.alpha - params.beta);
}

std::vector<std::uint8_t> sample_chain(const ChannelParams& params, double init_p1,
                                       std::size_t length, Rng& rng) {
  if (!(init_p1 >= 0.0 && init_p1 <= 1.0)) {
    throw ValidationError("sample_chain: init_p1 must lie in [0, 1]");
  }
  std::vector<std::uint8_t> out(length);
  if (length == 0) return out;
  out[0] = rng.bernoulli(init_p1) ? 1 : 0;
  const double p_stay_good = params.alpha;
  const double p_recover = 1.0 - params.beta;
  for (std::size_t k = 1; k < length; ++k) {
    const double p1 = out[k - 1] ? p_stay_good : p_recover;
    out[k] = rng.bernoulli(p1) ? 1 : 0;
  }
  return out;
}

std::vector<std::uint8_t> sample_chain(const ChannelParams& params, double init_p1,
                                       std::size_t length, std::uint64_t seed) {
  Rng rng(seed);
  return sample_chain(params, init_p1, length, rng);
}

RecurrenceStats recurrence_stats(std::span<const std::uint8_t> word, int state) {
  if (state != 0 && state != 1) throw ValidationError("recurrence_stats: state must be 0 or 1");
  std::vector<std::size_t> visits;
  for (std::size_t k = 0; k < word.size(); ++k) {
    if (word[k] == state) visits.push_back(k);
  }
  if (visits.size() < 2) {
    throw ValidationError("recurrence_stats: state must occur at least twice in the word");
  }
  RecurrenceStats st;
  st.state = state;
  st.cycles = visits.size() - 1;
  st.visit_fraction = static_cast<double>(visits.size()) / static_cast<double>(word.size());
  double sum_gap = 0.0;
  for (std::size_t i = 1; i < visits.size(); ++i) {
    sum_gap += static_cast<double>(visits[i] - visits[i - 1]);
  }
  st.mean_recurrence = sum_gap / static_cast<double>(st.cycles);

  // Each cycle between entrances contains exactly one visit, so the per-cycle
  // indicator sum is 1 and the centred cycle variable is 1 - pi * gap.
  double mean = 0.0, m2 = 0.0;
  for (std::size_t i = 1; i < visits.size(); ++i) {
    const double z = 1.0 - st.visit_fraction * static_cast<double>(visits[i] - visits[i - 1]);
    const double n = static_cast<double>(i);
    const double d = z - mean;
    mean += d / n;
    m2 += d * (z - mean);
  }
  st.sigma_hat = st.cycles > 1 ? std::sqrt(m2 / static_cast<double>(st.cycles - 1)) : 0.0;
  return st;
}

}  // namespace pcmlab
