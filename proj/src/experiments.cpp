#include "pcmlab/experiments.hpp"

#include "pcmlab/error.hpp"
#include "pcmlab/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

namespace pcmlab {

namespace {

// Sub-stream indices at and above this value are reserved for the ergodic
// trajectory so they never collide with trial streams.
constexpr std::uint64_t kErgodicStream = std::uint64_t{1} << 63;

[[noreturn]] void bad_field(const std::string& field, const std::string& constraint) {
  throw ValidationError(field + " " + constraint);
}

}  // namespace

Histogram make_histogram(std::span<const double> samples, double delta_max, int n_bins) {
  if (!(delta_max > 0.0)) throw ValidationError("histogram: delta_max must be positive");
  if (n_bins < 1) throw ValidationError("histogram: number of bins must be >= 1");
  Histogram h;
  h.delta_max = delta_max;
  h.n_bins = n_bins;
  h.counts.assign(static_cast<std::size_t>(n_bins), 0);
  const double width = delta_max / n_bins;
  for (const double x : samples) {
    ++h.total;
    if (!(x < delta_max) || x < 0.0) {
      ++h.overflow;
      continue;
    }
    auto bin = static_cast<std::size_t>(x / width);
    // Guard the floating division against landing one bin too high.
    if (bin >= h.counts.size()) bin = h.counts.size() - 1;
    while (bin > 0 && x < h.bin_lo(static_cast<int>(bin))) --bin;
    while (bin + 1 < h.counts.size() && x >= h.bin_hi(static_cast<int>(bin))) ++bin;
    ++h.counts[bin];
  }
  h.normalized.resize(h.counts.size());
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    h.normalized[i] = h.total ? static_cast<double>(h.counts[i]) / static_cast<double>(h.total) : 0.0;
  }
  return h;
}

void ExperimentConfig::validate() const {
  plant.validate();
  if (trials < 1) bad_field("simulation.trials", "must be >= 1");
  if (horizon < 1) bad_field("simulation.horizon", "must be >= 1");
  if (!(init_p1 >= 0.0 && init_p1 <= 1.0)) bad_field("simulation.init_p1", "must lie in [0, 1]");
  if (!(init_pcm_scale > 0.0) || !std::isfinite(init_pcm_scale)) {
    bad_field("simulation.init_pcm_scale", "must be a finite positive number");
  }
  if (ergodic_length < 1) bad_field("simulation.ergodic_length", "must be >= 1");
  if (burn_in > ergodic_length) bad_field("simulation.burn_in", "must not exceed ergodic_length");
  if (n_e_bins < 1) bad_field("binning.n_e", "must be >= 1");
  if (!(delta_max > 0.0) || !std::isfinite(delta_max)) bad_field("binning.delta_max", "must be positive");
  if (n_d < 1) bad_field("binning.n_d", "must be >= 1");
  if (n_s < 1) bad_field("binning.n_s", "must be >= 1");
  if (max_len < 0 || max_len > 20) bad_field("approx.max_len", "must lie in [0, 20]");
  if (!(eps_p > 0.0 && eps_p < 1.0)) bad_field("approx.eps_p", "must lie in (0, 1)");
  if (checkpoints.empty()) bad_field("rate.checkpoints", "must not be empty");
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    if (checkpoints[i] < 2) bad_field("rate.checkpoints", "entries must be >= 2");
    if (i > 0 && checkpoints[i] <= checkpoints[i - 1]) {
      bad_field("rate.checkpoints", "must be strictly increasing");
    }
  }
  if (reference_length < checkpoints.back()) {
    bad_field("rate.reference_length", "must be >= the largest checkpoint");
  }
}

std::uint64_t ExperimentConfig::seed() const {
  if (!master_seed) {
    throw ValidationError("simulation.seed is required for stochastic commands (no implicit entropy)");
  }
  return *master_seed;
}

PreparedModel prepare_model(const NominalPlant& plant) {
  ModifiedPlant mp = build_modified_plant(plant);
  StructureReport rep = check_structure(mp);
  if (!rep.controllable) {
    throw ValidationError("structure hypothesis violated: (A1, G1) is not controllable (rank " +
                          std::to_string(rep.ctrb_rank) + ")");
  }
  if (!rep.observable) {
    throw ValidationError("structure hypothesis violated: (H1, A1) is not observable (rank " +
                          std::to_string(rep.obsv_rank) + ")");
  }
  RiccatiSolution dare = solve_dare(mp);
  return PreparedModel{std::move(mp), rep, std::move(dare)};
}

SampleRun run_empirical(const ExperimentConfig& cfg, const PreparedModel& model) {
  cfg.validate();
  const std::uint64_t seed = cfg.seed();
  const DistanceFromReference to_star(model.dare.p_star, cfg.base);
  const PDMatrix p0 = PDMatrix::identity(model.mp.n(), cfg.init_pcm_scale);

  std::vector<double> samples(cfg.trials);
  auto run_trial = [&](std::size_t t) {
    Rng rng(derive_seed(seed, t));
    const auto word = sample_chain(cfg.channel, cfg.init_p1, cfg.horizon + 1, rng);
    PDMatrix p = p0;
    for (std::size_t k = 1; k < word.size(); ++k) p = pcm_step(model.mp, p, word[k]);
    samples[t] = to_star(p);
  };

  unsigned n_threads = cfg.threads ? cfg.threads : std::max(1U, std::thread::hardware_concurrency());
  n_threads = static_cast<unsigned>(std::min<std::size_t>(n_threads, cfg.trials));
  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::size_t failed_trial = cfg.trials;
  std::string failure;
  bool numerical = false;
  auto worker = [&] {
    for (;;) {
      const std::size_t t = next.fetch_add(1);
      if (t >= cfg.trials) return;
      try {
        run_trial(t);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (t < failed_trial) {
          failed_trial = t;
          failure = e.what();
          numerical = dynamic_cast<const NumericalError*>(&e) != nullptr;
        }
        next.store(cfg.trials);
        return;
      }
    }
  };
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failed_trial < cfg.trials) {
    std::ostringstream os;
    os << "empirical run aborted at trial " << failed_trial << ": " << failure;
    if (numerical) throw NumericalError(os.str());
    throw ValidationError(os.str());
  }
  Histogram h = make_histogram(samples, cfg.delta_max, cfg.n_e_bins);
  return SampleRun{std::move(samples), std::move(h)};
}

std::vector<double> ergodic_distances(const ExperimentConfig& cfg, const PreparedModel& model,
                                      std::size_t length) {
  Rng rng(derive_seed(cfg.seed(), kErgodicStream));
  const double g_st = stationary_probability(cfg.channel);
  const auto word = sample_chain(cfg.channel, g_st, length + 1, rng);
  const DistanceFromReference to_star(model.dare.p_star, cfg.base);
  std::vector<double> d;
  d.reserve(length + 1);
  PDMatrix p = model.dare.p_star;
  d.push_back(0.0);
  for (std::size_t k = 1; k <= length; ++k) {
    try {
      p = pcm_step(model.mp, p, word[k]);
    } catch (const NumericalError& e) {
      throw NumericalError("ergodic run failed at step " + std::to_string(k) + ": " + e.what());
    }
    d.push_back(to_star(p));
  }
  return d;
}

SampleRun run_ergodic(const ExperimentConfig& cfg, const PreparedModel& model) {
  cfg.validate();
  auto d = ergodic_distances(cfg, model, cfg.ergodic_length);
  if (cfg.burn_in > 0) d.erase(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(cfg.burn_in));
  Histogram h = make_histogram(d, cfg.delta_max, cfg.n_e_bins);
  return SampleRun{std::move(d), std::move(h)};
}

namespace {

void check_ladder(std::span<const double> d, int n_s) {
  if (d.size() < 2) throw ValidationError("cluster intervals need at least d_0 and d_1");
  if (d[0] != 0.0) throw ValidationError("cluster intervals need d_0 = 0");
  for (std::size_t i = 1; i < d.size(); ++i) {
    if (!(d[i] > d[i - 1])) throw ValidationError("cluster distances must be strictly increasing");
  }
  if (n_s < 1) throw ValidationError("n_s must be >= 1");
}

}  // namespace

int cluster_index(double x, std::span<const double> d, int n_s) {
  const auto nd = static_cast<int>(d.size()) - 1;
  const double ns = n_s;
  if (x >= 0.0 && x <= d[1] / ns) return 0;
  for (int i = 1; i <= nd; ++i) {
    const auto u = static_cast<std::size_t>(i);
    const double lo = d[u] - (d[u] - d[u - 1]) / ns;
    const double hi = i < nd ? d[u] + (d[u + 1] - d[u]) / ns : d[u];
    if (x > lo && x <= hi) return i;
  }
  return -1;
}

ClusterFractions cluster_probabilities(std::span<const double> samples,
                                       std::span<const double> distances, int n_s) {
  check_ladder(distances, n_s);
  ClusterFractions out;
  out.fractions.assign(distances.size(), 0.0);
  if (samples.empty()) return out;
  std::vector<std::size_t> counts(distances.size(), 0);
  std::size_t none = 0;
  for (const double x : samples) {
    const int c = cluster_index(x, distances, n_s);
    if (c < 0) {
      ++none;
    } else {
      ++counts[static_cast<std::size_t>(c)];
    }
  }
  const auto total = static_cast<double>(samples.size());
  for (std::size_t i = 0; i < counts.size(); ++i) out.fractions[i] = counts[i] / total;
  out.unassigned = none / total;
  return out;
}

ClusterFractions cluster_masses(const AtomicDistribution& dist, std::span<const double> distances,
                                int n_s) {
  check_ladder(distances, n_s);
  ClusterFractions out;
  out.fractions.assign(distances.size(), 0.0);
  out.unassigned = dist.residual_mass;
  for (const auto& a : dist.atoms) {
    const int c = cluster_index(a.distance, distances, n_s);
    if (c < 0) {
      out.unassigned += a.mass;
    } else {
      out.fractions[static_cast<std::size_t>(c)] += a.mass;
    }
  }
  return out;
}

ClusterTable compare(const ExperimentConfig& cfg, const PreparedModel& model) {
  cfg.validate();
  ClusterTable table;
  table.n_s = cfg.n_s;
  table.distances = distance_ladder(model.mp, model.dare.p_star, cfg.n_d, cfg.base);
  const double g_st = stationary_probability(cfg.channel);

  const auto delta = cluster_masses(theorem4_delta(model.mp, model.dare.p_star, g_st, cfg.n_d, cfg.base),
                                    table.distances, cfg.n_s);
  table.delta_approx = delta.fractions;
  table.unassigned_delta = delta.unassigned;

  const auto erg = run_ergodic(cfg, model);
  const auto erg_c = cluster_probabilities(erg.samples, table.distances, cfg.n_s);
  table.ergodic = erg_c.fractions;
  table.unassigned_ergodic = erg_c.unassigned;

  const auto emp = run_empirical(cfg, model);
  const auto emp_c = cluster_probabilities(emp.samples, table.distances, cfg.n_s);
  table.empirical = emp_c.fractions;
  table.unassigned_empirical = emp_c.unassigned;
  return table;
}

std::vector<RatePoint> rate_study(std::span<const double> distances, std::span<const double> grid,
                                  std::span<const std::size_t> checkpoints) {
  if (distances.empty()) throw ValidationError("rate_study: empty trajectory");
  if (grid.empty()) throw ValidationError("rate_study: empty evaluation grid");
  const std::size_t ref_n = distances.size() - 1;
  std::vector<double> f_ref(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) f_ref[g] = time_average_F(distances, grid[g]);

  std::vector<RatePoint> out;
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    const std::size_t n = checkpoints[i];
    if (n < 2 || n > ref_n) throw ValidationError("rate_study: checkpoints must lie in [2, reference length]");
    if (i > 0 && n <= checkpoints[i - 1]) throw ValidationError("rate_study: checkpoints must increase");
    const auto prefix = distances.first(n + 1);
    double gap = 0.0;
    for (std::size_t g = 0; g < grid.size(); ++g) {
      gap = std::max(gap, std::abs(time_average_F(prefix, grid[g]) - f_ref[g]));
    }
    const double nn = static_cast<double>(n);
    out.push_back(RatePoint{n, gap, gap / std::pow(std::log(nn) / nn, 0.25)});
  }
  return out;
}

std::vector<RatePoint> rate_study(const ExperimentConfig& cfg, const PreparedModel& model) {
  cfg.validate();
  const auto ladder = distance_ladder(model.mp, model.dare.p_star, cfg.n_d, cfg.base);
  std::vector<double> grid;
  for (std::size_t i = 0; i + 1 < ladder.size(); ++i) grid.push_back(0.5 * (ladder[i] + ladder[i + 1]));
  const auto d = ergodic_distances(cfg, model, cfg.reference_length);
  return rate_study(d, grid, cfg.checkpoints);
}

}  // namespace pcmlab
