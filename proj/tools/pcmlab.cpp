// pcmlab: command-line front end.
//
//   pcmlab <command> --config <path> [--out <dir>] [--seed <u64>]
//          [--trials N] [--horizon N] [--method enumerate|delta]
//          [--alpha x] [--beta y]
//
// Exit status: 0 success, 2 invalid input, 3 numerical failure.

#include "pcmlab/config.hpp"
#include "pcmlab/error.hpp"
#include "pcmlab/estimator.hpp"
#include "pcmlab/experiments.hpp"
#include "pcmlab/riccati.hpp"
#include "pcmlab/rng.hpp"
#include "pcmlab/stationary.hpp"
#include "pcmlab/version.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using namespace pcmlab;

namespace {

struct Options {
  std::string command;
  std::string config;
  std::string out = "pcmlab-out";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::optional<std::size_t> horizon;
  std::string method = "delta";
  std::optional<double> alpha;
  std::optional<double> beta;
};

class Runner {
 public:
  Runner(const Options& opt, ExperimentConfig cfg) : opt_(opt), cfg_(std::move(cfg)) {
    fs::create_directories(opt_.out);
  }

  int run() {
    const std::string& c = opt_.command;
    if (c == "validate") return cmd_validate();
    if (c == "solve") return cmd_solve();
    if (c == "simulate") return cmd_simulate();
    if (c == "empirical") return cmd_samples(false);
    if (c == "ergodic") return cmd_samples(true);
    if (c == "approx") return cmd_approx();
    if (c == "compare") return cmd_compare();
    if (c == "rate") return cmd_rate();
    throw ValidationError("unknown command " + c);
  }

 private:
  fs::path out(const std::string& name) {
    outputs_.push_back(name);
    return fs::path(opt_.out) / name;
  }

  void manifest() {
    RunManifest m;
    m.command = opt_.command;
    m.config_digest = config_digest(cfg_);
    m.tool_version = kToolVersion;
    m.timestamp = current_timestamp();
    m.has_seed = cfg_.master_seed.has_value();
    m.seed = cfg_.master_seed.value_or(0);
    m.output_paths = outputs_;
    m.output_paths.push_back("manifest.json");
    write_manifest(fs::path(opt_.out) / "manifest.json", m);
  }

  static void print_matrix(const char* name, const Matrix& m) {
    std::cout << name << " =\n";
    for (Index i = 0; i < m.rows(); ++i) {
      std::cout << "  ";
      for (Index j = 0; j < m.cols(); ++j) std::cout << std::setw(14) << format_double(m(i, j)) << ' ';
      std::cout << '\n';
    }
  }

  int cmd_validate() {
    const ModifiedPlant mp = build_modified_plant(cfg_.plant);
    const StructureReport rep = check_structure(mp);
    std::cout << "A0 invertible:    " << (rep.a0_invertible ? "yes" : "no") << '\n'
              << "A1 invertible:    " << (rep.a1_invertible ? "yes" : "no") << '\n'
              << "controllable:     " << (rep.controllable ? "yes" : "no") << " (rank "
              << rep.ctrb_rank << ")\n"
              << "observable:       " << (rep.observable ? "yes" : "no") << " (rank "
              << rep.obsv_rank << ")\n"
              << "rho(A0):          " << format_double(rep.spectral_radius_a0) << '\n';
    const auto lyap = solve_lyapunov(mp.a0, mp.g0);
    std::cout << "Lyapunov solution: " << (lyap ? "exists" : "none (A0 not stable)") << '\n';
    const PreparedModel model = prepare_model(cfg_.plant);
    print_matrix("P*", model.dare.p_star.matrix());
    const auto ladder = distance_ladder(model.mp, model.dare.p_star, cfg_.n_d, cfg_.base);
    std::cout << "distance ladder:";
    for (const double d : ladder) std::cout << ' ' << format_double(d);
    std::cout << '\n';
    write_matrix_csv(out("pstar.csv"), model.dare.p_star.matrix());
    write_ladder_csv(out("ladder.csv"), ladder);
    manifest();
    return 0;
  }

  int cmd_solve() {
    const PreparedModel model = prepare_model(cfg_.plant);
    print_matrix("P*", model.dare.p_star.matrix());
    std::cout << "iterations: " << model.dare.iterations
              << ", final step: " << format_double(model.dare.final_step_delta) << '\n';
    write_matrix_csv(out("pstar.csv"), model.dare.p_star.matrix());
    manifest();
    return 0;
  }

  int cmd_simulate() {
    const PreparedModel model = prepare_model(cfg_.plant);
    const NominalPlant& plant = cfg_.plant;
    Rng rng(derive_seed(cfg_.seed(), 0));
    const auto word = sample_chain(cfg_.channel, cfg_.init_p1, cfg_.horizon + 1, rng);
    const Matrix lq = plant.q.matrix().llt().matrixL();
    const Matrix lr = plant.r.matrix().llt().matrixL();
    auto gauss = [&](Index n) {
      Vector v(n);
      for (Index i = 0; i < n; ++i) v(i) = rng.normal();
      return v;
    };
    const DistanceFromReference to_star(model.dare.p_star, cfg_.base);
    Vector x = Vector::Zero(plant.n());
    EstimatorState st{Vector::Zero(plant.n()), PDMatrix::identity(plant.n(), cfg_.init_pcm_scale), 0};

    auto path = out("trajectory.csv");
    std::ofstream f(path, std::ios::binary);
    f << "k,gamma";
    for (Index i = 0; i < plant.n(); ++i) f << ",x" << i;
    for (Index i = 0; i < plant.n(); ++i) f << ",xhat" << i;
    f << ",trace_p,distance\n";
    auto row = [&](std::size_t k, int g) {
      f << k << ',' << g;
      for (Index i = 0; i < plant.n(); ++i) f << ',' << format_double(x(i));
      for (Index i = 0; i < plant.n(); ++i) f << ',' << format_double(st.x_hat(i));
      f << ',' << format_double(st.p.matrix().trace()) << ',' << format_double(to_star(st.p)) << '\n';
    };
    row(0, word[0]);
    for (std::size_t k = 1; k <= cfg_.horizon; ++k) {
      x = plant.a * x + plant.b * (lq * gauss(plant.m()));
      std::optional<Vector> y;
      if (word[k]) y = Vector(plant.c * x + lr * gauss(plant.p()));
      st = rseio_step(model.mp, plant, st, y, word[k]);
      row(k, word[k]);
    }
    if (!f) throw NumericalError("write failed for " + path.string());
    manifest();
    return 0;
  }

  int cmd_samples(bool ergodic) {
    const PreparedModel model = prepare_model(cfg_.plant);
    const SampleRun run = ergodic ? run_ergodic(cfg_, model) : run_empirical(cfg_, model);
    write_samples_csv(out("samples.csv"), run.samples);
    write_histogram_csv(out("histogram.csv"), run.histogram);
    std::cout << run.samples.size() << " samples, " << run.histogram.overflow
              << " beyond delta_max\n";
    manifest();
    return 0;
  }

  int cmd_approx() {
    const PreparedModel model = prepare_model(cfg_.plant);
    const double g = stationary_probability(cfg_.channel);
    AtomicDistribution dist =
        opt_.method == "enumerate"
            ? theorem3_distribution(model.mp, model.dare.p_star, g, cfg_.max_len, cfg_.eps_p, cfg_.base)
            : theorem4_delta(model.mp, model.dare.p_star, g, cfg_.n_d, cfg_.base);
    write_atoms_csv(out("atoms.csv"), dist);
    std::cout << dist.atoms.size() << " atoms, residual mass " << format_double(dist.residual_mass)
              << '\n';
    manifest();
    return 0;
  }

  int cmd_compare() {
    const PreparedModel model = prepare_model(cfg_.plant);
    const ClusterTable t = compare(cfg_, model);
    write_clusters_csv(out("clusters.csv"), t);
    std::cout << std::setw(14) << "distance" << std::setw(14) << "empirical" << std::setw(14)
              << "ergodic" << std::setw(14) << "delta" << '\n';
    std::cout << std::scientific << std::setprecision(4);
    for (std::size_t i = 0; i < t.distances.size(); ++i) {
      std::cout << std::setw(14) << t.distances[i] << std::setw(14) << t.empirical[i] << std::setw(14)
                << t.ergodic[i] << std::setw(14) << t.delta_approx[i] << '\n';
    }
    std::cout << std::setw(14) << "unassigned" << std::setw(14) << t.unassigned_empirical
              << std::setw(14) << t.unassigned_ergodic << std::setw(14) << t.unassigned_delta << '\n';
    manifest();
    return 0;
  }

  int cmd_rate() {
    const PreparedModel model = prepare_model(cfg_.plant);
    const auto rate = rate_study(cfg_, model);
    write_rate_csv(out("rate.csv"), rate);
    for (const auto& r : rate) {
      std::cout << "n=" << r.n << " sup_gap=" << format_double(r.sup_gap)
                << " envelope_ratio=" << format_double(r.envelope_ratio) << '\n';
    }
    manifest();
    return 0;
  }

  const Options& opt_;
  ExperimentConfig cfg_;
  std::vector<std::string> outputs_;
};

ExperimentConfig resolve(const Options& opt) {
  ExperimentConfig cfg = load_config(opt.config);
  if (opt.seed) cfg.master_seed = *opt.seed;
  if (opt.trials) cfg.trials = *opt.trials;
  if (opt.horizon) cfg.horizon = *opt.horizon;
  if (opt.alpha || opt.beta) {
    cfg.channel = ChannelParams(opt.alpha.value_or(cfg.channel.alpha), opt.beta.value_or(cfg.channel.beta));
  }
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust estimation with Markov packet loss: PCM fixed points and stationary laws"};
  app.set_version_flag("--version", std::string(kToolVersion));
  Options opt;
  app.add_option("command", opt.command, "validate|solve|simulate|empirical|ergodic|approx|compare|rate")
      ->required()
      ->check(CLI::IsMember({"validate", "solve", "simulate", "empirical", "ergodic", "approx",
                             "compare", "rate"}));
  app.add_option("--config", opt.config, "JSON configuration file")->required();
  app.add_option("--out", opt.out, "output directory")->capture_default_str();
  app.add_option("--seed", opt.seed, "master seed (overrides simulation.seed)");
  app.add_option("--trials", opt.trials, "number of empirical trials")->check(CLI::PositiveNumber);
  app.add_option("--horizon", opt.horizon, "steps per empirical trial")->check(CLI::PositiveNumber);
  app.add_option("--method", opt.method, "approximation for `approx`")
      ->check(CLI::IsMember({"enumerate", "delta"}))
      ->capture_default_str();
  app.add_option("--alpha", opt.alpha, "override channel.alpha");
  app.add_option("--beta", opt.beta, "override channel.beta");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    Runner runner(opt, resolve(opt));
    return runner.run();
  } catch (const ValidationError& e) {
    std::cerr << "pcmlab: invalid input: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "pcmlab: numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "pcmlab: error: " << e.what() << '\n';
    return 3;
  }
}
