#include "pcmlab/stationary.hpp"

#include "pcmlab/error.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>

namespace pcmlab {

std::string to_string(ApproxMethod m) {
  switch (m) {
    case ApproxMethod::ergodic: return "ergodic";
    case ApproxMethod::enumerate: return "enumerate";
    case ApproxMethod::delta: return "delta";
  }
  return "unknown";
}

double AtomicDistribution::total_mass() const {
  double s = residual_mass;
  for (const auto& a : atoms) s += a.mass;
  return s;
}

double AtomicDistribution::cdf(double x) const {
  double s = 0.0;
  for (const auto& a : atoms) {
    if (a.distance > x) break;
    s += a.mass;
  }
  return s;
}

namespace {

void require_gamma(double g, const char* who) {
  if (!(g > 0.0 && g < 1.0) && g != 1.0) {
    std::ostringstream os;
    os << who << ": gamma_st must lie in (0, 1], got " << g;
    throw ValidationError(os.str());
  }
}

void sort_by_distance(std::vector<Atom>& atoms) {
  std::stable_sort(atoms.begin(), atoms.end(),
                   [](const Atom& a, const Atom& b) { return a.distance < b.distance; });
}

PDMatrix apply_word(const ModifiedPlant& mp, PDMatrix p, const Word& w) {
  for (const auto g : w) p = pcm_step(mp, p, g);
  return p;
}

}  // namespace

Word reachable_code(std::uint64_t j) {
  if (j == 0) throw ValidationError("reachable_code: index starts at 1");
  const int s = std::bit_width(j - 1);
  if (s == 0) return {};
  const std::uint64_t bits = j - 1 - (std::uint64_t{1} << (s - 1));
  Word code(static_cast<std::size_t>(s));
  code[0] = 0;
  for (int i = 0; i < s - 1; ++i) code[static_cast<std::size_t>(i) + 1] = (bits >> i) & 1U;
  return code;
}

std::vector<Atom> enumerate_reachable(const ModifiedPlant& mp, const PDMatrix& p_star, int n,
                                      LogBase base) {
  if (n < 0 || n > 12) throw ValidationError("enumerate_reachable: n must lie in [0, 12]");
  const std::uint64_t count = std::uint64_t{1} << n;
  const DistanceFromReference to_star(p_star, base);
  std::vector<Atom> atoms;
  atoms.reserve(count);
  for (std::uint64_t j = 1; j <= count; ++j) {
    Word code = reachable_code(j);
    PDMatrix p = apply_word(mp, p_star, code);
    const double d = to_star(p);
    atoms.push_back(Atom{std::move(p), d, 0.0, std::move(code)});
  }
  std::vector<DistanceFromReference> refs;
  refs.reserve(atoms.size());
  for (const auto& a : atoms) refs.emplace_back(a.matrix);
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    for (std::size_t k = i + 1; k < atoms.size(); ++k) {
      if (!(refs[i](atoms[k].matrix) > 1e-6)) {
        std::ostringstream os;
        os << "enumerate_reachable: elements " << i + 1 << " and " << k + 1
           << " coincide (distance <= 1e-6)";
        throw NumericalError(os.str());
      }
    }
  }
  return atoms;
}

double theorem3_weight(std::uint64_t j, int n, double gamma_st) {
  if (n < 0) throw ValidationError("theorem3_weight: n must be >= 0");
  if (j < 1 || (n < 64 && j > (std::uint64_t{1} << n))) {
    throw ValidationError("theorem3_weight: index j must lie in [1, 2^n]");
  }
  require_gamma(gamma_st, "theorem3_weight");
  const int s = std::bit_width(j - 1);
  const int ones = s == 0 ? 0 : std::popcount(j - 1 - (std::uint64_t{1} << (s - 1)));
  return (1.0 - std::pow(gamma_st, n - s)) * std::pow(gamma_st, ones) *
         std::pow(1.0 - gamma_st, s - ones);
}

std::vector<Atom> theorem3_literal(const ModifiedPlant& mp, const PDMatrix& p_star, int n,
                                   double gamma_st, LogBase base) {
  auto atoms = enumerate_reachable(mp, p_star, n, base);
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    atoms[i].mass = theorem3_weight(i + 1, n, gamma_st);
  }
  return atoms;
}

double max_zero_count(int k, double gamma_st, double eps_p) {
  if (!(gamma_st > 0.0 && gamma_st < 1.0)) {
    throw ValidationError("max_zero_count: gamma_st must lie in (0, 1)");
  }
  if (!(eps_p > 0.0 && eps_p < 1.0)) throw ValidationError("max_zero_count: eps_p must lie in (0, 1)");
  if (gamma_st == 0.5) throw ValidationError("max_zero_count: no bound at gamma_st = 1/2");
  return (std::log(eps_p) - k * std::log(gamma_st)) /
         (std::log(1.0 - gamma_st) - std::log(gamma_st));
}

AtomicDistribution theorem3_distribution(const ModifiedPlant& mp, const PDMatrix& p_star,
                                         double gamma_st, int max_len, double eps_p,
                                         LogBase base) {
  if (!(gamma_st > 0.0 && gamma_st < 1.0)) {
    throw ValidationError("theorem3_distribution: gamma_st must lie in (0, 1)");
  }
  if (max_len < 0 || max_len > 20) {
    throw ValidationError("theorem3_distribution: max_len must lie in [0, 20]");
  }
  if (!(eps_p > 0.0 && eps_p < 1.0)) {
    throw ValidationError("theorem3_distribution: eps_p must lie in (0, 1)");
  }
  AtomicDistribution dist;
  dist.method = ApproxMethod::enumerate;
  const DistanceFromReference to_star(p_star, base);
  const double g = gamma_st, q = 1.0 - gamma_st;
  const int window = max_len + 1;

  const double star_mass = std::pow(g, window);
  if (star_mass >= eps_p) {
    dist.atoms.push_back(Atom{p_star, 0.0, star_mass, {}});
  } else {
    dist.residual_mass += star_mass;
  }
  if (q == 0.0) return dist;

  // Extending a word by one letter multiplies its mass by 1 (letter 1) or
  // q / g (letter 0).
  const double grow = std::max(1.0, q / g);
  auto subtree_mass = [&](double m, int len) {
    double s = 0.0, f = 1.0;
    for (int j = 0; j <= max_len - len; ++j, f /= g) s += f;
    return m * s;
  };

  struct Node {
    PDMatrix p;
    Word w;
    double mass;
  };
  std::vector<Node> stack;
  {
    const double m0 = std::pow(g, window - 1) * q;
    stack.push_back(Node{pcm_step(mp, p_star, 0), Word{0}, m0});
  }
  while (!stack.empty()) {
    Node node = std::move(stack.back());
    stack.pop_back();
    const int len = static_cast<int>(node.w.size()) - 1;  // letters after the leading zero
    const double best = node.mass * std::pow(grow, max_len - len);
    if (best < eps_p) {
      dist.residual_mass += subtree_mass(node.mass, len);
      continue;
    }
    if (node.mass >= eps_p) {
      const double d = to_star(node.p);
      dist.atoms.push_back(Atom{node.p, d, node.mass, node.w});
    } else {
      dist.residual_mass += node.mass;
    }
    if (len == max_len) continue;
    for (int letter = 1; letter >= 0; --letter) {
      Word w = node.w;
      w.push_back(static_cast<std::uint8_t>(letter));
      const double m = node.mass / g * (letter ? g : q);
      stack.push_back(Node{pcm_step(mp, node.p, letter), std::move(w), m});
    }
  }
  sort_by_distance(dist.atoms);
  return dist;
}

AtomicDistribution theorem4_delta(const ModifiedPlant& mp, const PDMatrix& p_star,
                                  double gamma_st, int n_d, LogBase base) {
  require_gamma(gamma_st, "theorem4_delta");
  if (n_d < 1) throw ValidationError("theorem4_delta: n_d must be >= 1");
  AtomicDistribution dist;
  dist.method = ApproxMethod::delta;
  const DistanceFromReference to_star(p_star, base);
  const double q = 1.0 - gamma_st;
  dist.atoms.push_back(Atom{p_star, 0.0, gamma_st, {}});
  PDMatrix p = p_star;
  Word code;
  double mass = gamma_st;
  for (int i = 1; i <= n_d; ++i) {
    mass *= q;
    if (mass == 0.0) break;
    p = pcm_step(mp, p, 0);
    code.push_back(0);
    dist.atoms.push_back(Atom{p, to_star(p), mass, code});
  }
  dist.residual_mass = std::pow(q, n_d + 1);
  sort_by_distance(dist.atoms);
  return dist;
}

std::vector<double> distance_ladder(const ModifiedPlant& mp, const PDMatrix& p_star, int n_d,
                                    LogBase base) {
  if (n_d < 0) throw ValidationError("distance_ladder: n_d must be >= 0");
  const DistanceFromReference to_star(p_star, base);
  std::vector<double> d{0.0};
  PDMatrix p = p_star;
  for (int i = 1; i <= n_d; ++i) {
    p = pcm_step(mp, p, 0);
    d.push_back(to_star(p));
  }
  return d;
}

double time_average_F(std::span<const double> distances, double epsilon, std::size_t burn_in) {
  if (distances.size() <= burn_in) {
    throw ValidationError("time_average_F: trajectory is empty after burn-in");
  }
  std::size_t hits = 0;
  for (std::size_t k = burn_in; k < distances.size(); ++k) {
    if (distances[k] <= epsilon) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(distances.size() - burn_in);
}

double time_average_F(const PcmTrajectory& traj, const BallIndicatorConfig& config,
                      std::size_t burn_in) {
  if (!(config.epsilon >= 0.0)) throw ValidationError("time_average_F: epsilon must be >= 0");
  std::vector<double> d;
  d.reserve(traj.pcms.size());
  const DistanceFromReference to_ref(config.reference, config.base);
  for (const auto& p : traj.pcms) d.push_back(to_ref(p));
  return time_average_F(d, config.epsilon, burn_in);
}

}  // namespace pcmlab
