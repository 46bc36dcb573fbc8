// Approximations of the stationary law of the PCM: reachable-set
// enumeration, weighted enumeration over dropout words, the delta
// approximation on the open-loop orbit of P*, and single-trajectory time
// averages.
#pragma once

#include "pcmlab/estimator.hpp"
#include "pcmlab/pdm.hpp"
#include "pcmlab/plant.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace pcmlab {

struct Atom {
  PDMatrix matrix;
  double distance = 0.0;  // delta(matrix, P*) in the distribution's log base
  double mass = 0.0;
  Word code;              // letters applied to P*, first letter first; empty for P*
};

enum class ApproxMethod { ergodic, enumerate, delta };
std::string to_string(ApproxMethod m);

struct AtomicDistribution {
  std::vector<Atom> atoms;  // sorted by distance
  double residual_mass = 0.0;
  ApproxMethod method = ApproxMethod::delta;

  double total_mass() const;
  /// Mass of atoms with distance <= x (residual mass excluded).
  double cdf(double x) const;
};

struct BallIndicatorConfig {
  double epsilon;
  PDMatrix reference;
  LogBase base = LogBase::natural;
};

/// Reachable-set code of index j >= 1: j = 1 is P* (empty), otherwise a leading 0
/// followed by the s - 1 low bits of j - 1 - 2^{s-1}, s = ceil(log2 j),
/// least significant bit first.
Word reachable_code(std::uint64_t j);

/// The 2^n elements {P*} and H_m(M^w M0, P*) for |w| <= n - 1, in index
/// order j = 1 .. 2^n. Masses are zero. Throws NumericalError if two
/// elements are closer than 1e-6 (natural log).
std::vector<Atom> enumerate_reachable(const ModifiedPlant& mp, const PDMatrix& p_star, int n,
                                      LogBase base = LogBase::natural);

/// Literal weight attached to index j in the weighted enumeration:
/// (1 - g^{n-s}) g^{#1} (1 - g)^{s-#1}, s = ceil(log2 j). Not normalised.
double theorem3_weight(std::uint64_t j, int n, double gamma_st);

/// enumerate_reachable(n) with theorem3_weight as masses (unnormalised,
/// unsorted, index order).
std::vector<Atom> theorem3_literal(const ModifiedPlant& mp, const PDMatrix& p_star, int n,
                                   double gamma_st, LogBase base = LogBase::natural);

/// Zero count at which a word of length k has probability exactly eps_p:
/// (ln eps_p - k ln g) / (ln(1-g) - ln g). For g > 1/2 words with more zeros
/// are less likely than eps_p; for g < 1/2 the inequality flips.
/// Throws for g = 1/2, where every word of length k is equally likely.
double max_zero_count(int k, double gamma_st, double eps_p);

/// Weighted enumeration over a window of max_len + 1 letters started at P*.
/// Words 1^a 0 w (|w| <= max_len, a = max_len - |w|) land on H_m(M^w M0, P*)
/// with mass g^a (1-g) g^{#1(w)} (1-g)^{#0(w)}; the all-ones window keeps P*
/// with mass g^{max_len+1}. Subtrees whose largest possible mass is below
/// eps_p are pruned, and atoms lighter than eps_p are dropped; both go to
/// residual_mass.
AtomicDistribution theorem3_distribution(const ModifiedPlant& mp, const PDMatrix& p_star,
                                         double gamma_st, int max_len, double eps_p,
                                         LogBase base = LogBase::natural);

/// Atoms P* (mass g) and H_m(M0^i, P*) (mass g (1-g)^i), i = 1..n_d;
/// residual (1-g)^{n_d+1}. Atoms of zero mass are omitted.
AtomicDistribution theorem4_delta(const ModifiedPlant& mp, const PDMatrix& p_star,
                                  double gamma_st, int n_d, LogBase base = LogBase::natural);

/// d_0 = 0 and d_i = delta(H_m(M0^i, P*), P*) for i = 1..n_d.
std::vector<double> distance_ladder(const ModifiedPlant& mp, const PDMatrix& p_star, int n_d,
                                    LogBase base = LogBase::natural);

/// Fraction of k >= burn_in with delta(P_k, reference) <= epsilon.
double time_average_F(const PcmTrajectory& traj, const BallIndicatorConfig& config,
                      std::size_t burn_in = 0);
/// Same statistic on precomputed distances.
double time_average_F(std::span<const double> distances, double epsilon,
                      std::size_t burn_in = 0);

}  // namespace pcmlab
