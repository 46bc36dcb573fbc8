// The robust estimator with intermittent observations: state update, PCM
// update and trajectories of the PCM along a dropout word.
#pragma once

#include "pcmlab/pdm.hpp"
#include "pcmlab/plant.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace pcmlab {

/// Arrival word: element k is gamma_k in {0, 1}.
using Word = std::vector<std::uint8_t>;

struct EstimatorState {
  Vector x_hat;
  PDMatrix p;
  std::size_t k = 0;
};

/// P' = H_m(M_gamma, P). This is the production path for every PCM update.
PDMatrix pcm_step(const ModifiedPlant& mp, const PDMatrix& p, int gamma);

/// gamma = 0: A P A^T + B Q B^T, straight from the nominal plant.
PDMatrix pcm_step_open_loop(const NominalPlant& plant, const PDMatrix& p);

/// gamma = 1 written with the penalised hat quantities of the nominal plant:
/// {[A P^ A^T + B^ Q^ B^^T]^-1 + C^T R^-1 C}^-1.
PDMatrix pcm_step_hat_form(const NominalPlant& plant, const PDMatrix& p);

/// gamma = 1 written with the compact modified-plant intermediates:
/// {[A~ P A~^T + B Q~ B^T]^-1 + C~^T R~^-1 C~}^-1.
PDMatrix pcm_step_compact_form(const ModifiedPlant& mp, const NominalPlant& plant,
                               const PDMatrix& p);

/// gamma = 1 as a Riccati step of the modified plant:
/// [(A1 P A1^T + G1 G1^T)^-1 + H1^T H1]^-1.
PDMatrix pcm_step_riccati_form(const ModifiedPlant& mp, const PDMatrix& p);

/// One step of the estimator. `y` must be present iff gamma == 1.
EstimatorState rseio_step(const ModifiedPlant& mp, const NominalPlant& plant,
                          const EstimatorState& st, const std::optional<Vector>& y, int gamma);

struct PcmTrajectory {
  PDMatrix initial;
  Word word;
  std::vector<PDMatrix> pcms;    // pcms[0] = initial, pcms[k] after gamma_1..gamma_k
  std::vector<double> distances;  // delta(pcms[k], reference) when a reference is given
};

/// Iterates pcm_step over `word` (word[0] is applied first).
PcmTrajectory pcm_trajectory(const ModifiedPlant& mp, const PDMatrix& p0, const Word& word,
                             const std::optional<PDMatrix>& reference = std::nullopt,
                             LogBase base = LogBase::natural);

/// M_{w_k} ... M_{w_1}: the single matrix whose homographic action equals
/// applying the word letter by letter.
Matrix word_product(const ModifiedPlant& mp, std::span<const std::uint8_t> word);

}  // namespace pcmlab
