// Shared fixtures and hand-rolled random generators for the test programs.
#pragma once

#include "pcmlab/config.hpp"
#include "pcmlab/experiments.hpp"
#include "pcmlab/plant.hpp"
#include "pcmlab/rng.hpp"

#include <filesystem>
#include <string>

namespace testsupport {

using pcmlab::Index;
using pcmlab::Matrix;
using pcmlab::PDMatrix;

/// The two-state unstable plant used by the bundled configs.
pcmlab::NominalPlant reference_plant(double mu = 0.8);

std::filesystem::path source_dir();
std::filesystem::path config_path(const std::string& name);
pcmlab::ExperimentConfig load_bundled(const std::string& name);

Matrix gaussian(Index rows, Index cols, pcmlab::Rng& rng);
/// Random SPD matrix Q diag(exp(s z_i)) Q^T with Haar-like orthogonal Q.
PDMatrix random_pd(Index n, pcmlab::Rng& rng, double log_spread = 1.5);
/// Random matrix with condition number below `max_cond`.
Matrix random_invertible(Index n, pcmlab::Rng& rng, double max_cond = 1e3);
/// Random nominal plant with n in [2, 4], random sensitivity derivatives
/// (n_e in [1, 2], dB nonzero) and mu in [0.4, 1). Retries until the
/// modified plant can be built.
pcmlab::NominalPlant random_plant(pcmlab::Rng& rng, bool with_sensitivity = true);

double rel_diff(const Matrix& a, const Matrix& b);

/// Fresh empty directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& tag);
std::string read_file(const std::filesystem::path& p);

}  // namespace testsupport
