#include "support.hpp"

#include "pcmlab/error.hpp"

#include <cmath>
#include <unistd.h>
#include <fstream>
#include <sstream>

#ifndef PCMLAB_SOURCE_DIR
#error "PCMLAB_SOURCE_DIR must be defined by the build"
#endif

namespace testsupport {

using namespace pcmlab;

NominalPlant reference_plant(double mu) {
  Matrix a(2, 2), q(2, 2), c(1, 2), da(2, 2);
  a << 1.1234, 0.0196, 0.0, 0.9802;
  q << 1.9608, 0.0195, 0.0195, 1.9605;
  c << 1.0, -1.0;
  // dA = [0.0198; 0] [0 5]
  Matrix col(2, 1), row(1, 2);
  col << 0.0198, 0.0;
  row << 0.0, 5.0;
  da = col * row;
  return NominalPlant{a,
                      Matrix::Identity(2, 2),
                      c,
                      PDMatrix(q),
                      PDMatrix(Matrix::Identity(1, 1)),
                      {da},
                      {Matrix::Zero(2, 2)},
                      {Matrix::Zero(1, 2)},
                      mu};
}

std::filesystem::path source_dir() { return PCMLAB_SOURCE_DIR; }

std::filesystem::path config_path(const std::string& name) {
  return source_dir() / "configs" / (name + ".json");
}

ExperimentConfig load_bundled(const std::string& name) { return load_config(config_path(name)); }

Matrix gaussian(Index rows, Index cols, Rng& rng) {
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
  }
  return m;
}

PDMatrix random_pd(Index n, Rng& rng, double log_spread) {
  const Matrix g = gaussian(n, n, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  const Matrix q = qr.householderQ();
  Eigen::VectorXd ev(n);
  for (Index i = 0; i < n; ++i) ev(i) = std::exp(log_spread * rng.normal());
  const Matrix p = q * ev.asDiagonal() * q.transpose();
  return PDMatrix(0.5 * (p + p.transpose()));
}

Matrix random_invertible(Index n, Rng& rng, double max_cond) {
  for (;;) {
    Matrix m = gaussian(n, n, rng);
    if (condition_estimate(m) < max_cond) return m;
  }
}

NominalPlant random_plant(Rng& rng, bool with_sensitivity) {
  for (;;) {
    const Index n = 2 + static_cast<Index>(rng.next_u64() % 3);
    const Index m = 1 + static_cast<Index>(rng.next_u64() % static_cast<std::uint64_t>(n));
    const Index p = 1 + static_cast<Index>(rng.next_u64() % static_cast<std::uint64_t>(n));
    const std::size_t ne = with_sensitivity ? 1 + rng.next_u64() % 2 : 0;
    NominalPlant plant{random_invertible(n, rng, 50.0) * 0.7,
                       gaussian(n, m, rng),
                       gaussian(p, n, rng),
                       random_pd(m, rng, 0.5),
                       random_pd(p, rng, 0.5),
                       {},
                       {},
                       {},
                       with_sensitivity ? 0.4 + 0.6 * rng.uniform() : 1.0};
    if (with_sensitivity && plant.mu >= 1.0) plant.mu = 0.9;
    for (std::size_t k = 0; k < ne; ++k) {
      plant.d_a.push_back(0.3 * gaussian(n, n, rng));
      plant.d_b.push_back(0.3 * gaussian(n, m, rng));
      plant.d_c.push_back(0.3 * gaussian(p, n, rng));
    }
    try {
      const ModifiedPlant mp = build_modified_plant(plant);
      if (condition_estimate(mp.a1) < 1e6) return plant;
    } catch (const std::exception&) {
      // draw again
    }
  }
}

double rel_diff(const Matrix& a, const Matrix& b) {
  const double scale = std::max(a.norm(), b.norm());
  return scale == 0.0 ? 0.0 : (a - b).norm() / scale;
}

std::filesystem::path scratch_dir(const std::string& tag) {
  static int counter = 0;
  std::ostringstream os;
  os << "pcmlab-test-" << tag << "-" << ::getpid() << "-" << counter++;
  const auto dir = std::filesystem::temp_directory_path() / os.str();
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace testsupport
