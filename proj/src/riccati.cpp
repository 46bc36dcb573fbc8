#include "pcmlab/riccati.hpp"

#include "pcmlab/error.hpp"
#include "pcmlab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unsupported/Eigen/KroneckerProduct>

namespace pcmlab {

RiccatiSolution solve_dare(const ModifiedPlant& mp, double tol, std::size_t max_iter,
                           const std::optional<PDMatrix>& p0) {
  if (!(tol > 0.0)) throw ValidationError("solve_dare: tol must be positive");
  PDMatrix p = p0 ? *p0 : PDMatrix::identity(mp.n());
  if (p.dim() != mp.n()) throw ValidationError("solve_dare: initial value has wrong dimension");
  double step = 0.0;
  for (std::size_t it = 1; it <= max_iter; ++it) {
    PDMatrix next = homographic(mp.sym.m1, p);
    step = riemannian_distance(next, p);
    p = std::move(next);
    if (step < tol) return RiccatiSolution{std::move(p), it, step};
  }
  std::ostringstream os;
  os << "solve_dare: no convergence after " << max_iter << " iterations (last step " << step
     << "); check controllability/observability of the modified plant";
  throw NumericalError(os.str());
}

std::optional<PDMatrix> solve_lyapunov(const Matrix& a0, const Matrix& g0) {
  const Index n = a0.rows();
  if (a0.cols() != n || g0.rows() != n) {
    throw ValidationError("solve_lyapunov: inconsistent dimensions");
  }
  if (spectral_radius(a0) >= 1.0 - 1e-9) return std::nullopt;
  const Matrix gg = g0 * g0.transpose();
  Matrix p;
  if (n <= 30) {
    const Matrix lhs = Matrix::Identity(n * n, n * n) - Eigen::kroneckerProduct(a0, a0).eval();
    const Vector rhs = Eigen::Map<const Vector>(gg.data(), n * n);
    Eigen::PartialPivLU<Matrix> lu(lhs);
    if (!(lu.rcond() > 1e-14)) throw NumericalError("solve_lyapunov: singular linear system");
    const Vector sol = lu.solve(rhs);
    p = Eigen::Map<const Matrix>(sol.data(), n, n);
  } else {
    // Doubling: P = sum_k A^k GG^T A^kT, accumulated in log2 steps.
    p = gg;
    Matrix ak = a0;
    for (int it = 0; it < 200; ++it) {
      const Matrix inc = ak * p * ak.transpose();
      p += inc;
      ak = ak * ak;
      if (inc.norm() <= 1e-16 * p.norm()) break;
    }
  }
  p = 0.5 * (p + p.transpose());
  Eigen::LLT<Matrix> llt(p);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("solve_lyapunov: solution is not positive definite (is (A, G) reachable?)");
  }
  return PDMatrix::propagated(p);
}

namespace {

Matrix random_symmetric(Index n, Rng& rng) {
  Matrix u(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j <= i; ++j) {
      u(i, j) = rng.normal();
      u(j, i) = u(i, j);
    }
  }
  return u;
}

Matrix sym_exp(const Matrix& s) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(s);
  const Matrix& v = eig.eigenvectors();
  Matrix e = v * eig.eigenvalues().array().exp().matrix().asDiagonal() * v.transpose();
  return 0.5 * (e + e.transpose());
}

// a^{1/2} exp(s) a^{1/2}
PDMatrix congruence_exp(const Matrix& a_half, const Matrix& s) {
  return PDMatrix::propagated(a_half * sym_exp(s) * a_half);
}

}  // namespace

ContractionEstimate estimate_contraction(const ModifiedPlant& mp, const PDMatrix& p_star,
                                         std::size_t n_samples, double radius,
                                         std::uint64_t seed) {
  if (n_samples < 10) throw ValidationError("estimate_contraction: need n_samples >= 10");
  if (!(radius > 1e-3)) throw ValidationError("estimate_contraction: radius must exceed 1e-3");
  const Index n = mp.n();
  const Matrix p_half = sym_sqrt(p_star);
  const DistanceFromReference to_star(p_star);

  ContractionEstimate est;
  est.n_samples = n_samples;
  std::vector<double> dx, dh;
  dx.reserve(n_samples);
  dh.reserve(n_samples);
  const double log_lo = std::log(1e-3), log_hi = std::log(radius);

  for (std::size_t i = 0; i < n_samples; ++i) {
    Rng rng(derive_seed(seed, i));
    auto draw = [&](double norm) {
      Matrix s = random_symmetric(n, rng);
      const double f = s.norm();
      return f > 0.0 ? Matrix(s * (norm / f)) : Matrix(Matrix::Identity(n, n) * (norm / std::sqrt(double(n))));
    };
    const double rx = std::exp(log_lo + (log_hi - log_lo) * rng.uniform());
    const double rv = std::exp(log_lo + (log_hi - log_lo) * rng.uniform());
    const PDMatrix x = congruence_exp(p_half, draw(rx));
    const PDMatrix y = congruence_exp(sym_sqrt(x), draw(rv));
    const double dxy = riemannian_distance(x, y);
    if (!(dxy > 0.0)) continue;
    for (int g = 0; g < 2; ++g) {
      const double ratio =
          riemannian_distance(homographic(mp.sym[g], x), homographic(mp.sym[g], y)) / dxy;
      double& slot = g == 0 ? est.alpha0_hat : est.alpha1_hat;
      slot = std::max(slot, ratio);
    }
    dx.push_back(to_star(x));
    dh.push_back(to_star(homographic(mp.sym.m0, x)));
  }
  if (dx.size() < 2) throw NumericalError("estimate_contraction: degenerate sampling");

  // Least-squares line, then shift the intercept to dominate every sample.
  const double nn = static_cast<double>(dx.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < dx.size(); ++i) {
    sx += dx[i];
    sy += dh[i];
    sxx += dx[i] * dx[i];
    sxy += dx[i] * dh[i];
  }
  const double den = nn * sxx - sx * sx;
  double a = den > 0.0 ? (nn * sxy - sx * sy) / den : 1.0;
  a = std::max(a, 1e-12);
  double b = (sy - a * sx) / nn;
  for (std::size_t i = 0; i < dx.size(); ++i) b = std::max(b, dh[i] - a * dx[i]);
  est.a_hat = a;
  est.b_hat = std::max(b, 1e-12);
  return est;
}

}  // namespace pcmlab
