// Fixed point of the measurement branch (the stabilising DARE solution),
// the Lyapunov solution of the open-loop branch, and sampled contraction
// coefficients of both branches.
#pragma once

#include "pcmlab/pdm.hpp"
#include "pcmlab/plant.hpp"

#include <cstdint>
#include <optional>

namespace pcmlab {

struct RiccatiSolution {
  PDMatrix p_star;
  std::size_t iterations = 0;
  double final_step_delta = 0.0;  // natural-log distance between the last two iterates
};

/// Iterates P <- H_m(M1, P) from `p0` (identity by default) until two
/// successive iterates are closer than `tol`. Throws NumericalError when
/// `max_iter` is reached.
RiccatiSolution solve_dare(const ModifiedPlant& mp, double tol = 1e-12,
                           std::size_t max_iter = 100000,
                           const std::optional<PDMatrix>& p0 = std::nullopt);

/// Solution of P = A P A^T + G G^T, or nullopt when rho(A) >= 1 - 1e-9.
std::optional<PDMatrix> solve_lyapunov(const Matrix& a0, const Matrix& g0);

struct ContractionEstimate {
  double alpha0_hat = 0.0;  // max observed delta ratio, gamma = 0
  double alpha1_hat = 0.0;  // max observed delta ratio, gamma = 1
  double a_hat = 0.0;       // slope of delta(H0(X), P*) against delta(X, P*)
  double b_hat = 0.0;       // intercept, inflated until every sample satisfies the bound
  std::size_t n_samples = 0;
};

/// Sampled lower bounds of the sup-ratios of both branches around `p_star`.
/// Pairs are built by congruence: X = P*^{1/2} exp(U) P*^{1/2},
/// Y = X^{1/2} exp(V) X^{1/2}, so delta(X, Y) = |V|_F exactly; |V|_F is
/// log-uniform on [1e-3, radius].
ContractionEstimate estimate_contraction(const ModifiedPlant& mp, const PDMatrix& p_star,
                                         std::size_t n_samples, double radius,
                                         std::uint64_t seed);

}  // namespace pcmlab
