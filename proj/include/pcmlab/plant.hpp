// Nominal plant, sensitivity matrices and the modified plant absorbing the
// sensitivity penalisation.
#pragma once

#include "pcmlab/pdm.hpp"

#include <vector>

namespace pcmlab {

/// x_{k+1} = A(eps) x_k + B(eps) w_k,  y_k = gamma_k C(eps) x_k + v_k,
/// linearised at eps = 0. dA/dB/dC hold one partial derivative per error
/// component; mu in (0, 1] trades nominal accuracy for robustness.
struct NominalPlant {
  Matrix a;
  Matrix b;
  Matrix c;
  PDMatrix q;
  PDMatrix r;
  std::vector<Matrix> d_a;
  std::vector<Matrix> d_b;
  std::vector<Matrix> d_c;
  double mu = 1.0;

  Index n() const { return a.rows(); }
  Index m() const { return b.cols(); }
  Index p() const { return c.rows(); }
  std::size_t n_e() const { return d_a.size(); }

  /// Throws ValidationError naming the first inconsistency.
  void validate() const;
};

struct SensitivityMatrices {
  Matrix s;  // 2 p n_e x n
  Matrix t;  // 2 p n_e x m
};

/// S = col_i [C dA_i ; dC_i A],  T = col_i [C dB_i ; dC_i B].
SensitivityMatrices sensitivity_matrices(const NominalPlant& plant);

struct ModifiedPlant {
  // (A0, G0) drive the no-measurement branch; (A1, G1, H1) the modified plant.
  Matrix a0, g0;
  Matrix a1, g1, h1;
  double lambda = 0.0;

  Matrix s_mat, t_mat;
  Matrix a_check;  // A - lam B Qc T^T S
  Matrix q_check;  // (Q^-1 + lam T^T T)^-1
  Matrix s_tilde;  // sqrt(lam) (I + lam T Q T^T)^{-1/2} S
  Matrix b_tilde;  // A_check^-1 B
  Matrix q_tilde;
  Matrix a_tilde;
  Matrix c_tilde;  // [S~ A_check^-1 ; C], S~ rows dropped when S~ == 0
  Matrix r_tilde;  // blockdiag(I + S~ B~ Qc B~^T S~^T, R)

  SymplecticPair sym;

  Index n() const { return a0.rows(); }
};

/// Builds every intermediate of the compact PCM recursion and the
/// symplectic pair. Throws ValidationError when A or A_check is singular.
ModifiedPlant build_modified_plant(const NominalPlant& plant);

struct StructureReport {
  bool a0_invertible = false;
  bool a1_invertible = false;
  Index ctrb_rank = 0;
  Index obsv_rank = 0;
  bool controllable = false;
  bool observable = false;
  double spectral_radius_a0 = 0.0;
};

/// Rank of [G, AG, ..., A^{n-1}G] and of the observability stack of
/// (H, A); tolerance n * sigma_max * 1e-10.
StructureReport check_structure(const ModifiedPlant& mp);

Index numerical_rank(const Matrix& m);
double spectral_radius(const Matrix& a);

}  // namespace pcmlab
