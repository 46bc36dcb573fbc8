// Positive-definite matrices, the Riemannian (affine-invariant) metric on
// them, homographic transformations and the symplectic update pair.
#pragma once

#include <Eigen/Dense>

#include <cstddef>

namespace pcmlab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Logarithm used inside the Riemannian distance. The metric is defined
/// with the natural log; the decimal variant rescales every distance by
/// 1/ln(10) and is the convention of the published distance tables.
enum class LogBase { natural, decimal };

/// Multiplier converting a natural-log distance into `base`.
double log_scale(LogBase base);

/// Symmetric positive-definite matrix. Immutable once constructed.
///
/// Two validation levels exist. The public constructor is meant for
/// user-supplied data and enforces
///   - symmetry: max|m - m^T| <= 1e-10 (1 + max|m|),
///   - a successful Cholesky factorisation,
///   - lambda_min > 1e-12 lambda_max.
/// `propagated()` is used for iterates of the PCM recursion: the input is
/// symmetrised and only the Cholesky factorisation is required, since
/// long dropout bursts legitimately produce condition numbers far beyond
/// 1e12.
class PDMatrix {
 public:
  static constexpr double kSymmetryTol = 1e-10;
  static constexpr double kEigenFloor = 1e-12;

  explicit PDMatrix(Matrix m);

  static PDMatrix propagated(const Matrix& m);
  static PDMatrix identity(Index n, double scale = 1.0);

  const Matrix& matrix() const noexcept { return m_; }
  Index dim() const noexcept { return m_.rows(); }
  double operator()(Index i, Index j) const { return m_(i, j); }

  PDMatrix inverse() const;

 private:
  struct Unchecked {};
  PDMatrix(Matrix m, Unchecked) : m_(std::move(m)) {}

  Matrix m_;
};

/// delta(P, Q) = sqrt(sum_i ln^2 lambda_i(P Q^{-1})).
///
/// Evaluated through the whitened symmetric problem: with Q = L L^T the
/// eigenvalues of P Q^{-1} are those of L^{-1} P L^{-T}, which is
/// symmetric with a real positive spectrum.
double riemannian_distance(const PDMatrix& p, const PDMatrix& q,
                           LogBase base = LogBase::natural);

/// Distance to a fixed reference with the reference factorisation cached.
/// Used on hot loops where every PCM is compared against P*.
class DistanceFromReference {
 public:
  explicit DistanceFromReference(const PDMatrix& reference, LogBase base = LogBase::natural);

  double operator()(const PDMatrix& p) const;
  const PDMatrix& reference() const noexcept { return reference_; }
  LogBase base() const noexcept { return base_; }

 private:
  PDMatrix reference_;
  Matrix l_inv_;
  LogBase base_;
};

/// H_m(Phi, P) = [Phi11 P + Phi12][Phi21 P + Phi22]^{-1}, symmetrised.
/// Throws NumericalError when the denominator block is singular or the
/// result is not positive definite.
PDMatrix homographic(const Matrix& phi, const PDMatrix& p);

/// The pair (M0, M1) driving the PCM recursion: P' = H_m(M_gamma, P).
struct SymplecticPair {
  Matrix m0;
  Matrix m1;
  Index n = 0;

  const Matrix& operator[](int gamma) const { return gamma == 0 ? m0 : m1; }
};

/// J = [[0, I], [-I, 0]] of size 2n.
Matrix symplectic_form(Index n);

/// max_ij |M^T J M - J|_ij.
double symplectic_defect(const Matrix& m);

/// Builds
///   M0 = [[A0, G0 G0^T A0^{-T}], [0, A0^{-T}]]
///   M1 = [[A1, G1 G1^T A1^{-T}], [H1^T H1 A1, (I + H1^T H1 G1 G1^T) A1^{-T}]]
/// and checks both are symplectic to 1e-8. A0 and A1 must be invertible
/// with a condition estimate below 1e12.
SymplecticPair build_symplectic_pair(const Matrix& a0, const Matrix& g0, const Matrix& a1,
                                     const Matrix& g1, const Matrix& h1);

/// Unique symmetric positive-definite square root.
Matrix sym_sqrt(const PDMatrix& p);

/// Inverse of the symmetric square root.
Matrix sym_inv_sqrt(const PDMatrix& p);

/// 1-norm condition estimate; infinity for singular input.
double condition_estimate(const Matrix& a);

}  // namespace pcmlab
