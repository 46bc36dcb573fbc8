#include "pcmlab/pdm.hpp"

#include "pcmlab/error.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace pcmlab {

namespace {

constexpr double kSymplecticTol = 1e-8;
constexpr double kMaxCondition = 1e12;
constexpr double kSwitchRcond = 1e-8;
constexpr double kSingularRcond = 1e-15;

double asymmetry(const Matrix& m) {
  return (m - m.transpose()).cwiseAbs().maxCoeff();
}

void require_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    std::ostringstream os;
    os << what << ": expected a non-empty square matrix, got " << m.rows() << "x" << m.cols();
    throw ValidationError(os.str());
  }
}

}  // namespace

double log_scale(LogBase base) {
  return base == LogBase::natural ? 1.0 : 1.0 / std::log(10.0);
}

PDMatrix::PDMatrix(Matrix m) : m_(std::move(m)) {
  require_square(m_, "PDMatrix");
  if (!m_.allFinite()) throw ValidationError("PDMatrix: non-finite entry");
  const double scale = 1.0 + m_.cwiseAbs().maxCoeff();
  if (asymmetry(m_) > kSymmetryTol * scale) {
    throw ValidationError("PDMatrix: matrix is not symmetric");
  }
  m_ = 0.5 * (m_ + m_.transpose());
  Eigen::LLT<Matrix> llt(m_);
  if (llt.info() != Eigen::Success) {
    throw ValidationError("PDMatrix: matrix is not positive definite (Cholesky failed)");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m_, Eigen::EigenvaluesOnly);
  const Vector& ev = eig.eigenvalues();
  if (!(ev.minCoeff() > kEigenFloor * ev.maxCoeff())) {
    std::ostringstream os;
    os << "PDMatrix: smallest eigenvalue " << ev.minCoeff() << " below 1e-12 x largest "
       << ev.maxCoeff();
    throw ValidationError(os.str());
  }
}

PDMatrix PDMatrix::propagated(const Matrix& m) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw NumericalError("propagated PCM is not square");
  }
  if (!m.allFinite()) throw NumericalError("propagated PCM has non-finite entries");
  Matrix sym = 0.5 * (m + m.transpose());
  Eigen::LLT<Matrix> llt(sym);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("propagated PCM lost positive definiteness");
  }
  return PDMatrix(std::move(sym), Unchecked{});
}

PDMatrix PDMatrix::identity(Index n, double scale) {
  if (n <= 0 || !(scale > 0.0) || !std::isfinite(scale)) {
    throw ValidationError("PDMatrix::identity: need n > 0 and a finite scale > 0");
  }
  return PDMatrix(scale * Matrix::Identity(n, n), Unchecked{});
}

PDMatrix PDMatrix::inverse() const {
  Eigen::LLT<Matrix> llt(m_);
  Matrix inv = llt.solve(Matrix::Identity(dim(), dim()));
  return propagated(inv);
}

double riemannian_distance(const PDMatrix& p, const PDMatrix& q, LogBase base) {
  if (p.dim() != q.dim()) {
    throw ValidationError("riemannian_distance: dimension mismatch");
  }
  return DistanceFromReference(q, base)(p);
}

DistanceFromReference::DistanceFromReference(const PDMatrix& reference, LogBase base)
    : reference_(reference), base_(base) {
  Eigen::LLT<Matrix> llt(reference_.matrix());
  if (llt.info() != Eigen::Success) {
    throw ValidationError("riemannian_distance: reference is not positive definite");
  }
  const Index n = reference_.dim();
  l_inv_ = llt.matrixL().solve(Matrix::Identity(n, n));
}

double DistanceFromReference::operator()(const PDMatrix& p) const {
  if (p.dim() != reference_.dim()) {
    throw ValidationError("riemannian_distance: dimension mismatch");
  }
  Matrix w = l_inv_ * p.matrix() * l_inv_.transpose();
  w = 0.5 * (w + w.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(w, Eigen::EigenvaluesOnly);
  const Vector& ev = eig.eigenvalues();
  if (!(ev.minCoeff() > 0.0)) {
    throw NumericalError("riemannian_distance: non-positive generalized eigenvalue");
  }
  double acc = 0.0;
  for (Index i = 0; i < ev.size(); ++i) {
    const double l = std::log(ev(i));
    acc += l * l;
  }
  return std::sqrt(acc) * log_scale(base_);
}

PDMatrix homographic(const Matrix& phi, const PDMatrix& p) {
  const Index n = p.dim();
  if (phi.rows() != 2 * n || phi.cols() != 2 * n) {
    throw ValidationError("homographic: Phi must be 2n x 2n for an n x n argument");
  }
  const auto f11 = phi.topLeftCorner(n, n), f12 = phi.topRightCorner(n, n);
  const auto f21 = phi.bottomLeftCorner(n, n), f22 = phi.bottomRightCorner(n, n);
  Matrix num = f11 * p.matrix() + f12;
  Matrix den = f21 * p.matrix() + f22;
  // X = num den^{-1}  <=>  den^T X^T = num^T
  Eigen::PartialPivLU<Matrix> lu(den.transpose());
  double rcond = lu.rcond();
  if (!(rcond > kSwitchRcond)) {
    // After long open-loop runs P is dominated by a few huge eigenvalues and
    // both blocks inherit its conditioning. Factoring P out on the right,
    // X = (F11 + F12 P^-1)(F21 + F22 P^-1)^-1, is the same map with a
    // denominator that stays well conditioned in that regime.
    Eigen::LLT<Matrix> llt(p.matrix());
    if (llt.info() == Eigen::Success) {
      const Matrix p_inv = llt.solve(Matrix::Identity(n, n));
      Matrix num2 = f11 + f12 * p_inv;
      Matrix den2 = f21 + f22 * p_inv;
      Eigen::PartialPivLU<Matrix> lu2(den2.transpose());
      if (lu2.rcond() > rcond) {
        num = std::move(num2);
        lu = std::move(lu2);
        rcond = lu.rcond();
      }
    }
  }
  if (!(rcond > kSingularRcond)) {
    throw NumericalError("homographic: denominator block Phi21 P + Phi22 is singular");
  }
  Matrix x = lu.solve(num.transpose()).transpose();
  return PDMatrix::propagated(x);
}

Matrix symplectic_form(Index n) {
  Matrix j = Matrix::Zero(2 * n, 2 * n);
  j.topRightCorner(n, n).setIdentity();
  j.bottomLeftCorner(n, n) = -Matrix::Identity(n, n);
  return j;
}

double symplectic_defect(const Matrix& m) {
  if (m.rows() != m.cols() || m.rows() % 2 != 0) {
    throw ValidationError("symplectic_defect: matrix must be 2n x 2n");
  }
  const Matrix j = symplectic_form(m.rows() / 2);
  return (m.transpose() * j * m - j).cwiseAbs().maxCoeff();
}

double condition_estimate(const Matrix& a) {
  if (a.rows() != a.cols() || a.rows() == 0) return std::numeric_limits<double>::infinity();
  Eigen::JacobiSVD<Matrix> svd(a);
  const Vector& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  if (!(smin > 0.0)) return std::numeric_limits<double>::infinity();
  return s(0) / smin;
}

namespace {

Matrix checked_inverse_transpose(const Matrix& a, const char* name) {
  require_square(a, name);
  const double cond = condition_estimate(a);
  if (!(cond <= kMaxCondition)) {
    std::ostringstream os;
    os << name << " must be invertible (condition estimate " << cond << " > 1e12)";
    throw ValidationError(os.str());
  }
  return a.transpose().partialPivLu().inverse();
}

}  // namespace

SymplecticPair build_symplectic_pair(const Matrix& a0, const Matrix& g0, const Matrix& a1,
                                     const Matrix& g1, const Matrix& h1) {
  const Index n = a0.rows();
  if (a1.rows() != n || g0.rows() != n || g1.rows() != n || h1.cols() != n) {
    throw ValidationError("build_symplectic_pair: inconsistent block dimensions");
  }
  const Matrix a0_it = checked_inverse_transpose(a0, "A0");
  const Matrix a1_it = checked_inverse_transpose(a1, "A1");
  const Matrix gg0 = g0 * g0.transpose();
  const Matrix gg1 = g1 * g1.transpose();
  const Matrix hh1 = h1.transpose() * h1;

  SymplecticPair pair;
  pair.n = n;
  pair.m0 = Matrix::Zero(2 * n, 2 * n);
  pair.m0.topLeftCorner(n, n) = a0;
  pair.m0.topRightCorner(n, n) = gg0 * a0_it;
  pair.m0.bottomRightCorner(n, n) = a0_it;

  pair.m1.resize(2 * n, 2 * n);
  pair.m1.topLeftCorner(n, n) = a1;
  pair.m1.topRightCorner(n, n) = gg1 * a1_it;
  pair.m1.bottomLeftCorner(n, n) = hh1 * a1;
  pair.m1.bottomRightCorner(n, n) = (Matrix::Identity(n, n) + hh1 * gg1) * a1_it;

  if (!pair.m0.allFinite() || !pair.m1.allFinite()) {
    throw NumericalError("build_symplectic_pair: non-finite block");
  }
  for (int g = 0; g < 2; ++g) {
    const double defect = symplectic_defect(pair[g]);
    if (!(defect <= kSymplecticTol)) {
      std::ostringstream os;
      os << "build_symplectic_pair: M" << g << " violates M^T J M = J (defect " << defect << ")";
      throw NumericalError(os.str());
    }
  }
  return pair;
}

Matrix sym_sqrt(const PDMatrix& p) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(p.matrix());
  if (!(eig.eigenvalues().minCoeff() > 0.0)) {
    throw ValidationError("sym_sqrt: matrix is not positive definite");
  }
  const Matrix& v = eig.eigenvectors();
  Matrix s = v * eig.eigenvalues().cwiseSqrt().asDiagonal() * v.transpose();
  return 0.5 * (s + s.transpose());
}

Matrix sym_inv_sqrt(const PDMatrix& p) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(p.matrix());
  if (!(eig.eigenvalues().minCoeff() > 0.0)) {
    throw ValidationError("sym_inv_sqrt: matrix is not positive definite");
  }
  const Matrix& v = eig.eigenvectors();
  Matrix s = v * eig.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() * v.transpose();
  return 0.5 * (s + s.transpose());
}

}  // namespace pcmlab
