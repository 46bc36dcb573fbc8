#include "pcmlab/plant.hpp"

#include "pcmlab/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace pcmlab {

namespace {

constexpr double kMaxCondition = 1e12;

void expect_shape(const Matrix& m, Index rows, Index cols, const std::string& name) {
  if (m.rows() != rows || m.cols() != cols) {
    std::ostringstream os;
    os << name << " must be " << rows << "x" << cols << ", got " << m.rows() << "x" << m.cols();
    throw ValidationError(os.str());
  }
  if (!m.allFinite()) throw ValidationError(name + " has non-finite entries");
}

Matrix spd_inverse(const Matrix& m) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("expected a positive-definite matrix during plant construction");
  }
  return llt.solve(Matrix::Identity(m.rows(), m.cols()));
}

}  // namespace

void NominalPlant::validate() const {
  const Index nn = a.rows();
  if (nn == 0) throw ValidationError("plant.a must be non-empty");
  expect_shape(a, nn, nn, "plant.a");
  if (b.rows() != nn || b.cols() == 0) throw ValidationError("plant.b must have n rows");
  expect_shape(b, nn, b.cols(), "plant.b");
  if (c.cols() != nn || c.rows() == 0) throw ValidationError("plant.c must have n columns");
  expect_shape(c, c.rows(), nn, "plant.c");
  if (q.dim() != b.cols()) throw ValidationError("plant.q must be m x m with m = cols(b)");
  if (r.dim() != c.rows()) throw ValidationError("plant.r must be p x p with p = rows(c)");
  if (!(mu > 0.0 && mu <= 1.0)) throw ValidationError("plant.mu must lie in (0, 1]");
  if (d_b.size() != d_a.size() || d_c.size() != d_a.size()) {
    throw ValidationError("plant.dA, plant.dB and plant.dC must have the same length");
  }
  for (std::size_t i = 0; i < d_a.size(); ++i) {
    expect_shape(d_a[i], nn, nn, "plant.dA[" + std::to_string(i) + "]");
    expect_shape(d_b[i], nn, b.cols(), "plant.dB[" + std::to_string(i) + "]");
    expect_shape(d_c[i], c.rows(), nn, "plant.dC[" + std::to_string(i) + "]");
  }
}

SensitivityMatrices sensitivity_matrices(const NominalPlant& plant) {
  plant.validate();
  const Index n = plant.n(), m = plant.m(), p = plant.p();
  const auto ne = static_cast<Index>(plant.n_e());
  SensitivityMatrices out{Matrix::Zero(2 * p * ne, n), Matrix::Zero(2 * p * ne, m)};
  for (Index i = 0; i < ne; ++i) {
    const auto k = static_cast<std::size_t>(i);
    out.s.middleRows(2 * p * i, p) = plant.c * plant.d_a[k];
    out.s.middleRows(2 * p * i + p, p) = plant.d_c[k] * plant.a;
    out.t.middleRows(2 * p * i, p) = plant.c * plant.d_b[k];
    out.t.middleRows(2 * p * i + p, p) = plant.d_c[k] * plant.b;
  }
  return out;
}

ModifiedPlant build_modified_plant(const NominalPlant& plant) {
  plant.validate();
  const Index n = plant.n(), p = plant.p();
  const Matrix& a = plant.a;
  const Matrix& b = plant.b;
  const Matrix& q = plant.q.matrix();

  if (!(condition_estimate(a) <= kMaxCondition)) {
    throw ValidationError("invertibility hypothesis violated: A (= A0) is singular");
  }

  ModifiedPlant mp;
  mp.lambda = (1.0 - plant.mu) / plant.mu;
  const double lam = mp.lambda;
  auto [s, t] = sensitivity_matrices(plant);
  mp.s_mat = s;
  mp.t_mat = t;
  const Index ns = s.rows();

  mp.q_check = spd_inverse(spd_inverse(q) + lam * t.transpose() * t);
  mp.q_check = 0.5 * (mp.q_check + mp.q_check.transpose());
  mp.a_check = a - lam * b * mp.q_check * t.transpose() * s;
  if (!(condition_estimate(mp.a_check) <= kMaxCondition)) {
    throw ValidationError("invertibility hypothesis violated: A_check = A - lam B Qc T^T S is singular");
  }
  const Matrix a_check_inv = mp.a_check.partialPivLu().inverse();

  if (ns > 0) {
    const Matrix inner = Matrix::Identity(ns, ns) + lam * t * q * t.transpose();
    mp.s_tilde = std::sqrt(lam) * sym_inv_sqrt(PDMatrix(0.5 * (inner + inner.transpose()))) * s;
  } else {
    mp.s_tilde = Matrix::Zero(0, n);
  }
  mp.b_tilde = a_check_inv * b;

  const Matrix sts = mp.s_tilde.transpose() * mp.s_tilde;
  mp.q_tilde = mp.q_check + mp.q_check * mp.b_tilde.transpose() * sts * mp.b_tilde * mp.q_check;
  mp.q_tilde = 0.5 * (mp.q_tilde + mp.q_tilde.transpose());
  mp.a_tilde = mp.a_check + b * mp.q_check * mp.b_tilde.transpose() * sts;

  const bool keep_s_rows = ns > 0 && mp.s_tilde.cwiseAbs().maxCoeff() > 0.0;
  if (keep_s_rows) {
    mp.c_tilde.resize(ns + p, n);
    mp.c_tilde.topRows(ns) = mp.s_tilde * a_check_inv;
    mp.c_tilde.bottomRows(p) = plant.c;
    mp.r_tilde = Matrix::Zero(ns + p, ns + p);
    Matrix top = Matrix::Identity(ns, ns) +
                 mp.s_tilde * mp.b_tilde * mp.q_check * mp.b_tilde.transpose() * mp.s_tilde.transpose();
    mp.r_tilde.topLeftCorner(ns, ns) = 0.5 * (top + top.transpose());
    mp.r_tilde.bottomRightCorner(p, p) = plant.r.matrix();
  } else {
    mp.c_tilde = plant.c;
    mp.r_tilde = plant.r.matrix();
  }

  mp.a0 = a;
  mp.g0 = b * sym_sqrt(plant.q);
  mp.a1 = mp.a_tilde;
  mp.g1 = b * sym_sqrt(PDMatrix(mp.q_tilde));
  mp.h1 = sym_inv_sqrt(PDMatrix(mp.r_tilde)) * mp.c_tilde;

  if (!(condition_estimate(mp.a1) <= kMaxCondition)) {
    throw ValidationError("invertibility hypothesis violated: A1 (= A~) is singular");
  }
  mp.sym = build_symplectic_pair(mp.a0, mp.g0, mp.a1, mp.g1, mp.h1);
  return mp;
}

Index numerical_rank(const Matrix& m) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const Vector& s = svd.singularValues();
  const double tol = static_cast<double>(std::min(m.rows(), m.cols())) * s(0) * 1e-10;
  Index r = 0;
  for (Index i = 0; i < s.size(); ++i) {
    if (s(i) > tol) ++r;
  }
  return r;
}

double spectral_radius(const Matrix& a) {
  Eigen::EigenSolver<Matrix> es(a, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

StructureReport check_structure(const ModifiedPlant& mp) {
  const Index n = mp.n();
  StructureReport rep;
  rep.a0_invertible = condition_estimate(mp.a0) <= kMaxCondition;
  rep.a1_invertible = condition_estimate(mp.a1) <= kMaxCondition;

  const Index gm = mp.g1.cols();
  Matrix ctrb(n, n * gm);
  Matrix block = mp.g1;
  for (Index i = 0; i < n; ++i) {
    ctrb.middleCols(i * gm, gm) = block;
    block = mp.a1 * block;
  }
  const Index hp = mp.h1.rows();
  Matrix obsv(n * hp, n);
  block = mp.h1;
  for (Index i = 0; i < n; ++i) {
    obsv.middleRows(i * hp, hp) = block;
    block = block * mp.a1;
  }
  rep.ctrb_rank = numerical_rank(ctrb);
  rep.obsv_rank = numerical_rank(obsv);
  rep.controllable = rep.ctrb_rank == n;
  rep.observable = rep.obsv_rank == n;
  rep.spectral_radius_a0 = spectral_radius(mp.a0);
  return rep;
}

}  // namespace pcmlab
