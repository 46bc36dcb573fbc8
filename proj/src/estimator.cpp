#include "pcmlab/estimator.hpp"

#include "pcmlab/error.hpp"

namespace pcmlab {

namespace {

Matrix spd_solve(const Matrix& spd, const Matrix& rhs) {
  Eigen::LLT<Matrix> llt(spd);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("symmetric solve on a matrix that is not positive definite");
  }
  return llt.solve(rhs);
}

// (X^-1 + C^T W^-1 C)^-1 = X - X C^T (W + C X C^T)^-1 C X
Matrix information_update(const Matrix& x, const Matrix& c, const Matrix& w) {
  if (c.rows() == 0) return x;
  const Matrix xc = x * c.transpose();
  const Matrix s = w + c * xc;
  return x - xc * spd_solve(0.5 * (s + s.transpose()), xc.transpose());
}

struct HatQuantities {
  Matrix p_hat;
  Matrix q_hat;
  Matrix b_hat;
  Matrix a_hat;
};

HatQuantities hat_quantities(const NominalPlant& plant, const Matrix& s, const Matrix& t,
                             const Matrix& p) {
  const double lam = (1.0 - plant.mu) / plant.mu;
  const Index n = plant.n(), ns = s.rows();
  HatQuantities h;
  if (ns == 0 || lam == 0.0) {
    h.p_hat = p;
    h.q_hat = plant.q.matrix();
    h.b_hat = plant.b;
    h.a_hat = plant.a;
    return h;
  }
  const Matrix I_s = Matrix::Identity(ns, ns);
  // P^ = (P^-1 + lam S^T S)^-1
  h.p_hat = information_update(p, s, I_s / lam);
  // Q^ = [Q^-1 + lam T^T (I + lam S P S^T)^-1 T]^-1
  const Matrix mid = I_s + lam * s * p * s.transpose();
  h.q_hat = information_update(plant.q.matrix(), t, 0.5 * (mid + mid.transpose()) / lam);
  h.b_hat = plant.b - lam * plant.a * h.p_hat * s.transpose() * t;
  h.a_hat = (plant.a - lam * h.b_hat * h.q_hat * t.transpose() * s) *
            (Matrix::Identity(n, n) - lam * h.p_hat * s.transpose() * s);
  return h;
}

}  // namespace

PDMatrix pcm_step(const ModifiedPlant& mp, const PDMatrix& p, int gamma) {
  if (gamma != 0 && gamma != 1) throw ValidationError("pcm_step: gamma must be 0 or 1");
  if (p.dim() != mp.n()) throw ValidationError("pcm_step: PCM dimension does not match plant");
  return homographic(mp.sym[gamma], p);
}

PDMatrix pcm_step_open_loop(const NominalPlant& plant, const PDMatrix& p) {
  const Matrix x = plant.a * p.matrix() * plant.a.transpose() +
                   plant.b * plant.q.matrix() * plant.b.transpose();
  return PDMatrix::propagated(x);
}

PDMatrix pcm_step_hat_form(const NominalPlant& plant, const PDMatrix& p) {
  const auto [s, t] = sensitivity_matrices(plant);
  const HatQuantities h = hat_quantities(plant, s, t, p.matrix());
  const Matrix x = plant.a * h.p_hat * plant.a.transpose() + h.b_hat * h.q_hat * h.b_hat.transpose();
  return PDMatrix::propagated(information_update(x, plant.c, plant.r.matrix()));
}

PDMatrix pcm_step_compact_form(const ModifiedPlant& mp, const NominalPlant& plant,
                               const PDMatrix& p) {
  const Matrix x = mp.a_tilde * p.matrix() * mp.a_tilde.transpose() +
                   plant.b * mp.q_tilde * plant.b.transpose();
  return PDMatrix::propagated(information_update(x, mp.c_tilde, mp.r_tilde));
}

PDMatrix pcm_step_riccati_form(const ModifiedPlant& mp, const PDMatrix& p) {
  const Index rows = mp.h1.rows();
  const Matrix x = mp.a1 * p.matrix() * mp.a1.transpose() + mp.g1 * mp.g1.transpose();
  return PDMatrix::propagated(information_update(x, mp.h1, Matrix::Identity(rows, rows)));
}

EstimatorState rseio_step(const ModifiedPlant& mp, const NominalPlant& plant,
                          const EstimatorState& st, const std::optional<Vector>& y, int gamma) {
  if (gamma != 0 && gamma != 1) throw ValidationError("rseio_step: gamma must be 0 or 1");
  if (st.x_hat.size() != plant.n()) throw ValidationError("rseio_step: state dimension mismatch");
  if (gamma == 1 && !y) throw ValidationError("rseio_step: measurement missing with gamma = 1");
  if (gamma == 0 && y) throw ValidationError("rseio_step: measurement supplied with gamma = 0");

  PDMatrix p_next = pcm_step(mp, st.p, gamma);
  if (gamma == 0) {
    return EstimatorState{plant.a * st.x_hat, std::move(p_next), st.k + 1};
  }
  if (y->size() != plant.p()) throw ValidationError("rseio_step: measurement dimension mismatch");

  const HatQuantities h = hat_quantities(plant, mp.s_mat, mp.t_mat, st.p.matrix());
  const Vector x_pred = h.a_hat * st.x_hat;
  const Vector innovation = *y - plant.c * x_pred;
  const Vector r_inv_innov = spd_solve(plant.r.matrix(), innovation);
  Vector x_next = x_pred + p_next.matrix() * plant.c.transpose() * r_inv_innov;
  return EstimatorState{std::move(x_next), std::move(p_next), st.k + 1};
}

PcmTrajectory pcm_trajectory(const ModifiedPlant& mp, const PDMatrix& p0, const Word& word,
                             const std::optional<PDMatrix>& reference, LogBase base) {
  PcmTrajectory traj{p0, word, {}, {}};
  traj.pcms.reserve(word.size() + 1);
  traj.pcms.push_back(p0);
  for (const auto g : word) {
    traj.pcms.push_back(pcm_step(mp, traj.pcms.back(), g));
  }
  if (reference) {
    const DistanceFromReference dist(*reference, base);
    traj.distances.reserve(traj.pcms.size());
    for (const auto& p : traj.pcms) traj.distances.push_back(dist(p));
  }
  return traj;
}

Matrix word_product(const ModifiedPlant& mp, std::span<const std::uint8_t> word) {
  const Index n2 = 2 * mp.n();
  Matrix prod = Matrix::Identity(n2, n2);
  for (const auto g : word) {
    if (g > 1) throw ValidationError("word_product: letters must be 0 or 1");
    prod = (mp.sym[g] * prod).eval();
  }
  return prod;
}

}  // namespace pcmlab
