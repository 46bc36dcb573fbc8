#include <doctest.h>

#include "support.hpp"

#include "pcmlab/error.hpp"
#include "pcmlab/plant.hpp"

using namespace pcmlab;
using namespace testsupport;

TEST_SUITE("plant") {

TEST_CASE("sensitivity matrices of the two-state plant") {
  const auto [s, t] = sensitivity_matrices(reference_plant());
  Matrix s_expected(2, 2);
  s_expected << 0, 0.099, 0, 0;
  CHECK((s - s_expected).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(t.rows() == 2);
  CHECK(t.cols() == 2);
  CHECK(t.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("no error components gives empty S and T") {
  NominalPlant plant = reference_plant();
  plant.d_a.clear();
  plant.d_b.clear();
  plant.d_c.clear();
  const auto [s, t] = sensitivity_matrices(plant);
  CHECK(s.rows() == 0);
  CHECK(s.cols() == 2);
  CHECK(t.rows() == 0);
  const ModifiedPlant mp = build_modified_plant(plant);
  CHECK(mp.c_tilde.rows() == 1);
}

TEST_CASE("lambda from mu") {
  CHECK(build_modified_plant(reference_plant(0.8)).lambda == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(build_modified_plant(reference_plant(1.0)).lambda == 0.0);
}

TEST_CASE("Kalman degeneracy when all derivatives vanish") {
  Rng rng(21);
  for (int k = 0; k < 20; ++k) {
    NominalPlant plant = random_plant(rng);
    for (auto& m : plant.d_a) m.setZero();
    for (auto& m : plant.d_b) m.setZero();
    for (auto& m : plant.d_c) m.setZero();
    const ModifiedPlant mp = build_modified_plant(plant);
    CHECK((mp.a1 - plant.a).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((mp.q_tilde - plant.q.matrix()).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(mp.c_tilde.rows() == plant.p());
    CHECK((mp.c_tilde - plant.c).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((mp.r_tilde - plant.r.matrix()).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("mu = 1 collapses every correction") {
  const NominalPlant plant = reference_plant(1.0);
  const ModifiedPlant mp = build_modified_plant(plant);
  CHECK((mp.a1 - plant.a).norm() < 1e-14);
  CHECK(rel_diff(mp.g1 * mp.g1.transpose(), plant.b * plant.q.matrix() * plant.b.transpose()) < 1e-12);
  CHECK(rel_diff(mp.h1, plant.c) < 1e-14);
}

TEST_CASE("intermediates reproduce the defining formulas") {
  Rng rng(17);
  for (int k = 0; k < 20; ++k) {
    const NominalPlant plant = random_plant(rng);
    const ModifiedPlant mp = build_modified_plant(plant);
    const auto [s, t] = sensitivity_matrices(plant);
    const double lam = (1 - plant.mu) / plant.mu;
    const Matrix qc = (plant.q.matrix().inverse() + lam * t.transpose() * t).inverse();
    CHECK(rel_diff(mp.q_check, qc) < 1e-10);
    const Matrix ac = plant.a - lam * plant.b * qc * t.transpose() * s;
    CHECK(rel_diff(mp.a_check, ac) < 1e-10);
    const Matrix bt = ac.inverse() * plant.b;
    CHECK(rel_diff(mp.b_tilde, bt) < 1e-10);
    CHECK(rel_diff(mp.g1 * mp.g1.transpose(), plant.b * mp.q_tilde * plant.b.transpose()) < 1e-10);
    CHECK(rel_diff(mp.h1.transpose() * mp.h1,
                   mp.c_tilde.transpose() * mp.r_tilde.inverse() * mp.c_tilde) < 1e-10);
  }
}

TEST_CASE("rebuilding is bit-stable") {
  const ModifiedPlant a = build_modified_plant(reference_plant());
  const ModifiedPlant b = build_modified_plant(reference_plant());
  CHECK(a.sym.m1 == b.sym.m1);
  CHECK(a.g1 == b.g1);
}

TEST_CASE("structure report") {
  const StructureReport rep = check_structure(build_modified_plant(reference_plant()));
  CHECK(rep.controllable);
  CHECK(rep.observable);
  CHECK(rep.a0_invertible);
  CHECK(rep.a1_invertible);
  CHECK(rep.spectral_radius_a0 == doctest::Approx(1.1234).epsilon(1e-12));

  ModifiedPlant mp = build_modified_plant(reference_plant());
  mp.a1 = Matrix::Zero(2, 2);
  mp.a1(0, 0) = 2;
  mp.a1(1, 1) = 3;
  mp.g1 = Matrix::Zero(2, 1);
  mp.g1(0, 0) = 1;
  const StructureReport bad = check_structure(mp);
  CHECK_FALSE(bad.controllable);
  CHECK(bad.ctrb_rank == 1);
}

TEST_CASE("singular A is rejected with the hypothesis named") {
  NominalPlant plant = reference_plant();
  plant.a << 1, 2, 2, 4;
  try {
    build_modified_plant(plant);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("invertib") != std::string::npos);
  }
}

TEST_CASE("inconsistent shapes are rejected") {
  NominalPlant plant = reference_plant();
  plant.d_b.push_back(Matrix::Zero(2, 2));
  CHECK_THROWS_AS(plant.validate(), ValidationError);
  NominalPlant p2 = reference_plant();
  p2.mu = 0.0;
  CHECK_THROWS_AS(p2.validate(), ValidationError);
  NominalPlant p3 = reference_plant();
  p3.c = Matrix::Ones(1, 3);
  CHECK_THROWS_AS(p3.validate(), ValidationError);
}

}
