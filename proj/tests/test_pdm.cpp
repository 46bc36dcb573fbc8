#include <doctest.h>

#include "support.hpp"

#include "pcmlab/error.hpp"
#include "pcmlab/pdm.hpp"

#include <cmath>

using namespace pcmlab;
using namespace testsupport;

TEST_SUITE("pdm") {

TEST_CASE("construction rejects asymmetric, indefinite and badly scaled input") {
  Matrix asym(2, 2);
  asym << 1, 0.5, 0.4, 1;
  CHECK_THROWS_AS(PDMatrix{asym}, ValidationError);
  Matrix indef(2, 2);
  indef << 1, 2, 2, 1;
  CHECK_THROWS_AS(PDMatrix{indef}, ValidationError);
  Matrix tiny(2, 2);
  tiny << 1, 0, 0, 1e-13;
  CHECK_THROWS_AS(PDMatrix{tiny}, ValidationError);
  CHECK_THROWS_AS(PDMatrix{Matrix(2, 3)}, ValidationError);
  Matrix near(2, 2);
  near << 2, 1 + 1e-12, 1, 2;
  CHECK_NOTHROW(PDMatrix{near});
}

TEST_CASE("distance of identical and scaled identities") {
  const PDMatrix i2 = PDMatrix::identity(2);
  CHECK(riemannian_distance(i2, i2) == doctest::Approx(0.0));
  CHECK(riemannian_distance(PDMatrix::identity(2, 2.0), i2) ==
        doctest::Approx(std::sqrt(2.0) * std::log(2.0)).epsilon(1e-12));
  CHECK(riemannian_distance(PDMatrix::identity(2, 2.0), i2) == doctest::Approx(0.980258).epsilon(1e-6));
  CHECK(riemannian_distance(PDMatrix::identity(2, 10.0), i2, LogBase::decimal) ==
        doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK_THROWS_AS(riemannian_distance(PDMatrix::identity(2), PDMatrix::identity(3)), ValidationError);
}

TEST_CASE("distance matches the eigenvalues of P Q^-1 computed directly") {
  Rng rng(11);
  for (int k = 0; k < 50; ++k) {
    const Index n = 2 + k % 4;
    const PDMatrix p = random_pd(n, rng), q = random_pd(n, rng);
    Eigen::EigenSolver<Matrix> es(p.matrix() * q.matrix().inverse());
    double acc = 0;
    for (Index i = 0; i < n; ++i) {
      const double l = std::log(es.eigenvalues()(i).real());
      acc += l * l;
    }
    CHECK(riemannian_distance(p, q) == doctest::Approx(std::sqrt(acc)).epsilon(1e-9));
  }
}

TEST_CASE("homographic identity and open-loop branch") {
  Rng rng(3);
  const PDMatrix p = random_pd(3, rng);
  CHECK(rel_diff(homographic(Matrix::Identity(6, 6), p).matrix(), p.matrix()) < 1e-14);

  const Matrix a = random_invertible(3, rng);
  const Matrix g = gaussian(3, 2, rng);
  const SymplecticPair pair =
      build_symplectic_pair(a, g, random_invertible(3, rng), gaussian(3, 3, rng), gaussian(2, 3, rng));
  for (int k = 0; k < 20; ++k) {
    const PDMatrix x = random_pd(3, rng);
    const Matrix direct = a * x.matrix() * a.transpose() + g * g.transpose();
    CHECK((homographic(pair.m0, x).matrix() - direct).cwiseAbs().maxCoeff() <=
          1e-10 * (1 + direct.cwiseAbs().maxCoeff()));
  }
  CHECK_THROWS_AS(homographic(Matrix::Identity(4, 4), p), ValidationError);
}

TEST_CASE("symplectic pair: trivial blocks and validation") {
  const SymplecticPair pair = build_symplectic_pair(Matrix::Identity(2, 2), Matrix::Zero(2, 1),
                                                    Matrix::Identity(2, 2), Matrix::Identity(2, 2),
                                                    Matrix::Identity(1, 2));
  CHECK((pair.m0 - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() == 0.0);
  Matrix sing(2, 2);
  sing << 1, 2, 2, 4;
  CHECK_THROWS_AS(build_symplectic_pair(sing, Matrix::Zero(2, 1), Matrix::Identity(2, 2),
                                        Matrix::Identity(2, 2), Matrix::Identity(1, 2)),
                  ValidationError);
}

TEST_CASE("symplectic identity on random blocks") {
  Rng rng(5);
  for (int k = 0; k < 20; ++k) {
    const Index n = 2 + k % 3;
    const SymplecticPair pair =
        build_symplectic_pair(random_invertible(n, rng), gaussian(n, 2, rng), random_invertible(n, rng),
                              gaussian(n, n, rng), gaussian(1 + k % 2, n, rng));
    const Matrix j = symplectic_form(n);
    CHECK((pair.m1.transpose() * j * pair.m1 - j).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK((pair.m0.transpose() * j * pair.m0 - j).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("matrix square roots") {
  CHECK((sym_sqrt(PDMatrix::identity(3)) - Matrix::Identity(3, 3)).norm() < 1e-15);
  CHECK((sym_sqrt(PDMatrix::identity(2, 4.0)) - 2.0 * Matrix::Identity(2, 2)).norm() < 1e-14);
  Rng rng(9);
  for (int k = 0; k < 20; ++k) {
    const PDMatrix p = random_pd(2 + k % 4, rng);
    const Matrix s = sym_sqrt(p);
    CHECK(rel_diff(s * s, p.matrix()) < 1e-10);
    const Matrix si = sym_inv_sqrt(p);
    CHECK(rel_diff(si * p.matrix() * si, Matrix::Identity(p.dim(), p.dim())) < 1e-10);
  }
}

TEST_CASE("distance cache agrees with the free function") {
  Rng rng(13);
  const PDMatrix ref = random_pd(3, rng);
  const DistanceFromReference d(ref, LogBase::decimal);
  for (int k = 0; k < 10; ++k) {
    const PDMatrix p = random_pd(3, rng);
    CHECK(d(p) == doctest::Approx(riemannian_distance(p, ref, LogBase::decimal)).epsilon(1e-14));
  }
}

}
