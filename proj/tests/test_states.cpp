#include <catch2/catch_amalgamated.hpp>

#include <array>

#include "wedgelab/experiment.hpp"
#include "wedgelab/states.hpp"

using namespace wedgelab;

namespace {

Matrix unit_vector_matrix(std::initializer_list<Complex> entries) {
  Vector v(static_cast<Eigen::Index>(entries.size()));
  Eigen::Index i = 0;
  for (Complex z : entries) v(i++) = z;
  return v * v.adjoint();
}

MarginalState random_faithful(int n, std::uint64_t seed) {
  return omega_from_spec(OmegaSpec{OmegaSpec::Kind::RandomFaithful, seed, ""}, n);
}

Vector flatten_rowmajor(const Matrix& z) {
  Vector out(z.size());
  Eigen::Index flat = 0;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    for (Eigen::Index j = 0; j < z.cols(); ++j) out(flat++) = z(i, j);
  }
  return out;
}

}  // namespace

TEST_CASE("density matrix validation") {
  REQUIRE_THROWS_AS(DensityMatrix::from_matrix(Matrix::Identity(2, 2)), ValidationError);  // trace 2
  Matrix not_hermitian = Matrix::Zero(2, 2);
  not_hermitian(0, 1) = 1.0;
  not_hermitian(0, 0) = 1.0;
  REQUIRE_THROWS_AS(DensityMatrix::from_matrix(not_hermitian), ValidationError);
  Matrix indefinite = Matrix::Zero(2, 2);
  indefinite(0, 0) = 1.5;
  indefinite(1, 1) = -0.5;
  REQUIRE_THROWS_AS(DensityMatrix::from_matrix(indefinite), ValidationError);

  const DensityMatrix ok = DensityMatrix::from_matrix(0.5 * Matrix::Identity(2, 2));
  REQUIRE(ok.rank() == 2);
  REQUIRE(ok.min_eigenvalue() == Catch::Approx(0.5));
}

TEST_CASE("canonical eigensystem fixes phases deterministically") {
  SeededRng rng(61, 0);
  const Matrix g = rng.ginibre(4, 4);
  const Matrix h = 0.5 * (g + g.adjoint());
  auto [values, vectors] = canonical_eigensystem(h);
  for (int i = 1; i < 4; ++i) REQUIRE(values(i) <= values(i - 1));
  REQUIRE(max_abs_diff(vectors.adjoint() * vectors, Matrix::Identity(4, 4)) < 1e-12);
  for (int i = 0; i < 4; ++i) {
    REQUIRE(max_abs(h * vectors.col(i) - values(i) * vectors.col(i)) < 1e-12);
    for (int j = 0; j < 4; ++j) {
      if (std::abs(vectors(j, i)) > 1e-12) {
        REQUIRE(vectors(j, i).imag() == Catch::Approx(0.0).margin(1e-14));
        REQUIRE(vectors(j, i).real() > 0.0);
        break;
      }
    }
  }
}

TEST_CASE("purify the maximally mixed and diagonal states") {
  const Purification xi = purify(maximally_mixed(2));
  REQUIRE(xi.faithful());
  const double s = 1.0 / std::sqrt(2.0);
  Vector expected(4);
  expected << s, 0, 0, s;
  REQUIRE(max_abs(Matrix(xi.vector() - expected)) < 1e-14);

  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 0.9;
  d(1, 1) = 0.1;
  const Purification xid = purify(MarginalState::from_density(DensityMatrix::from_matrix(d)));
  Vector expected_d(4);
  expected_d << std::sqrt(0.9), 0, 0, std::sqrt(0.1);
  REQUIRE(max_abs(Matrix(xid.vector() - expected_d)) < 1e-14);
}

TEST_CASE("purification represents omega on all matrix units") {
  const MarginalState omega = random_faithful(3, 5);
  const Purification xi = purify(omega);
  const Vector v = xi.vector();
  for (int j = 0; j < 3; ++j) {
    for (int k = 0; k < 3; ++k) {
      Matrix unit = Matrix::Zero(3, 3);
      unit(j, k) = 1.0;
      const Complex lhs = (v.adjoint() * kron(Matrix::Identity(3, 3), unit) * v).value();
      const Complex rhs = (omega.density.matrix() * unit).trace();
      REQUIRE(std::abs(lhs - rhs) < 1e-10);
    }
  }
  REQUIRE(max_abs_diff(xi.marginal_matrix(), omega.density.matrix()) < 1e-12);
  // cyclicity: the coefficient matrix has full rank r0
  REQUIRE(numerical_rank(xi.coeff()).rank == xi.r0());
}

TEST_CASE("purification reconstructs 100 random faithful states") {
  for (int n : {2, 3, 4}) {
    const int trials = (n == 2) ? 34 : 33;
    for (int t = 0; t < trials; ++t) {
      const MarginalState omega =
          random_faithful(n, static_cast<std::uint64_t>(1000 * n + t));
      const Purification xi = purify(omega);
      REQUIRE(max_abs_diff(xi.marginal_matrix(), omega.density.matrix()) < 1e-10);
      const Vector v = xi.vector();
      REQUIRE(std::abs(v.norm() - 1.0) < 1e-12);
      REQUIRE(max_abs_diff(partial_trace(v * v.adjoint(), xi.r0(), n, Factor::First),
                           omega.density.matrix()) < 1e-10);
    }
  }
}

TEST_CASE("purify a rank-deficient state") {
  Matrix d = Matrix::Zero(3, 3);
  d(0, 0) = 0.7;
  d(1, 1) = 0.3;
  const MarginalState omega = MarginalState::from_density(DensityMatrix::from_matrix(d));
  REQUIRE_FALSE(omega.faithful);
  const Purification xi = purify(omega);
  REQUIRE(xi.r0() == 2);
  REQUIRE_FALSE(xi.faithful());
  const Vector v = xi.vector();
  REQUIRE(std::abs(v.norm() - 1.0) < 1e-12);
  REQUIRE(max_abs_diff(partial_trace(v * v.adjoint(), 2, 3, Factor::First), d) < 1e-10);
}

TEST_CASE("state_from_tuple basic cases") {
  const Purification xi = purify(maximally_mixed(2));

  IsometryTuple identity_tuple{2, 2, 1, {Matrix::Identity(2, 2)}};
  const DensityMatrix rho = state_from_tuple(identity_tuple, xi);
  const double s = 1.0 / std::sqrt(2.0);
  REQUIRE(max_abs_diff(rho.matrix(), unit_vector_matrix({s, 0, 0, s})) < 1e-14);
  REQUIRE(max_abs_diff(partial_trace(rho.matrix(), 2, 2, Factor::First),
                       0.5 * Matrix::Identity(2, 2)) < 1e-14);

  // parallel components give a pure state
  SeededRng rng(71, 0);
  const Matrix u = random_unitary(2, rng);
  IsometryTuple parallel{2, 2, 2, {u / std::sqrt(2.0), Complex(0, 1) * u / std::sqrt(2.0)}};
  REQUIRE(state_from_tuple(parallel, xi).rank() == 1);

  // non-faithful purifications are rejected
  Matrix d = Matrix::Zero(3, 3);
  d(0, 0) = 0.7;
  d(1, 1) = 0.3;
  const Purification bad = purify(MarginalState::from_density(DensityMatrix::from_matrix(d)));
  IsometryTuple v32{2, 3, 2, {}};
  REQUIRE_THROWS_AS(state_from_tuple(v32, bad), ValidationError);
}

TEST_CASE("state_from_tuple reproduces the marginal for random faithful omega") {
  const MarginalState omega = random_faithful(2, 8);
  const Purification xi = purify(omega);
  SeededRng rng(72, 0);
  const IsometryTuple v = sample_haar_tuple(2, 3, 2, rng);
  const DensityMatrix rho = state_from_tuple(v, xi);
  REQUIRE(max_abs_diff(partial_trace(rho.matrix(), 3, 2, Factor::First),
                       omega.density.matrix()) < 1e-10);
}

TEST_CASE("operator_from_vector inverts the vector map") {
  const MarginalState omega = random_faithful(3, 9);
  const Purification xi = purify(omega);
  SeededRng rng(73, 0);

  const Matrix w = rng.ginibre(4, 3);
  const Vector zeta = flatten_rowmajor(w * xi.coeff());
  REQUIRE(max_abs_diff(operator_from_vector(zeta, xi), w) < 1e-12);

  // fixed point: the purification itself maps to the identity
  const Purification ximm = purify(maximally_mixed(2));
  REQUIRE(max_abs_diff(operator_from_vector(ximm.vector(), ximm), Matrix::Identity(2, 2)) <
          1e-13);

  // product-vector content comes back as a rank-one operator
  Vector x = rng.ginibre_vector(4), eta = rng.ginibre_vector(3);
  Vector product(12);
  for (int i = 0; i < 4; ++i) {
    for (int b = 0; b < 3; ++b) product(3 * i + b) = x(i) * eta(b);
  }
  REQUIRE(numerical_rank(operator_from_vector(product, xi)).rank == 1);

  // linearity
  const Vector z1 = rng.ginibre_vector(12), z2 = rng.ginibre_vector(12);
  const Complex a(0.3, -1.1), b(2.0, 0.7);
  REQUIRE(max_abs_diff(operator_from_vector(a * z1 + b * z2, xi),
                       a * operator_from_vector(z1, xi) + b * operator_from_vector(z2, xi)) <
          1e-12);
}

TEST_CASE("tuple_from_state round trip and padding") {
  const MarginalState omega = random_faithful(2, 10);
  const Purification xi = purify(omega);
  SeededRng rng(74, 0);

  const IsometryTuple v = sample_haar_tuple(2, 3, 2, rng);
  const DensityMatrix rho = state_from_tuple(v, xi);
  const IsometryTuple v2 = tuple_from_state(rho, 2, xi);
  REQUIRE(max_abs_diff(state_from_tuple(v2, xi).matrix(), rho.matrix()) < 1e-8);
  REQUIRE(tuples_equivalent(v, v2));

  // pure state, r = 1
  const IsometryTuple pure = sample_haar_tuple(2, 2, 1, rng);
  const Purification ximm = purify(maximally_mixed(2));
  const DensityMatrix rho_pure = state_from_tuple(pure, ximm);
  const IsometryTuple back = tuple_from_state(rho_pure, 1, ximm);
  REQUIRE(back.r == 1);
  REQUIRE(back.isometry_defect() < 1e-8);

  // rank 2 written with r = 3: the padded component is zero
  const IsometryTuple v22 = sample_haar_tuple(2, 2, 2, rng);
  const DensityMatrix rho2 = state_from_tuple(v22, ximm);
  const IsometryTuple padded = tuple_from_state(rho2, 3, ximm);
  REQUIRE(padded.r == 3);
  REQUIRE(max_abs(padded.components[2]) < 1e-8);
  REQUIRE(padded.isometry_defect() < 1e-8);
  REQUIRE(max_abs_diff(state_from_tuple(padded, ximm).matrix(), rho2.matrix()) < 1e-8);

  // r below the rank is rejected
  REQUIRE_THROWS_AS(tuple_from_state(rho2, 1, ximm), ValidationError);

  // marginal mismatch beyond tolerance is rejected
  REQUIRE_THROWS_AS(tuple_from_state(rho2, 2, purify(random_faithful(2, 11))), ValidationError);
}

TEST_CASE("decomposition_unitary recovers mixing unitaries") {
  SeededRng rng(75, 0);

  // rotation of an orthonormal pair
  Vector e1 = Vector::Zero(3), e2 = Vector::Zero(3);
  e1(0) = 1.0;
  e2(1) = 1.0;
  const double theta = 0.37;
  std::vector<Vector> xs{e1, e2};
  std::vector<Vector> ys{std::cos(theta) * e1 + std::sin(theta) * e2,
                         -std::sin(theta) * e1 + std::cos(theta) * e2};
  Matrix lambda = decomposition_unitary(xs, ys);
  REQUIRE(unitary_defect(lambda) < 1e-10);
  for (int i = 0; i < 2; ++i) {
    Vector recon = Vector::Zero(3);
    for (int j = 0; j < 2; ++j) recon += lambda(i, j) * xs[j];
    REQUIRE(max_abs(Matrix(recon - ys[i])) < 1e-10);
  }

  // identical tuples: any returned unitary must fix the relation
  Matrix same = decomposition_unitary(xs, xs);
  for (int i = 0; i < 2; ++i) {
    Vector recon = Vector::Zero(3);
    for (int j = 0; j < 2; ++j) recon += same(i, j) * xs[j];
    REQUIRE(max_abs(Matrix(recon - xs[i])) < 1e-10);
  }

  // random family mixed by a Haar unitary
  std::vector<Vector> xis, etas;
  for (int k = 0; k < 3; ++k) xis.push_back(rng.ginibre_vector(4));
  const Matrix u = random_unitary(3, rng);
  for (int i = 0; i < 3; ++i) {
    Vector eta = Vector::Zero(4);
    for (int j = 0; j < 3; ++j) eta += u(i, j) * xis[j];
    etas.push_back(eta);
  }
  const Matrix recovered = decomposition_unitary(xis, etas);
  REQUIRE(unitary_defect(recovered) < 1e-9);
  for (int i = 0; i < 3; ++i) {
    Vector recon = Vector::Zero(4);
    for (int j = 0; j < 3; ++j) recon += recovered(i, j) * xis[j];
    REQUIRE(max_abs(Matrix(recon - etas[i])) < 1e-9);
  }

  // mismatched frame sums are rejected
  std::vector<Vector> scaled{1.1 * e1, e2};
  REQUIRE_THROWS_AS(decomposition_unitary(xs, scaled), ValidationError);
}

TEST_CASE("tuples_equivalent characterizes the scalar orbit") {
  SeededRng rng(76, 0);
  const IsometryTuple v = sample_haar_tuple(2, 3, 2, rng);
  REQUIRE(tuples_equivalent(v, v));

  const Matrix lambda = random_unitary(2, rng);
  REQUIRE(tuples_equivalent(v, act_left_scalar(lambda, v)));

  const Matrix u = random_unitary(2, rng);  // generically non-scalar
  REQUIRE_FALSE(tuples_equivalent(v, act_right(u, v)));
}

TEST_CASE("gauge invariance of the induced state") {
  SeededRng rng(77, 0);
  const Purification xi = purify(maximally_mixed(3));
  const IsometryTuple v = sample_haar_tuple(3, 3, 2, rng);
  const Matrix lambda = random_unitary(2, rng);
  REQUIRE(max_abs_diff(state_from_tuple(act_left_scalar(lambda, v), xi).matrix(),
                       state_from_tuple(v, xi).matrix()) < 1e-10);
}

TEST_CASE("state rank equals tuple rank") {
  SeededRng rng(78, 0);
  const std::vector<std::array<int, 3>> shapes{{2, 2, 1}, {2, 2, 2}, {2, 3, 2}, {3, 3, 4}};
  for (const auto& [n, m, r] : shapes) {
    const Purification xi = purify(maximally_mixed(n));
    for (int trial = 0; trial < 5; ++trial) {
      const IsometryTuple v = sample_haar_tuple(n, m, r, rng);
      REQUIRE(state_from_tuple(v, xi).rank() == tuple_rank(v));
    }
  }
}

TEST_CASE("support containment for extensions of a rank-deficient marginal") {
  // omega has rank 2 inside C^3; every extension built over its purification
  // is supported in C^m (x) supp(omega).
  Matrix d = Matrix::Zero(3, 3);
  d(0, 0) = 0.6;
  d(1, 1) = 0.4;
  const MarginalState omega = MarginalState::from_density(DensityMatrix::from_matrix(d));
  const Purification xi = purify(omega);
  REQUIRE(xi.r0() == 2);

  SeededRng rng(79, 0);
  const int m = 3;
  const IsometryTuple v = sample_haar_tuple(xi.r0(), m, 2, rng);  // operators C^{r0} -> C^m
  Matrix rho = Matrix::Zero(3 * m, 3 * m);
  for (const Matrix& comp : v.components) {
    const Vector zeta = kron(comp, Matrix::Identity(3, 3)) * xi.vector();
    rho += zeta * zeta.adjoint();
  }
  REQUIRE(std::abs(rho.trace().real() - 1.0) < 1e-12);
  const Matrix support = xi.basis() * xi.basis().adjoint();  // projector onto supp(omega)
  const Matrix outside = kron(Matrix::Identity(m, m), Matrix::Identity(3, 3) - support);
  REQUIRE(max_abs(outside * rho) < 1e-10);
}
