#pragma once

#include <utility>
#include <vector>

#include "wedgelab/stiefel.hpp"
#include "wedgelab/tensor.hpp"
#include "wedgelab/types.hpp"

// Density matrices, marginals, purification, the map from isometry tuples to
// states with a prescribed marginal, and its inverses.

namespace wedgelab {

namespace detail {

/// Rebuilds the basis of a (near-)degenerate eigenvalue cluster from the
/// projections of the standard basis vectors, in order, via Gram-Schmidt.
/// This makes the eigenbasis a deterministic function of the input matrix;
/// in particular, eigenspaces spanned by standard basis vectors come out as
/// exactly those vectors.
inline void canonicalize_cluster(Matrix& vectors, Eigen::Index begin, Eigen::Index end) {
  const Eigen::Index d = vectors.rows();
  const Eigen::Index size = end - begin;
  const Matrix cluster = vectors.middleCols(begin, size);
  Matrix rebuilt(d, size);
  Eigen::Index have = 0;
  for (Eigen::Index j = 0; j < d && have < size; ++j) {
    Vector candidate = cluster * (cluster.adjoint() * Vector::Unit(d, j));
    for (Eigen::Index k = 0; k < have; ++k) {
      candidate -= (rebuilt.col(k).adjoint() * candidate).value() * rebuilt.col(k);
    }
    const double norm = candidate.norm();
    if (norm > 1e-8) rebuilt.col(have++) = candidate / norm;
  }
  if (have == size) vectors.middleCols(begin, size) = rebuilt;
}

}  // namespace detail

/// Eigendecomposition of a Hermitian matrix with eigenvalues descending and
/// a deterministic convention: numerically degenerate clusters (gap below
/// 1e-10) are re-orthonormalized from standard-basis projections, and each
/// eigenvector is scaled so that its first component of magnitude > 1e-12 is
/// real positive.
inline std::pair<RealVector, Matrix> canonical_eigensystem(const Matrix& hermitian) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitian);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("eigendecomposition did not converge");
  }
  const Eigen::Index d = hermitian.rows();
  RealVector values(d);
  Matrix vectors(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    values(i) = solver.eigenvalues()(d - 1 - i);
    vectors.col(i) = solver.eigenvectors().col(d - 1 - i);
  }
  Eigen::Index begin = 0;
  for (Eigen::Index i = 1; i <= d; ++i) {
    if (i == d || values(i - 1) - values(i) >= 1e-10) {
      if (i - begin > 1) detail::canonicalize_cluster(vectors, begin, i);
      begin = i;
    }
  }
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      const Complex z = vectors(j, i);
      if (std::abs(z) > 1e-12) {
        vectors.col(i) *= std::conj(z) / std::abs(z);
        break;
      }
    }
  }
  return {std::move(values), std::move(vectors)};
}

/// Hermitian, positive semidefinite, trace-one matrix with its
/// eigendecomposition cached at construction.
class DensityMatrix {
 public:
  static DensityMatrix from_matrix(const Matrix& a) {
    require(a.rows() == a.cols() && a.rows() >= 1, "density matrix must be square");
    require(entries_finite(a), "density matrix has non-finite entries");
    if (hermitian_defect(a) > tol::kHermitian) {
      throw ValidationError("density matrix is not Hermitian within tolerance");
    }
    const Matrix hermitized = 0.5 * (a + a.adjoint());
    auto [values, vectors] = canonical_eigensystem(hermitized);
    if (values(values.size() - 1) < -tol::kPsd) {
      throw ValidationError("density matrix has eigenvalue " +
                            std::to_string(values(values.size() - 1)));
    }
    if (std::abs(values.sum() - 1.0) > tol::kTrace) {
      throw ValidationError("density matrix trace deviates from 1 by " +
                            std::to_string(std::abs(values.sum() - 1.0)));
    }
    return DensityMatrix(a, std::move(values), std::move(vectors));
  }

  int dim() const { return static_cast<int>(matrix_.rows()); }
  const Matrix& matrix() const { return matrix_; }
  const RealVector& eigenvalues() const { return eigenvalues_; }
  const Matrix& eigenvectors() const { return eigenvectors_; }

  double min_eigenvalue() const { return eigenvalues_(eigenvalues_.size() - 1); }

  double purity() const { return eigenvalues_.squaredNorm(); }

  /// Number of eigenvalues above rel_tol times the largest one.
  int rank(double rel_tol = tol::kRank) const {
    const double top = eigenvalues_(0);
    if (top <= 0.0) return 0;
    int count = 0;
    for (Eigen::Index i = 0; i < eigenvalues_.size(); ++i) {
      if (eigenvalues_(i) > rel_tol * top) ++count;
    }
    return count;
  }

 private:
  DensityMatrix(Matrix matrix, RealVector values, Matrix vectors)
      : matrix_(std::move(matrix)),
        eigenvalues_(std::move(values)),
        eigenvectors_(std::move(vectors)) {}

  Matrix matrix_;
  RealVector eigenvalues_;
  Matrix eigenvectors_;
};

/// A state on the n-dimensional factor, flagged faithful when every
/// eigenvalue exceeds the faithfulness threshold.
struct MarginalState {
  DensityMatrix density;
  bool faithful = false;

  int n() const { return density.dim(); }

  static MarginalState from_density(DensityMatrix d) {
    const bool faithful = d.min_eigenvalue() > tol::kFaithful;
    return MarginalState{std::move(d), faithful};
  }
};

inline MarginalState maximally_mixed(int n) {
  require(n >= 1, "maximally mixed state needs n >= 1");
  return MarginalState::from_density(
      DensityMatrix::from_matrix(Matrix::Identity(n, n) / static_cast<double>(n)));
}

/// Unit vector xi in C^{r0} (x) C^n with <(1 (x) b) xi, xi> = omega(b).
/// Stored through its r0 x n coefficient matrix: xi[a*n + b] = coeff(a, b).
class Purification {
 public:
  Purification(int r0, int n, Matrix coeff, Matrix basis, RealVector lambda)
      : r0_(r0),
        n_(n),
        coeff_(std::move(coeff)),
        basis_(std::move(basis)),
        lambda_(std::move(lambda)) {
    if (r0_ == n_) {
      // coeff = D^{1/2} U^T, so coeff^{-1} = conj(U) D^{-1/2}.
      coeff_inverse_ = Matrix(n_, n_);
      for (int a = 0; a < n_; ++a) {
        coeff_inverse_.col(a) = basis_.col(a).conjugate() / std::sqrt(lambda_(a));
      }
    }
  }

  int r0() const { return r0_; }
  int n() const { return n_; }
  bool faithful() const { return r0_ == n_; }

  /// The r0 x n coefficient matrix of the vector (first factor indexes rows).
  const Matrix& coeff() const { return coeff_; }

  const Matrix& coeff_inverse() const {
    require(faithful(), "purification of a non-faithful state has no coefficient inverse");
    return coeff_inverse_;
  }

  /// The eigenbasis convention used to build the vector.
  const Matrix& basis() const { return basis_; }
  const RealVector& lambda() const { return lambda_; }

  Vector vector() const {
    Vector v(static_cast<Eigen::Index>(r0_) * n_);
    for (int a = 0; a < r0_; ++a) {
      for (int b = 0; b < n_; ++b) v(static_cast<Eigen::Index>(a) * n_ + b) = coeff_(a, b);
    }
    return v;
  }

  /// Reconstructs the purified state.
  Matrix marginal_matrix() const { return coeff_.transpose() * coeff_.conjugate(); }

 private:
  int r0_;
  int n_;
  Matrix coeff_;
  Matrix basis_;
  RealVector lambda_;
  Matrix coeff_inverse_;
};

/// xi = sum_i sqrt(lambda_i) e_i' (x) e_i over the strictly positive
/// eigenvalues of omega, with e_i the canonicalized eigenvectors and e_i'
/// the standard basis of C^{r0}.
inline Purification purify(const MarginalState& omega) {
  const auto& dm = omega.density;
  const int n = dm.dim();
  int r0 = 0;
  for (Eigen::Index i = 0; i < dm.eigenvalues().size(); ++i) {
    if (dm.eigenvalues()(i) > tol::kFaithful) ++r0;
  }
  require(r0 >= 1, "purify: state has no positive eigenvalues");
  Matrix coeff(r0, n);
  Matrix basis(n, r0);
  RealVector lambda(r0);
  for (int a = 0; a < r0; ++a) {
    lambda(a) = dm.eigenvalues()(a);
    basis.col(a) = dm.eigenvectors().col(a);
    coeff.row(a) = std::sqrt(lambda(a)) * basis.col(a).transpose();
  }
  return Purification(r0, n, std::move(coeff), std::move(basis), std::move(lambda));
}

/// The state rho_v = sum_k zeta_k zeta_k* with zeta_k = (v_k (x) 1) xi.
/// Its marginal on the second factor reproduces the purified state.
inline DensityMatrix state_from_tuple(const IsometryTuple& v, const Purification& xi) {
  require(xi.faithful(), "state_from_tuple: purification must be faithful (r0 = n)");
  require(v.n == xi.n(), "state_from_tuple: tuple domain does not match the purification");
  const Eigen::Index dim = static_cast<Eigen::Index>(v.m) * v.n;
  Matrix rho = Matrix::Zero(dim, dim);
  for (const Matrix& component : v.components) {
    const Matrix z = component * xi.coeff();  // m x n coefficient matrix of zeta_k
    Vector zeta(dim);
    for (int i = 0; i < v.m; ++i) {
      for (int b = 0; b < v.n; ++b) zeta(static_cast<Eigen::Index>(i) * v.n + b) = z(i, b);
    }
    rho.noalias() += zeta * zeta.adjoint();
  }
  return DensityMatrix::from_matrix(rho);
}

/// The unique v with (v (x) 1) xi = zeta; expanding zeta in the purification
/// eigenbasis, v e_j' = c_j / sqrt(lambda_j).
inline Matrix operator_from_vector(const Vector& zeta, const Purification& xi) {
  require(xi.faithful(), "operator_from_vector: purification must be faithful");
  const int n = xi.n();
  require(zeta.size() % n == 0, "operator_from_vector: vector length is not a multiple of n");
  const int m = static_cast<int>(zeta.size() / n);
  require(m >= 1, "operator_from_vector: empty vector");
  Matrix z(m, n);
  for (int i = 0; i < m; ++i) {
    for (int b = 0; b < n; ++b) z(i, b) = zeta(static_cast<Eigen::Index>(i) * n + b);
  }
  return z * xi.coeff_inverse();
}

/// Writes rho = sum_{k=1}^r zeta_k zeta_k* with scaled eigenvectors, padded
/// with zero components up to r terms, and maps each zeta_k back to an
/// operator. The result satisfies sum v_k* v_k = 1 and reproduces rho.
inline IsometryTuple tuple_from_state(const DensityMatrix& rho, int r, const Purification& xi,
                                      double marginal_tol = 1e-8) {
  require(xi.faithful(), "tuple_from_state: purification must be faithful");
  const int n = xi.n();
  require(rho.dim() % n == 0, "tuple_from_state: state dimension is not a multiple of n");
  const int m = rho.dim() / n;
  const Matrix marginal = partial_trace(rho.matrix(), m, n, Factor::First);
  const double deviation = max_abs_diff(marginal, xi.marginal_matrix());
  if (deviation > marginal_tol) {
    throw ValidationError("tuple_from_state: marginal deviates from omega by " +
                          std::to_string(deviation));
  }
  const int rank = rho.rank();
  require(r >= rank, "tuple_from_state: r must be at least rank(rho)");
  IsometryTuple out{n, m, r, {}};
  out.components.reserve(static_cast<std::size_t>(r));
  for (int k = 0; k < r; ++k) {
    if (k < rank) {
      const Vector zeta = std::sqrt(rho.eigenvalues()(k)) * rho.eigenvectors().col(k);
      out.components.push_back(operator_from_vector(zeta, xi));
    } else {
      out.components.push_back(Matrix::Zero(m, n));
    }
  }
  out.validate(1e-8);
  return out;
}

namespace detail {

/// Extends the orthonormal columns of `partial` (d x k) to a full
/// orthonormal basis of C^d, deterministically, via Gram-Schmidt over the
/// standard basis.
inline Matrix complete_orthonormal(const Matrix& partial) {
  const Eigen::Index d = partial.rows();
  Matrix full(d, d);
  Eigen::Index have = partial.cols();
  full.leftCols(have) = partial;
  for (Eigen::Index e = 0; e < d && have < d; ++e) {
    Vector candidate = Vector::Zero(d);
    candidate(e) = 1.0;
    for (Eigen::Index j = 0; j < have; ++j) {
      candidate -= (full.col(j).adjoint() * candidate).value() * full.col(j);
    }
    const double norm = candidate.norm();
    if (norm > 1e-8) {
      full.col(have++) = candidate / norm;
    }
  }
  require(have == d, "orthonormal completion failed");
  return full;
}

}  // namespace detail

/// Given two r-tuples of vectors with equal frame sums
/// sum xi_k xi_k* = sum eta_k eta_k*, returns a unitary r x r matrix lambda
/// with eta_i = sum_j lambda_ij xi_j. Built from the partial isometry that
/// intertwines the frame operators, extended to a unitary.
inline Matrix decomposition_unitary(const std::vector<Vector>& xi_list,
                                    const std::vector<Vector>& eta_list,
                                    double gram_tol = 1e-8) {
  const int r = static_cast<int>(xi_list.size());
  require(r >= 1 && eta_list.size() == xi_list.size(),
          "decomposition_unitary: tuples must have equal positive length");
  const Eigen::Index d = xi_list.front().size();
  Matrix a(d, r), b(d, r);
  for (int k = 0; k < r; ++k) {
    require(xi_list[static_cast<std::size_t>(k)].size() == d &&
                eta_list[static_cast<std::size_t>(k)].size() == d,
            "decomposition_unitary: vector dimension mismatch");
    a.col(k) = xi_list[static_cast<std::size_t>(k)];
    b.col(k) = eta_list[static_cast<std::size_t>(k)];
  }
  const double mismatch = max_abs(a * a.adjoint() - b * b.adjoint());
  if (mismatch > gram_tol) {
    throw ValidationError("decomposition_unitary: frame sums differ by " +
                          std::to_string(mismatch));
  }
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) throw NumericalError("decomposition_unitary: SVD failed");
  const auto& sigma = svd.singularValues();
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    if (sigma(i) > tol::kRank * sigma(0)) ++k;
  }
  Matrix v1 = svd.matrixV().leftCols(k);
  Matrix q1(r, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    q1.col(i) = b.adjoint() * svd.matrixU().col(i) / sigma(i);
    for (Eigen::Index j = 0; j < i; ++j) {
      q1.col(i) -= (q1.col(j).adjoint() * q1.col(i)).value() * q1.col(j);
    }
    q1.col(i).normalize();
  }
  const Matrix v_full = detail::complete_orthonormal(v1);
  const Matrix q_full = detail::complete_orthonormal(q1);
  const Matrix w = q_full * v_full.adjoint();  // maps range(A*) onto range(B*)
  return w.conjugate();                        // eta_i = sum_j lambda_ij xi_j
}

/// True iff both tuples induce the same state over the canonical
/// maximally-mixed purification; equivalently, iff they lie on one U(r) orbit.
inline bool tuples_equivalent(const IsometryTuple& v, const IsometryTuple& w,
                              double t = 1e-8) {
  require(v.n == w.n && v.m == w.m && v.r == w.r, "tuples_equivalent: shape mismatch");
  const Purification xi = purify(maximally_mixed(v.n));
  const DensityMatrix a = state_from_tuple(v, xi);
  const DensityMatrix b = state_from_tuple(w, xi);
  return max_abs_diff(a.matrix(), b.matrix()) <= t;
}

}  // namespace wedgelab
