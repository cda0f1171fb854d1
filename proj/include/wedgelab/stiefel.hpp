#pragma once

#include <string>
#include <vector>

#include "wedgelab/rng.hpp"
#include "wedgelab/tensor.hpp"
#include "wedgelab/types.hpp"

// The space of r-tuples v = (v_1, ..., v_r) of m x n matrices with
// v_1* v_1 + ... + v_r* v_r = 1_n, its invariant-measure sampler, and the
// left U(rm) / right U(n) group actions. Stacking the components gives an
// isometry from C^n into r copies of C^m, hence the name.

namespace wedgelab {

struct IsometryTuple {
  int n = 0;  // domain dimension
  int m = 0;  // codomain dimension per component
  int r = 0;  // number of components
  std::vector<Matrix> components;  // r matrices, each m x n

  /// The (rm) x n matrix obtained by stacking the components.
  Matrix stacked() const {
    Matrix q(static_cast<Eigen::Index>(r) * m, n);
    for (int k = 0; k < r; ++k) {
      q.block(static_cast<Eigen::Index>(k) * m, 0, m, n) = components[static_cast<std::size_t>(k)];
    }
    return q;
  }

  /// r x (mn) matrix whose k-th row is the row-major flattening of v_k.
  Matrix flattened_rows() const {
    Matrix f(r, static_cast<Eigen::Index>(m) * n);
    for (int k = 0; k < r; ++k) {
      const Matrix& c = components[static_cast<std::size_t>(k)];
      for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) f(k, static_cast<Eigen::Index>(i) * n + j) = c(i, j);
      }
    }
    return f;
  }

  std::vector<Matrix> adjoints() const {
    std::vector<Matrix> out;
    out.reserve(components.size());
    for (const Matrix& c : components) out.push_back(c.adjoint());
    return out;
  }

  /// Max entry deviation of sum v_k* v_k from the identity.
  double isometry_defect() const {
    Matrix gram = Matrix::Zero(n, n);
    for (const Matrix& c : components) gram += c.adjoint() * c;
    return max_abs(gram - Matrix::Identity(n, n));
  }

  void validate(double t = tol::kIsometry) const {
    require(n >= 1 && m >= 1 && r >= 1, "isometry tuple: dimensions must be positive");
    require(static_cast<int>(components.size()) == r,
            "isometry tuple: expected " + std::to_string(r) + " components");
    for (const Matrix& c : components) {
      require(c.rows() == m && c.cols() == n, "isometry tuple: component shape mismatch");
      require(entries_finite(c), "isometry tuple: non-finite entries");
    }
    const double defect = isometry_defect();
    if (defect > t) {
      throw ValidationError("isometry tuple: sum v_k* v_k deviates from 1 by " +
                            std::to_string(defect));
    }
  }
};

/// Draws from the unique left-U(rm)-invariant probability measure: an
/// rm x n matrix G of i.i.d. complex Gaussians is mapped to its polar
/// isometry Q = G (G*G)^{-1/2} and split into r stacked m x n blocks.
/// The polar factor is equivariant, polar(U G) = U polar(G), so invariance
/// holds exactly by construction.
inline IsometryTuple sample_haar_tuple(int n, int m, int r, SeededRng& rng) {
  require(n >= 1 && m >= 1 && r >= 1, "sample_haar_tuple: dimensions must be positive");
  require(static_cast<long>(r) * m >= n, "sample_haar_tuple: requires r*m >= n");
  for (int attempt = 0; attempt < 3; ++attempt) {
    const Matrix g = rng.ginibre(r * m, n);
    Eigen::JacobiSVD<Matrix> svd(g, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success) continue;
    const auto& sv = svd.singularValues();
    if (sv(n - 1) <= 1e-12 * sv(0)) continue;  // numerically singular Gram, redraw
    const Matrix q = svd.matrixU() * svd.matrixV().adjoint();
    IsometryTuple v{n, m, r, {}};
    v.components.reserve(static_cast<std::size_t>(r));
    for (int k = 0; k < r; ++k) {
      v.components.push_back(q.block(static_cast<Eigen::Index>(k) * m, 0, m, n));
    }
    return v;
  }
  throw NumericalError("sample_haar_tuple: Gaussian draws were numerically singular three times");
}

/// Left action of w in U(rm), read as an r x r matrix of m x m blocks:
/// v'_i = sum_j w_ij v_j.
inline IsometryTuple act_left(const Matrix& w, const IsometryTuple& v) {
  require(w.rows() == Eigen::Index(v.r) * v.m && w.cols() == w.rows(),
          "act_left: unitary must be (r*m) x (r*m)");
  if (!is_unitary(w)) throw ValidationError("act_left: matrix is not unitary");
  IsometryTuple out{v.n, v.m, v.r, {}};
  out.components.reserve(static_cast<std::size_t>(v.r));
  for (int i = 0; i < v.r; ++i) {
    Matrix acc = Matrix::Zero(v.m, v.n);
    for (int j = 0; j < v.r; ++j) {
      acc.noalias() += w.block(Eigen::Index(i) * v.m, Eigen::Index(j) * v.m, v.m, v.m) *
                       v.components[static_cast<std::size_t>(j)];
    }
    out.components.push_back(std::move(acc));
  }
  return out;
}

/// Left action of a scalar unitary in U(r), acting by lambda_ij * 1_m blocks.
inline IsometryTuple act_left_scalar(const Matrix& lambda, const IsometryTuple& v) {
  require(lambda.rows() == v.r && lambda.cols() == v.r,
          "act_left_scalar: unitary must be r x r");
  if (!is_unitary(lambda)) throw ValidationError("act_left_scalar: matrix is not unitary");
  IsometryTuple out{v.n, v.m, v.r, {}};
  out.components.reserve(static_cast<std::size_t>(v.r));
  for (int i = 0; i < v.r; ++i) {
    Matrix acc = Matrix::Zero(v.m, v.n);
    for (int j = 0; j < v.r; ++j) acc += lambda(i, j) * v.components[static_cast<std::size_t>(j)];
    out.components.push_back(std::move(acc));
  }
  return out;
}

/// Right action of u in U(n): (v_1 u, ..., v_r u).
inline IsometryTuple act_right(const Matrix& u, const IsometryTuple& v) {
  require(u.rows() == v.n && u.cols() == v.n, "act_right: unitary must be n x n");
  if (!is_unitary(u)) throw ValidationError("act_right: matrix is not unitary");
  IsometryTuple out{v.n, v.m, v.r, {}};
  out.components.reserve(static_cast<std::size_t>(v.r));
  for (const Matrix& c : v.components) out.components.push_back(c * u);
  return out;
}

/// dim span{v_1, ..., v_r}, computed as the numerical rank of the r x (mn)
/// matrix of flattened components.
inline int tuple_rank(const IsometryTuple& v, double rel_tol = tol::kRank) {
  return numerical_rank(v.flattened_rows(), rel_tol).rank;
}

/// Haar-distributed d x d unitary: Ginibre + QR with the R-diagonal phase fix.
inline Matrix random_unitary(int d, SeededRng& rng) {
  require(d >= 1, "random_unitary: dimension must be positive");
  const Matrix g = rng.ginibre(d, d);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(d, d);
  const Matrix& packed = qr.matrixQR();
  for (int i = 0; i < d; ++i) {
    const Complex rii = packed(i, i);
    const double mag = std::abs(rii);
    q.col(i) *= (mag > 0.0) ? rii / mag : Complex(1.0, 0.0);
  }
  return q;
}

}  // namespace wedgelab
