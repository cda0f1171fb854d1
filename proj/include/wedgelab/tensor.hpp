#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

#include "wedgelab/types.hpp"

// Dense tensor-power primitives: Kronecker products, symmetric and
// antisymmetric subspace bases, numerical rank, partial trace and
// partial transpose.
//
// Index convention, used everywhere in this library: the basis of a
// tensor product K (x) H is ordered with the K index slow, i.e. the
// flat index of e_i (x) e_j is i*dim(H) + j.

namespace wedgelab {

inline std::size_t binomial(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::size_t result = 1;
  for (int i = 1; i <= k; ++i) {
    result = result * static_cast<std::size_t>(n - k + i) /
             static_cast<std::size_t>(i);
  }
  return result;
}

inline double factorial(int r) {
  double f = 1.0;
  for (int i = 2; i <= r; ++i) f *= i;
  return f;
}

/// d^r, throwing ResourceError once the running product exceeds `budget`.
inline std::size_t checked_power(int d, int r, std::size_t budget) {
  std::size_t acc = 1;
  for (int i = 0; i < r; ++i) {
    if (d > 0 && acc > budget / static_cast<std::size_t>(d)) {
      throw ResourceError("tensor power " + std::to_string(d) + "^" +
                          std::to_string(r) + " exceeds the element budget");
    }
    acc *= static_cast<std::size_t>(d);
  }
  return acc;
}

inline void check_tensor_order(int r) {
  if (r > kMaxTensorPower) {
    throw ResourceError("tensor power order " + std::to_string(r) +
                        " exceeds the hard limit " +
                        std::to_string(kMaxTensorPower));
  }
}

/// Kronecker product with the first factor slow.
inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

/// Visits every permutation of {0,...,r-1} together with its sign.
/// Heap's algorithm: successive permutations differ by one transposition,
/// so the sign just alternates.
template <typename Visitor>
void for_each_permutation(int r, Visitor&& visit) {
  std::vector<int> perm(static_cast<std::size_t>(r));
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<int> c(static_cast<std::size_t>(r), 0);
  int sign = 1;
  visit(static_cast<const std::vector<int>&>(perm), sign);
  int i = 1;
  while (i < r) {
    if (c[static_cast<std::size_t>(i)] < i) {
      if (i % 2 == 0) {
        std::swap(perm[0], perm[static_cast<std::size_t>(i)]);
      } else {
        std::swap(perm[static_cast<std::size_t>(c[static_cast<std::size_t>(i)])],
                  perm[static_cast<std::size_t>(i)]);
      }
      sign = -sign;
      visit(static_cast<const std::vector<int>&>(perm), sign);
      ++c[static_cast<std::size_t>(i)];
      i = 1;
    } else {
      c[static_cast<std::size_t>(i)] = 0;
      ++i;
    }
  }
}

/// Multi-indices (i_1 <= ... <= i_r) over {0,...,d-1} in lexicographic order.
inline std::vector<std::vector<int>> nondecreasing_indices(int d, int r) {
  std::vector<std::vector<int>> out;
  if (d <= 0 || r <= 0) return out;
  std::vector<int> idx(static_cast<std::size_t>(r), 0);
  while (true) {
    out.push_back(idx);
    int t = r - 1;
    while (t >= 0 && idx[static_cast<std::size_t>(t)] == d - 1) --t;
    if (t < 0) break;
    const int next = idx[static_cast<std::size_t>(t)] + 1;
    for (int s = t; s < r; ++s) idx[static_cast<std::size_t>(s)] = next;
  }
  return out;
}

/// Multi-indices (i_1 < ... < i_r) over {0,...,d-1} in lexicographic order.
inline std::vector<std::vector<int>> increasing_indices(int d, int r) {
  std::vector<std::vector<int>> out;
  if (r > d || r <= 0) return out;
  std::vector<int> idx(static_cast<std::size_t>(r));
  std::iota(idx.begin(), idx.end(), 0);
  while (true) {
    out.push_back(idx);
    int t = r - 1;
    while (t >= 0 && idx[static_cast<std::size_t>(t)] == d - r + t) --t;
    if (t < 0) break;
    ++idx[static_cast<std::size_t>(t)];
    for (int s = t + 1; s < r; ++s) {
      idx[static_cast<std::size_t>(s)] = idx[static_cast<std::size_t>(s - 1)] + 1;
    }
  }
  return out;
}

inline Eigen::Index flat_index(const std::vector<int>& digits, int d) {
  Eigen::Index idx = 0;
  for (int v : digits) idx = idx * d + v;
  return idx;
}

/// The unitary U_pi permuting the factors of (C^d)^{(x)r},
/// U_pi (x_1 (x) ... (x) x_r) = x_{pi^-1(1)} (x) ... (x) x_{pi^-1(r)}.
inline Matrix permutation_operator(int d, const std::vector<int>& perm,
                                   std::size_t budget = kElementBudget) {
  const int r = static_cast<int>(perm.size());
  check_tensor_order(r);
  const std::size_t dim = checked_power(d, r, budget);
  if (dim > 0 && dim > budget / dim) {
    throw ResourceError("permutation operator exceeds the element budget");
  }
  std::vector<int> inverse(perm.size());
  for (int t = 0; t < r; ++t) inverse[static_cast<std::size_t>(perm[static_cast<std::size_t>(t)])] = t;
  Matrix u = Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  std::vector<int> in(static_cast<std::size_t>(r), 0), out(static_cast<std::size_t>(r), 0);
  for (std::size_t col = 0; col < dim; ++col) {
    std::size_t rest = col;
    for (int t = r - 1; t >= 0; --t) {
      in[static_cast<std::size_t>(t)] = static_cast<int>(rest % static_cast<std::size_t>(d));
      rest /= static_cast<std::size_t>(d);
    }
    for (int t = 0; t < r; ++t) out[static_cast<std::size_t>(t)] = in[static_cast<std::size_t>(inverse[static_cast<std::size_t>(t)])];
    u(flat_index(out, d), static_cast<Eigen::Index>(col)) = 1.0;
  }
  return u;
}

namespace detail {

inline void check_basis_args(int d, int r, std::size_t width, std::size_t budget) {
  require(d >= 1 && r >= 1, "subspace basis needs d >= 1 and r >= 1");
  check_tensor_order(r);
  const std::size_t dim = checked_power(d, r, budget);
  if (width > 0 && dim > budget / width) {
    throw ResourceError("subspace basis of " + std::to_string(dim) + "x" +
                        std::to_string(width) + " exceeds the element budget");
  }
}

}  // namespace detail

/// Orthonormal basis of the symmetric subspace of (C^d)^{(x)r} as a
/// d^r x C(d+r-1, r) matrix. Columns are the normalized symmetrizations of
/// e_{i_1} (x) ... (x) e_{i_r} over nondecreasing multi-indices in
/// lexicographic order.
inline Matrix sym_basis(int d, int r, std::size_t budget = kElementBudget) {
  const auto cols = nondecreasing_indices(d, r);
  detail::check_basis_args(d, r, cols.size(), budget);
  const auto dim = static_cast<Eigen::Index>(checked_power(d, r, budget));
  Matrix basis = Matrix::Zero(dim, static_cast<Eigen::Index>(cols.size()));
  std::vector<int> arranged(static_cast<std::size_t>(r));
  for (std::size_t c = 0; c < cols.size(); ++c) {
    const auto& index = cols[c];
    for_each_permutation(r, [&](const std::vector<int>& perm, int) {
      for (int t = 0; t < r; ++t) arranged[static_cast<std::size_t>(t)] = index[static_cast<std::size_t>(perm[static_cast<std::size_t>(t)])];
      basis(flat_index(arranged, d), static_cast<Eigen::Index>(c)) += 1.0;
    });
    basis.col(static_cast<Eigen::Index>(c)).normalize();
  }
  return basis;
}

/// Orthonormal basis of the antisymmetric subspace of (C^d)^{(x)r} as a
/// d^r x C(d, r) matrix (zero columns when r > d). Columns are the
/// normalized alternations over strictly increasing multi-indices.
inline Matrix antisym_basis(int d, int r, std::size_t budget = kElementBudget) {
  const auto cols = increasing_indices(d, r);
  detail::check_basis_args(d, r, cols.size(), budget);
  const auto dim = static_cast<Eigen::Index>(checked_power(d, r, budget));
  Matrix basis = Matrix::Zero(dim, static_cast<Eigen::Index>(cols.size()));
  std::vector<int> arranged(static_cast<std::size_t>(r));
  const double scale = 1.0 / std::sqrt(factorial(r));
  for (std::size_t c = 0; c < cols.size(); ++c) {
    const auto& index = cols[c];
    for_each_permutation(r, [&](const std::vector<int>& perm, int sign) {
      for (int t = 0; t < r; ++t) arranged[static_cast<std::size_t>(t)] = index[static_cast<std::size_t>(perm[static_cast<std::size_t>(t)])];
      basis(flat_index(arranged, d), static_cast<Eigen::Index>(c)) += sign;
    });
    basis.col(static_cast<Eigen::Index>(c)) *= scale;
  }
  return basis;
}

struct RankResult {
  int rank = 0;
  std::vector<double> singular_values;  // descending
};

/// Numerical rank: the number of singular values above rel_tol * sigma_max.
inline RankResult numerical_rank(const Matrix& a, double rel_tol = tol::kRank) {
  require(rel_tol >= 0.0, "numerical_rank: rel_tol must be nonnegative");
  if (a.rows() == 0 || a.cols() == 0) return {};
  Eigen::JacobiSVD<Matrix> svd(a);
  if (svd.info() != Eigen::Success) {
    throw NumericalError("SVD did not converge");
  }
  RankResult result;
  result.singular_values.assign(svd.singularValues().data(),
                                svd.singularValues().data() + svd.singularValues().size());
  const double sigma_max = result.singular_values.empty() ? 0.0 : result.singular_values.front();
  if (sigma_max > 0.0) {
    for (double s : result.singular_values) {
      if (s > rel_tol * sigma_max) ++result.rank;
    }
  }
  return result;
}

/// Which tensor factor of K (x) H gets traced out.
enum class Factor { First, Second };

/// Partial trace of an (mn)x(mn) matrix on K (x) H, with dim K = m slow and
/// dim H = n fast. Tracing out the first factor yields the n x n marginal,
/// tracing out the second the m x m one.
inline Matrix partial_trace(const Matrix& a, int m, int n, Factor traced) {
  require(m >= 1 && n >= 1, "partial_trace: dimensions must be positive");
  require(a.rows() == Eigen::Index(m) * n && a.cols() == a.rows(),
          "partial_trace: matrix must be (m*n) x (m*n)");
  if (traced == Factor::First) {
    Matrix out = Matrix::Zero(n, n);
    for (int i = 0; i < m; ++i) {
      out += a.block(Eigen::Index(i) * n, Eigen::Index(i) * n, n, n);
    }
    return out;
  }
  Matrix out = Matrix::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    for (int k = 0; k < m; ++k) {
      Complex sum = 0.0;
      for (int j = 0; j < n; ++j) {
        sum += a(Eigen::Index(i) * n + j, Eigen::Index(k) * n + j);
      }
      out(i, k) = sum;
    }
  }
  return out;
}

/// Transpose of the H factor: out[(i,j),(k,l)] = a[(i,l),(k,j)].
inline Matrix partial_transpose(const Matrix& a, int m, int n) {
  require(m >= 1 && n >= 1, "partial_transpose: dimensions must be positive");
  require(a.rows() == Eigen::Index(m) * n && a.cols() == a.rows(),
          "partial_transpose: matrix must be (m*n) x (m*n)");
  Matrix out(a.rows(), a.cols());
  for (int i = 0; i < m; ++i) {
    for (int k = 0; k < m; ++k) {
      out.block(Eigen::Index(i) * n, Eigen::Index(k) * n, n, n) =
          a.block(Eigen::Index(i) * n, Eigen::Index(k) * n, n, n).transpose();
    }
  }
  return out;
}

}  // namespace wedgelab
