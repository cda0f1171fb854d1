#pragma once

#include <string>
#include <vector>

#include "wedgelab/stiefel.hpp"
#include "wedgelab/tensor.hpp"
#include "wedgelab/types.hpp"

// The alternating average v_1 ^ ... ^ v_r of an operator tuple, its
// restriction to the symmetric subspace, and the resulting pair of rank
// invariants (w, w*). Separable states satisfy w <= 1 and w* <= 1, so a
// value of 2 or more certifies entanglement.

namespace wedgelab {

/// Flop-count ceiling for the compressed wedge (r! permutations times
/// binomial-many minor determinants).
inline constexpr double kWedgeWorkBudget = 2e9;

struct WedgeInvariant {
  int w = 0;
  int w_star = 0;
  std::vector<double> sv_w;       // singular values of the compressed forward wedge
  std::vector<double> sv_w_star;  // singular values of the compressed adjoint wedge
  double rel_tol = tol::kRank;

  static double margin_of(const std::vector<double>& sv) {
    if (sv.size() < 2 || sv[0] <= 0.0) return 0.0;
    return sv[1] / sv[0];
  }
  /// sigma_2 / sigma_1 of the compressed forward wedge.
  double margin_w() const { return margin_of(sv_w); }
  /// sigma_2 / sigma_1 of the compressed adjoint wedge.
  double margin_w_star() const { return margin_of(sv_w_star); }
};

namespace detail {

inline void check_wedge_shapes(const std::vector<Matrix>& ops) {
  require(!ops.empty(), "wedge: needs at least one operator");
  for (const Matrix& op : ops) {
    require(op.rows() == ops.front().rows() && op.cols() == ops.front().cols(),
            "wedge: operators must share a common shape");
  }
}

inline void check_wedge_ops(const std::vector<Matrix>& ops) {
  check_wedge_shapes(ops);
  check_tensor_order(static_cast<int>(ops.size()));
}

inline Complex minor_det(const Matrix& m, const std::vector<int>& rows) {
  const int r = static_cast<int>(rows.size());
  switch (r) {
    case 1:
      return m(rows[0], 0);
    case 2:
      return m(rows[0], 0) * m(rows[1], 1) - m(rows[1], 0) * m(rows[0], 1);
    case 3:
      return m(rows[0], 0) * (m(rows[1], 1) * m(rows[2], 2) - m(rows[2], 1) * m(rows[1], 2)) -
             m(rows[0], 1) * (m(rows[1], 0) * m(rows[2], 2) - m(rows[2], 0) * m(rows[1], 2)) +
             m(rows[0], 2) * (m(rows[1], 0) * m(rows[2], 1) - m(rows[2], 0) * m(rows[1], 1));
    default: {
      Matrix sub(r, r);
      for (int i = 0; i < r; ++i) sub.row(i) = m.row(rows[static_cast<std::size_t>(i)]);
      return sub.determinant();
    }
  }
}

}  // namespace detail

/// The full alternating average (1/r!) sum_pi sgn(pi) v_{pi(1)} (x) ... (x)
/// v_{pi(r)}, materialized as a p^r x q^r matrix.
inline Matrix wedge_operator(const std::vector<Matrix>& ops,
                             std::size_t budget = kElementBudget) {
  detail::check_wedge_ops(ops);
  const int r = static_cast<int>(ops.size());
  const int p = static_cast<int>(ops.front().rows());
  const int q = static_cast<int>(ops.front().cols());
  const std::size_t rows = checked_power(p, r, budget);
  const std::size_t cols = checked_power(q, r, budget);
  if (rows > 0 && cols > budget / rows) {
    throw ResourceError("wedge operator of " + std::to_string(rows) + "x" +
                        std::to_string(cols) + " exceeds the element budget");
  }
  Matrix acc = Matrix::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for_each_permutation(r, [&](const std::vector<int>& perm, int sign) {
    Matrix term = ops[static_cast<std::size_t>(perm[0])];
    for (int t = 1; t < r; ++t) term = kron(term, ops[static_cast<std::size_t>(perm[static_cast<std::size_t>(t)])]);
    acc += static_cast<double>(sign) * term;
  });
  return acc / factorial(r);
}

/// Compression of the alternating average between the subspace bases:
/// antisym_basis(p, r)* . wedge_operator(ops) . sym_basis(q, r), computed
/// directly at binomial sizes. Entry (I, J) is
///   (1 / (r! sqrt(prod mult_J!))) sum_sigma sgn(sigma) det M_sigma[I, :],
/// where column t of M_sigma is column J_t of ops[sigma(t)].
inline Matrix wedge_restricted(const std::vector<Matrix>& ops,
                               std::size_t budget = kElementBudget) {
  detail::check_wedge_shapes(ops);
  const int r = static_cast<int>(ops.size());
  const int p = static_cast<int>(ops.front().rows());
  const int q = static_cast<int>(ops.front().cols());
  const std::size_t rows = binomial(p, r);
  const std::size_t cols = binomial(q + r - 1, r);
  if (rows == 0 || cols == 0) {
    // trivial target space; no permutation work, so no order guard needed
    if (std::max(rows, cols) > budget) {
      throw ResourceError("compressed wedge exceeds the element budget");
    }
    return Matrix::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  }
  check_tensor_order(r);
  if (cols > budget / rows) {
    throw ResourceError("compressed wedge exceeds the element budget");
  }
  const double work = factorial(r) * static_cast<double>(cols) *
                      static_cast<double>(rows) * static_cast<double>(r) * r * r;
  if (work > kWedgeWorkBudget) {
    throw ResourceError("compressed wedge work estimate exceeds the budget");
  }
  const auto row_sets = increasing_indices(p, r);
  const auto col_sets = nondecreasing_indices(q, r);
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  const double inv_rfact = 1.0 / factorial(r);
  Matrix columns(p, r);
  for (std::size_t jc = 0; jc < cols; ++jc) {
    const auto& index = col_sets[jc];
    double mult = 1.0;
    int run = 1;
    for (int t = 1; t < r; ++t) {
      run = (index[static_cast<std::size_t>(t)] == index[static_cast<std::size_t>(t - 1)]) ? run + 1 : 1;
      mult *= run;
    }
    const double scale = inv_rfact / std::sqrt(mult);
    for_each_permutation(r, [&](const std::vector<int>& perm, int sign) {
      for (int t = 0; t < r; ++t) {
        columns.col(t) = ops[static_cast<std::size_t>(perm[static_cast<std::size_t>(t)])].col(index[static_cast<std::size_t>(t)]);
      }
      for (std::size_t ic = 0; ic < rows; ++ic) {
        out(static_cast<Eigen::Index>(ic), static_cast<Eigen::Index>(jc)) +=
            static_cast<double>(sign) * detail::minor_det(columns, row_sets[ic]);
      }
    });
    out.col(static_cast<Eigen::Index>(jc)) *= scale;
  }
  return out;
}

/// Reference path for cross-validation: materializes the full tensor-power
/// operator and projects it onto the subspace bases.
inline Matrix wedge_restricted_full(const std::vector<Matrix>& ops,
                                    std::size_t budget = kElementBudget) {
  detail::check_wedge_ops(ops);
  const int r = static_cast<int>(ops.size());
  const int p = static_cast<int>(ops.front().rows());
  const int q = static_cast<int>(ops.front().cols());
  return antisym_basis(p, r, budget).adjoint() * wedge_operator(ops, budget) *
         sym_basis(q, r, budget);
}

enum class WedgePath { Compressed, Full };

/// The invariant pair: w is the rank of the compressed wedge of the
/// components, w* that of their adjoints. Both are constant on U(r) orbits
/// and unchanged under the right action of U(n).
inline WedgeInvariant wedge_invariants(const IsometryTuple& v, double rel_tol = tol::kRank,
                                       WedgePath path = WedgePath::Compressed,
                                       std::size_t budget = kElementBudget) {
  const auto restricted = (path == WedgePath::Compressed) ? wedge_restricted : wedge_restricted_full;
  WedgeInvariant out;
  out.rel_tol = rel_tol;
  const RankResult forward = numerical_rank(restricted(v.components, budget), rel_tol);
  const RankResult adjoint = numerical_rank(restricted(v.adjoints(), budget), rel_tol);
  out.w = forward.rank;
  out.sv_w = forward.singular_values;
  out.w_star = adjoint.rank;
  out.sv_w_star = adjoint.singular_values;
  return out;
}

/// Explicit tuple of partial isometries with w* >= 2, defined on a basis
/// split {e_1..e_r, f_1..f_r, g_1..g_s} of the domain, s = n - 2r:
/// v_k e_i = delta_ki e_1', v_k f_i = delta_ki f_1', and v_1 g_j = g_j'.
inline IsometryTuple witness_tuple(int n, int m, int r) {
  require(r >= 1 && 2 * r <= n && n <= m, "witness_tuple: needs 1 <= r, 2r <= n <= m");
  const int s = n - 2 * r;
  IsometryTuple out{n, m, r, {}};
  out.components.reserve(static_cast<std::size_t>(r));
  for (int k = 0; k < r; ++k) {
    Matrix v = Matrix::Zero(m, n);
    v(0, k) = 1.0;      // e_{k+1} -> e_1'
    v(r, r + k) = 1.0;  // f_{k+1} -> f_1'
    if (k == 0) {
      for (int j = 0; j < s; ++j) v(2 * r + j, 2 * r + j) = 1.0;  // g_j -> g_j'
    }
    out.components.push_back(std::move(v));
  }
  out.validate();
  return out;
}

/// Frobenius norm of the matrix of 2x2 minors of g; zero iff rank(g) <= 1.
/// This is the degree-2r polynomial witness for the rank-one locus of the
/// compressed wedge.
inline double rank_one_defect(const Matrix& g) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < g.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < g.rows(); ++j) {
      for (Eigen::Index k = 0; k < g.cols(); ++k) {
        for (Eigen::Index l = k + 1; l < g.cols(); ++l) {
          sum += std::norm(g(i, k) * g(j, l) - g(i, l) * g(j, k));
        }
      }
    }
  }
  return std::sqrt(sum);
}

}  // namespace wedgelab
