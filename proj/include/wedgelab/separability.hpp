#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wedgelab/states.hpp"
#include "wedgelab/tensor.hpp"
#include "wedgelab/types.hpp"
#include "wedgelab/wedge.hpp"

// Entanglement and separability verdicts. All tests are one-sided and sound:
// the wedge invariant and a negative partial transpose certify entanglement,
// the purity ball and an explicit product decomposition certify separability,
// and the partial transpose is a complete criterion when mn <= 6.

namespace wedgelab {

struct EntanglementCertificate {
  std::string invariant;  // "w" or "w_star"
  int value = 0;
  double margin = 0.0;  // sigma_2 / sigma_1 of the certifying compressed wedge
};

inline std::optional<EntanglementCertificate> certificate_from(const WedgeInvariant& wi) {
  if (wi.w_star > 1) return EntanglementCertificate{"w_star", wi.w_star, wi.margin_w_star()};
  if (wi.w > 1) return EntanglementCertificate{"w", wi.w, wi.margin_w()};
  return std::nullopt;
}

/// Entanglement certificate from the wedge invariant, when one exists.
inline std::optional<EntanglementCertificate> wedge_test(const IsometryTuple& v,
                                                         double rel_tol = tol::kRank) {
  return certificate_from(wedge_invariants(v, rel_tol));
}

struct PptResult {
  double min_eigenvalue = 0.0;
  bool npt = false;             // entanglement certificate
  bool exact_separable = false; // complete criterion fired (mn <= 6 and PPT)
};

/// Minimum eigenvalue of the partial transpose. Below -tol it certifies
/// entanglement; otherwise, for mn <= 6, positivity is also sufficient for
/// separability and the verdict is exact.
inline PptResult ppt_test(const DensityMatrix& rho, int m, int n, double t = tol::kPsd) {
  require(rho.dim() == m * n, "ppt_test: dimension mismatch");
  const Matrix pt = partial_transpose(rho.matrix(), m, n);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (pt + pt.adjoint()));
  if (solver.info() != Eigen::Success) throw NumericalError("ppt_test: eigendecomposition failed");
  PptResult result;
  result.min_eigenvalue = solver.eigenvalues()(0);
  result.npt = result.min_eigenvalue < -t;
  result.exact_separable = !result.npt && m * n <= 6;
  return result;
}

/// Purity-ball separability certificate: trace(rho^2) <= 1/(mn - 1) implies
/// separable. Returns the purity when the certificate fires.
inline std::optional<double> ball_test(const DensityMatrix& rho, int m, int n) {
  require(rho.dim() == m * n, "ball_test: dimension mismatch");
  require(m * n >= 2, "ball_test: needs mn >= 2");
  const double purity = rho.purity();
  if (purity <= 1.0 / (m * n - 1)) return purity;
  return std::nullopt;
}

struct ProductTerm {
  double weight = 0.0;
  Vector xi;   // unit vector in C^m
  Vector eta;  // unit vector in C^n
};

struct ProductDecomposition {
  std::vector<ProductTerm> terms;
};

/// Max entry deviation of sum_k w_k (xi_k xi_k*) (x) (eta_k eta_k*) from rho.
inline double product_decomposition_error(const DensityMatrix& rho,
                                          const ProductDecomposition& d) {
  Matrix sum = Matrix::Zero(rho.dim(), rho.dim());
  for (const ProductTerm& term : d.terms) {
    const Matrix left = term.xi * term.xi.adjoint();
    const Matrix right = term.eta * term.eta.adjoint();
    sum += term.weight * kron(left, right);
  }
  return max_abs_diff(sum, rho.matrix());
}

inline bool verify_product_decomposition(const DensityMatrix& rho,
                                         const ProductDecomposition& d, double t) {
  return product_decomposition_error(rho, d) <= t;
}

struct SeparableSample {
  IsometryTuple tuple;                 // all components rank one
  ProductDecomposition decomposition;  // explicit product form of rho_v
};

/// Draws a certified-separable extension of omega: rank-one operators
/// a_k = x_k y_k* are normalized by T^{-1/2}, T = sum a_k* a_k, which keeps
/// every component rank one while enforcing sum v_k* v_k = 1. Each
/// (v_k (x) 1) xi is then a product vector, and the explicit decomposition
/// is returned alongside the tuple.
inline SeparableSample separable_sample(const MarginalState& omega, int r, int m,
                                        SeededRng& rng) {
  require(omega.faithful, "separable_sample: omega must be faithful");
  const int n = omega.n();
  require(r >= n, "separable_sample: needs r >= n");
  require(m >= 1, "separable_sample: needs m >= 1");
  const Purification xi = purify(omega);

  std::vector<Vector> xs, ys;
  Matrix t_inv_sqrt;
  bool ok = false;
  for (int attempt = 0; attempt < 5 && !ok; ++attempt) {
    xs.clear();
    ys.clear();
    Matrix t = Matrix::Zero(n, n);
    for (int k = 0; k < r; ++k) {
      xs.push_back(rng.ginibre_vector(m));
      ys.push_back(rng.ginibre_vector(n));
      t.noalias() += xs.back().squaredNorm() * (ys.back() * ys.back().adjoint());
    }
    Eigen::SelfAdjointEigenSolver<Matrix> solver(t);
    if (solver.info() != Eigen::Success) continue;
    if (solver.eigenvalues()(0) <= 1e-6) continue;
    t_inv_sqrt = solver.operatorInverseSqrt();
    ok = true;
  }
  if (!ok) throw NumericalError("separable_sample: retries exhausted");

  SeparableSample out;
  out.tuple = IsometryTuple{n, m, r, {}};
  out.tuple.components.reserve(static_cast<std::size_t>(r));
  out.decomposition.terms.reserve(static_cast<std::size_t>(r));
  for (int k = 0; k < r; ++k) {
    const Vector y_tilde = t_inv_sqrt * ys[static_cast<std::size_t>(k)];
    out.tuple.components.push_back(xs[static_cast<std::size_t>(k)] * y_tilde.adjoint());
    // (x y~* (x) 1) xi = x (x) g with g = coeff^T conj(y~).
    const Vector g = xi.coeff().transpose() * y_tilde.conjugate();
    ProductTerm term;
    term.weight = xs[static_cast<std::size_t>(k)].squaredNorm() * g.squaredNorm();
    term.xi = xs[static_cast<std::size_t>(k)].normalized();
    term.eta = g.normalized();
    out.decomposition.terms.push_back(std::move(term));
  }
  out.tuple.validate();
  const double error =
      product_decomposition_error(state_from_tuple(out.tuple, xi), out.decomposition);
  if (error > 1e-8) {
    throw NumericalError("separable_sample: decomposition verification failed at " +
                         std::to_string(error));
  }
  return out;
}

struct PureWitness {
  Matrix c;            // alpha * 1 - zeta zeta*
  double alpha = 0.0;  // squared top Schmidt coefficient of zeta
};

/// Witness from an entangled pure state: c = alpha 1 - zeta zeta* with alpha
/// the squared largest Schmidt coefficient. Nonnegative on every product
/// state, and <zeta, c zeta> = alpha - 1 < 0 when zeta is entangled.
inline PureWitness witness_from_pure(const Vector& zeta, int m, int n) {
  require(zeta.size() == Eigen::Index(m) * n, "witness_from_pure: dimension mismatch");
  require(std::abs(zeta.norm() - 1.0) <= 1e-8, "witness_from_pure: vector must be unit norm");
  Matrix z(m, n);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) z(i, j) = zeta(Eigen::Index(i) * n + j);
  }
  Eigen::JacobiSVD<Matrix> svd(z);
  if (svd.info() != Eigen::Success) throw NumericalError("witness_from_pure: SVD failed");
  PureWitness out;
  out.alpha = svd.singularValues()(0) * svd.singularValues()(0);
  out.c = out.alpha * Matrix::Identity(zeta.size(), zeta.size()) - zeta * zeta.adjoint();
  return out;
}

/// Verifier for the operator-theoretic separability characterization: given
/// a unitary mu of size q = m^2 n^2, checks that every row combination
/// sum_j mu_ij v_j has rank at most one. No search over U(q) is performed.
inline bool verify_separability_unitary(const IsometryTuple& v, const Matrix& mu,
                                        double rel_tol = tol::kRank) {
  const Eigen::Index q = Eigen::Index(v.m) * v.m * v.n * v.n;
  require(mu.rows() == q && mu.cols() == q,
          "verify_separability_unitary: mu must be m^2 n^2 square");
  require(v.r <= q, "verify_separability_unitary: tuple longer than q");
  if (!is_unitary(mu)) throw ValidationError("verify_separability_unitary: mu is not unitary");
  for (Eigen::Index i = 0; i < q; ++i) {
    Matrix combo = Matrix::Zero(v.m, v.n);
    for (int j = 0; j < v.r; ++j) combo += mu(i, j) * v.components[static_cast<std::size_t>(j)];
    if (numerical_rank(combo, rel_tol).rank > 1) return false;
  }
  return true;
}

enum class VerdictStatus { CertifiedEntangled, CertifiedSeparable, Undecided };

inline const char* to_string(VerdictStatus s) {
  switch (s) {
    case VerdictStatus::CertifiedEntangled: return "CertifiedEntangled";
    case VerdictStatus::CertifiedSeparable: return "CertifiedSeparable";
    default: return "Undecided";
  }
}

struct TestEvidence {
  std::string name;
  double value = 0.0;
};

struct SeparabilityVerdict {
  VerdictStatus status = VerdictStatus::Undecided;
  std::vector<TestEvidence> reasons;
  bool exact = false;  // a complete criterion applied (PPT at mn <= 6)
};

namespace detail {

inline SeparabilityVerdict aggregate_verdict(const std::optional<EntanglementCertificate>& wedge,
                                             const std::optional<PptResult>& ppt,
                                             const std::optional<double>& ball_purity,
                                             bool ball_ran, double purity, int m, int n) {
  SeparabilityVerdict verdict;
  bool entangled = false;
  bool separable = false;
  if (wedge) {
    entangled = true;
    verdict.reasons.push_back({"wedge_" + wedge->invariant, static_cast<double>(wedge->value)});
    verdict.reasons.push_back({"wedge_margin", wedge->margin});
  }
  if (ppt) {
    verdict.reasons.push_back({"ppt_min_eigenvalue", ppt->min_eigenvalue});
    if (ppt->npt) entangled = true;
    if (ppt->exact_separable) separable = true;
  }
  if (ball_ran) {
    verdict.reasons.push_back({"ball_purity", purity});
    if (ball_purity) separable = true;
  }
  if (entangled) {
    verdict.status = VerdictStatus::CertifiedEntangled;
  } else if (separable) {
    verdict.status = VerdictStatus::CertifiedSeparable;
  } else {
    verdict.status = VerdictStatus::Undecided;
  }
  verdict.exact = (ppt.has_value() && m * n <= 6);
  return verdict;
}

}  // namespace detail

/// Runs the wedge test on the tuple, then forms rho_v and runs the partial
/// transpose and purity-ball tests. Undecided is a legal outcome.
inline SeparabilityVerdict decide(const IsometryTuple& v, const Purification& xi,
                                  double rel_tol = tol::kRank) {
  const auto wedge = wedge_test(v, rel_tol);
  const DensityMatrix rho = state_from_tuple(v, xi);
  const PptResult ppt = ppt_test(rho, v.m, v.n);
  const auto ball = ball_test(rho, v.m, v.n);
  return detail::aggregate_verdict(wedge, ppt, ball, true, rho.purity(), v.m, v.n);
}

/// Verdict for a bare state: partial transpose and ball always run; the wedge
/// test runs through the tuple reconstruction when the marginal is faithful.
inline SeparabilityVerdict decide(const DensityMatrix& rho, int m, int n,
                                  double rel_tol = tol::kRank) {
  require(rho.dim() == m * n, "decide: dimension mismatch");
  std::optional<EntanglementCertificate> wedge;
  const MarginalState omega = MarginalState::from_density(
      DensityMatrix::from_matrix(partial_trace(rho.matrix(), m, n, Factor::First)));
  if (omega.faithful) {
    const Purification xi = purify(omega);
    const IsometryTuple v = tuple_from_state(rho, rho.rank(), xi);
    wedge = wedge_test(v, rel_tol);
  }
  const PptResult ppt = ppt_test(rho, m, n);
  const auto ball = ball_test(rho, m, n);
  return detail::aggregate_verdict(wedge, ppt, ball, true, rho.purity(), m, n);
}

}  // namespace wedgelab
