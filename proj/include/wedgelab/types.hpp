#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace wedgelab {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

/// Violated input contract: bad shapes, broken invariants, unparsable files.
class ValidationError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Tensor-power size guard tripped.
class ResourceError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Numerical failure: non-convergence, retry exhaustion.
class NumericalError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace tol {
inline constexpr double kRank = 1e-8;      // default relative SVD threshold
inline constexpr double kHermitian = 1e-10;
inline constexpr double kPsd = 1e-10;
inline constexpr double kTrace = 1e-10;
inline constexpr double kIsometry = 1e-10;
inline constexpr double kUnitary = 1e-10;
inline constexpr double kFaithful = 1e-12;
inline constexpr double kWitness = 1e-10;
}  // namespace tol

/// Element budget shared by all tensor-power constructions.
inline constexpr std::size_t kElementBudget = 10'000'000;
/// Permutation groups are enumerated explicitly; r! beyond 8 is out of scope.
inline constexpr int kMaxTensorPower = 8;

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ValidationError(message);
}

inline double max_abs(const Matrix& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(),
          "max_abs_diff: shape mismatch");
  return max_abs(a - b);
}

inline bool entries_finite(const Matrix& a) {
  return a.allFinite();
}

inline double hermitian_defect(const Matrix& a) {
  return a.rows() == a.cols() ? max_abs(a - a.adjoint())
                              : std::numeric_limits<double>::infinity();
}

inline double unitary_defect(const Matrix& u) {
  if (u.rows() != u.cols()) return std::numeric_limits<double>::infinity();
  return max_abs(u.adjoint() * u - Matrix::Identity(u.cols(), u.cols()));
}

inline bool is_unitary(const Matrix& u, double t = tol::kUnitary) {
  return unitary_defect(u) <= t;
}

}  // namespace wedgelab
