#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "tauspec/basis.hpp"

namespace tauspec {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class OperatorRole { M, N, O, V, W, D, S, SV, SF, Condition, Composite };

std::string_view role_name(OperatorRole role);

/// Dense n x n matrix acting on coefficient vectors of a basis.
struct OperatorMatrix {
  BasisSpec basis;
  OperatorRole role;
  Matrix entries;
  /// Set when part of the operator's image could not be represented at
  /// the requested size (kernel wider than the working size).
  bool truncated = false;

  Eigen::Index rows() const { return entries.rows(); }
  Eigen::Index cols() const { return entries.cols(); }
  double operator()(Eigen::Index i, Eigen::Index j) const { return entries(i, j); }
};

/// Degenerate kernel K(x, t) = sum_ij k_ij P*_i(x) P*_j(t).
class KernelPoly {
 public:
  KernelPoly(BasisSpec basis, Matrix coeffs);

  /// Converts power-basis coefficients (row i, column j multiplies x^i t^j).
  static KernelPoly from_power(const BasisSpec& basis, const Matrix& power_coeffs);
  /// Kernel that depends on t only: K(x, t) = g(t).
  static KernelPoly from_t_series(const Series& g);

  const BasisSpec& basis() const noexcept { return basis_; }
  const Matrix& coeffs() const noexcept { return coeffs_; }
  int x_degree() const noexcept { return static_cast<int>(coeffs_.rows()) - 1; }
  int t_degree() const noexcept { return static_cast<int>(coeffs_.cols()) - 1; }

  /// Row i of the coefficient matrix as a series in t.
  Series t_series(Eigen::Index i) const;

  /// K(x, t) * g(t), with the product taken in the orthogonal basis.
  KernelPoly times_t(const Series& g) const;
  KernelPoly scaled(double factor) const;

  double operator()(double x, double t) const;

 private:
  BasisSpec basis_;
  Matrix coeffs_;
};

// Reference-interval operational matrices. Column j of each matrix is the
// image of P_j; x, d/dx and the antiderivative act on coefficient vectors.

/// Column j holds the power-basis coefficients of P_j.
OperatorMatrix build_V(const BasisSpec& basis, std::size_t n);
/// Inverse of V from w_1 = e_1, w_{j+1} = M w_j. No inversion is performed.
OperatorMatrix build_W(const BasisSpec& basis, std::size_t n);
/// Tridiagonal multiplication-by-x matrix straight from (alpha, beta, gamma).
OperatorMatrix build_M(const BasisSpec& basis, std::size_t n);
/// Differentiation. Column j+1 follows from the differentiated recurrence
///   P'_{j+1} = (P_j + (x - beta_j) P'_j - gamma_j P'_{j-1}) / alpha_j.
OperatorMatrix build_N(const BasisSpec& basis, std::size_t n);
/// Antiderivative vanishing at the centre of the reference interval.
/// theta_{j+1,j} = alpha_j/(j+1); the remaining rows come from
/// back-substitution against N. Entries beyond row n are dropped.
OperatorMatrix build_O(const BasisSpec& basis, std::size_t n);

/// p(M) = sum_i p_i P_i(M) by the matrix three-term recurrence on the n x n
/// truncated M. For coefficients in the shifted basis this is the operator of
/// multiplication by p(x) in problem coordinates.
OperatorMatrix poly_of_M(const BasisSpec& basis, std::span<const double> coeffs, std::size_t n);
/// M^k by the banded update mu^{(k)}_{ij} = mu^{(k-1)}_{i-1,j} alpha_{i-1}
/// + mu^{(k-1)}_{ij} beta_i + mu^{(k-1)}_{i+1,j} gamma_{i+1}.
OperatorMatrix power_of_M(const BasisSpec& basis, int k, std::size_t n);
/// Power-basis polynomial in the reference variable, sum_k c_k M^k.
OperatorMatrix poly_of_M_power(const BasisSpec& basis, std::span<const double> power_coeffs,
                               std::size_t n);

/// (c1 N)^k for k >= 0, (O / c1)^{-k} for k < 0, in problem coordinates.
/// Leading n x n block of the infinite operator.
OperatorMatrix order_operator(const BasisSpec& basis, int order, std::size_t n);

/// D = sum_k p_k(M) (c1 N)^k; p_k are shifted-basis coefficients. Returns the
/// leading n x n block of the infinite operator.
OperatorMatrix diff_operator(const BasisSpec& basis, std::span<const std::vector<double>> p,
                             std::size_t n);
/// S = sum_l p_l(M) (O / c1)^l.
OperatorMatrix int_operator(const BasisSpec& basis, std::span<const std::vector<double>> p,
                            std::size_t n);

/// y -> int_{x0}^{x} K(x, t) (d^k y / dt^k)(t) dt, assembled as
///   sum_ij k_ij (P_i(M) - e_{i+1} P|_{x0}) (O / c1) P_j(M)   (times (c1 N)^k).
OperatorMatrix volterra_operator(const KernelPoly& kernel, double x0, std::size_t n,
                                 int inner_order = 0);
/// y -> int_a^b K(x, t) y^{(k)}(t) dt:  sum_ij k_ij e_{i+1} (P|_b - P|_a) (O / c1) P_j(M).
OperatorMatrix fredholm_operator(const KernelPoly& kernel, std::size_t n, int inner_order = 0);

/// 1 x n row c(P*_j) for the functional c(y) = y^{(derivative)}(point).
OperatorMatrix condition_row(const BasisSpec& basis, int derivative, double point, std::size_t n);

// Series-level actions. These act directly on coefficient vectors and return
// the full image (no truncation); they are the reference the assembled
// matrices are checked against and the route used for residuals.

/// order >= 0: order-th derivative; order < 0: repeated antiderivative with
/// the same constant convention as build_O.
Series apply_order(const Series& s, int order);
Series apply_volterra(const KernelPoly& kernel, double x0, const Series& y);
Series apply_fredholm(const KernelPoly& kernel, const Series& y);

}  // namespace tauspec
