#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tauspec {

enum class Family { ChebyshevT, LegendreP };

std::string_view family_name(Family family);
/// Accepts "chebyshev"/"chebyshevt" and "legendre"/"legendrep" (any case).
Family parse_family(std::string_view name);

/// Three-term recurrence x P_j = alpha P_{j+1} + beta P_j + gamma P_{j-1}
/// on the reference interval [-1, 1].
struct Recurrence {
  double alpha;
  double beta;
  double gamma;
};

/// An orthogonal family shifted to [a, b] through x* = c1 x + c2.
class BasisSpec {
 public:
  BasisSpec(Family family, double a, double b);

  Family family() const noexcept { return family_; }
  double a() const noexcept { return a_; }
  double b() const noexcept { return b_; }
  double c1() const noexcept { return 2.0 / (b_ - a_); }
  double c2() const noexcept { return (a_ + b_) / (a_ - b_); }

  /// Maps a problem coordinate onto the reference interval.
  double to_reference(double x) const noexcept { return c1() * x + c2(); }

  friend bool operator==(const BasisSpec&, const BasisSpec&) = default;

 private:
  Family family_;
  double a_;
  double b_;
};

Recurrence recurrence_coeffs(Family family, int j);
inline Recurrence recurrence_coeffs(const BasisSpec& basis, int j) {
  return recurrence_coeffs(basis.family(), j);
}

/// Finite expansion y = sum_i a_i P*_i in a shifted basis.
class Series {
 public:
  Series(BasisSpec basis, std::vector<double> coeffs);
  Series(BasisSpec basis, std::initializer_list<double> coeffs)
      : Series(basis, std::vector<double>(coeffs)) {}
  /// Zero series with `length` coefficients.
  Series(BasisSpec basis, std::size_t length);

  const BasisSpec& basis() const noexcept { return basis_; }
  const std::vector<double>& coeffs() const noexcept { return coeffs_; }
  std::vector<double>& coeffs() noexcept { return coeffs_; }
  std::size_t size() const noexcept { return coeffs_.size(); }
  double operator[](std::size_t i) const { return i < coeffs_.size() ? coeffs_[i] : 0.0; }

  /// Index of the last nonzero coefficient (0 for the zero series).
  std::size_t degree() const noexcept;

  /// Copy zero-padded or cut to exactly `length` coefficients.
  Series resized(std::size_t length) const;

  double max_abs() const noexcept;

  Series& operator+=(const Series& other);
  Series& operator-=(const Series& other);
  Series& operator*=(double scale);

 private:
  BasisSpec basis_;
  std::vector<double> coeffs_;
};

Series operator+(Series lhs, const Series& rhs);
Series operator-(Series lhs, const Series& rhs);
Series operator*(double scale, Series s);

void require_same_basis(const BasisSpec& lhs, const BasisSpec& rhs);

struct EvalDiagnostics {
  std::size_t extrapolated = 0;  ///< points outside [a, b]
};

/// Evaluates the series at each point by the forward three-term recursion
/// in the shifted basis. Never goes through the power basis.
std::vector<double> orth_eval(const Series& s, std::span<const double> xs,
                              EvalDiagnostics* diagnostics = nullptr);
double orth_eval(const Series& s, double x);

/// Row [P*_0(x), ..., P*_{n-1}(x)].
std::vector<double> basis_values(const BasisSpec& basis, double x, std::size_t n);

/// Coefficients of x * s in the shifted basis (one coefficient longer).
Series multiply_by_x(const Series& s);

/// Converts power-basis coefficients in the problem variable x into the
/// shifted orthogonal basis by Horner's scheme on multiply_by_x.
Series from_power(const BasisSpec& basis, std::span<const double> power_coeffs);

/// l(i, j, k): coefficients of P_i P_j = sum_k l(i, j, k) P_k.
class LinearizationTable {
 public:
  explicit LinearizationTable(Family family, int max_index = 64);

  Family family() const noexcept { return family_; }
  double operator()(int i, int j, int k) const;

 private:
  double legendre_a(int r) const;

  Family family_;
  std::vector<double> legendre_a_;  // A(r) = (2r-1)!! / r!
};

double linearization_coeff(const LinearizationTable& table, int i, int j, int k);

/// Coefficients of P_i P_j from the three-term recurrence alone
/// (P_{r+1} P_j = ((x - beta_r) P_r P_j - gamma_r P_{r-1} P_j) / alpha_r).
/// Family-independent reference for the closed forms.
std::vector<double> linearization_generic(Family family, int i, int j);

/// Product computed in the orthogonal basis with linearization coefficients.
/// Operands are padded to a common length L; the result has 2L - 1 entries.
/// Contributions are accumulated per k in ascending (i, j) order over the
/// symmetric weights (a_i b_j + a_j b_i), so p*q and q*p agree bitwise.
Series product(const Series& p, const Series& q);
Series product(const Series& p, const Series& q, const LinearizationTable& table);

}  // namespace tauspec
