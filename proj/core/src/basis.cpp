#include "tauspec/basis.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <string>

#include "tauspec/error.hpp"

namespace tauspec {

std::string_view family_name(Family family) {
  switch (family) {
    case Family::ChebyshevT:
      return "ChebyshevT";
    case Family::LegendreP:
      return "LegendreP";
  }
  throw ConfigError("unsupported basis family");
}

Family parse_family(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "chebyshev" || lower == "chebyshevt") return Family::ChebyshevT;
  if (lower == "legendre" || lower == "legendrep") return Family::LegendreP;
  throw ConfigError("unsupported basis family '" + std::string(name) + "'");
}

BasisSpec::BasisSpec(Family family, double a, double b) : family_(family), a_(a), b_(b) {
  if (!(std::isfinite(a) && std::isfinite(b)) || !(a < b)) {
    throw ConfigError("basis domain requires finite a < b");
  }
  (void)family_name(family);
}

Recurrence recurrence_coeffs(Family family, int j) {
  if (j < 0) throw DomainError("recurrence index must be non-negative");
  switch (family) {
    case Family::ChebyshevT:
      if (j == 0) return {1.0, 0.0, 0.0};
      return {0.5, 0.0, 0.5};
    case Family::LegendreP: {
      const double d = 2.0 * j + 1.0;
      return {(j + 1.0) / d, 0.0, j / d};
    }
  }
  throw ConfigError("unsupported basis family");
}

// ---------------------------------------------------------------------------
// Series

Series::Series(BasisSpec basis, std::vector<double> coeffs)
    : basis_(basis), coeffs_(std::move(coeffs)) {}

Series::Series(BasisSpec basis, std::size_t length) : basis_(basis), coeffs_(length, 0.0) {}

std::size_t Series::degree() const noexcept {
  for (std::size_t i = coeffs_.size(); i > 0; --i) {
    if (coeffs_[i - 1] != 0.0) return i - 1;
  }
  return 0;
}

Series Series::resized(std::size_t length) const {
  std::vector<double> c(length, 0.0);
  std::copy_n(coeffs_.begin(), std::min(length, coeffs_.size()), c.begin());
  return Series(basis_, std::move(c));
}

double Series::max_abs() const noexcept {
  double m = 0.0;
  for (double c : coeffs_) m = std::max(m, std::abs(c));
  return m;
}

void require_same_basis(const BasisSpec& lhs, const BasisSpec& rhs) {
  if (!(lhs == rhs)) throw DomainError("series live in different bases");
}

Series& Series::operator+=(const Series& other) {
  require_same_basis(basis_, other.basis_);
  if (other.size() > size()) coeffs_.resize(other.size(), 0.0);
  for (std::size_t i = 0; i < other.size(); ++i) coeffs_[i] += other.coeffs_[i];
  return *this;
}

Series& Series::operator-=(const Series& other) {
  require_same_basis(basis_, other.basis_);
  if (other.size() > size()) coeffs_.resize(other.size(), 0.0);
  for (std::size_t i = 0; i < other.size(); ++i) coeffs_[i] -= other.coeffs_[i];
  return *this;
}

Series& Series::operator*=(double scale) {
  for (double& c : coeffs_) c *= scale;
  return *this;
}

Series operator+(Series lhs, const Series& rhs) { return lhs += rhs; }
Series operator-(Series lhs, const Series& rhs) { return lhs -= rhs; }
Series operator*(double scale, Series s) { return s *= scale; }

// ---------------------------------------------------------------------------
// Evaluation

std::vector<double> orth_eval(const Series& s, std::span<const double> xs,
                              EvalDiagnostics* diagnostics) {
  if (s.size() == 0) throw DomainError("cannot evaluate an empty series");
  const BasisSpec& basis = s.basis();
  const double c1 = basis.c1();
  const double c2 = basis.c2();
  const auto& a = s.coeffs();

  std::vector<double> result(xs.size());
  std::size_t outside = 0;
  for (std::size_t p = 0; p < xs.size(); ++p) {
    const double x = xs[p];
    if (x < basis.a() || x > basis.b()) ++outside;
    const double t = c1 * x + c2;
    double prev = 0.0;  // P*_{i-2}
    double cur = 1.0;   // P*_{i-1}
    double sum = a[0];
    for (std::size_t i = 1; i < a.size(); ++i) {
      const Recurrence r = recurrence_coeffs(basis.family(), static_cast<int>(i - 1));
      const double next = ((t - r.beta) * cur - r.gamma * prev) / r.alpha;
      prev = cur;
      cur = next;
      sum += a[i] * cur;
    }
    result[p] = sum;
  }
  if (diagnostics) diagnostics->extrapolated += outside;
  return result;
}

double orth_eval(const Series& s, double x) {
  return orth_eval(s, std::span<const double>(&x, 1)).front();
}

std::vector<double> basis_values(const BasisSpec& basis, double x, std::size_t n) {
  std::vector<double> v(n, 0.0);
  if (n == 0) return v;
  const double t = basis.to_reference(x);
  v[0] = 1.0;
  for (std::size_t i = 1; i < n; ++i) {
    const Recurrence r = recurrence_coeffs(basis.family(), static_cast<int>(i - 1));
    const double older = i >= 2 ? v[i - 2] : 0.0;
    v[i] = ((t - r.beta) * v[i - 1] - r.gamma * older) / r.alpha;
  }
  return v;
}

Series multiply_by_x(const Series& s) {
  // x = (x* - c2) / c1 with x* P_j = alpha_j P_{j+1} + beta_j P_j + gamma_j P_{j-1}.
  const BasisSpec& basis = s.basis();
  const double c1 = basis.c1();
  const double c2 = basis.c2();
  const auto& a = s.coeffs();
  std::vector<double> out(a.size() + 1, 0.0);
  for (std::size_t j = 0; j < a.size(); ++j) {
    if (a[j] == 0.0) continue;
    const Recurrence r = recurrence_coeffs(basis.family(), static_cast<int>(j));
    out[j + 1] += r.alpha * a[j];
    out[j] += (r.beta - c2) * a[j];
    if (j > 0) out[j - 1] += r.gamma * a[j];
  }
  for (double& v : out) v /= c1;
  return Series(basis, std::move(out));
}

Series from_power(const BasisSpec& basis, std::span<const double> power_coeffs) {
  if (power_coeffs.empty()) return Series(basis, std::vector<double>{0.0});
  Series acc(basis, std::vector<double>{power_coeffs.back()});
  for (std::size_t i = power_coeffs.size() - 1; i > 0; --i) {
    acc = multiply_by_x(acc);
    acc.coeffs()[0] += power_coeffs[i - 1];
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Linearization coefficients

namespace {

double legendre_a_direct(int r) {
  double v = 1.0;
  for (int s = 1; s <= r; ++s) v *= (2.0 * s - 1.0) / s;
  return v;
}

}  // namespace

LinearizationTable::LinearizationTable(Family family, int max_index) : family_(family) {
  (void)family_name(family);
  if (family == Family::LegendreP) {
    const int size = 2 * std::max(max_index, 1) + 2;
    legendre_a_.resize(size);
    legendre_a_[0] = 1.0;
    for (int r = 1; r < size; ++r) legendre_a_[r] = legendre_a_[r - 1] * (2.0 * r - 1.0) / r;
  }
}

double LinearizationTable::legendre_a(int r) const {
  if (r < static_cast<int>(legendre_a_.size())) return legendre_a_[r];
  return legendre_a_direct(r);
}

double LinearizationTable::operator()(int i, int j, int k) const {
  if (i < 0 || j < 0 || k < 0 || k > i + j) return 0.0;
  switch (family_) {
    case Family::ChebyshevT: {
      const int hi = i + j;
      const int lo = std::abs(i - j);
      if (hi == lo) return k == hi ? 1.0 : 0.0;
      return (k == hi || k == lo) ? 0.5 : 0.0;
    }
    case Family::LegendreP: {
      const int excess = i + j - k;
      if (excess % 2 != 0) return 0.0;
      const int r = excess / 2;
      if (r > std::min(i, j)) return 0.0;
      // Neumann-Adams: A(i-r) A(r) A(j-r) / A(i+j-r) * (2k+1)/(2(i+j-r)+1)
      const double num = legendre_a(i - r) * legendre_a(r) * legendre_a(j - r);
      return num / legendre_a(i + j - r) * (2.0 * k + 1.0) / (2.0 * (i + j - r) + 1.0);
    }
  }
  return 0.0;
}

double linearization_coeff(const LinearizationTable& table, int i, int j, int k) {
  return table(i, j, k);
}

std::vector<double> linearization_generic(Family family, int i, int j) {
  if (i < 0 || j < 0) throw DomainError("linearization indices must be non-negative");
  const std::size_t len = static_cast<std::size_t>(i + j + 1);
  // x* applied to a coefficient vector on the reference interval.
  auto times_x = [family](const std::vector<double>& v) {
    std::vector<double> out(v.size(), 0.0);
    for (std::size_t m = 0; m < v.size(); ++m) {
      if (v[m] == 0.0) continue;
      const Recurrence r = recurrence_coeffs(family, static_cast<int>(m));
      if (m + 1 < out.size()) out[m + 1] += r.alpha * v[m];
      out[m] += r.beta * v[m];
      if (m > 0) out[m - 1] += r.gamma * v[m];
    }
    return out;
  };
  std::vector<double> older(len, 0.0);
  std::vector<double> cur(len, 0.0);
  cur[static_cast<std::size_t>(j)] = 1.0;  // P_0 P_j
  for (int r = 0; r < i; ++r) {
    const Recurrence rec = recurrence_coeffs(family, r);
    std::vector<double> next = times_x(cur);
    for (std::size_t m = 0; m < len; ++m) {
      next[m] = (next[m] - rec.beta * cur[m] - rec.gamma * older[m]) / rec.alpha;
    }
    older = std::move(cur);
    cur = std::move(next);
  }
  return cur;
}

Series product(const Series& p, const Series& q) {
  const int len = static_cast<int>(std::max(p.size(), q.size()));
  return product(p, q, LinearizationTable(p.basis().family(), len));
}

Series product(const Series& p, const Series& q, const LinearizationTable& table) {
  require_same_basis(p.basis(), q.basis());
  if (table.family() != p.basis().family()) {
    throw DomainError("linearization table family differs from the series basis");
  }
  const std::size_t len = std::max(p.size(), q.size());
  if (len == 0) return Series(p.basis(), std::size_t{0});
  std::vector<double> out(2 * len - 1, 0.0);
  const Family family = p.basis().family();

  for (std::size_t i = 0; i < len; ++i) {
    for (std::size_t j = i; j < len; ++j) {
      const double sym = p[i] * q[j] + p[j] * q[i];
      if (sym == 0.0) continue;
      const double w = (i == j) ? 0.5 * sym : sym;
      const int ii = static_cast<int>(i);
      const int jj = static_cast<int>(j);
      if (family == Family::ChebyshevT) {
        // Only k = i + j and k = j - i carry weight.
        const std::size_t lo = j - i;
        const std::size_t hi = i + j;
        if (lo == hi) {
          out[hi] += w;
        } else {
          out[lo] += 0.5 * w;
          out[hi] += 0.5 * w;
        }
      } else {
        for (int k = jj - ii; k <= ii + jj; k += 2) {
          out[static_cast<std::size_t>(k)] += w * table(ii, jj, k);
        }
      }
    }
  }
  return Series(p.basis(), std::move(out));
}

}  // namespace tauspec
