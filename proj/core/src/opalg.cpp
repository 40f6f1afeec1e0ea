#include "tauspec/opalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "tauspec/error.hpp"

namespace tauspec {

namespace {

using Index = Eigen::Index;

Index as_index(std::size_t n) { return static_cast<Index>(n); }

void require_size(std::size_t n) {
  if (n < 1) throw DomainError("operator size must be at least 1");
}

/// Left-multiplies by the size-S truncated reference M:
/// (M X)_r = alpha_{r-1} X_{r-1} + beta_r X_r + gamma_{r+1} X_{r+1}.
Matrix apply_M(Family family, const Matrix& x) {
  const Index s = x.rows();
  Matrix out(s, x.cols());
  for (Index r = 0; r < s; ++r) {
    const Recurrence here = recurrence_coeffs(family, static_cast<int>(r));
    out.row(r) = here.beta * x.row(r);
    if (r > 0) out.row(r) += recurrence_coeffs(family, static_cast<int>(r - 1)).alpha * x.row(r - 1);
    if (r + 1 < s) out.row(r) += recurrence_coeffs(family, static_cast<int>(r + 1)).gamma * x.row(r + 1);
  }
  return out;
}

Vector apply_M(Family family, const Vector& v) {
  return apply_M(family, Matrix(v)).col(0);
}

struct RecurrenceLd {
  long double alpha, beta, gamma;
};

// Same coefficients as recurrence_coeffs, without the rounding to double.
RecurrenceLd recurrence_ld(Family family, std::size_t j) {
  if (family == Family::LegendreP) {
    const long double jj = static_cast<long double>(j);
    return {(jj + 1.0L) / (2.0L * jj + 1.0L), 0.0L, jj / (2.0L * jj + 1.0L)};
  }
  if (j == 0) return {1.0L, 0.0L, 0.0L};
  return {0.5L, 0.0L, 0.5L};
}

/// Reference N at size s, columns from the differentiated recurrence.
Matrix reference_N(Family family, Index s) {
  Matrix nmat = Matrix::Zero(s, s);
  // Column 0 is zero; column j+1 = (e_j + (M - beta_j) n_j - gamma_j n_{j-1}) / alpha_j.
  for (Index j = 0; j + 1 < s; ++j) {
    const Recurrence r = recurrence_coeffs(family, static_cast<int>(j));
    Vector col = apply_M(family, Vector(nmat.col(j))) - r.beta * nmat.col(j);
    if (j > 0) col -= r.gamma * nmat.col(j - 1);
    col(j) += 1.0;
    nmat.col(j + 1) = col / r.alpha;
  }
  // P'_{j+1} has degree j, so anything at or below the diagonal is rounding.
  return nmat.triangularView<Eigen::StrictlyUpper>();
}

/// Reference O at size s with every column complete: column j needs row j+1,
/// so the work is done at size s+1 and the extra row is cut at the end.
Matrix reference_O(Family family, Index s) {
  const Index full = s + 1;
  const Matrix nmat = reference_N(family, full);
  // P_k(0) on the reference interval.
  std::vector<double> at_zero(static_cast<std::size_t>(full), 0.0);
  at_zero[0] = 1.0;
  for (Index k = 1; k < full; ++k) {
    const Recurrence r = recurrence_coeffs(family, static_cast<int>(k - 1));
    const double older = k >= 2 ? at_zero[static_cast<std::size_t>(k - 2)] : 0.0;
    at_zero[static_cast<std::size_t>(k)] =
        (-r.beta * at_zero[static_cast<std::size_t>(k - 1)] - r.gamma * older) / r.alpha;
  }

  Matrix omat = Matrix::Zero(full, s);
  for (Index j = 0; j < s; ++j) {
    Vector theta = Vector::Zero(full);
    theta(j + 1) = recurrence_coeffs(family, static_cast<int>(j)).alpha / (j + 1.0);
    // N theta = e_j on rows i = j-1 .. 0; eta_{i,i+1} = (i+1)/alpha_i.
    for (Index i = j - 1; i >= 0; --i) {
      double acc = 0.0;
      for (Index k = i + 2; k <= j + 1; ++k) acc += nmat(i, k) * theta(k);
      theta(i + 1) = -recurrence_coeffs(family, static_cast<int>(i)).alpha / (i + 1.0) * acc;
    }
    double value = 0.0;
    for (Index k = 1; k <= j + 1; ++k) value += theta(k) * at_zero[static_cast<std::size_t>(k)];
    theta(0) = -value;
    omat.col(j) = theta;
  }
  return omat.topRows(s);
}

/// Sum_i c_i P_i(M_s) on the reference M of size s.
Matrix reference_poly(Family family, std::span<const double> coeffs, Index s) {
  Matrix acc = Matrix::Zero(s, s);
  if (coeffs.empty()) return acc;
  Matrix older = Matrix::Zero(s, s);
  Matrix cur = Matrix::Identity(s, s);
  acc.diagonal().setConstant(coeffs[0]);
  for (std::size_t i = 1; i < coeffs.size(); ++i) {
    const Recurrence r = recurrence_coeffs(family, static_cast<int>(i - 1));
    Matrix next = (apply_M(family, cur) - r.beta * cur - r.gamma * older) / r.alpha;
    older = std::move(cur);
    cur = std::move(next);
    if (coeffs[i] != 0.0) acc += coeffs[i] * cur;
  }
  return acc;
}

std::size_t effective_length(std::span<const double> coeffs) {
  std::size_t len = coeffs.size();
  while (len > 1 && coeffs[len - 1] == 0.0) --len;
  return len;
}

/// (c1 N)^k or (O / c1)^l at size s (not truncated further).
Matrix order_matrix(const BasisSpec& basis, int order, Index s) {
  Matrix out = Matrix::Identity(s, s);
  if (order > 0) {
    const Matrix step = basis.c1() * reference_N(basis.family(), s);
    for (int k = 0; k < order; ++k) out = step * out;
  } else if (order < 0) {
    const Matrix step = reference_O(basis.family(), s) / basis.c1();
    for (int k = 0; k < -order; ++k) out = step * out;
  }
  return out;
}

/// Kernel operator at padded size s: Volterra when x0 is given, Fredholm otherwise.
Matrix kernel_matrix(const KernelPoly& kernel, Index s, int inner_order, const double* x0) {
  const BasisSpec& basis = kernel.basis();
  const Family family = basis.family();
  const Matrix omat = reference_O(family, s) / basis.c1();
  const Matrix inner = order_matrix(basis, inner_order, s);

  Eigen::RowVectorXd functional;
  if (x0 != nullptr) {
    const auto row = basis_values(basis, *x0, static_cast<std::size_t>(s));
    functional = Eigen::Map<const Eigen::RowVectorXd>(row.data(), s);
  } else {
    const auto hi = basis_values(basis, basis.b(), static_cast<std::size_t>(s));
    const auto lo = basis_values(basis, basis.a(), static_cast<std::size_t>(s));
    functional = Eigen::Map<const Eigen::RowVectorXd>(hi.data(), s) -
                 Eigen::Map<const Eigen::RowVectorXd>(lo.data(), s);
  }

  Matrix total = Matrix::Zero(s, s);
  Matrix p_older = Matrix::Zero(s, s);
  Matrix p_cur = Matrix::Identity(s, s);  // P_i(M)
  for (Index i = 0; i < kernel.coeffs().rows(); ++i) {
    if (i > 0) {
      const Recurrence r = recurrence_coeffs(family, static_cast<int>(i - 1));
      Matrix next = (apply_M(family, p_cur) - r.beta * p_cur - r.gamma * p_older) / r.alpha;
      p_older = std::move(p_cur);
      p_cur = std::move(next);
    }
    const Eigen::RowVectorXd krow = kernel.coeffs().row(i);
    if (krow.cwiseAbs().maxCoeff() == 0.0) continue;
    const std::vector<double> tcoeffs(krow.data(), krow.data() + krow.size());
    const Matrix integrated = omat * (reference_poly(family, tcoeffs, s) * inner);
    const Eigen::RowVectorXd lifted = functional * integrated;
    if (x0 != nullptr) {
      total += p_cur * integrated;
      if (i < s) total.row(i) -= lifted;
    } else if (i < s) {
      total.row(i) += lifted;
    }
  }
  return total;
}

}  // namespace

std::string_view role_name(OperatorRole role) {
  switch (role) {
    case OperatorRole::M: return "M";
    case OperatorRole::N: return "N";
    case OperatorRole::O: return "O";
    case OperatorRole::V: return "V";
    case OperatorRole::W: return "W";
    case OperatorRole::D: return "D";
    case OperatorRole::S: return "S";
    case OperatorRole::SV: return "SV";
    case OperatorRole::SF: return "SF";
    case OperatorRole::Condition: return "CONDITION";
    case OperatorRole::Composite: return "COMPOSITE";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// KernelPoly

KernelPoly::KernelPoly(BasisSpec basis, Matrix coeffs) : basis_(basis), coeffs_(std::move(coeffs)) {
  if (coeffs_.rows() == 0 || coeffs_.cols() == 0) {
    throw DomainError("kernel coefficient matrix must be non-empty");
  }
  if (!coeffs_.allFinite()) throw DomainError("kernel coefficients must be finite");
}

KernelPoly KernelPoly::from_power(const BasisSpec& basis, const Matrix& power_coeffs) {
  if (power_coeffs.rows() == 0 || power_coeffs.cols() == 0) {
    throw DomainError("kernel coefficient matrix must be non-empty");
  }
  // Convert along t (each row), then along x (each column).
  Matrix by_t(power_coeffs.rows(), power_coeffs.cols());
  for (Index i = 0; i < power_coeffs.rows(); ++i) {
    std::vector<double> row(power_coeffs.cols());
    for (Index j = 0; j < power_coeffs.cols(); ++j) row[static_cast<std::size_t>(j)] = power_coeffs(i, j);
    const Series s = tauspec::from_power(basis, row);
    for (Index j = 0; j < power_coeffs.cols(); ++j) by_t(i, j) = s[static_cast<std::size_t>(j)];
  }
  Matrix out(power_coeffs.rows(), power_coeffs.cols());
  for (Index j = 0; j < by_t.cols(); ++j) {
    std::vector<double> col(by_t.rows());
    for (Index i = 0; i < by_t.rows(); ++i) col[static_cast<std::size_t>(i)] = by_t(i, j);
    const Series s = tauspec::from_power(basis, col);
    for (Index i = 0; i < by_t.rows(); ++i) out(i, j) = s[static_cast<std::size_t>(i)];
  }
  return KernelPoly(basis, std::move(out));
}

KernelPoly KernelPoly::from_t_series(const Series& g) {
  Matrix c(1, as_index(std::max<std::size_t>(g.size(), 1)));
  c.setZero();
  for (std::size_t j = 0; j < g.size(); ++j) c(0, as_index(j)) = g[j];
  return KernelPoly(g.basis(), std::move(c));
}

Series KernelPoly::t_series(Index i) const {
  std::vector<double> c(static_cast<std::size_t>(coeffs_.cols()));
  for (Index j = 0; j < coeffs_.cols(); ++j) c[static_cast<std::size_t>(j)] = coeffs_(i, j);
  return Series(basis_, std::move(c));
}

KernelPoly KernelPoly::times_t(const Series& g) const {
  require_same_basis(basis_, g.basis());
  std::vector<Series> rows;
  std::size_t width = 1;
  for (Index i = 0; i < coeffs_.rows(); ++i) {
    rows.push_back(product(t_series(i), g));
    width = std::max(width, rows.back().size());
  }
  Matrix out = Matrix::Zero(coeffs_.rows(), as_index(width));
  for (Index i = 0; i < coeffs_.rows(); ++i) {
    const Series& r = rows[static_cast<std::size_t>(i)];
    for (std::size_t j = 0; j < r.size(); ++j) out(i, as_index(j)) = r[j];
  }
  return KernelPoly(basis_, std::move(out));
}

KernelPoly KernelPoly::scaled(double factor) const { return KernelPoly(basis_, factor * coeffs_); }

double KernelPoly::operator()(double x, double t) const {
  const auto px = basis_values(basis_, x, static_cast<std::size_t>(coeffs_.rows()));
  const auto pt = basis_values(basis_, t, static_cast<std::size_t>(coeffs_.cols()));
  double sum = 0.0;
  for (Index i = 0; i < coeffs_.rows(); ++i) {
    for (Index j = 0; j < coeffs_.cols(); ++j) {
      sum += coeffs_(i, j) * px[static_cast<std::size_t>(i)] * pt[static_cast<std::size_t>(j)];
    }
  }
  return sum;
}

// ---------------------------------------------------------------------------
// Operational matrices

OperatorMatrix build_V(const BasisSpec& basis, std::size_t n) {
  require_size(n);
  const std::size_t s = n;
  // Power coefficients grow like 2^n; the extended-precision pass keeps
  // them within an ulp or so instead of drifting by several.
  std::vector<std::vector<long double>> cols(s, std::vector<long double>(s, 0.0L));
  cols[0][0] = 1.0L;
  for (std::size_t j = 0; j + 1 < s; ++j) {
    // P_{j+1} = ((x - beta_j) P_j - gamma_j P_{j-1}) / alpha_j in monomials.
    const auto [alpha, beta, gamma] = recurrence_ld(basis.family(), j);
    std::vector<long double>& next = cols[j + 1];
    for (std::size_t i = 0; i < s; ++i) {
      long double v = (i > 0 ? cols[j][i - 1] : 0.0L) - beta * cols[j][i];
      if (j > 0) v -= gamma * cols[j - 1][i];
      next[i] = v / alpha;
    }
  }
  Matrix v = Matrix::Zero(as_index(s), as_index(s));
  for (std::size_t j = 0; j < s; ++j)
    for (std::size_t i = 0; i < s; ++i) v(as_index(i), as_index(j)) = static_cast<double>(cols[j][i]);
  return {basis, OperatorRole::V, std::move(v)};
}

OperatorMatrix build_W(const BasisSpec& basis, std::size_t n) {
  require_size(n);
  // w_{j+1} = M w_j, carried in extended precision for the same reason as V.
  std::vector<long double> cur(n, 0.0L), next(n, 0.0L);
  cur[0] = 1.0L;
  Matrix w = Matrix::Zero(as_index(n), as_index(n));
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) w(as_index(i), as_index(j)) = static_cast<double>(cur[i]);
    if (j + 1 == n) break;
    std::fill(next.begin(), next.end(), 0.0L);
    for (std::size_t i = 0; i <= j && i < n; ++i) {
      if (cur[i] == 0.0L) continue;
      const RecurrenceLd r = recurrence_ld(basis.family(), i);
      if (i + 1 < n) next[i + 1] += r.alpha * cur[i];
      next[i] += r.beta * cur[i];
      if (i > 0) next[i - 1] += r.gamma * cur[i];
    }
    std::swap(cur, next);
  }
  return {basis, OperatorRole::W, std::move(w)};
}

OperatorMatrix build_M(const BasisSpec& basis, std::size_t n) {
  require_size(n);
  const Index s = as_index(n);
  Matrix m = Matrix::Zero(s, s);
  for (Index j = 0; j < s; ++j) {
    const Recurrence r = recurrence_coeffs(basis.family(), static_cast<int>(j));
    if (j + 1 < s) m(j + 1, j) = r.alpha;
    m(j, j) = r.beta;
    if (j > 0) m(j - 1, j) = r.gamma;
  }
  return {basis, OperatorRole::M, std::move(m)};
}

OperatorMatrix build_N(const BasisSpec& basis, std::size_t n) {
  require_size(n);
  return {basis, OperatorRole::N, reference_N(basis.family(), as_index(n))};
}

OperatorMatrix build_O(const BasisSpec& basis, std::size_t n) {
  require_size(n);
  return {basis, OperatorRole::O, reference_O(basis.family(), as_index(n))};
}

OperatorMatrix poly_of_M(const BasisSpec& basis, std::span<const double> coeffs, std::size_t n) {
  require_size(n);
  if (coeffs.size() > n) {
    throw DomainError("polynomial has more coefficients than the operator size; truncate explicitly");
  }
  return {basis, OperatorRole::Composite, reference_poly(basis.family(), coeffs, as_index(n))};
}

OperatorMatrix power_of_M(const BasisSpec& basis, int k, std::size_t n) {
  require_size(n);
  if (k < 0) throw DomainError("matrix power must be non-negative");
  const Index s = as_index(n);
  Matrix mu = Matrix::Identity(s, s);
  for (int step = 0; step < k; ++step) mu = apply_M(basis.family(), mu);
  return {basis, OperatorRole::Composite, std::move(mu)};
}

OperatorMatrix poly_of_M_power(const BasisSpec& basis, std::span<const double> power_coeffs,
                               std::size_t n) {
  require_size(n);
  const Index s = as_index(n);
  Matrix acc = Matrix::Zero(s, s);
  // Horner: acc = acc * M + c_k I, from the top coefficient down.
  for (std::size_t k = power_coeffs.size(); k > 0; --k) {
    acc = apply_M(basis.family(), acc);
    acc.diagonal().array() += power_coeffs[k - 1];
  }
  return {basis, OperatorRole::Composite, std::move(acc)};
}

OperatorMatrix order_operator(const BasisSpec& basis, int order, std::size_t n) {
  require_size(n);
  const Index s = as_index(n);
  const Index pad = order < 0 ? -order + 2 : 0;
  Matrix full = order_matrix(basis, order, s + pad);
  OperatorRole role = order > 0 ? OperatorRole::N : (order < 0 ? OperatorRole::O : OperatorRole::Composite);
  return {basis, role, full.topLeftCorner(s, s)};
}

OperatorMatrix diff_operator(const BasisSpec& basis, std::span<const std::vector<double>> p,
                             std::size_t n) {
  require_size(n);
  const Index s = as_index(n);
  std::size_t degree = 0;
  for (const auto& pk : p) degree = std::max(degree, effective_length(pk));
  const Index big = s + as_index(degree) + 2;
  Matrix total = Matrix::Zero(big, big);
  Matrix nk = Matrix::Identity(big, big);
  const Matrix step = basis.c1() * reference_N(basis.family(), big);
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (k > 0) nk = step * nk;
    const std::span<const double> pk(p[k].data(), effective_length(p[k]));
    if (pk.empty() || (pk.size() == 1 && pk[0] == 0.0)) continue;
    total += reference_poly(basis.family(), pk, big) * nk;
  }
  return {basis, OperatorRole::D, total.topLeftCorner(s, s)};
}

OperatorMatrix int_operator(const BasisSpec& basis, std::span<const std::vector<double>> p,
                            std::size_t n) {
  require_size(n);
  const Index s = as_index(n);
  std::size_t degree = 0;
  for (const auto& pl : p) degree = std::max(degree, effective_length(pl));
  const Index big = s + as_index(degree) + as_index(p.size()) + 2;
  Matrix total = Matrix::Zero(big, big);
  Matrix ol = Matrix::Identity(big, big);
  const Matrix step = reference_O(basis.family(), big) / basis.c1();
  for (std::size_t l = 0; l < p.size(); ++l) {
    if (l > 0) ol = step * ol;
    const std::span<const double> pl(p[l].data(), effective_length(p[l]));
    if (pl.empty() || (pl.size() == 1 && pl[0] == 0.0)) continue;
    total += reference_poly(basis.family(), pl, big) * ol;
  }
  return {basis, OperatorRole::S, total.topLeftCorner(s, s)};
}

OperatorMatrix volterra_operator(const KernelPoly& kernel, double x0, std::size_t n, int inner_order) {
  require_size(n);
  const BasisSpec& basis = kernel.basis();
  if (x0 < basis.a() || x0 > basis.b()) throw DomainError("Volterra lower limit outside the domain");
  const Index s = as_index(n);
  const Index big = s + kernel.x_degree() + kernel.t_degree() + 2 * std::abs(inner_order) + 6;
  Matrix full = kernel_matrix(kernel, big, inner_order, &x0);
  Matrix cut = full.topLeftCorner(s, s);
  // the cut drops image coefficients past n; re-anchor the constant term so the
  // kept part still vanishes at x0 (P_0 == 1)
  const auto row = basis_values(basis, x0, n);
  const Eigen::RowVectorXd at_x0 = Eigen::Map<const Eigen::RowVectorXd>(row.data(), s) * cut;
  cut.row(0) -= at_x0;
  OperatorMatrix out{basis, OperatorRole::SV, std::move(cut)};
  out.truncated = kernel.x_degree() >= static_cast<int>(n);
  return out;
}

OperatorMatrix fredholm_operator(const KernelPoly& kernel, std::size_t n, int inner_order) {
  require_size(n);
  const Index s = as_index(n);
  const Index big = s + kernel.x_degree() + kernel.t_degree() + 2 * std::abs(inner_order) + 6;
  Matrix full = kernel_matrix(kernel, big, inner_order, nullptr);
  OperatorMatrix out{kernel.basis(), OperatorRole::SF, full.topLeftCorner(s, s)};
  out.truncated = kernel.x_degree() >= static_cast<int>(n);
  return out;
}

OperatorMatrix condition_row(const BasisSpec& basis, int derivative, double point, std::size_t n) {
  require_size(n);
  if (derivative < 0) throw DomainError("condition derivative order must be non-negative");
  const Index s = as_index(n);
  const auto values = basis_values(basis, point, n);
  Matrix row = Eigen::Map<const Eigen::RowVectorXd>(values.data(), s);
  if (derivative > 0) row = row * order_matrix(basis, derivative, s);
  return {basis, OperatorRole::Condition, std::move(row)};
}

// ---------------------------------------------------------------------------
// Series-level actions

Series apply_order(const Series& s, int order) {
  if (s.size() == 0) throw DomainError("empty series");
  if (order == 0) return s;
  const BasisSpec& basis = s.basis();
  const Index len = as_index(s.size());
  const Vector a = Eigen::Map<const Vector>(s.coeffs().data(), len);
  if (order > 0) {
    Vector cur = a;
    const Matrix step = basis.c1() * reference_N(basis.family(), len);
    for (int k = 0; k < order; ++k) cur = step * cur;
    return Series(basis, std::vector<double>(cur.data(), cur.data() + cur.size()));
  }
  Vector cur = a;
  for (int k = 0; k < -order; ++k) {
    const Index m = cur.size();
    const Matrix omat = reference_O(basis.family(), m + 1) / basis.c1();
    Vector ext = Vector::Zero(m + 1);
    ext.head(m) = cur;
    cur = omat * ext;
  }
  return Series(basis, std::vector<double>(cur.data(), cur.data() + cur.size()));
}

namespace {

Series apply_kernel(const KernelPoly& kernel, const Series& y, const double* x0) {
  require_same_basis(kernel.basis(), y.basis());
  const BasisSpec& basis = kernel.basis();
  Series total(basis, std::size_t{1});
  for (Index i = 0; i < kernel.coeffs().rows(); ++i) {
    const Series integrand = product(kernel.t_series(i), y);
    const Series anti = apply_order(integrand, -1);
    std::vector<double> unit(static_cast<std::size_t>(i) + 1, 0.0);
    unit.back() = 1.0;
    const Series pi(basis, std::move(unit));
    if (x0 != nullptr) {
      Series definite = anti;
      definite.coeffs()[0] -= orth_eval(anti, *x0);
      total += product(pi, definite);
    } else {
      const double value = orth_eval(anti, basis.b()) - orth_eval(anti, basis.a());
      total += value * pi;
    }
  }
  return total;
}

}  // namespace

Series apply_volterra(const KernelPoly& kernel, double x0, const Series& y) {
  return apply_kernel(kernel, y, &x0);
}

Series apply_fredholm(const KernelPoly& kernel, const Series& y) {
  return apply_kernel(kernel, y, nullptr);
}

}  // namespace tauspec
