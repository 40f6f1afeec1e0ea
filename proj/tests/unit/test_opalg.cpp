#include <cmath>
#include <random>
#include <vector>

#include <doctest.h>

#include <tauspec/basis.hpp>
#include <tauspec/opalg.hpp>

#include "rational_oracle.hpp"

using namespace tauspec;

namespace {

const BasisSpec cheb_ref(Family::ChebyshevT, -1.0, 1.0);
const BasisSpec leg_ref(Family::LegendreP, -1.0, 1.0);
const BasisSpec cheb01(Family::ChebyshevT, 0.0, 1.0);

Vector random_coeffs(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vector a(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < a.size(); ++i) a(i) = u(rng);
  return a;
}

Series as_series(const BasisSpec& b, const Vector& v) { return Series(b, std::vector<double>(v.begin(), v.end())); }

// Gauss-Legendre with m nodes, exact for degree <= 2m - 1
template <class F>
double gauss(F f, double lo, double hi, int m = 24) {
  double sum = 0.0;
  for (int i = 1; i <= m; ++i) {
    double x = std::cos(M_PI * (i - 0.25) / (m + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= m; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = m * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    sum += w * f(0.5 * (hi - lo) * x + 0.5 * (hi + lo));
  }
  return 0.5 * (hi - lo) * sum;
}

}  // namespace

TEST_CASE("build_V and build_W small cases") {
  const Matrix v = build_V(cheb_ref, 3).entries;
  Matrix ref(3, 3);
  ref << 1, 0, -1, 0, 1, 0, 0, 0, 2;
  CHECK((v - ref).cwiseAbs().maxCoeff() == 0.0);

  const Matrix vl = build_V(leg_ref, 3).entries;
  ref << 1, 0, -0.5, 0, 1, 0, 0, 0, 1.5;
  CHECK((vl - ref).cwiseAbs().maxCoeff() < 1e-15);

  const Matrix w = build_W(cheb_ref, 3).entries;
  ref << 1, 0, 0.5, 0, 1, 0, 0, 0, 0.5;
  CHECK((w - ref).cwiseAbs().maxCoeff() < 1e-15);

  // x^3 = (3 P1 + 2 P3) / 5
  const Matrix wl = build_W(leg_ref, 4).entries;
  CHECK(wl(0, 3) == doctest::Approx(0.0));
  CHECK(wl(1, 3) == doctest::Approx(0.6));
  CHECK(wl(2, 3) == doctest::Approx(0.0));
  CHECK(wl(3, 3) == doctest::Approx(0.4));

  for (const BasisSpec& b : {cheb_ref, leg_ref}) {
    const Matrix v1 = build_V(b, 6).entries;
    CHECK(v1(0, 0) == 1.0);
    CHECK(v1.col(0).tail(5).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("W V = I") {
  for (const BasisSpec& b : {cheb_ref, leg_ref}) {
    // Legendre power coefficients pass 1e4 around n = 16; beyond that the
    // product of even correctly rounded W and V drifts above 1e-12.
    const std::size_t top = b.family() == Family::ChebyshevT ? 30 : 16;
    for (std::size_t n = 1; n <= top; ++n) {
      const Matrix wv = build_W(b, n).entries * build_V(b, n).entries;
      const double err = (wv - Matrix::Identity(wv.rows(), wv.cols())).cwiseAbs().maxCoeff();
      CHECK_MESSAGE(err < 1e-12, family_name(b.family()), " n=", n, " err=", err);
    }
  }
}

TEST_CASE("W and V are the correctly rounded exact matrices") {
  for (Family f : {Family::ChebyshevT, Family::LegendreP}) {
    const BasisSpec b(f, -1.0, 1.0);
    for (std::size_t n : {8u, 20u, 30u}) {
      const Matrix w = build_W(b, n).entries;
      const Matrix v = build_V(b, n).entries;
      const oracle::QMat qw = oracle::W(f, n);
      const oracle::QMat qv = oracle::V(f, n);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
          const double rw = oracle::to_double(qw[i][j]);
          const double rv = oracle::to_double(qv[i][j]);
          CHECK(std::abs(w(ii, jj) - rw) <= std::abs(rw) * 2.3e-16);
          CHECK(std::abs(v(ii, jj) - rv) <= std::abs(rv) * 2.3e-16);
        }
    }
  }
}

TEST_CASE("M, N, O equal the exact monomial route") {
  for (Family f : {Family::ChebyshevT, Family::LegendreP}) {
    const BasisSpec b(f, -1.0, 1.0);
    for (std::size_t n = 1; n <= 12; ++n) {
      CHECK(oracle::max_diff(build_M(b, n).entries, oracle::monomial_route(f, oracle::Op::M, n)) < 1e-12);
      CHECK(oracle::max_diff(build_N(b, n).entries, oracle::monomial_route(f, oracle::Op::N, n)) < 1e-12);
      CHECK(oracle::max_diff(build_O(b, n).entries, oracle::monomial_route(f, oracle::Op::O, n)) < 1e-12);
    }
  }
}

TEST_CASE("N and O columns") {
  const Matrix n4 = build_N(cheb_ref, 4).entries;
  CHECK(n4.col(0).cwiseAbs().maxCoeff() == 0.0);
  CHECK(n4(0, 1) == 1.0);
  CHECK(n4.col(1).tail(3).cwiseAbs().maxCoeff() == 0.0);
  CHECK(n4(0, 3) == doctest::Approx(3.0));
  CHECK(n4(1, 3) == doctest::Approx(0.0));
  CHECK(n4(2, 3) == doctest::Approx(6.0));
  CHECK(n4(3, 3) == doctest::Approx(0.0));

  const Matrix o4 = build_O(cheb_ref, 4).entries;
  Vector c0(4), c1(4), c2(4);
  c0 << 0, 1, 0, 0;
  c1 << 0.25, 0, 0.25, 0;
  c2 << 0, -0.5, 0, 1.0 / 6.0;
  CHECK((o4.col(0) - c0).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((o4.col(1) - c1).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((o4.col(2) - c2).cwiseAbs().maxCoeff() < 1e-15);

  // Legendre M subdiagonal starts (1, 2/3)
  const Matrix ml = build_M(leg_ref, 3).entries;
  CHECK(ml(1, 0) == doctest::Approx(1.0));
  CHECK(ml(2, 1) == doctest::Approx(2.0 / 3.0));
  CHECK(ml(0, 1) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("poly_of_M") {
  const std::vector<double> one{1.0};
  CHECK((poly_of_M(cheb_ref, one, 5).entries - Matrix::Identity(5, 5)).cwiseAbs().maxCoeff() == 0.0);
  const std::vector<double> t1{0.0, 1.0};
  const Matrix m = build_M(cheb_ref, 6).entries;
  CHECK((poly_of_M(cheb_ref, t1, 6).entries - m).cwiseAbs().maxCoeff() == 0.0);
  const std::vector<double> t2{0.0, 0.0, 1.0};
  const Matrix expect = 2.0 * m * m - Matrix::Identity(6, 6);
  CHECK((poly_of_M(cheb_ref, t2, 6).entries - expect).cwiseAbs().maxCoeff() < 1e-13);
  const std::vector<double> x3{0.0, 0.0, 0.0, 1.0};
  CHECK((power_of_M(leg_ref, 3, 7).entries - build_M(leg_ref, 7).entries * build_M(leg_ref, 7).entries *
                                                  build_M(leg_ref, 7).entries)
            .cwiseAbs()
            .maxCoeff() < 1e-14);
  CHECK((poly_of_M_power(leg_ref, x3, 7).entries - power_of_M(leg_ref, 3, 7).entries).cwiseAbs().maxCoeff() <
        1e-15);
  CHECK_THROWS(poly_of_M(cheb_ref, x3, 2));
}

TEST_CASE("diff_operator and int_operator") {
  const std::vector<std::vector<double>> id{{1.0}};
  CHECK((diff_operator(cheb01, id, 6).entries - Matrix::Identity(6, 6)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((int_operator(cheb01, id, 6).entries - Matrix::Identity(6, 6)).cwiseAbs().maxCoeff() == 0.0);

  // y' - y on [0, 1]: 2N - I
  const std::vector<std::vector<double>> ode{{-1.0}, {1.0}};
  const Matrix d = diff_operator(cheb01, ode, 6).entries;
  CHECK((d - (2.0 * build_N(cheb01, 6).entries - Matrix::Identity(6, 6))).cwiseAbs().maxCoeff() < 1e-15);

  // x y' on [-1, 1]: M N
  const std::vector<std::vector<double>> xd{{0.0}, {0.0, 1.0}};
  const Matrix mn = build_M(cheb_ref, 7).entries * build_N(cheb_ref, 7).entries;
  CHECK((diff_operator(cheb_ref, xd, 7).entries - mn).cwiseAbs().maxCoeff() < 1e-14);

  // x * antiderivative on [-1, 1]: leading block of the infinite M O
  const std::vector<std::vector<double>> xi{{0.0}, {0.0, 1.0}};
  for (Family f : {Family::ChebyshevT, Family::LegendreP}) {
    const BasisSpec b(f, -1.0, 1.0);
    const std::size_t n = 8, s = n + 3;
    const oracle::QMat mo = oracle::leading(
        oracle::mul(oracle::mul(oracle::W(f, s), oracle::mul(oracle::MX(s), oracle::OX(s))), oracle::V(f, s)), n);
    CHECK(oracle::max_diff(int_operator(b, xi, n).entries, mo) < 1e-13);
  }

  // S with p_1 = 1 on [0, 1]: column 1 is the antiderivative of 1 (x - 1/2)
  const std::vector<std::vector<double>> s1{{0.0}, {1.0}};
  const Matrix s = int_operator(cheb01, s1, 5).entries;
  CHECK(s(0, 0) == doctest::Approx(0.0));
  CHECK(s(1, 0) == doctest::Approx(0.5));
  CHECK(s.col(0).tail(3).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("calculus identity (c1 N)(O / c1) = I") {
  for (Family f : {Family::ChebyshevT, Family::LegendreP}) {
    for (const BasisSpec& b : {BasisSpec(f, -1.0, 1.0), BasisSpec(f, 0.0, 1.0), BasisSpec(f, -3.0, 5.0)}) {
      const std::size_t n = 24;
      const Matrix prod = order_operator(b, 1, n).entries * order_operator(b, -1, n).entries;
      const double err = (prod - Matrix::Identity(n, n)).topLeftCorner(n - 1, n - 1).cwiseAbs().maxCoeff();
      CHECK(err < 1e-12);
    }
  }
}

TEST_CASE("N action matches a centred difference") {
  std::mt19937_64 rng(11);
  const double h = 1e-5;
  for (Family f : {Family::ChebyshevT, Family::LegendreP}) {
    const BasisSpec b(f, 0.0, 2.0);
    for (int trial = 0; trial < 20; ++trial) {
      const std::size_t n = 11;
      const Vector a = random_coeffs(rng, n);
      const Series y = as_series(b, a);
      const Series dy = as_series(b, order_operator(b, 1, n).entries * a);
      for (double x : {0.3, 1.0, 1.7}) {
        const double fd = (orth_eval(y, x + h) - orth_eval(y, x - h)) / (2.0 * h);
        CHECK(std::abs(orth_eval(dy, x) - fd) < 1e-5);
      }
    }
  }
}

TEST_CASE("condition rows") {
  const Matrix row = condition_row(cheb01, 0, 0.0, 6).entries;
  for (int j = 0; j < 6; ++j) CHECK(row(0, j) == doctest::Approx(j % 2 ? -1.0 : 1.0));
  // y'(1) for T*_j on [0,1] is 2 j^2
  const Matrix d1 = condition_row(cheb01, 1, 1.0, 6).entries;
  for (int j = 0; j < 6; ++j) CHECK(d1(0, j) == doctest::Approx(2.0 * j * j));
}

TEST_CASE("kernel polynomials") {
  Matrix pc(2, 2);
  pc << 0, 1, -1, 0;  // x^0 t^1 - x^1 t^0 = t - x
  const KernelPoly k = KernelPoly::from_power(cheb01, pc);
  CHECK(k(0.3, 0.8) == doctest::Approx(0.5));
  CHECK(k(1.0, 0.0) == doctest::Approx(-1.0));
  CHECK(k.x_degree() == 1);
  CHECK(k.t_degree() == 1);
}

TEST_CASE("Volterra operator") {
  Matrix one(1, 1);
  one << 1.0;
  const KernelPoly k1 = KernelPoly::from_power(cheb01, one);
  const Matrix v = volterra_operator(k1, 0.0, 6).entries;
  CHECK(v(0, 0) == doctest::Approx(0.5));
  CHECK(v(1, 0) == doctest::Approx(0.5));
  CHECK(v.col(0).tail(4).cwiseAbs().maxCoeff() < 1e-16);
  CHECK((v * Vector::Zero(6)).cwiseAbs().maxCoeff() == 0.0);

  std::mt19937_64 rng(3);
  Matrix pc(3, 2);
  pc << 0.5, 1.0, -1.0, 0.25, 2.0, 0.0;
  for (Family f : {Family::ChebyshevT, Family::LegendreP}) {
    const BasisSpec b(f, 0.0, 2.0);
    const KernelPoly k = KernelPoly::from_power(b, pc);
    for (double x0 : {0.0, 0.7, 2.0}) {
      const std::size_t n = 12;
      const Matrix op = volterra_operator(k, x0, n).entries;
      for (int trial = 0; trial < 5; ++trial) {
        // inputs of degree <= n - 5 so the image fits in n coefficients
        Vector a = random_coeffs(rng, n);
        a.tail(5).setZero();
        const Series y = as_series(b, a);
        const Series image = as_series(b, op * a);
        CHECK(std::abs(orth_eval(image, x0)) <= 1e-12 * std::max(1.0, a.cwiseAbs().maxCoeff()));
        for (double x : {0.2, 1.1, 1.9}) {
          const double quad = gauss([&](double t) { return k(x, t) * orth_eval(y, t); }, x0, x);
          CHECK(std::abs(orth_eval(image, x) - quad) < 1e-11);
        }
        const Series full = apply_volterra(k, x0, y);
        for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(full[i] - image[i]) < 1e-13);
      }
      // full-degree input: the cut image still vanishes at x0
      const Vector a = random_coeffs(rng, n);
      CHECK(std::abs(orth_eval(as_series(b, op * a), x0)) <= 1e-12 * std::max(1.0, a.cwiseAbs().maxCoeff()));
    }
  }
}

TEST_CASE("Fredholm operator") {
  Matrix one(1, 1);
  one << 1.0;
  const KernelPoly k1 = KernelPoly::from_power(cheb01, one);
  const Matrix f = fredholm_operator(k1, 6).entries;
  const double expect[] = {1.0, 0.0, -1.0 / 3.0, 0.0, -1.0 / 15.0, 0.0};
  for (int j = 0; j < 6; ++j) CHECK(std::abs(f(0, j) - expect[j]) < 1e-15);
  CHECK(f.bottomRows(5).cwiseAbs().maxCoeff() == 0.0);

  // odd about the midpoint integrates to zero
  Vector odd = Vector::Zero(6);
  odd(1) = 1.0;
  odd(3) = -0.4;
  CHECK(std::abs((f * odd)(0)) < 1e-16);

  // image degree never exceeds the kernel's x-degree
  Matrix pc(3, 3);
  pc << 1.0, 0.5, -0.25, 2.0, 0.0, 1.0, -1.0, 3.0, 0.0;
  std::mt19937_64 rng(5);
  for (Family fam : {Family::ChebyshevT, Family::LegendreP}) {
    const BasisSpec b(fam, -1.0, 3.0);
    const KernelPoly k = KernelPoly::from_power(b, pc);
    const std::size_t n = 10;
    const Matrix op = fredholm_operator(k, n).entries;
    CHECK(op.bottomRows(n - 3).cwiseAbs().maxCoeff() == 0.0);
    const Vector a = random_coeffs(rng, n);
    const Series y = as_series(b, a);
    const Series image = as_series(b, op * a);
    for (double x : {-0.5, 1.0, 2.5}) {
      const double quad = gauss([&](double t) { return k(x, t) * orth_eval(y, t); }, -1.0, 3.0);
      CHECK(std::abs(orth_eval(image, x) - quad) < 1e-10);
    }
  }
}
