#pragma once

// Dense bivariate polynomials of bounded total degree, for jet manipulation.

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <cstddef>

namespace grushin2d::detail {

template <int D>
class Poly2 {
public:
  static constexpr int kTerms = (D + 1) * (D + 2) / 2;

  Poly2() { c_.fill(0.0); }

  static constexpr int index(int i, int j) {
    // terms ordered by total degree, then by i
    const int d = i + j;
    return d * (d + 1) / 2 + i;
  }

  double coeff(int i, int j) const {
    return (i < 0 || j < 0 || i + j > D) ? 0.0 : c_[index(i, j)];
  }
  void set(int i, int j, double v) {
    assert(i >= 0 && j >= 0 && i + j <= D);
    c_[index(i, j)] = v;
  }
  void add(int i, int j, double v) {
    if (i >= 0 && j >= 0 && i + j <= D) c_[index(i, j)] += v;
  }

  Poly2 operator+(const Poly2& o) const {
    Poly2 r;
    for (int k = 0; k < kTerms; ++k) r.c_[k] = c_[k] + o.c_[k];
    return r;
  }
  Poly2 operator-(const Poly2& o) const {
    Poly2 r;
    for (int k = 0; k < kTerms; ++k) r.c_[k] = c_[k] - o.c_[k];
    return r;
  }
  Poly2 operator*(double s) const {
    Poly2 r;
    for (int k = 0; k < kTerms; ++k) r.c_[k] = c_[k] * s;
    return r;
  }

  /// Product truncated at total degree D.
  Poly2 operator*(const Poly2& o) const {
    Poly2 r;
    for (int d1 = 0; d1 <= D; ++d1)
      for (int i1 = 0; i1 <= d1; ++i1) {
        const double a = coeff(i1, d1 - i1);
        if (a == 0.0) continue;
        for (int d2 = 0; d2 + d1 <= D; ++d2)
          for (int i2 = 0; i2 <= d2; ++i2) {
            const double b = o.coeff(i2, d2 - i2);
            if (b != 0.0) r.add(i1 + i2, d1 - i1 + d2 - i2, a * b);
          }
      }
    return r;
  }

  /// Substitute u <- p, v <- q (both polynomials with zero constant term is
  /// not required, but truncation is at total degree D).
  Poly2 compose(const Poly2& p, const Poly2& q) const {
    // powers of p and q up to D
    std::array<Poly2, D + 1> pp, qq;
    pp[0] = one();
    qq[0] = one();
    for (int k = 1; k <= D; ++k) {
      pp[k] = pp[k - 1] * p;
      qq[k] = qq[k - 1] * q;
    }
    Poly2 r;
    for (int d = 0; d <= D; ++d)
      for (int i = 0; i <= d; ++i) {
        const double a = coeff(i, d - i);
        if (a != 0.0) r = r + (pp[i] * qq[d - i]) * a;
      }
    return r;
  }

  Poly2 truncate(int max_total_degree) const {
    Poly2 r;
    for (int d = 0; d <= D && d <= max_total_degree; ++d)
      for (int i = 0; i <= d; ++i) r.set(i, d - i, coeff(i, d - i));
    return r;
  }

  double max_abs_coeff(int max_total_degree = D) const {
    double m = 0;
    for (int d = 0; d <= max_total_degree && d <= D; ++d)
      for (int i = 0; i <= d; ++i) m = std::max(m, std::abs(coeff(i, d - i)));
    return m;
  }

  static Poly2 one() {
    Poly2 r;
    r.set(0, 0, 1.0);
    return r;
  }
  static Poly2 var_u() {
    Poly2 r;
    r.set(1, 0, 1.0);
    return r;
  }
  static Poly2 var_v() {
    Poly2 r;
    r.set(0, 1, 1.0);
    return r;
  }

private:
  std::array<double, kTerms> c_;
};

}  // namespace grushin2d::detail
