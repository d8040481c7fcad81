#include "grushin2d/grushin_exact.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Dense>

#include "grushin2d/detail/poly2.hpp"
#include "grushin2d/errors.hpp"

namespace grushin2d {

const char* to_string(SingularityClass c) {
  switch (c) {
    case SingularityClass::Regular: return "regular";
    case SingularityClass::FoldA2: return "fold_A2";
    case SingularityClass::CuspA3: return "cusp_A3";
  }
  return "?";
}

namespace exact {
namespace {

constexpr double kPi = std::numbers::pi;

// sin(u)/u
double sinc(double u) {
  if (std::abs(u) < 0.5) {
    const double u2 = u * u;
    return 1.0 + u2 * (-1.0 / 6 + u2 * (1.0 / 120 + u2 * (-1.0 / 5040 + u2 / 362880)));
  }
  return std::sin(u) / u;
}

// (2u - sin 2u)/(4 u^3): even series 1/3 - u^2/15 + 2u^4/315 - u^6/2835 + 2u^8/155925
double qratio(double u) {
  if (std::abs(u) < 0.5) {
    const double u2 = u * u;
    return 1.0 / 3 +
           u2 * (-1.0 / 15 + u2 * (2.0 / 315 + u2 * (-1.0 / 2835 + u2 * (2.0 / 155925))));
  }
  return (2 * u - std::sin(2 * u)) / (4 * u * u * u);
}

// (u cos u - sin u)/u^3
double psi(double u) {
  if (std::abs(u) < 0.5) {
    const double u2 = u * u;
    return -1.0 / 3 +
           u2 * (1.0 / 30 + u2 * (-1.0 / 840 + u2 * (1.0 / 45360 - u2 / 3991680)));
  }
  return (u * std::cos(u) - std::sin(u)) / (u * u * u);
}

void require_regular_theta(double s, const char* who) {
  if (s == 0.0) throw SingularThetaError(std::string(who) + ": theta = 0 (mod pi)");
}

}  // namespace

Point geodesic(double theta, double t) {
  const double s = std::sin(theta), c = std::cos(theta);
  const double u = t * s;
  // x = -sin(th - u)/sin th  ==  -cos u + t cos th sinc u  (exact rewrite)
  const double x = -std::cos(u) + t * c * sinc(u);
  if (s == 0.0) return {x, 0.0};
  // y = (2u - sin 2u)/(4 s^2) + sin(2u)/2 - cos th sin^2 u / s, with
  // (2u - sin 2u)/(4 s^2) = t^2 u qratio(u) and sin^2 u / s = t sin u sinc u.
  const double y = t * t * u * qratio(u) + 0.5 * std::sin(2 * u) - c * t * std::sin(u) * sinc(u);
  return {x, y};
}

std::array<double, 2> velocity(double theta, double t) {
  const double s = std::sin(theta), c = std::cos(theta);
  const double u = t * s;
  const double xdot = std::cos(theta - u);
  // ydot = sin^2(th - u)/s = s cos^2 u - cos th sin 2u + cos^2 th t sin u sinc u
  const double ydot =
      s * std::cos(u) * std::cos(u) - c * std::sin(2 * u) + c * c * t * std::sin(u) * sinc(u);
  return {xdot, ydot};
}

double jacobian(double theta, double t) {
  const double s = std::sin(theta), c = std::cos(theta);
  require_regular_theta(s, "jacobian");
  const double u = t * s;
  return t * t * t * psi(u) - t * std::cos(u) + t * t * c * sinc(u);
}

double x_theta_derivative(double theta, double t) {
  const double s = std::sin(theta);
  require_regular_theta(s, "x_theta_derivative");
  return jacobian(theta, t) * s;  // dgamma/dtheta = Jac * (sin th, -cos(th - u))
}

double cut_time(double theta) {
  const double s = std::sin(theta);
  if (s == 0.0) return std::numeric_limits<double>::infinity();
  return kPi / std::abs(s);
}

Point cut_point(double theta) {
  const double s = std::sin(theta);
  require_regular_theta(s, "cut_point");
  return {1.0, kPi / (2.0 * s * std::abs(s))};
}

double conjugate_time(double theta) {
  const double s = std::sin(theta);
  require_regular_theta(s, "conjugate_time");
  const double step = 0.1 / std::abs(s);
  const double t_max = 4.0 * kPi / std::abs(s);
  double lo = step, flo = jacobian(theta, lo);
  double hi = lo;
  bool bracketed = false;
  while (hi < t_max) {
    hi = std::min(hi + step, t_max);
    const double fhi = jacobian(theta, hi);
    if (flo == 0.0) return lo;
    if (flo * fhi <= 0.0) {
      bracketed = true;
      break;
    }
    lo = hi;
    flo = fhi;
  }
  if (!bracketed)
    throw RootNotBracketedError("conjugate_time: no Jacobian sign change in [0, 4pi/|sin th|]");
  while (hi - lo > 1e-12 && hi - lo > 8 * std::numeric_limits<double>::epsilon() * hi) {
    const double mid = 0.5 * (lo + hi);
    const double fmid = jacobian(theta, mid);
    if (fmid == 0.0) return mid;
    if (flo * fmid < 0.0)
      hi = mid;
    else {
      lo = mid;
      flo = fmid;
    }
  }
  return 0.5 * (lo + hi);
}

double djac_dtheta(double theta, double t) {
  const double s = std::sin(theta), c = std::cos(theta);
  require_regular_theta(s, "djac_dtheta");
  const double u = t * s;
  const double P = 2.0 - 3.0 * t * c + 6.0 * std::cos(2 * theta) - t * std::cos(3 * theta);
  const double Q = t * s - 6.0 * std::sin(2 * theta) + t * std::sin(3 * theta);
  const double numerator_dtheta = (u / 4.0) * (std::sin(u) * P + std::cos(u) * Q);
  return numerator_dtheta / (s * s * s) - 3.0 * c * jacobian(theta, t) / s;
}

double degeneracy_indicator(double theta, double t) {
  const double c = std::cos(theta);
  return -(6.0 + t * t - 6.0 * t * c + t * t * std::cos(2 * theta)) * std::sin(2 * theta);
}

SingularityClass classify(double theta) {
  const double t_c = conjugate_time(theta);
  const double d1 = djac_dtheta(theta, t_c);
  const double tau = 1e-6 * (1.0 + std::abs(t_c));
  if (std::abs(d1) > tau) return SingularityClass::FoldA2;
  const double h = 1e-4;
  const double d2 =
      (jacobian(theta + h, t_c) - 2.0 * jacobian(theta, t_c) + jacobian(theta - h, t_c)) /
      (h * h);
  if (std::abs(d2) > 1e-3 * (1.0 + std::abs(t_c))) return SingularityClass::CuspA3;
  throw UnclassifiedDegeneracyError("classify: both fold and cusp tests failed");
}

namespace {

using Jet = detail::Poly2<8>;

/// Least-squares Taylor extraction of the exact map around (pi/2, pi):
/// fit a total-degree-8 polynomial on an 11x11 stencil, basis normalized to
/// [-1,1]^2 for conditioning.
std::pair<Jet, Jet> fd_jet() {
  constexpr int kHalf = 5;
  constexpr double kH = 0.016;
  constexpr double kR = kHalf * kH;  // stencil half-width
  const int npts = (2 * kHalf + 1) * (2 * kHalf + 1);
  Eigen::MatrixXd A(npts, Jet::kTerms);
  Eigen::VectorXd bx(npts), by(npts);
  int row = 0;
  for (int a = -kHalf; a <= kHalf; ++a)
    for (int b = -kHalf; b <= kHalf; ++b) {
      const double th1 = a * kH, s1 = b * kH;
      const Point p = geodesic(kPi / 2 + th1, kPi + s1);
      bx(row) = p.x;
      by(row) = p.y;
      const double xi = double(a) / kHalf, eta = double(b) / kHalf;
      for (int d = 0; d <= 8; ++d)
        for (int i = 0; i <= d; ++i)
          A(row, Jet::index(i, d - i)) = std::pow(xi, i) * std::pow(eta, d - i);
      ++row;
    }
  const Eigen::VectorXd cx = A.colPivHouseholderQr().solve(bx);
  const Eigen::VectorXd cy = A.colPivHouseholderQr().solve(by);
  Jet jx, jy;
  for (int d = 0; d <= 8; ++d)
    for (int i = 0; i <= d; ++i) {
      const double scale = std::pow(kR, d);
      jx.set(i, d - i, cx(Jet::index(i, d - i)) / scale);
      jy.set(i, d - i, cy(Jet::index(i, d - i)) / scale);
    }
  return {jx, jy};
}

/// Inverse of a jet map F = (F1, F2) with near-identity linear part, to
/// total degree 3: Newton iteration G <- G - L^{-1} (F o G - id).
std::pair<Jet, Jet> invert_jet(const Jet& F1, const Jet& F2) {
  const double a = F1.coeff(1, 0), b = F1.coeff(0, 1);
  const double c = F2.coeff(1, 0), d = F2.coeff(0, 1);
  const double det = a * d - b * c;
  const Jet U = Jet::var_u(), V = Jet::var_v();
  auto linv = [&](const Jet& p, const Jet& q) {
    return std::pair<Jet, Jet>{(p * d - q * b) * (1.0 / det), (q * a - p * c) * (1.0 / det)};
  };
  auto [G1, G2] = linv(U, V);
  for (int it = 0; it < 4; ++it) {
    const Jet R1 = F1.compose(G1, G2).truncate(3) - U;
    const Jet R2 = F2.compose(G1, G2).truncate(3) - V;
    auto [C1, C2] = linv(R1, R2);
    G1 = (G1 - C1).truncate(3);
    G2 = (G2 - C2).truncate(3);
  }
  return {G1, G2};
}

}  // namespace

CuspNormalFormReport cusp_normal_form_check() {
  auto [jx, jy] = fd_jet();  // variables (theta1, s1)

  // displayed Taylor series at (theta1, s1) = (0,0)
  Jet ref_x, ref_y;
  ref_x.set(0, 0, 1.0);
  ref_x.set(0, 2, -0.5);
  ref_x.set(1, 1, 1.0);
  ref_x.set(2, 1, kPi / 2);
  ref_x.set(3, 0, -kPi / 2);
  ref_y.set(0, 0, kPi / 2);
  ref_y.set(0, 1, 1.0);
  ref_y.set(0, 3, -1.0 / 3);
  ref_y.set(1, 2, 1.0);
  ref_y.set(2, 1, -0.5);
  const double inter_res =
      std::max((jx - ref_x).max_abs_coeff(3), (jy - ref_y).max_abs_coeff(3));

  // flattening coordinates: x1 = x - 1 + (y - pi/2)^2 / 2, y1 = y - pi/2
  const Jet one = Jet::one();
  const Jet ytil = jy - one * (kPi / 2);
  Jet x1 = (jx - one + (ytil * ytil) * 0.5).truncate(3);
  Jet y1 = ytil.truncate(3);

  // variable change theta2 = th1 + (pi/2) th1^2, s2 = y1(th1, s1); the second
  // component is the extracted jet itself, which is what makes y2 land on s3
  // exactly. Numerically it coincides with the displayed cubic for s2.
  const Jet T1 = Jet::var_u();
  const Jet F1 = (T1 + (T1 * T1) * (kPi / 2)).truncate(3);
  const Jet F2 = y1;
  auto [th1_of, s1_of] = invert_jet(F1, F2);
  Jet x2 = x1.compose(th1_of, s1_of).truncate(3);
  Jet y2 = y1.compose(th1_of, s1_of).truncate(3);

  // closing scalings: x <- -(pi^2/4) x, y <- (pi/2) y, th3 = (pi/2) th2, s3 = (pi/2) s2
  const Jet T3 = Jet::var_u() * (2.0 / kPi), S3 = Jet::var_v() * (2.0 / kPi);
  Jet fx = (x2 * (-kPi * kPi / 4)).compose(T3, S3).truncate(3);
  Jet fy = (y2 * (kPi / 2)).compose(T3, S3).truncate(3);

  Jet target_x, target_y;
  target_x.set(3, 0, 1.0);
  target_x.set(1, 1, -1.0);
  target_y.set(0, 1, 1.0);
  const double final_res =
      std::max((fx - target_x).max_abs_coeff(3), (fy - target_y).max_abs_coeff(3));

  CuspNormalFormReport r;
  r.intermediate_residual = inter_res;
  r.final_residual = final_res;
  r.s3_linear_coeff = fy.coeff(0, 1);
  r.pass = final_res <= 1e-6;
  return r;
}

}  // namespace exact
}  // namespace grushin2d
