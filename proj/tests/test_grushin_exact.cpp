#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "grushin2d/grushin_exact.hpp"
#include "grushin2d/errors.hpp"

using namespace grushin2d;
using namespace grushin2d::exact;

namespace {
constexpr double kPi = 3.14159265358979323846;

double fd_x_theta(double theta, double t, double h = 1e-6) {
  return (geodesic(theta + h, t).x - geodesic(theta - h, t).x) / (2 * h);
}
}  // namespace

TEST_CASE("geodesic hits the paper's named points") {
  const Point cut = geodesic(kPi / 2, kPi);
  CHECK(cut.x == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(cut.y == doctest::Approx(kPi / 2).epsilon(1e-14));

  const Point line = geodesic(0.0, 2.0);
  CHECK(line.x == 1.0);
  CHECK(line.y == 0.0);
  const Point back = geodesic(kPi, 1.5);
  CHECK(back.x == -2.5);

  for (double theta : {0.0, 0.4, kPi / 2, 3.0, 5.2}) {
    const Point start = geodesic(theta, 0.0);
    CHECK(start.x == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(std::abs(start.y) < 1e-15);
  }
}

TEST_CASE("frozen closed-form values (50-digit reference)") {
  const Point p1 = geodesic(kPi / 3, 1.0);
  CHECK(p1.x == doctest::Approx(-0.208057014523878).epsilon(1e-13));
  CHECK(p1.y == doctest::Approx(0.40683089504341243).epsilon(1e-13));
  const Point p2 = geodesic(0.7, 2.5);
  CHECK(p2.x == doctest::Approx(1.2260415228388418).epsilon(1e-13));
  CHECK(p2.y == doctest::Approx(0.76310147484571296).epsilon(1e-13));
  const Point p3 = geodesic(2.2, 1.3);
  CHECK(p3.x == doctest::Approx(-1.1284359895945097).epsilon(1e-13));
  CHECK(p3.y == doctest::Approx(1.4536425047176762).epsilon(1e-13));
}

TEST_CASE("geodesic is smooth across the line rays") {
  // the rewrites have no branch at sin(theta) -> 0
  for (double eps : {1e-5, 1e-8, 1e-11}) {
    const Point p = geodesic(eps, 3.0);
    const Point q = geodesic(0.0, 3.0);
    CHECK(std::abs(p.x - q.x) < 1e-4);
    CHECK(std::abs(p.y) < 1e-4);
  }
}

TEST_CASE("x_theta_derivative") {
  for (double theta : {0.3, 1.2, 2.9}) CHECK(x_theta_derivative(theta, 0.0) == 0.0);
  // small-t behaviour ~ -t sin th
  const double d = x_theta_derivative(kPi / 4, 0.01);
  CHECK(d == doctest::Approx(-0.01 * std::sin(kPi / 4)).epsilon(2e-2));
  // finite-difference oracle
  CHECK(x_theta_derivative(kPi / 3, 1.0) == doctest::Approx(fd_x_theta(kPi / 3, 1.0)).epsilon(1e-8));
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> Uth(0.25, kPi - 0.25), Ut(0.1, 6.0);
  for (int k = 0; k < 12; ++k) {
    const double th = Uth(rng), t = Ut(rng);
    CHECK(x_theta_derivative(th, t) ==
          doctest::Approx(fd_x_theta(th, t)).epsilon(1e-8).scale(1.0));
  }
  CHECK_THROWS_AS((void)x_theta_derivative(0.0, 1.0), SingularThetaError);
}

TEST_CASE("jacobian reduces to -sin t on the vertical ray") {
  CHECK(jacobian(kPi / 2, kPi) == doctest::Approx(0.0).scale(1.0).epsilon(1e-14));
  CHECK(jacobian(kPi / 2, kPi / 2) == doctest::Approx(-1.0).epsilon(1e-14));
}

TEST_CASE("jacobian equals the finite-difference determinant of the map") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> Uth(0.3, kPi - 0.3), Ut(0.2, 5.0);
  const double h = 1e-5;
  for (int k = 0; k < 10; ++k) {
    const double th = Uth(rng), t = Ut(rng);
    const Point pp = geodesic(th + h, t), pm = geodesic(th - h, t);
    const Point tp = geodesic(th, t + h), tm = geodesic(th, t - h);
    const double dxth = (pp.x - pm.x) / (2 * h), dyth = (pp.y - pm.y) / (2 * h);
    const double dxt = (tp.x - tm.x) / (2 * h), dyt = (tp.y - tm.y) / (2 * h);
    const double det = dxth * dyt - dxt * dyth;
    CHECK(jacobian(th, t) == doctest::Approx(det).epsilon(1e-7).scale(1.0));
  }
}

TEST_CASE("velocity is the t-derivative of the map") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> Uth(0.0, 2 * kPi), Ut(0.1, 5.0);
  const double h = 1e-6;
  for (int k = 0; k < 10; ++k) {
    const double th = Uth(rng), t = Ut(rng);
    const auto v = velocity(th, t);
    const Point tp = geodesic(th, t + h), tm = geodesic(th, t - h);
    CHECK(v[0] == doctest::Approx((tp.x - tm.x) / (2 * h)).epsilon(1e-8).scale(1.0));
    CHECK(v[1] == doctest::Approx((tp.y - tm.y) / (2 * h)).epsilon(1e-8).scale(1.0));
  }
}

TEST_CASE("cut time and cut point") {
  CHECK(cut_time(kPi / 2) == doctest::Approx(kPi).epsilon(1e-15));
  CHECK(cut_time(kPi / 6) == doctest::Approx(2 * kPi).epsilon(1e-14));
  CHECK(std::isinf(cut_time(0.0)));

  const Point c1 = cut_point(kPi / 2);
  CHECK(c1.x == 1.0);
  CHECK(c1.y == doctest::Approx(kPi / 2).epsilon(1e-15));
  const Point c2 = cut_point(-kPi / 2);
  CHECK(c2.y == doctest::Approx(-kPi / 2).epsilon(1e-15));
  const Point c3 = cut_point(kPi / 6);
  CHECK(c3.y == doctest::Approx(2 * kPi).epsilon(1e-14));
  CHECK_THROWS_AS((void)cut_point(0.0), SingularThetaError);
}

TEST_CASE("conjugate_time against frozen references") {
  CHECK(conjugate_time(kPi / 2) == doctest::Approx(kPi).epsilon(1e-12));
  CHECK(conjugate_time(1.0) == doctest::Approx(6.4905952601529613).epsilon(1e-11));
  CHECK(conjugate_time(kPi / 3) == doctest::Approx(6.3510636859801581).epsilon(1e-11));
  CHECK(conjugate_time(1.8) == doctest::Approx(3.3256527185097148).epsilon(1e-11));
  CHECK(conjugate_time(0.6) == doctest::Approx(9.0130640358499645).epsilon(1e-11));
  CHECK(conjugate_time(2.4) == doctest::Approx(5.5667249527725452).epsilon(1e-11));
}

TEST_CASE("conjugate_time is a Jacobian root past the cut time") {
  for (int k = 1; k < 64; ++k) {
    const double theta = kPi * k / 64;
    const double tc = conjugate_time(theta);
    CHECK(std::abs(jacobian(theta, tc)) < 1e-10 * (1 + tc * tc * tc));
    CHECK(tc >= cut_time(theta) - 1e-9);
  }
}

TEST_CASE("djac_dtheta") {
  // vanishes at the cusp ray's conjugate time
  CHECK(std::abs(djac_dtheta(kPi / 2, kPi)) < 1e-12);
  // nonzero on fold rays at their conjugate time
  CHECK(std::abs(djac_dtheta(kPi / 3, conjugate_time(kPi / 3))) > 1.0);
  // frozen reference value
  CHECK(djac_dtheta(0.7, 1.3) == doctest::Approx(-0.2237775559).epsilon(1e-8));
  // finite-difference oracle at random (theta, t)
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> Uth(0.3, kPi - 0.3), Ut(0.2, 6.0);
  const double h = 1e-5;
  for (int k = 0; k < 10; ++k) {
    const double th = Uth(rng), t = Ut(rng);
    const double fd = (jacobian(th + h, t) - jacobian(th - h, t)) / (2 * h);
    CHECK(djac_dtheta(th, t) == doctest::Approx(fd).epsilon(1e-7).scale(1.0));
  }
  CHECK_THROWS_AS((void)djac_dtheta(0.0, 1.0), SingularThetaError);
}

TEST_CASE("degeneracy indicator") {
  for (double t : {0.5, 1.0, kPi, 4.0})
    CHECK(std::abs(degeneracy_indicator(kPi / 2, t)) < 1e-14);
  // direct arithmetic: -(6 + 1 - 6 cos(pi/4) + cos(pi/2)) * sin(pi/2) = -(7 - 3 sqrt 2)
  CHECK(degeneracy_indicator(kPi / 4, 1.0) ==
        doctest::Approx(-(7.0 - 3.0 * std::sqrt(2.0))).epsilon(1e-14));
}

TEST_CASE("degeneracy indicator and djac_dtheta vanish together on the conjugate curve") {
  for (int k = 1; k < 48; ++k) {
    const double theta = kPi * k / 48;
    const double tc = conjugate_time(theta);
    const double d = djac_dtheta(theta, tc);
    const double ind = degeneracy_indicator(theta, tc);
    const bool dzero = std::abs(d) < 1e-9 * (1 + tc);
    const bool izero = std::abs(ind) < 1e-9 * (1 + tc * tc);
    CHECK(dzero == izero);
  }
}

TEST_CASE("classification over theta") {
  CHECK(classify(kPi / 2) == SingularityClass::CuspA3);
  CHECK(classify(kPi / 3) == SingularityClass::FoldA2);
  CHECK(classify(2 * kPi / 3) == SingularityClass::FoldA2);
  CHECK(classify(3 * kPi / 2) == SingularityClass::CuspA3);
}

TEST_CASE("monotonicity of x in theta on the proof region (reduced grid)") {
  const int n = 64;
  for (int i = 1; i < n; ++i) {
    const double theta = kPi * i / n;
    for (int j = 0; j <= n; ++j) {
      const double t = j * (kPi / std::sin(theta)) / n;
      const double d = x_theta_derivative(theta, t);
      if (j == 0)
        CHECK(std::abs(d) < 1e-12);
      else
        CHECK(d <= 1e-12);
    }
  }
}

TEST_CASE("front self-intersection at the cut time") {
  for (int k = 1; k < 32; ++k) {
    const double theta = (kPi / 2) * k / 32;
    const double tc = kPi / std::sin(theta);
    const Point a = geodesic(theta, tc);
    const Point b = geodesic(kPi - theta, tc);
    CHECK(std::abs(a.x - b.x) < 1e-12 * (1 + std::abs(a.x)));
    CHECK(std::abs(a.y - b.y) < 1e-12 * (1 + std::abs(a.y)));
  }
}

TEST_CASE("wave front is transversal to itself along the cut locus") {
  for (int k = 2; k < 31; ++k) {
    const double theta = (kPi / 2) * k / 32;
    const double tc = kPi / std::sin(theta);
    const auto v1 = velocity(theta, tc);
    const auto v2 = velocity(kPi - theta, tc);
    const double n1 = std::hypot(v1[0], v1[1]), n2 = std::hypot(v2[0], v2[1]);
    const double cross = std::abs(v1[0] * v2[1] - v1[1] * v2[0]) / (n1 * n2);
    CHECK(cross >= 0.05);
  }
}

TEST_CASE("theta-derivative of the map is proportional to the Jacobian") {
  // dgamma/dtheta = Jac(theta,t) * (sin th, -cos(th - t sin th))
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> Uth(0.3, kPi - 0.3), Ut(0.2, 5.0);
  const double h = 1e-5;
  for (int k = 0; k < 12; ++k) {
    const double th = Uth(rng), t = Ut(rng);
    const Point pp = geodesic(th + h, t), pm = geodesic(th - h, t);
    const double dxth = (pp.x - pm.x) / (2 * h), dyth = (pp.y - pm.y) / (2 * h);
    const double J = jacobian(th, t);
    CHECK(dxth == doctest::Approx(J * std::sin(th)).epsilon(1e-8).scale(1.0));
    CHECK(dyth ==
          doctest::Approx(-J * std::cos(th - t * std::sin(th))).epsilon(1e-8).scale(1.0));
  }
}

TEST_CASE("cusp normal form check") {
  const auto rep = cusp_normal_form_check();
  CHECK(rep.intermediate_residual <= 1e-6);
  CHECK(rep.final_residual <= 1e-6);
  CHECK(rep.s3_linear_coeff == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(rep.pass);
}
