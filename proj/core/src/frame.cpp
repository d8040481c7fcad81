#include "grushin2d/frame.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

namespace grushin2d {

FrameSpec::FrameSpec(double a, std::vector<Monomial> higher) : a_(a), higher_(std::move(higher)) {
  for (const auto& m : higher_) {
    if (m.i < 1) throw Error("FrameSpec: monomial with i < 1 breaks f(0,y) = 1");
    if (m.i == 1 && m.j == 0)
      throw Error("FrameSpec: the (1,0) coefficient is the field `a`, not a higher term");
  }
  std::sort(higher_.begin(), higher_.end(),
            [](const Monomial& l, const Monomial& r) { return std::tie(l.i, l.j) < std::tie(r.i, r.j); });
  for (size_t k = 1; k < higher_.size(); ++k)
    if (higher_[k].i == higher_[k - 1].i && higher_[k].j == higher_[k - 1].j)
      throw Error("FrameSpec: duplicate exponent pair");
}

FrameEval eval_f(const FrameSpec& spec, Point p) {
  const FrameEval2 e = eval_f2(spec, p);
  return {e.f, e.fx, e.fy};
}

FrameEval2 eval_f2(const FrameSpec& spec, Point p) {
  FrameEval2 e{1.0 + spec.a() * p.x, spec.a(), 0.0, 0.0, 0.0, 0.0};
  for (const auto& m : spec.higher_coeffs()) {
    // c * x^i y^j and its partials; exponents are small, powers by repeated squaring
    // are not worth it here.
    const double xi = std::pow(p.x, m.i);
    const double yj = std::pow(p.y, m.j);
    const double xim1 = m.i >= 1 ? std::pow(p.x, m.i - 1) : 0.0;
    const double xim2 = m.i >= 2 ? std::pow(p.x, m.i - 2) : 0.0;
    const double yjm1 = m.j >= 1 ? std::pow(p.y, m.j - 1) : 0.0;
    const double yjm2 = m.j >= 2 ? std::pow(p.y, m.j - 2) : 0.0;
    e.f += m.c * xi * yj;
    e.fx += m.c * m.i * xim1 * yj;
    e.fy += m.c * m.j * xi * yjm1;
    e.fxx += m.c * m.i * (m.i - 1) * xim2 * yj;
    e.fxy += m.c * m.i * m.j * xim1 * yjm1;
    e.fyy += m.c * m.j * (m.j - 1) * xi * yjm2;
  }
  return e;
}

double hamiltonian(const FrameSpec& spec, const GeodesicState& s) {
  const FrameEval e = eval_f(spec, s.point);
  const double g = s.point.x * e.f;
  return 0.5 * (s.covector.px * s.covector.px + g * g * s.covector.py * s.covector.py);
}

StateVec hamiltonian_rhs(const FrameSpec& spec, const StateVec& v) {
  const FrameEval e = eval_f(spec, {v[0], v[1]});
  const double x = v[0], px = v[2], py = v[3];
  const double g = x * e.f;             // coefficient of d_y in the frame
  const double gx = e.f + x * e.fx;     // d(x f)/dx
  const double gy = x * e.fy;           // d(x f)/dy
  return {px, g * g * py, -py * py * g * gx, -py * py * g * gy};
}

StateVec hamiltonian_rhs(const FrameSpec& spec, const GeodesicState& s) {
  return hamiltonian_rhs(spec, to_vec(s));
}

std::array<std::array<double, 4>, 4> rhs_jacobian(const FrameSpec& spec, const StateVec& v) {
  const FrameEval2 e = eval_f2(spec, {v[0], v[1]});
  const double x = v[0], py = v[3];
  const double g = x * e.f;
  const double gx = e.f + x * e.fx;
  const double gy = x * e.fy;
  const double gxx = 2.0 * e.fx + x * e.fxx;
  const double gxy = e.fy + x * e.fxy;
  const double gyy = x * e.fyy;
  return {{
      {0.0, 0.0, 1.0, 0.0},
      {2.0 * g * gx * py, 2.0 * g * gy * py, 0.0, g * g},
      {-py * py * (gx * gx + g * gxx), -py * py * (gx * gy + g * gxy), 0.0, -2.0 * py * g * gx},
      {-py * py * (gx * gy + g * gxy), -py * py * (gy * gy + g * gyy), 0.0, -2.0 * py * g * gy},
  }};
}

Covector unit_covector(const FrameSpec& spec, Point p, double theta) {
  const FrameEval e = eval_f(spec, p);
  const double g = p.x * e.f;
  if (g == 0.0) throw SingularPointError("unit_covector: x f(x,y) = 0, frame degenerates");
  // Coordinate angle of the initial velocity: (xdot, ydot)(0) = (cos, |g| sin).
  return {std::cos(theta), std::sin(theta) / std::abs(g)};
}

GeodesicState grushin_initial(double rho, int sign) {
  if (!(rho > 0.0)) throw NonPositiveRhoError("grushin_initial: rho must be positive");
  if (sign != 1 && sign != -1) throw Error("grushin_initial: sign must be +1 or -1");
  return {{0.0, 0.0}, {static_cast<double>(sign), 1.0 / rho}};
}

FrameSpec FrameSpec::from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& ex) {
    throw Error(std::string("FrameSpec: bad JSON: ") + ex.what());
  }
  if (!j.is_object()) throw Error("FrameSpec: expected a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (it.key() != "a" && it.key() != "coeffs")
      throw Error("FrameSpec: unknown key '" + it.key() + "'");
  const double a = j.value("a", 0.0);
  std::vector<Monomial> higher;
  if (j.contains("coeffs")) {
    if (!j["coeffs"].is_array()) throw Error("FrameSpec: coeffs must be an array");
    for (const auto& c : j["coeffs"]) {
      for (auto it = c.begin(); it != c.end(); ++it)
        if (it.key() != "i" && it.key() != "j" && it.key() != "c")
          throw Error("FrameSpec: unknown coeff key '" + it.key() + "'");
      if (!c.contains("i") || !c.contains("j") || !c.contains("c"))
        throw Error("FrameSpec: coeff needs i, j, c");
      higher.push_back({c["i"].get<int>(), c["j"].get<int>(), c["c"].get<double>()});
    }
  }
  return FrameSpec(a, std::move(higher));
}

std::string FrameSpec::to_json() const {
  nlohmann::json j;
  j["a"] = a_;
  auto arr = nlohmann::json::array();
  for (const auto& m : higher_) arr.push_back({{"i", m.i}, {"j", m.j}, {"c", m.c}});
  j["coeffs"] = std::move(arr);
  return j.dump();
}

}  // namespace grushin2d
