#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "grushin2d/errors.hpp"

namespace grushin2d {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct Covector {
  double px = 0.0;
  double py = 0.0;
};

/// Phase-space point (x, y, p_x, p_y) of the geodesic Hamiltonian flow.
struct GeodesicState {
  Point point;
  Covector covector;
};

using StateVec = std::array<double, 4>;  // (x, y, px, py)

inline StateVec to_vec(const GeodesicState& s) {
  return {s.point.x, s.point.y, s.covector.px, s.covector.py};
}
inline GeodesicState to_state(const StateVec& v) {
  return {{v[0], v[1]}, {v[2], v[3]}};
}

/// One monomial c * x^i y^j of f beyond the constant 1 and the a*x term.
/// i >= 1 always, and (i,j) != (1,0): the linear-in-x coefficient is stored
/// separately as `a` because it is the quantity entering the cut-corner tangent.
struct Monomial {
  int i = 1;
  int j = 0;
  double c = 0.0;
};

/// Value and first/second partials of f at a point. Exact for the stored
/// polynomial, no truncation.
struct FrameEval {
  double f, fx, fy;
};
struct FrameEval2 {
  double f, fx, fy, fxx, fxy, fyy;
};

/// Orthonormal frame (d_x, x f(x,y) d_y) in Grushin normal form.
///
/// f is a finite polynomial 1 + a*x + sum c_ij x^i y^j with every monomial
/// containing an x factor, so f(0,y) = 1 holds structurally. Immutable after
/// construction; all operations on it are pure.
class FrameSpec {
public:
  FrameSpec() = default;  // nilpotent approximation, f == 1
  explicit FrameSpec(double a) : a_(a) {}
  FrameSpec(double a, std::vector<Monomial> higher);

  double a() const { return a_; }
  const std::vector<Monomial>& higher_coeffs() const { return higher_; }
  bool is_nilpotent() const { return a_ == 0.0 && higher_.empty(); }

  /// JSON document {"a": number, "coeffs": [{"i":int,"j":int,"c":number}]}.
  /// i >= 1 enforced at parse; (i,j) == (1,0) rejected (that slot is `a`);
  /// unknown keys rejected.
  static FrameSpec from_json(std::string_view text);
  std::string to_json() const;

private:
  double a_ = 0.0;
  std::vector<Monomial> higher_;  // sorted by (i,j), unique
};

FrameEval eval_f(const FrameSpec& spec, Point p);
FrameEval2 eval_f2(const FrameSpec& spec, Point p);

/// H(q, p) = (px^2 + (x f(x,y))^2 py^2) / 2. Arclength geodesics live on H = 1/2.
double hamiltonian(const FrameSpec& spec, const GeodesicState& s);

/// Right-hand side of the PMP system:
///   xdot = px, ydot = py (x f)^2,
///   pxdot = -py^2 (x f)(f + x f_x), pydot = -py^2 (x f)(x f_y).
StateVec hamiltonian_rhs(const FrameSpec& spec, const GeodesicState& s);
StateVec hamiltonian_rhs(const FrameSpec& spec, const StateVec& v);

/// Jacobian of hamiltonian_rhs w.r.t. (x, y, px, py); drives the variational flow.
std::array<std::array<double, 4>, 4> rhs_jacobian(const FrameSpec& spec, const StateVec& v);

/// Unit covector at a Riemannian point, parameterized by the coordinate angle
/// of the initial velocity: px = cos(theta), py = sin(theta)/|x f(x,y)|.
/// H of the result is exactly 1/2. Throws SingularPointError when x f = 0.
Covector unit_covector(const FrameSpec& spec, Point p, double theta);

/// Geodesic launched from the Grushin point (0,0): state (0, 0, sign, 1/rho),
/// i.e. pbar = px/py = sign * rho. Throws NonPositiveRhoError.
GeodesicState grushin_initial(double rho, int sign);

}  // namespace grushin2d
