#pragma once

#include <array>
#include <iosfwd>
#include <vector>

#include "grushin2d/detail/rk45.hpp"
#include "grushin2d/frame.hpp"

namespace grushin2d {

inline constexpr double kDefaultTol = 1e-10;

/// Dense-output solution of the geodesic flow. Read-only after construction.
/// Invariant: sup_t |H(state(t)) - H(state(0))| <= 100 * tol.
class Trajectory {
public:
  Trajectory(detail::DensePath<4> path, double tol) : path_(std::move(path)), tol_(tol) {}

  double t_start() const { return path_.t_front(); }
  double t_end() const { return path_.t_back(); }
  double tol() const { return tol_; }
  std::size_t node_count() const { return path_.nodes.size(); }
  const detail::DensePath<4>& path() const { return path_; }

  GeodesicState at(double t) const { return to_state(path_.eval(t)); }
  StateVec derivative_at(double t) const { return path_.eval_derivative(t); }
  GeodesicState endpoint() const { return to_state(path_.nodes.back().y); }

  /// Largest |H - H(t0)| over the stored nodes.
  double hamiltonian_drift(const FrameSpec& spec) const;

  /// CSV with header t,x,y,px,py at the stored nodes, 17 significant digits.
  void to_csv(std::ostream& os) const;

private:
  detail::DensePath<4> path_;
  double tol_;
};

/// Trajectory of the 8-dimensional augmented system (state + variational
/// equation along it). The sensitivity is d(state)/d(parameter) for whatever
/// parameter the initial perturbation ds0 encodes (theta, rho, ...).
class SensitivityTrajectory {
public:
  SensitivityTrajectory(detail::DensePath<8> path, double tol)
      : path_(std::move(path)), tol_(tol) {}

  double t_start() const { return path_.t_front(); }
  double t_end() const { return path_.t_back(); }
  double tol() const { return tol_; }
  const detail::DensePath<8>& path() const { return path_; }

  GeodesicState state_at(double t) const;
  StateVec sensitivity_at(double t) const;
  /// d(x,y)/d(parameter) at time t.
  std::array<double, 2> position_sensitivity_at(double t) const;

  void to_csv(std::ostream& os) const;

private:
  detail::DensePath<8> path_;
  double tol_;
};

/// Integrate the PMP geodesic system from s0 over [0, t_end] (t_end may be
/// negative). tol must lie in [1e-14, 1e-4].
Trajectory integrate(const FrameSpec& spec, const GeodesicState& s0, double t_end,
                     double tol = kDefaultTol);

/// Augmented integration of state + linearized flow applied to ds0.
SensitivityTrajectory integrate_with_sensitivity(const FrameSpec& spec, const GeodesicState& s0,
                                                 const StateVec& ds0, double t_end,
                                                 double tol = kDefaultTol);

/// Endpoint of the arclength geodesic from `base` with initial covector
/// unit_covector(base, theta). Throws SingularPointError on a singular base.
Point exp_map(const FrameSpec& spec, Point base, double theta, double t,
              double tol = kDefaultTol);

/// d(initial state)/d(theta) for a unit_covector launch; pairs with
/// integrate_with_sensitivity for conjugate-point work.
StateVec unit_covector_theta_derivative(const FrameSpec& spec, Point base, double theta);

}  // namespace grushin2d
