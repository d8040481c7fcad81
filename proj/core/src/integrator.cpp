#include "grushin2d/integrator.hpp"

#include <cmath>
#include <ostream>

#include "grushin2d/io.hpp"

namespace grushin2d {

namespace {

void check_tol(double tol) {
  if (!(tol >= 1e-14 && tol <= 1e-4))
    throw std::invalid_argument("integrate: tol must be in [1e-14, 1e-4]");
}

}  // namespace

double Trajectory::hamiltonian_drift(const FrameSpec& spec) const {
  const double h0 = hamiltonian(spec, to_state(path_.nodes.front().y));
  double worst = 0.0;
  for (const auto& n : path_.nodes)
    worst = std::max(worst, std::abs(hamiltonian(spec, to_state(n.y)) - h0));
  return worst;
}

void Trajectory::to_csv(std::ostream& os) const {
  os << "t,x,y,px,py\n";
  for (const auto& n : path_.nodes) {
    io::write_g17(os, n.t) << ',';
    io::write_g17(os, n.y[0]) << ',';
    io::write_g17(os, n.y[1]) << ',';
    io::write_g17(os, n.y[2]) << ',';
    io::write_g17(os, n.y[3]) << '\n';
  }
}

GeodesicState SensitivityTrajectory::state_at(double t) const {
  const auto v = path_.eval(t);
  return {{v[0], v[1]}, {v[2], v[3]}};
}

StateVec SensitivityTrajectory::sensitivity_at(double t) const {
  const auto v = path_.eval(t);
  return {v[4], v[5], v[6], v[7]};
}

std::array<double, 2> SensitivityTrajectory::position_sensitivity_at(double t) const {
  const auto v = path_.eval(t);
  return {v[4], v[5]};
}

void SensitivityTrajectory::to_csv(std::ostream& os) const {
  os << "t,x,y,px,py,dx,dy,dpx,dpy\n";
  for (const auto& n : path_.nodes) {
    io::write_g17(os, n.t);
    for (double v : n.y) {
      os << ',';
      io::write_g17(os, v);
    }
    os << '\n';
  }
}

Trajectory integrate(const FrameSpec& spec, const GeodesicState& s0, double t_end, double tol) {
  check_tol(tol);
  if (!std::isfinite(t_end)) throw std::invalid_argument("integrate: t_end must be finite");
  auto rhs = [&spec](double, const StateVec& y) { return hamiltonian_rhs(spec, y); };
  return Trajectory(detail::rk45<4>(rhs, to_vec(s0), 0.0, t_end, tol), tol);
}

SensitivityTrajectory integrate_with_sensitivity(const FrameSpec& spec, const GeodesicState& s0,
                                                 const StateVec& ds0, double t_end, double tol) {
  check_tol(tol);
  if (!std::isfinite(t_end)) throw std::invalid_argument("integrate: t_end must be finite");
  auto rhs = [&spec](double, const std::array<double, 8>& z) {
    const StateVec y{z[0], z[1], z[2], z[3]};
    const StateVec f = hamiltonian_rhs(spec, y);
    const auto J = rhs_jacobian(spec, y);
    std::array<double, 8> out;
    for (int i = 0; i < 4; ++i) out[i] = f[i];
    for (int i = 0; i < 4; ++i) {
      double acc = 0;
      for (int j = 0; j < 4; ++j) acc += J[i][j] * z[4 + j];
      out[4 + i] = acc;
    }
    return out;
  };
  const StateVec y0 = to_vec(s0);
  std::array<double, 8> z0{y0[0], y0[1], y0[2], y0[3], ds0[0], ds0[1], ds0[2], ds0[3]};
  return SensitivityTrajectory(detail::rk45<8>(rhs, z0, 0.0, t_end, tol), tol);
}

Point exp_map(const FrameSpec& spec, Point base, double theta, double t, double tol) {
  const Covector p0 = unit_covector(spec, base, theta);
  const Trajectory traj = integrate(spec, {base, p0}, t, tol);
  return traj.endpoint().point;
}

StateVec unit_covector_theta_derivative(const FrameSpec& spec, Point base, double theta) {
  const FrameEval e = eval_f(spec, base);
  const double g = base.x * e.f;
  if (g == 0.0) throw SingularPointError("unit_covector_theta_derivative: singular base");
  return {0.0, 0.0, -std::sin(theta), std::cos(theta) / std::abs(g)};
}

}  // namespace grushin2d
