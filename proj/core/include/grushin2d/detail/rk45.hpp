#pragma once

// Dormand-Prince 5(4) with adaptive steps and cubic Hermite dense output.
// Error control is per unit step so that invariant drift stays proportional
// to the horizon length, not to the step count.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "grushin2d/errors.hpp"

namespace grushin2d::detail {

template <std::size_t N>
struct PathNode {
  double t;
  std::array<double, N> y;
  std::array<double, N> dy;
};

template <std::size_t N>
class DensePath {
public:
  std::vector<PathNode<N>> nodes;

  double t_front() const { return nodes.front().t; }
  double t_back() const { return nodes.back().t; }

  /// Cubic Hermite interpolation between the bracketing nodes.
  std::array<double, N> eval(double t) const {
    const auto [a, b] = bracket(t);
    if (a == b) return nodes[a].y;
    const PathNode<N>&l = nodes[a], &r = nodes[b];
    const double h = r.t - l.t;
    const double s = (t - l.t) / h;
    const double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
    const double h10 = s * (1 - s) * (1 - s);
    const double h01 = s * s * (3 - 2 * s);
    const double h11 = s * s * (s - 1);
    std::array<double, N> out;
    for (std::size_t i = 0; i < N; ++i)
      out[i] = h00 * l.y[i] + h10 * h * l.dy[i] + h01 * r.y[i] + h11 * h * r.dy[i];
    return out;
  }

  std::array<double, N> eval_derivative(double t) const {
    const auto [a, b] = bracket(t);
    if (a == b) return nodes[a].dy;
    const PathNode<N>&l = nodes[a], &r = nodes[b];
    const double h = r.t - l.t;
    const double s = (t - l.t) / h;
    const double d00 = 6 * s * (s - 1) / h;
    const double d10 = (1 - s) * (1 - 3 * s);
    const double d01 = -d00;
    const double d11 = s * (3 * s - 2);
    std::array<double, N> out;
    for (std::size_t i = 0; i < N; ++i)
      out[i] = d00 * l.y[i] + d10 * l.dy[i] + d01 * r.y[i] + d11 * r.dy[i];
    return out;
  }

private:
  std::pair<std::size_t, std::size_t> bracket(double t) const {
    const bool fwd = nodes.back().t >= nodes.front().t;
    if (fwd ? t <= nodes.front().t : t >= nodes.front().t) return {0, 0};
    if (fwd ? t >= nodes.back().t : t <= nodes.back().t)
      return {nodes.size() - 1, nodes.size() - 1};
    std::size_t lo = 0, hi = nodes.size() - 1;
    while (hi - lo > 1) {
      const std::size_t mid = (lo + hi) / 2;
      if (fwd ? nodes[mid].t <= t : nodes[mid].t >= t)
        lo = mid;
      else
        hi = mid;
    }
    return {lo, hi};
  }
};

template <std::size_t N, class Rhs>
DensePath<N> rk45(Rhs&& rhs, std::array<double, N> y0, double t0, double t1, double tol) {
  using V = std::array<double, N>;
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  DensePath<N> path;
  if (t1 == t0) {
    path.nodes.push_back({t0, y0, rhs(t0, y0)});
    return path;
  }
  const double dir = t1 > t0 ? 1.0 : -1.0;
  const double span = std::abs(t1 - t0);

  auto finite = [](const V& v) {
    for (double x : v)
      if (!std::isfinite(x)) return false;
    return true;
  };
  if (!finite(y0)) throw NonFiniteStateError("rk45: non-finite initial state");

  double t = t0;
  V y = y0;
  V k1 = rhs(t, y);
  path.nodes.push_back({t, y, k1});

  // initial step from the rhs scale
  double ynorm = 0, fnorm = 0;
  for (std::size_t i = 0; i < N; ++i) {
    ynorm = std::max(ynorm, std::abs(y[i]));
    fnorm = std::max(fnorm, std::abs(k1[i]));
  }
  double h = dir * std::clamp(0.01 * (1.0 + ynorm) / (1.0 + fnorm), 1e-8, span);

  V k2, k3, k4, k5, k6, k7, ynew;
  std::size_t guard = 0;
  while (dir * (t1 - t) > 0) {
    if (++guard > 100'000'000) throw IntegrationError("rk45: step count exploded");
    if (std::abs(h) > std::abs(t1 - t)) h = t1 - t;
    const double hmin = 16.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(t), 1.0);
    if (std::abs(h) < hmin) throw StepSizeUnderflowError(t);

    auto stage = [&](const V& base, auto... terms) {
      V out;
      for (std::size_t i = 0; i < N; ++i) {
        double acc = 0;
        ((acc += terms.first * terms.second[i]), ...);
        out[i] = base[i] + h * acc;
      }
      return out;
    };
    using P = std::pair<double, const V&>;
    k2 = rhs(t + c2 * h, stage(y, P{a21, k1}));
    k3 = rhs(t + c3 * h, stage(y, P{a31, k1}, P{a32, k2}));
    k4 = rhs(t + c4 * h, stage(y, P{a41, k1}, P{a42, k2}, P{a43, k3}));
    k5 = rhs(t + c5 * h, stage(y, P{a51, k1}, P{a52, k2}, P{a53, k3}, P{a54, k4}));
    k6 = rhs(t + h, stage(y, P{a61, k1}, P{a62, k2}, P{a63, k3}, P{a64, k4}, P{a65, k5}));
    ynew = stage(y, P{b1, k1}, P{b3, k3}, P{b4, k4}, P{b5, k5}, P{b6, k6});
    k7 = rhs(t + h, ynew);

    double err = 0;
    for (std::size_t i = 0; i < N; ++i) {
      const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                            e7 * k7[i]);
      const double sc = 1.0 + std::max(std::abs(y[i]), std::abs(ynew[i]));
      err += (e / sc) * (e / sc);
    }
    err = std::sqrt(err / N);

    const double budget = tol * std::abs(h);  // error per unit step
    if (err <= budget) {
      if (!finite(ynew)) throw NonFiniteStateError("rk45: state became non-finite");
      t += h;
      y = ynew;
      k1 = k7;  // FSAL
      path.nodes.push_back({t, y, k1});
    }
    const double factor =
        err > 0 ? 0.9 * std::pow(budget / err, 0.25) : 5.0;
    h *= std::clamp(factor, 0.2, 5.0);
    if (!std::isfinite(h) || h == 0.0) throw StepSizeUnderflowError(t);
  }
  return path;
}

}  // namespace grushin2d::detail
