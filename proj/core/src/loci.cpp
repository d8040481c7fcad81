#include "grushin2d/loci.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include "grushin2d/detail/parallel.hpp"
#include "grushin2d/errors.hpp"
#include "grushin2d/io.hpp"

namespace grushin2d::loci {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_2pi(double th) {
  th = std::fmod(th, kTwoPi);
  if (th < 0) th += kTwoPi;
  return th;
}

double conformal_scale(const FrameSpec& spec, Point base) {
  const auto e = eval_f(spec, base);
  return std::abs(base.x * e.f);
}

double default_t_max(const FrameSpec& spec, Point base, const LociOptions& opts) {
  if (opts.t_max > 0) return opts.t_max;
  return 4.0 * kPi * conformal_scale(spec, base);
}

std::array<double, 2> coordinate_velocity(const FrameSpec& spec, const StateVec& v) {
  const auto d = hamiltonian_rhs(spec, v);
  return {d[0], d[1]};
}

/// Dense geodesic rays from one base, integrated once to a shared horizon and
/// evaluated at any earlier time. Lazily extended with new rays; lookups are
/// by exact theta value so results do not depend on insertion order.
class RayCache {
public:
  RayCache(const FrameSpec& spec, Point base, double t_max, double tol)
      : spec_(spec), base_(base), t_max_(t_max), tol_(tol) {}

  const Trajectory& ray(double theta) {
    auto it = rays_.find(theta);
    if (it == rays_.end()) {
      GeodesicState s0{base_, unit_covector(spec_, base_, theta)};
      it = rays_.emplace(theta, integrate(spec_, s0, t_max_, tol_)).first;
    }
    return it->second;
  }

  void prefetch(const std::vector<double>& thetas, unsigned threads) {
    std::vector<double> missing;
    for (double th : thetas)
      if (!rays_.count(th)) missing.push_back(th);
    std::vector<std::optional<Trajectory>> out(missing.size());
    detail::parallel_for(
        missing.size(),
        [&](std::size_t i) {
          GeodesicState s0{base_, unit_covector(spec_, base_, missing[i])};
          out[i].emplace(integrate(spec_, s0, t_max_, tol_));
        },
        threads);
    for (std::size_t i = 0; i < missing.size(); ++i)
      rays_.emplace(missing[i], std::move(*out[i]));
  }

  FrontSample sample(double theta, double t) {
    const Trajectory& tr = ray(theta);
    const auto v = tr.path().eval(t);
    return {theta, {v[0], v[1]}, coordinate_velocity(spec_, v)};
  }

  const FrameSpec& spec() const { return spec_; }
  Point base() const { return base_; }
  double t_max() const { return t_max_; }
  double tol() const { return tol_; }

private:
  const FrameSpec& spec_;
  Point base_;
  double t_max_, tol_;
  std::map<double, Trajectory> rays_;
};

struct SegCrossing {
  std::size_t i, j;   // segment indices (segment k joins sample k and k+1)
  double fi, fj;      // crossing fractions along each segment
  Point point;
};

/// Transverse crossings of a polyline (closed or open). Sweep on x-extents
/// keeps this near-linear for smooth fronts.
std::vector<SegCrossing> polyline_crossings(const std::vector<FrontSample>& pts, bool closed) {
  const std::size_t n = pts.size();
  const std::size_t nseg = closed ? n : n - 1;
  struct Box {
    double xmin, xmax, ymin, ymax;
    std::size_t k;
  };
  std::vector<Box> boxes(nseg);
  auto P = [&](std::size_t k) { return pts[k % n].point; };
  for (std::size_t k = 0; k < nseg; ++k) {
    const Point a = P(k), b = P(k + 1);
    boxes[k] = {std::min(a.x, b.x), std::max(a.x, b.x), std::min(a.y, b.y), std::max(a.y, b.y),
                k};
  }
  std::sort(boxes.begin(), boxes.end(), [](const Box& l, const Box& r) { return l.xmin < r.xmin; });

  std::vector<SegCrossing> out;
  for (std::size_t a = 0; a < boxes.size(); ++a) {
    for (std::size_t b = a + 1; b < boxes.size() && boxes[b].xmin <= boxes[a].xmax; ++b) {
      if (boxes[b].ymin > boxes[a].ymax || boxes[b].ymax < boxes[a].ymin) continue;
      std::size_t i = boxes[a].k, j = boxes[b].k;
      if (i > j) std::swap(i, j);
      // adjacent segments share a vertex, and so does the wrap pair
      if (j - i <= 1) continue;
      if (closed && i == 0 && j == nseg - 1) continue;
      const Point p1 = P(i), p2 = P(i + 1), q1 = P(j), q2 = P(j + 1);
      const double ux = p2.x - p1.x, uy = p2.y - p1.y;
      const double vx = q2.x - q1.x, vy = q2.y - q1.y;
      const double den = ux * vy - uy * vx;
      if (den == 0.0) continue;
      const double wx = q1.x - p1.x, wy = q1.y - p1.y;
      const double s = (wx * vy - wy * vx) / den;
      const double r = (wx * uy - wy * ux) / den;
      if (s < 0.0 || s > 1.0 || r < 0.0 || r > 1.0) continue;
      out.push_back({i, j, s, r, {p1.x + s * ux, p1.y + s * uy}});
    }
  }
  return out;
}

double angle_between(const std::array<double, 2>& u, const std::array<double, 2>& v) {
  const double nu = std::hypot(u[0], u[1]), nv = std::hypot(v[0], v[1]);
  if (nu == 0 || nv == 0) return 0;
  const double c = std::clamp((u[0] * v[0] + u[1] * v[1]) / (nu * nv), -1.0, 1.0);
  return std::acos(c);
}

struct RefinedCrossing {
  double theta1, theta2;
  Point point;
  double branch_angle;
};

/// Newton on (theta1, theta2) for gamma(theta1, t) = gamma(theta2, t) at
/// fixed t, with sensitivity Jacobians and step damping.
std::optional<RefinedCrossing> refine_crossing_fixed_t(const FrameSpec& spec, Point base,
                                                       double t, double th1, double th2,
                                                       double tol) {
  auto shoot = [&](double th) {
    const GeodesicState s0{base, unit_covector(spec, base, th)};
    const auto ds0 = unit_covector_theta_derivative(spec, base, th);
    return integrate_with_sensitivity(spec, s0, ds0, t, tol);
  };
  double f_prev = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 50; ++it) {
    const auto s1 = shoot(th1), s2 = shoot(th2);
    const auto p1 = s1.state_at(t).point, p2 = s2.state_at(t).point;
    const double fx = p1.x - p2.x, fy = p1.y - p2.y;
    const double fn = std::hypot(fx, fy);
    if (fn <= 1e-10) {
      const auto v1 = coordinate_velocity(spec, to_vec(s1.state_at(t)));
      const auto v2 = coordinate_velocity(spec, to_vec(s2.state_at(t)));
      return RefinedCrossing{th1, th2, {0.5 * (p1.x + p2.x), 0.5 * (p1.y + p2.y)},
                             angle_between(v1, v2)};
    }
    const auto d1 = s1.position_sensitivity_at(t), d2 = s2.position_sensitivity_at(t);
    const double a = d1[0], b = -d2[0], c = d1[1], d = -d2[1];
    const double det = a * d - b * c;
    if (det == 0.0 || !std::isfinite(det)) return std::nullopt;
    double dth1 = (-fx * d + fy * b) / det;
    double dth2 = (-fy * a + fx * c) / det;
    // damp on residual increase
    double lambda = 1.0;
    if (fn > f_prev) lambda = 0.5;
    th1 += lambda * dth1;
    th2 += lambda * dth2;
    f_prev = fn;
    if (!std::isfinite(th1) || !std::isfinite(th2)) return std::nullopt;
  }
  return std::nullopt;
}

// shorter-arc containment of ray theta in the crossing pair's arc
bool arc_contains(double th1, double th2, double theta) {
  double a = wrap_2pi(th1), b = wrap_2pi(th2);
  if (a > b) std::swap(a, b);
  const bool inner_shorter = (b - a) <= kPi;
  const double t = wrap_2pi(theta);
  if (inner_shorter) return t >= a && t <= b;
  return t <= a || t >= b;
}

}  // namespace

Front compute_front(const FrameSpec& spec, Point base, double t, int n,
                    const LociOptions& opts) {
  if (n < 16) throw std::invalid_argument("compute_front: need at least 16 samples");
  (void)unit_covector(spec, base, 0.0);  // rejects singular bases up front
  Front f;
  f.base = base;
  f.t = t;
  f.samples.resize(n);
  detail::parallel_for(
      static_cast<std::size_t>(n),
      [&](std::size_t k) {
        const double theta = kTwoPi * double(k) / n;
        const GeodesicState s0{base, unit_covector(spec, base, theta)};
        const auto traj = integrate(spec, s0, t, opts.tol);
        const auto end = to_vec(traj.endpoint());
        f.samples[k] = {theta, {end[0], end[1]}, coordinate_velocity(spec, end)};
      },
      opts.threads);
  return f;
}

FrontIntersections front_self_intersections(const FrameSpec& spec, const Front& front,
                                            const LociOptions& opts) {
  if (front.samples.size() < 64)
    throw std::invalid_argument("front_self_intersections: need at least 64 samples");
  FrontIntersections out;
  const auto& S = front.samples;
  const std::size_t n = S.size();
  auto theta_of = [&](std::size_t seg, double frac) {
    const double th_a = S[seg % n].theta;
    double th_b = S[(seg + 1) % n].theta;
    if ((seg + 1) % n == 0) th_b = kTwoPi;  // wrap segment ends at 2pi
    return th_a + frac * (th_b - th_a);
  };

  for (const auto& c : polyline_crossings(S, /*closed=*/true)) {
    const double th1 = theta_of(c.i, c.fi), th2 = theta_of(c.j, c.fj);
    // polygon-level transversality: tangential near-misses are reported raw
    const auto& va = S[c.i].velocity;
    const auto& vb = S[c.j].velocity;
    const double ang = angle_between(va, vb);
    if (ang < 1e-3) {
      out.tangential.push_back({th1, th2, front.t, c.point, ang});
      continue;
    }
    const auto refined =
        refine_crossing_fixed_t(spec, front.base, front.t, th1, th2, opts.tol);
    if (!refined) {
      std::ostringstream ss;
      ss << "front_self_intersections: refinement diverged for segment pair theta=(" << th1
         << ", " << th2 << ") at t=" << front.t;
      throw RefinementDivergedError(ss.str());
    }
    if (refined->branch_angle < 1e-3) {
      out.tangential.push_back(
          {refined->theta1, refined->theta2, front.t, refined->point, refined->branch_angle});
      continue;
    }
    out.crossings.push_back(
        {refined->theta1, refined->theta2, front.t, refined->point, refined->branch_angle});
  }

  // a crossing near a polygon vertex can be seen by two segment pairs
  auto& cr = out.crossings;
  std::sort(cr.begin(), cr.end(),
            [](const CutSample& l, const CutSample& r) { return l.theta1 < r.theta1; });
  cr.erase(std::unique(cr.begin(), cr.end(),
                       [](const CutSample& l, const CutSample& r) {
                         return std::abs(l.theta1 - r.theta1) < 1e-7 &&
                                std::abs(l.theta2 - r.theta2) < 1e-7;
                       }),
           cr.end());
  return out;
}

namespace {

struct RawCrossing {
  double th1, th2;
  Point point;
};

/// Polygon crossings of the cached front at time t restricted to a theta
/// window; no refinement, used as the bisection predicate.
std::vector<RawCrossing> window_crossings(RayCache& cache, const std::vector<double>& thetas,
                                          double t, bool closed) {
  std::vector<FrontSample> pts(thetas.size());
  for (std::size_t i = 0; i < thetas.size(); ++i) pts[i] = cache.sample(thetas[i], t);
  std::vector<RawCrossing> out;
  for (const auto& c : polyline_crossings(pts, closed)) {
    auto th_at = [&](std::size_t seg, double f) {
      const double a = thetas[seg % thetas.size()];
      double b = thetas[(seg + 1) % thetas.size()];
      if (closed && (seg + 1) % thetas.size() == 0) b = thetas[0] + kTwoPi;
      return a + f * (b - a);
    };
    out.push_back({th_at(c.i, c.fi), th_at(c.j, c.fj), c.point});
  }
  return out;
}

std::vector<double> linspace(double a, double b, int n, bool inclusive) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = a + (b - a) * double(i) / (inclusive ? n - 1 : n);
  return v;
}

}  // namespace

CutTimeResult cut_time(const FrameSpec& spec, Point base, double theta,
                       const LociOptions& opts) {
  const double T = default_t_max(spec, base, opts);
  const int n = std::max(64, opts.front_samples);
  RayCache cache(spec, base, T, opts.tol);
  const auto thetas = linspace(0.0, kTwoPi, n, false);
  cache.prefetch(thetas, opts.threads);
  cache.ray(theta);

  auto containing = [&](double t) -> std::optional<RawCrossing> {
    for (const auto& c : window_crossings(cache, thetas, t, true))
      if (arc_contains(c.th1, c.th2, theta)) return c;
    return std::nullopt;
  };

  // coarse scan for the first enclosing crossing; the bracket stays wide
  // because a too-coarse front can miss a small loop (false negatives must
  // never raise the lower bound)
  double t_lo = 0.0, t_hi = -1.0;
  RawCrossing seed{};
  const int kScan = 40;
  for (int k = 1; k <= kScan; ++k) {
    const double t = T * double(k) / kScan;
    if (auto c = containing(t)) {
      t_hi = t;
      seed = *c;
      break;
    }
    t_lo = t;
  }
  if (t_hi < 0)
    throw NoCutFoundError("cut_time: no front self-intersection encloses the ray before t_max");

  // transverse case: Newton on (partner, t) with the ray's side fixed
  {
    double th2 = seed.th1 + seed.th2 - theta;  // reflect across the arc
    double t = t_hi;
    const Trajectory& mine = cache.ray(theta);
    double prev = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 50 && std::abs(th2 - theta) > 1e-5; ++it) {
      const GeodesicState s0{base, unit_covector(spec, base, th2)};
      const auto ds0 = unit_covector_theta_derivative(spec, base, th2);
      const auto sens = integrate_with_sensitivity(spec, s0, ds0, t, opts.tol);
      const auto va = mine.path().eval(t);
      const auto pb = sens.state_at(t).point;
      const double fx = va[0] - pb.x, fy = va[1] - pb.y;
      const double fn = std::hypot(fx, fy);
      const auto v1 = coordinate_velocity(spec, {va[0], va[1], va[2], va[3]});
      const auto v2 = coordinate_velocity(spec, to_vec(sens.state_at(t)));
      if (fn < 1e-10 * (1 + std::abs(t))) {
        const double ang = angle_between(v1, v2);
        if (ang >= 1e-4 && t > 0 && t <= 1.02 * t_hi)
          return {t, wrap_2pi(th2), {va[0], va[1]}, ang};
        break;
      }
      const auto dth = sens.position_sensitivity_at(t);
      // columns: d/dth2 = -dgamma/dtheta(th2), d/dt = v1 - v2
      const double a = -dth[0], b = v1[0] - v2[0];
      const double c = -dth[1], d = v1[1] - v2[1];
      const double det = a * d - b * c;
      if (det == 0 || !std::isfinite(det)) break;
      const double lam = fn > prev ? 0.5 : 1.0;
      th2 += lam * (-fx * d + fy * b) / det;
      t += lam * (-fy * a + fx * c) / det;
      prev = fn;
      if (!std::isfinite(th2) || !std::isfinite(t) || t <= 0 || t > 2 * T) break;
    }
  }

  // near-degenerate case (ray at or next to a cusp): zooming bisection on a
  // local ray window
  double w_lo = std::min(seed.th1, seed.th2), w_hi = std::max(seed.th1, seed.th2);
  if (w_hi - w_lo > kPi) {  // unwrap outer arc
    const double tmp = w_lo;
    w_lo = w_hi - kTwoPi;
    w_hi = tmp;
  }
  double pad = 0.5 * (w_hi - w_lo) + 1e-3;
  w_lo -= pad;
  w_hi += pad;
  RawCrossing last = seed;
  const int kLocal = 48;
  for (int level = 0; level < 60 && (t_hi - t_lo) > 1e-8 * (1 + t_hi); ++level) {
    const double mid = 0.5 * (t_lo + t_hi);
    auto win = linspace(w_lo, w_hi, kLocal, true);
    cache.prefetch(win, opts.threads);
    std::optional<RawCrossing> found;
    for (const auto& c : window_crossings(cache, win, mid, false))
      if (arc_contains(c.th1, c.th2, theta)) {
        found = c;
        break;
      }
    if (found) {
      t_hi = mid;
      last = *found;
      const double lo = std::min(last.th1, last.th2), hi = std::max(last.th1, last.th2);
      const double w = std::max(hi - lo, 1e-6);
      w_lo = lo - w;
      w_hi = hi + w;
    } else {
      t_lo = mid;
    }
  }
  const double t_cut = 0.5 * (t_lo + t_hi);
  const auto me = cache.sample(theta, t_cut);
  const double partner = wrap_2pi(last.th1 + last.th2 - theta);
  const auto other = cache.sample(partner, t_cut);
  return {t_cut, partner, me.point, angle_between(me.velocity, other.velocity)};
}

double conjugate_time(const FrameSpec& spec, Point base, double theta, double t_max,
                      const LociOptions& opts) {
  const GeodesicState s0{base, unit_covector(spec, base, theta)};
  const auto ds0 = unit_covector_theta_derivative(spec, base, theta);
  const auto sens = integrate_with_sensitivity(spec, s0, ds0, t_max, opts.tol);

  auto J_of = [&](const std::array<double, 8>& z) {
    const auto v = coordinate_velocity(spec, {z[0], z[1], z[2], z[3]});
    return z[4] * v[1] - z[5] * v[0];
  };
  auto J_at = [&](double t) { return J_of(sens.path().eval(t)); };

  const auto& nodes = sens.path().nodes;
  int sign = 0;
  double t_prev = 0, J_prev = 0;
  for (std::size_t k = 1; k < nodes.size(); ++k) {
    const double t = nodes[k].t;
    const double J = J_of(nodes[k].y);
    if (sign == 0) {
      if (std::abs(J) > 1e-9 * (1 + t)) sign = J > 0 ? 1 : -1;
    } else if ((J > 0 ? 1 : -1) != sign && std::abs(J) > 0) {
      // bisect inside [t_prev, t]
      double lo = t_prev, hi = t;
      double flo = J_prev;
      while (hi - lo > 1e-10 && hi - lo > 4 * std::numeric_limits<double>::epsilon() * hi) {
        const double mid = 0.5 * (lo + hi);
        const double fm = J_at(mid);
        if (fm == 0) return mid;
        if ((fm > 0) == (flo > 0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      return 0.5 * (lo + hi);
    }
    t_prev = t;
    J_prev = J;
  }
  throw NoConjugatePointError("conjugate_time: no Jacobian sign change before t_max");
}

SingularityClass classify_singularity(const FrameSpec& spec, Point base, double theta,
                                      const LociOptions& opts) {
  return conjugate_record(spec, base, theta, opts).cls;
}

ConjugatePointRecord conjugate_record(const FrameSpec& spec, Point base, double theta,
                                      const LociOptions& opts) {
  const double scale = conformal_scale(spec, base);
  double t_max = opts.t_max;
  if (t_max <= 0) {
    const double s = std::abs(std::sin(theta));
    t_max = 4 * kPi * scale / std::max(s, 0.05);
  }
  const double tc = conjugate_time(spec, base, theta, t_max, opts);

  auto sens_at = [&](double th) {
    const GeodesicState s0{base, unit_covector(spec, base, th)};
    const auto ds0 = unit_covector_theta_derivative(spec, base, th);
    return integrate_with_sensitivity(spec, s0, ds0, tc, opts.tol);
  };
  const auto middle = sens_at(theta);
  const auto state = to_vec(middle.state_at(tc));
  const Point pt{state[0], state[1]};
  const auto v = coordinate_velocity(spec, state);
  const double vn = std::hypot(v[0], v[1]);
  const double R = std::hypot(pt.x - base.x, pt.y - base.y);

  const double h = 5e-3;
  const auto ep = sens_at(theta + h).position_sensitivity_at(tc);
  const auto em = sens_at(theta - h).position_sensitivity_at(tc);
  const std::array<double, 2> d2{(ep[0] - em[0]) / (2 * h), (ep[1] - em[1]) / (2 * h)};
  const double d2n = std::hypot(d2[0], d2[1]);
  const double det = d2[0] * v[1] - d2[1] * v[0];

  if (d2n > 1e-3 * R && std::abs(det) / (d2n * vn) > 5e-3)
    return {theta, tc, pt, SingularityClass::FoldA2};

  // third-order test along the front normal
  const std::array<double, 2> nrm{-v[1] / vn, v[0] / vn};
  auto phi = [&](double dth) {
    const GeodesicState s0{base, unit_covector(spec, base, theta + dth)};
    const auto end = integrate(spec, s0, tc, opts.tol).endpoint().point;
    return (end.x - pt.x) * nrm[0] + (end.y - pt.y) * nrm[1];
  };
  const double h3 = 5e-3;
  const double phi3 =
      (phi(2 * h3) - 2 * phi(h3) + 2 * phi(-h3) - phi(-2 * h3)) / (2 * h3 * h3 * h3);
  if (std::abs(phi3) > 0.05 * R) return {theta, tc, pt, SingularityClass::CuspA3};
  throw UnclassifiedDegeneracyError("classify_singularity: fold and cusp tests both failed");
}

CutLocus cut_locus(const FrameSpec& spec, Point base, double theta_lo, double theta_hi,
                   int resolution, const LociOptions& opts) {
  CutLocus out;
  std::vector<std::optional<CutTimeResult>> hits(resolution);
  std::vector<double> rays(resolution);
  const bool full_circle = std::abs((theta_hi - theta_lo) - kTwoPi) < 1e-12;
  for (int i = 0; i < resolution; ++i)
    rays[i] = theta_lo + (theta_hi - theta_lo) * double(i) /
                  (full_circle ? resolution : std::max(1, resolution - 1));

  for (int i = 0; i < resolution; ++i) {
    try {
      hits[i] = cut_time(spec, base, rays[i], opts);
    } catch (const NoCutFoundError&) {
      out.skipped_rays.push_back(rays[i]);
    }
  }

  // canonical unordered pairs, deduplicated (each crossing is seen from both sides)
  std::vector<CutSample> samples;
  for (int i = 0; i < resolution; ++i) {
    if (!hits[i]) continue;
    const auto& h = *hits[i];
    CutSample s{std::min(wrap_2pi(rays[i]), h.partner), std::max(wrap_2pi(rays[i]), h.partner),
                h.t_cut, h.point, h.branch_angle};
    samples.push_back(s);
  }
  std::sort(samples.begin(), samples.end(),
            [](const CutSample& l, const CutSample& r) { return l.theta1 < r.theta1; });
  std::vector<CutSample> dedup;
  for (const auto& s : samples) {
    if (!dedup.empty() && std::abs(dedup.back().theta1 - s.theta1) < 2e-3 &&
        std::abs(dedup.back().theta2 - s.theta2) < 2e-3)
      continue;
    dedup.push_back(s);
  }
  out.all_samples = dedup;

  // branches: runs with continuous partner pairing
  const double grid_step = (theta_hi - theta_lo) / std::max(1, resolution);
  CutBranch cur;
  auto flush = [&] {
    if (cur.samples.empty()) return;
    // degenerate end: pair gap smallest
    const auto it = std::min_element(cur.samples.begin(), cur.samples.end(),
                                     [](const CutSample& l, const CutSample& r) {
                                       return l.theta2 - l.theta1 < r.theta2 - r.theta1;
                                     });
    cur.endpoint = it->point;
    const double mid_ray = 0.5 * (it->theta1 + it->theta2);
    try {
      const auto rec = conjugate_record(spec, base, mid_ray, opts);
      const double gap = std::hypot(rec.point.x - it->point.x, rec.point.y - it->point.y);
      cur.endpoint_is_cusp =
          rec.cls == SingularityClass::CuspA3 && gap <= 1e-5 * (1 + std::abs(rec.point.y));
      if (cur.endpoint_is_cusp) cur.endpoint = rec.point;
    } catch (const Error&) {
      cur.endpoint_is_cusp = false;
    }
    out.branches.push_back(std::move(cur));
    cur = CutBranch{};
  };
  for (const auto& s : dedup) {
    if (!cur.samples.empty()) {
      const auto& p = cur.samples.back();
      const bool contiguous = std::abs(s.theta1 - p.theta1) < 4 * grid_step + 1e-3 &&
                              std::abs(s.theta2 - p.theta2) < 8 * grid_step + 1e-2;
      if (!contiguous) flush();
    }
    cur.samples.push_back(s);
  }
  flush();
  return out;
}

DistanceResult distance(const FrameSpec& spec, Point p, Point q, const LociOptions& opts) {
  if (p.x == q.x && p.y == q.y) throw std::invalid_argument("distance: p == q");
  (void)unit_covector(spec, p, 0.0);

  struct Root {
    double theta, t;
  };
  std::vector<Root> roots;
  const double qscale = 1 + std::hypot(q.x, q.y);
  const double t0_guess =
      std::max(1e-3, std::hypot(q.x - p.x, (q.y - p.y) / std::max(0.3, conformal_scale(spec, p))));

  const int kStarts = 64;
  std::vector<std::optional<Root>> results(kStarts);
  detail::parallel_for(
      kStarts,
      [&](std::size_t k) {
        double theta = kTwoPi * double(k) / kStarts;
        double t = t0_guess;
        double prev = std::numeric_limits<double>::infinity();
        for (int it = 0; it < 50; ++it) {
          if (!(t > 1e-9) || t > 1e3 * t0_guess || !std::isfinite(theta)) return;
          const GeodesicState s0{p, unit_covector(spec, p, theta)};
          const auto ds0 = unit_covector_theta_derivative(spec, p, theta);
          const auto sens = integrate_with_sensitivity(spec, s0, ds0, t, opts.tol);
          const auto end = sens.state_at(t).point;
          const double fx = end.x - q.x, fy = end.y - q.y;
          const double fn = std::hypot(fx, fy);
          if (fn <= 1e-10 * qscale) {
            results[k] = Root{wrap_2pi(theta), t};
            return;
          }
          const auto dth = sens.position_sensitivity_at(t);
          const auto v = coordinate_velocity(spec, to_vec(sens.state_at(t)));
          const double a = dth[0], b = v[0], c = dth[1], d = v[1];
          const double det = a * d - b * c;
          if (det == 0 || !std::isfinite(det)) return;
          const double lam = fn > prev ? 0.5 : 1.0;
          theta += lam * (-fx * d + fy * b) / det;
          t += lam * (-fy * a + fx * c) / det;
          prev = fn;
        }
      },
      opts.threads);
  for (const auto& r : results)
    if (r) roots.push_back(*r);
  if (roots.empty()) throw NoGeodesicFoundError("distance: no shooting start converged");

  std::sort(roots.begin(), roots.end(), [](const Root& l, const Root& r) { return l.t < r.t; });
  std::vector<Root> uniq;
  for (const auto& r : roots) {
    bool dup = false;
    for (const auto& u : uniq) {
      const double dth = std::abs(wrap_2pi(r.theta - u.theta + kPi) - kPi);
      // strict dedupe, plus a wider equal-time merge: near a cusp the map is
      // cubically flat in theta, so shooting roots for one geodesic spread
      // over ~ residual^(1/3) in theta
      if ((dth < 1e-6 && std::abs(r.t - u.t) < 1e-6 * (1 + u.t)) ||
          (dth < 5e-3 && std::abs(r.t - u.t) < 1e-8 * (1 + u.t))) {
        dup = true;
        break;
      }
    }
    if (!dup) uniq.push_back(r);
  }

  // keep only minimizers: discard roots beyond their ray's cut time
  std::optional<Root> best;
  for (const auto& r : uniq) {
    double tc = std::numeric_limits<double>::infinity();
    try {
      LociOptions cut_opts = opts;
      cut_opts.t_max = std::max(default_t_max(spec, p, opts), 1.25 * r.t);
      tc = cut_time(spec, p, r.theta, cut_opts).t_cut;
    } catch (const NoCutFoundError&) {
    }
    if (r.t <= tc + 1e-4 * (1 + r.t)) {
      best = r;
      break;
    }
  }
  if (!best) throw NoGeodesicFoundError("distance: every root lies beyond its cut time");

  int multiplicity = 0;
  for (const auto& r : uniq)
    if (std::abs(r.t - best->t) <= 1e-6 * (1 + best->t)) ++multiplicity;
  return {best->t, best->theta, best->t, multiplicity};
}

Point grushin_point_cut_via_front(const FrameSpec& spec, double rho0, const LociOptions& opts) {
  if (!(rho0 > 0 && rho0 <= 0.2))
    throw std::invalid_argument("grushin_point_cut_via_front: rho0 in (0, 0.2]");
  const double t_star = kPi * rho0;
  const int n = 65;

  auto endpoint = [&](double rho, int sign) {
    const auto traj = integrate(spec, grushin_initial(rho, sign), t_star, opts.tol);
    return traj.endpoint().point;
  };
  std::vector<FrontSample> plus(n), minus(n);
  for (int i = 0; i < n; ++i) {
    const double rho = rho0 * (0.6 + 0.9 * double(i) / (n - 1));
    plus[i] = {rho, endpoint(rho, 1), {0, 0}};
    minus[i] = {rho, endpoint(rho, -1), {0, 0}};
  }
  // crossings between the two open families: concatenate and reject
  // same-family pairs
  std::vector<FrontSample> both = plus;
  both.insert(both.end(), minus.begin(), minus.end());
  double rp = rho0, rm = rho0;
  bool seeded = false;
  for (const auto& c : polyline_crossings(both, false)) {
    const bool i_plus = c.i + 1 < std::size_t(n);  // segment fully in the + family
    const bool j_minus = c.j >= std::size_t(n);
    if (!i_plus || !j_minus) continue;
    rp = plus[c.i].theta + c.fi * (plus[c.i + 1].theta - plus[c.i].theta);
    const std::size_t jm = c.j - n;
    rm = minus[jm].theta + c.fj * (minus[jm + 1].theta - minus[jm].theta);
    seeded = true;
    break;
  }
  if (!seeded)
    throw NoCutFoundError("grushin_point_cut_via_front: the two families do not cross");

  // Newton on (rho+, rho-) with d/drho sensitivities
  auto shoot = [&](double rho, int sign) {
    const StateVec ds0{0, 0, 0, -1.0 / (rho * rho)};
    return integrate_with_sensitivity(spec, grushin_initial(rho, sign), ds0, t_star, opts.tol);
  };
  for (int it = 0; it < 50; ++it) {
    const auto sp = shoot(rp, 1), sm = shoot(rm, -1);
    const auto pp = sp.state_at(t_star).point, pm = sm.state_at(t_star).point;
    const double fx = pp.x - pm.x, fy = pp.y - pm.y;
    if (std::hypot(fx, fy) <= 1e-11 * rho0 * rho0)
      return {0.5 * (pp.x + pm.x), 0.5 * (pp.y + pm.y)};
    const auto dp = sp.position_sensitivity_at(t_star), dm = sm.position_sensitivity_at(t_star);
    const double a = dp[0], b = -dm[0], c = dp[1], d = -dm[1];
    const double det = a * d - b * c;
    if (det == 0 || !std::isfinite(det)) break;
    rp += (-fx * d + fy * b) / det;
    rm += (-fy * a + fx * c) / det;
    if (!(rp > 0) || !(rm > 0)) break;
  }
  throw NewtonDivergedError("grushin_point_cut_via_front: Newton did not converge");
}

std::string cut_samples_csv(const std::vector<CutSample>& samples) {
  std::ostringstream os;
  os << "theta1,theta2,t,x,y,branch_angle\n";
  for (const auto& s : samples)
    os << io::g17(s.theta1) << ',' << io::g17(s.theta2) << ',' << io::g17(s.t_cut) << ','
       << io::g17(s.point.x) << ',' << io::g17(s.point.y) << ',' << io::g17(s.branch_angle)
       << '\n';
  return os.str();
}

std::string front_csv(const Front& front) {
  std::ostringstream os;
  os << "theta,x,y,vx,vy\n";
  for (const auto& s : front.samples)
    os << io::g17(s.theta) << ',' << io::g17(s.point.x) << ',' << io::g17(s.point.y) << ','
       << io::g17(s.velocity[0]) << ',' << io::g17(s.velocity[1]) << '\n';
  return os.str();
}

std::string cut_locus_json(const CutLocus& locus) {
  std::ostringstream os;
  os << "{\n  \"branches\": [\n";
  for (std::size_t b = 0; b < locus.branches.size(); ++b) {
    const auto& br = locus.branches[b];
    os << "    {\"endpoint\": [" << io::g17(br.endpoint.x) << ", " << io::g17(br.endpoint.y)
       << "], \"endpoint_is_cusp\": " << (br.endpoint_is_cusp ? "true" : "false")
       << ", \"samples\": [";
    for (std::size_t i = 0; i < br.samples.size(); ++i) {
      const auto& s = br.samples[i];
      os << (i ? ", " : "") << "[" << io::g17(s.theta1) << ", " << io::g17(s.theta2) << ", "
         << io::g17(s.t_cut) << ", " << io::g17(s.point.x) << ", " << io::g17(s.point.y) << "]";
    }
    os << "]}" << (b + 1 < locus.branches.size() ? "," : "") << "\n";
  }
  os << "  ],\n  \"skipped_rays\": [";
  for (std::size_t i = 0; i < locus.skipped_rays.size(); ++i)
    os << (i ? ", " : "") << io::g17(locus.skipped_rays[i]);
  os << "]\n}\n";
  return os.str();
}

std::string front_svg(const Front& front, double view_half_width) {
  io::SvgWriter svg(-view_half_width, view_half_width, -view_half_width, view_half_width);
  std::vector<std::pair<double, double>> pts;
  for (const auto& s : front.samples) pts.push_back({s.point.x, s.point.y});
  svg.polyline(pts, "#1f77b4", 1.5, true);
  svg.circle(front.base.x, front.base.y, 4, "#d62728");
  return svg.str();
}

std::string locus_svg(const CutLocus& locus, const std::vector<ConjugatePointRecord>& conj,
                      double view_half_width) {
  io::SvgWriter svg(-view_half_width, view_half_width, -view_half_width, view_half_width);
  for (const auto& br : locus.branches) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& s : br.samples) pts.push_back({s.point.x, s.point.y});
    std::sort(pts.begin(), pts.end(),
              [](auto& l, auto& r) { return l.second < r.second; });
    svg.polyline(pts, "#d62728", 2.0);
    if (br.endpoint_is_cusp) svg.circle(br.endpoint.x, br.endpoint.y, 5, "#2ca02c");
  }
  std::vector<std::pair<double, double>> cpts;
  for (const auto& c : conj) cpts.push_back({c.point.x, c.point.y});
  std::sort(cpts.begin(), cpts.end());
  svg.polyline(cpts, "#9467bd", 1.0);
  return svg.str();
}

}  // namespace grushin2d::loci
