#pragma once

#include <optional>
#include <string>
#include <vector>

#include "grushin2d/frame.hpp"
#include "grushin2d/grushin_exact.hpp"
#include "grushin2d/integrator.hpp"

namespace grushin2d::loci {

/// Time-t wave front from a base point, sampled over the initial covector
/// angle. theta is strictly increasing; velocity is the coordinate velocity
/// (xdot, ydot) of the arriving geodesic.
struct FrontSample {
  double theta;
  Point point;
  std::array<double, 2> velocity;
};
struct Front {
  Point base;
  double t;
  std::vector<FrontSample> samples;
};

/// Two rays meeting at one point of the front: the elementary cut event.
struct CutSample {
  double theta1, theta2;
  double t_cut;
  Point point;
  double branch_angle;  // angle between the two arriving velocities
};

struct ConjugatePointRecord {
  double theta;
  double t_conj;
  Point point;
  SingularityClass cls;
};

struct DistanceResult {
  double d;
  double theta_star;
  double t_star;
  int multiplicity;
};

struct LociOptions {
  double tol = 1e-10;       // integrator tolerance
  unsigned threads = 0;     // 0 = hardware concurrency
  int front_samples = 128;  // rays used by cut searches
  double t_max = 0.0;       // 0 = 4*pi*(local conformal scale)
};

/// n samples uniform in theta over [0, 2pi). Requires a Riemannian base and
/// n >= 16.
Front compute_front(const FrameSpec& spec, Point base, double t, int n,
                    const LociOptions& opts = {});

/// All transverse self-crossings of the polygonal front, Newton-refined to
/// residual <= 1e-10. Tangential near-misses (branch angle < 1e-3 rad) are
/// reported separately and not counted as crossings.
struct FrontIntersections {
  std::vector<CutSample> crossings;
  std::vector<CutSample> tangential;
};
FrontIntersections front_self_intersections(const FrameSpec& spec, const Front& front,
                                            const LociOptions& opts = {});

/// Smallest t at which a front self-crossing encloses the ray theta, by
/// bisection over t on front_self_intersections with a zooming ray window,
/// then Newton refinement where the crossing is transverse. Returns the cut
/// time and the partner ray arriving at the same point.
struct CutTimeResult {
  double t_cut;
  double partner;
  Point point;
  double branch_angle;
};
CutTimeResult cut_time(const FrameSpec& spec, Point base, double theta,
                       const LociOptions& opts = {});

/// First zero of J(t) = det(dgamma/dtheta, dgamma/dt) along the ray, from the
/// variational flow; sign-change scan plus bisection to 1e-10.
double conjugate_time(const FrameSpec& spec, Point base, double theta, double t_max,
                      const LociOptions& opts = {});

/// Fold/cusp test at the first conjugate point of the ray: fold when
/// det(d2gamma/dtheta2, dgamma/dt) is nonzero relative to the local scale,
/// cusp when it vanishes but the third-order term along the front normal does
/// not.
SingularityClass classify_singularity(const FrameSpec& spec, Point base, double theta,
                                      const LociOptions& opts = {});
ConjugatePointRecord conjugate_record(const FrameSpec& spec, Point base, double theta,
                                      const LociOptions& opts = {});

/// Cut locus over a ray range, grouped into branches by continuity of the
/// (theta, partner) pairing. A branch endpoint is flagged when it coincides
/// with a cusp conjugate point within 1e-5.
struct CutBranch {
  std::vector<CutSample> samples;  // ordered by theta
  bool endpoint_is_cusp = false;
  Point endpoint;
};
struct CutLocus {
  std::vector<CutBranch> branches;
  std::vector<CutSample> all_samples;
  std::vector<double> skipped_rays;  // rays with no cut up to t_max
};
CutLocus cut_locus(const FrameSpec& spec, Point base, double theta_lo, double theta_hi,
                   int resolution, const LociOptions& opts = {});

/// Multi-start shooting distance. Roots beyond their ray's cut time are
/// discarded; multiplicity counts distinct optimal rays (theta mod 2pi within
/// 1e-6). Throws NoGeodesicFoundError when no start converges.
DistanceResult distance(const FrameSpec& spec, Point p, Point q, const LociOptions& opts = {});

/// Cut point of the Grushin point (0,0) itself at time t = pi*rho0, found by
/// intersecting the two p_x = +-1 geodesic families of the rho-front (the
/// singular base has no unit covector circle). Used to reconcile the corner
/// asymptotics with the front machinery.
Point grushin_point_cut_via_front(const FrameSpec& spec, double rho0,
                                  const LociOptions& opts = {});

// export helpers
std::string cut_samples_csv(const std::vector<CutSample>& samples);
std::string cut_locus_json(const CutLocus& locus);
std::string front_csv(const Front& front);
std::string front_svg(const Front& front, double view_half_width = 2.0);
std::string locus_svg(const CutLocus& locus, const std::vector<ConjugatePointRecord>& conj,
                      double view_half_width = 2.0);

}  // namespace grushin2d::loci
