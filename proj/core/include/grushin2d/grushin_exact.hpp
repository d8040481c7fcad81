#pragma once

#include <array>
#include <vector>

#include "grushin2d/frame.hpp"

namespace grushin2d {

/// Singularity class of the exponential map at a first conjugate point.
enum class SingularityClass { Regular, FoldA2, CuspA3 };

const char* to_string(SingularityClass c);

/// Closed-form oracle for the Grushin plane (f == 1): geodesics from (-1,0),
/// Jacobian, conjugate/cut structure and the fold/cusp classification.
///
/// theta is the coordinate angle of the initial velocity at (-1,0); the
/// formulas are evaluated through cancellation-free trigonometric rewrites,
/// so they are accurate uniformly in theta, including across theta = 0 (mod pi)
/// where the line-geodesic branch is the limit.
namespace exact {

/// gamma(theta, t): endpoint of the arclength geodesic from (-1, 0).
Point geodesic(double theta, double t);

/// d(gamma)/dt — the coordinate velocity along the geodesic.
std::array<double, 2> velocity(double theta, double t);

/// dx/dtheta. Throws SingularThetaError for theta == 0 (mod pi).
double x_theta_derivative(double theta, double t);

/// det D(gamma)(theta, t) = (t cos(th) cos(th - t sin th) sin(th) - sin(t sin th)) / sin^3(th).
double jacobian(double theta, double t);

/// pi/|sin theta|; +infinity on the line rays theta == 0 (mod pi).
double cut_time(double theta);

/// (1, pi / (2 sin(th) |sin th|)). Throws SingularThetaError on line rays.
Point cut_point(double theta);

/// First t > 0 with jacobian(theta, t) = 0, bracketed by a scan with step
/// 0.1/|sin th| inside [0, 4 pi/|sin th|] and bisected to 1e-12.
/// Throws RootNotBracketedError if the window is exhausted.
double conjugate_time(double theta);

/// dJac/dtheta at fixed t. Uses the closed-form bracket
///   (u/4) [ sin u (2 - 3t cos th + 6 cos 2th - t cos 3th)
///         + cos u (t sin th - 6 sin 2th + t sin 3th) ],  u = t sin th,
/// which is d/dtheta of sin^3(th) * Jac; the full derivative follows from
/// the quotient rule. Vanishes at the conjugate time iff theta = 0 (mod pi/2).
double djac_dtheta(double theta, double t);

/// -(6 + t^2 - 6 t cos th + t^2 cos 2th) sin 2th. On the conjugate curve this
/// vanishes exactly where djac_dtheta does (the 6 + ... factor is positive).
double degeneracy_indicator(double theta, double t);

/// FoldA2 when |dJac/dtheta(th, t_th)| exceeds 1e-6 (1 + t_th), else CuspA3
/// when the second theta-derivative of Jac is nonzero by central differences.
/// Throws UnclassifiedDegeneracyError when both tests fail.
SingularityClass classify(double theta);

/// Numeric verification that the map has an A3 (cusp) normal form at
/// (theta, t) = (pi/2, pi): extracts the degree-<=3 Taylor polynomial by
/// finite differences, pushes it through the flattening / variable changes,
/// and reports the residual against (theta3^3 - theta3 s3, s3).
struct CuspNormalFormReport {
  double intermediate_residual;  // raw jet vs its closed-form coefficients
  double final_residual;         // transformed jet vs (th3^3 - th3 s3, s3)
  double s3_linear_coeff;        // coefficient of s3 in the second component
  bool pass;                     // final_residual <= 1e-6
};
CuspNormalFormReport cusp_normal_form_check();

}  // namespace exact
}  // namespace grushin2d
