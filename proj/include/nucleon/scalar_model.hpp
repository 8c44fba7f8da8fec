#pragma once

// Nonlinearity of the arcsin-transformed nuclear NLS equation
//
//     u'' + ((d-1)/r) u' + F(u) = 0,   F(u) = (a/2) sin(2u) (sin^2(u) - b/a),
//
// together with the NLS polynomial P, the auxiliary function I_lambda and the
// local energy H. Everything here is a pure function of its arguments.

#include <span>

namespace nucleon {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kHalfPi = 1.57079632679489661923;

/// Model parameters (a, b, d). Construct through make() to get validation.
struct Params {
    double a = 4.0;
    double b = 1.0;
    int d = 3;

    /// Validating constructor; throws ParameterError unless a > 0, b > 0, d >= 1.
    static Params make(double a, double b, int d);

    /// True iff a > 2b, the only regime with a decaying positive solution.
    bool ground_state_regime() const noexcept { return a > 2.0 * b; }

    /// Interior zero of F: arcsin(sqrt(b/a)).
    double stationary_angle() const;
    /// Level set H = 0 at rest: arcsin(sqrt(2b/a)). Requires a >= 2b.
    double threshold_angle() const;
};

void validate(const Params& p);

/// Surface area |S^{d-1}| of the unit sphere in R^d (|S^0| = 2).
double sphere_area(int d);

/// Clamps x into [0, pi/2] when it exceeds the interval by at most 1e-12;
/// throws DomainError for larger excursions.
double clamp_angle(double x);

// Unchecked evaluations, valid for any real x (used inside integrators).
namespace raw {
double F(double x, const Params& p) noexcept;
double Fprime(double x, const Params& p) noexcept;
double Fsecond(double x, const Params& p) noexcept;
}  // namespace raw

double eval_F(double x, const Params& p);
double eval_Fprime(double x, const Params& p);
double eval_Fsecond(double x, const Params& p);

/// P(xi) = a xi^3 - b xi, so that F(x) = cos(x) P(sin(x)).
double eval_P(double xi, const Params& p) noexcept;

/// I(x) = x F'(x) - lambda F(x); requires 0 < x < pi/2 and lambda > 1.
double eval_I(double x, double lambda, const Params& p);
/// I'(x) = F'(x) + x F''(x) - lambda F'(x).
double eval_Iprime(double x, double lambda, const Params& p);

/// Unique root of I on (arcsin sqrt(b/a), pi/2), bisected to 1e-12.
/// Throws RegimeError outside a > 2b and CertificateError if the bracket or
/// the sign condition I'(x*) < 0 fails.
double root_of_I(double lambda, const Params& p);

/// Local energy H = u'^2/2 + a sin^4(u)/4 - b sin^2(u)/2.
double hamiltonian(double u, double du, const Params& p) noexcept;

struct XiQuotient {
    double value;    ///< 3 + 2b/(a xi^2 - b), +inf when saturated
    bool saturated;  ///< set when xi sits on the pole to working precision
};

/// xi P'(xi) / P(xi) on (sqrt(b/a), 1). Throws DomainError if a xi^2 <= b.
XiQuotient xi_quotient(double xi, const Params& p);

/// Trial-profile upper bound for the critical coupling a_d,
///     2 (int phi^2)^{2/d} (int |grad phi|^2 / (1-phi^2)_+) / int phi^4,
/// for a radial profile sampled on an increasing grid starting at r = 0.
/// Composite trapezoid with weight r^{d-1} |S^{d-1}|; the gradient is taken
/// by second-order differences. Throws DomainError if int phi^4 < 1e-14.
double ad_quotient_upper_bound(std::span<const double> r, std::span<const double> phi, int d);

}  // namespace nucleon
