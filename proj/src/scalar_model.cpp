#include "nucleon/scalar_model.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "nucleon/errors.hpp"

namespace nucleon {

namespace {
constexpr double kAngleSlack = 1e-12;
}

Params Params::make(double a, double b, int d) {
    Params p{a, b, d};
    validate(p);
    return p;
}

void validate(const Params& p) {
    if (!(p.a > 0.0) || !std::isfinite(p.a))
        throw ParameterError("parameter a must be positive, got " + std::to_string(p.a));
    if (!(p.b > 0.0) || !std::isfinite(p.b))
        throw ParameterError("parameter b must be positive, got " + std::to_string(p.b));
    if (p.d < 1) throw ParameterError("dimension d must be >= 1, got " + std::to_string(p.d));
}

double Params::stationary_angle() const {
    if (b > a) throw DomainError("stationary angle requires a >= b");
    return std::asin(std::sqrt(b / a));
}

double Params::threshold_angle() const {
    if (2.0 * b > a) throw DomainError("threshold angle requires a >= 2b");
    return std::asin(std::sqrt(2.0 * b / a));
}

double sphere_area(int d) {
    if (d < 1) throw ParameterError("sphere_area: d must be >= 1");
    const double half = 0.5 * d;
    return 2.0 * std::pow(kPi, half) / std::tgamma(half);
}

double clamp_angle(double x) {
    if (std::isnan(x)) throw DomainError("angle is NaN");
    if (x < 0.0) {
        if (x < -kAngleSlack) throw DomainError("angle below 0: " + std::to_string(x));
        return 0.0;
    }
    if (x > kHalfPi) {
        if (x > kHalfPi + kAngleSlack) throw DomainError("angle above pi/2: " + std::to_string(x));
        return kHalfPi;
    }
    return x;
}

namespace raw {

double F(double x, const Params& p) noexcept {
    const double s = std::sin(x);
    return 0.5 * p.a * std::sin(2.0 * x) * (s * s - p.b / p.a);
}

double Fprime(double x, const Params& p) noexcept {
    const double s = std::sin(x);
    const double s2x = std::sin(2.0 * x);
    return p.a * std::cos(2.0 * x) * (s * s - p.b / p.a) + 0.5 * p.a * s2x * s2x;
}

double Fsecond(double x, const Params& p) noexcept {
    const double s = std::sin(x);
    const double s2x = std::sin(2.0 * x);
    return -2.0 * p.a * s2x * (s * s - p.b / p.a) + 3.0 * p.a * s2x * std::cos(2.0 * x);
}

}  // namespace raw

double eval_F(double x, const Params& p) { return raw::F(clamp_angle(x), p); }
double eval_Fprime(double x, const Params& p) { return raw::Fprime(clamp_angle(x), p); }
double eval_Fsecond(double x, const Params& p) { return raw::Fsecond(clamp_angle(x), p); }

double eval_P(double xi, const Params& p) noexcept { return p.a * xi * xi * xi - p.b * xi; }

double eval_I(double x, double lambda, const Params& p) {
    if (!(lambda > 1.0)) throw ParameterError("I requires lambda > 1");
    x = clamp_angle(x);
    return x * raw::Fprime(x, p) - lambda * raw::F(x, p);
}

double eval_Iprime(double x, double lambda, const Params& p) {
    if (!(lambda > 1.0)) throw ParameterError("I requires lambda > 1");
    x = clamp_angle(x);
    return (1.0 - lambda) * raw::Fprime(x, p) + x * raw::Fsecond(x, p);
}

double root_of_I(double lambda, const Params& p) {
    validate(p);
    if (!p.ground_state_regime()) throw RegimeError("root_of_I requires a > 2b");
    if (!(lambda > 1.0)) throw ParameterError("I requires lambda > 1");

    double lo = p.stationary_angle();
    double hi = kHalfPi;
    // I(lo) = lo F'(lo) > 0 and I(pi/2) = (pi/2)(b - a) < 0.
    double f_lo = eval_I(lo, lambda, p);
    const double f_hi = eval_I(hi, lambda, p);
    if (!(f_lo > 0.0) || !(f_hi < 0.0))
        throw CertificateError("root_of_I: sign bracket on (arcsin sqrt(b/a), pi/2) failed");

    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        const double f_mid = eval_I(mid, lambda, p);
        if (f_mid > 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    const double root = 0.5 * (lo + hi);
    if (!(eval_Iprime(root, lambda, p) < 0.0))
        throw CertificateError("root_of_I: I'(x*) < 0 does not hold at the computed root");
    return root;
}

double hamiltonian(double u, double du, const Params& p) noexcept {
    const double s2 = std::sin(u) * std::sin(u);
    return 0.5 * du * du + 0.25 * p.a * s2 * s2 - 0.5 * p.b * s2;
}

XiQuotient xi_quotient(double xi, const Params& p) {
    const double gap = p.a * xi * xi - p.b;
    if (gap == 0.0) throw DomainError("xi_quotient: pole at a xi^2 = b");
    if (gap < 0.0) throw DomainError("xi_quotient requires a xi^2 > b");
    const double value = 3.0 + 2.0 * p.b / gap;
    // Relative gap at the level of round-off: the quotient carries no digits.
    if (!std::isfinite(value) || gap <= 64.0 * std::numeric_limits<double>::epsilon() * p.b)
        return {std::numeric_limits<double>::infinity(), true};
    return {value, false};
}

double ad_quotient_upper_bound(std::span<const double> r, std::span<const double> phi, int d) {
    if (r.size() != phi.size() || r.size() < 3)
        throw ParameterError("ad_quotient_upper_bound: need matching grids of size >= 3");
    if (d < 1) throw ParameterError("ad_quotient_upper_bound: d must be >= 1");
    const std::size_t n = r.size();
    for (double v : phi)
        if (std::abs(v) > 1.0) throw DomainError("ad_quotient_upper_bound: profile exceeds unit bound");

    const double area = sphere_area(d);
    auto weight = [d](double rr) { return d == 1 ? 1.0 : std::pow(rr, d - 1); };

    double m2 = 0.0, m4 = 0.0, grad = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double dphi;
        if (i == 0) {
            // Radial profiles are even: phi'(0) = 0 when the grid starts at the origin.
            dphi = r[0] == 0.0 ? 0.0 : (phi[1] - phi[0]) / (r[1] - r[0]);
        } else if (i + 1 == n) {
            dphi = (phi[i] - phi[i - 1]) / (r[i] - r[i - 1]);
        } else {
            dphi = (phi[i + 1] - phi[i - 1]) / (r[i + 1] - r[i - 1]);
        }
        const double denom = 1.0 - phi[i] * phi[i];
        double g = 0.0;
        if (dphi != 0.0) {
            if (denom <= 0.0) return std::numeric_limits<double>::infinity();
            g = dphi * dphi / denom;
        }
        // Trapezoid weights on a possibly non-uniform grid.
        double h = 0.0;
        if (i > 0) h += 0.5 * (r[i] - r[i - 1]);
        if (i + 1 < n) h += 0.5 * (r[i + 1] - r[i]);
        const double w = h * weight(r[i]) * area;
        const double p2 = phi[i] * phi[i];
        m2 += w * p2;
        m4 += w * p2 * p2;
        grad += w * g;
    }
    if (m4 < 1e-14) throw DomainError("ad_quotient_upper_bound: degenerate profile (int phi^4 < 1e-14)");
    return 2.0 * std::pow(m2, 2.0 / d) * grad / m4;
}

}  // namespace nucleon
