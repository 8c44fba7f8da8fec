#pragma once

// Variation v = du/dy along a shot: v'' + ((d-1)/r) v' + F'(u) v = 0,
// v(0) = 1, v'(0) = 0, integrated together with u.

#include <limits>
#include <span>
#include <string>
#include <vector>

#include "nucleon/shooting.hpp"

namespace nucleon {

struct LinearizedSolution {
    double y = 0.0;
    std::vector<double> r, v, dv;
    std::vector<int> rescale_count;  ///< cumulative rescalings up to each sample
    /// Stored v is exp(-log_scale) times the true value.
    double log_scale = 0.0;
    std::vector<double> sign_change_radii;
    std::vector<double> dv_at_zeros;
    double growth_rate = std::numeric_limits<double>::quiet_NaN();
    bool divergence_flag = false;
    /// d = 1: max relative deviation of v'u' - v u'' from F(y).
    double wronskian_drift = std::numeric_limits<double>::quiet_NaN();
    std::string certificate;
};

/// Integrates (u, u', v, v') from y up to r_stop. The growth rate is fitted to
/// log|v| + ((d-1)/2) log r over the last segment of length fit_span.
LinearizedSolution solve_linearized(double y, double r_stop, const Params& p, const ShootControls& c,
                                    double fit_span = 4.0);

/// Runs along the base shot, stopping at its last sample.
LinearizedSolution solve_linearized(const Trajectory& base, const Params& p, const ShootControls& c);

/// v at the given radii by the central difference (u_{y+delta} - u_{y-delta}) / (2 delta).
std::vector<double> variation_by_differences(double y, double delta, const Params& p, const ShootControls& c,
                                             std::span<const double> radii);

/// v at the given radii from the coupled integration (no rescaling, events ignored).
std::vector<double> variation_at(double y, const Params& p, const ShootControls& c, std::span<const double> radii);

struct IdentityResidual {
    std::string name;
    double relative_error = 0.0;
    bool pass = false;
};

struct WronskianReport {
    double r_lo = 0.0;
    double r_hi = 0.0;
    double threshold = 1e-5;
    std::vector<IdentityResidual> identities;

    bool all_pass() const noexcept;
};

/// Applies L to Q, rQ' and Q' by sixth-order differences on the stored grid
/// and compares with Q F'(Q) - F(Q), -2F(Q) and ((d-1)/r^2) Q' on [r_lo, r_hi].
/// The default window is [0.5, r_reliable - 0.5]. When the right side vanishes
/// (Q' in d = 1) the residual is measured against max |f''|.
WronskianReport wronskian_checks(const GroundState& gs, double r_lo = -1.0, double r_hi = -1.0);

}  // namespace nucleon
