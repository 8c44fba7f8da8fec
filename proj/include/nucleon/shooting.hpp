#pragma once

// Radial shooting for u'' + ((d-1)/r) u' + F(u) = 0, u(0) = y, u'(0) = 0.

#include <limits>
#include <span>
#include <string>
#include <vector>

#include "nucleon/dop853.hpp"
#include "nucleon/scalar_model.hpp"

namespace nucleon {

struct ShootControls {
    double r_start = 1e-4;
    double r_max = 0.0;  ///< 0 selects 40/sqrt(b)
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double bisect_tol = 1e-12;
    double h_min = 1e-14;
    double h_max = 0.05;
    /// Stop once the trajectory sits in the decay funnel with u < funnel_floor * y.
    bool stop_in_funnel = true;
    double funnel_floor = 1e-5;
    /// Uniform step of the resampled ground-state grid.
    double grid_step = 0.01;

    double resolved_r_max(const Params& p) const;
    void validate() const;
    IntegratorOptions integrator() const;
};

enum class Verdict { SPlus, SZero, SMinus, Unresolved };

/// "SPlus", "SZero", "SMinus", "Unresolved".
const char* verdict_name(Verdict v) noexcept;

struct Classification {
    Verdict tag = Verdict::Unresolved;
    double r_event = std::numeric_limits<double>::quiet_NaN();
    /// SMinus: u'(r_event). SPlus: H(r_event). SZero: u/y at the stop. Unresolved: final H.
    double certificate = std::numeric_limits<double>::quiet_NaN();
    std::string note;
};

struct Trajectory {
    double y = 0.0;
    std::vector<double> r, u, du, H;

    std::size_t size() const noexcept { return r.size(); }
};

struct ShotResult {
    Trajectory traj;
    Classification cls;
};

/// Integrates from the two-term Taylor start until an event fires or r_max.
/// Every accepted step is a sample; the event point closes the trajectory.
/// Throws DomainError for y outside (0, pi/2) or within 1e-12 of a stationary value.
ShotResult shoot(double y, const Params& p, const ShootControls& c);

/// (u, u') of the shot from y at the requested radii (any order), ignoring
/// events. Radii below r_start use the Taylor start.
void sample_shot(double y, const Params& p, const ShootControls& c, std::span<const double> radii,
                 std::vector<double>& u, std::vector<double>& du);

/// Taylor start u(r), u'(r) of the shot from y.
void taylor_start(double y, double r, const Params& p, double& u, double& du);

struct DecayFit {
    double C = 0.0;
    double rate = 0.0;
    double r_lo = 0.0;
    double r_hi = 0.0;
    std::size_t samples = 0;
};

/// Least squares of log u + ((d-1)/2) log r against r over 1e-10 < u < 1e-3,
/// restricted to r <= r_limit. Throws NumericalError with fewer than 20 samples.
DecayFit decay_fit(const Trajectory& traj, const Params& p,
                   double r_limit = std::numeric_limits<double>::infinity());

class GroundState {
public:
    Params params;
    ShootControls controls;
    double y_bar = 0.0;
    double y_lo = 0.0;  ///< SPlus witness
    double y_hi = 0.0;  ///< SMinus witness
    /// Profile comes from the shot below this radius and from the tail law above.
    double r_reliable = 0.0;
    /// Radius up to which the witnesses agree to 1e-3 relative; bounds the decay fit.
    double r_fit_limit = 0.0;
    double tail_amplitude = 0.0;
    DecayFit decay;
    Trajectory traj;  ///< shot from y_bar, cut at r_fit_limit
    std::vector<double> grid, Q, dQ;

    double bracket_width() const noexcept { return y_hi - y_lo; }

    /// Q and Q' at arbitrary radii >= 0.
    void sample(std::span<const double> radii, std::vector<double>& q, std::vector<double>& dq) const;

    /// A r^{-nu} K_nu(sqrt(b) r) with nu = (d-2)/2 and its derivative.
    double tail_value(double r) const;
    double tail_derivative(double r) const;
};

/// Bisects y between an SPlus and an SMinus witness down to bisect_tol.
/// Throws RegimeError if a <= 2b and CertificateError without a bracket.
GroundState find_ground_state(const Params& p, const ShootControls& c);

/// Classifies every sample; stationary inputs throw DomainError.
std::vector<ShotResult> classify_portrait(const Params& p, std::span<const double> ys, const ShootControls& c);

struct MassEnergy {
    double mass = 0.0;
    double energy = 0.0;      ///< (1/2) int Q'^2 - (a/4) int sin^4 Q
    double energy_raw = 0.0;  ///< (1/2) int phi'^2/(1-phi^2) - (a/4) int phi^4, phi = sin Q
};

/// Simpson on a uniform grid starting at r = 0 with weight |S^{d-1}| r^{d-1}.
MassEnergy mass_and_energy(std::span<const double> r, std::span<const double> q, std::span<const double> dq,
                           const Params& p);
MassEnergy mass_and_energy(const GroundState& gs);

struct UnitMass {
    GroundState gs;
    Params params;
    double lambda = 1.0;
};

/// Q(lambda r) with lambda = M^{1/d} solves the problem at (lambda^2 a, lambda^2 b) with unit mass.
UnitMass rescale_to_unit_mass(const GroundState& gs);

}  // namespace nucleon
