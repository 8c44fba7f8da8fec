#pragma once

// Rescaled sigma-omega system K(eps, Xi) = 0 in d = 3, Xi = (phi, chi, W+, W-),
// continued in eps = 1/m from the non-relativistic state.
//
// Grid: nodes r_j = j h, j = 0..N, h = R/N. Block (i) is a box scheme on each
// interval, block (ii) the r^2-weighted conservative form, with chi(0) = 0 and
// phi(R) = 0. The field block uses a finite-volume -Delta with the Neumann-type
// row -6 (w_1 - w_0)/h^2 at the origin and W + F + H = 0 at r = R.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "nucleon/banded.hpp"
#include "nucleon/shooting.hpp"

namespace nucleon {

inline constexpr double kMaxContinuationEps = 0.5;

struct ContinuationParams {
    double C = 1.0;
    double D = 1.0;
    double theta = 1.0;
    double lambda = 2.0;
    double mu = 0.5;
    double eps = 0.0;

    /// Positivity and lambda > 2 mu theta.
    void validate() const;
    double a() const noexcept { return 2.0 * lambda / theta; }
    double b() const noexcept { return 2.0 * mu; }
    Params nls() const { return Params{a(), b(), 3}; }
};

struct SigmaOmegaGrid {
    std::size_t N = 4000;
    double R = 0.0;  ///< 0 means 30/sqrt(b)

    double resolved_R(const ContinuationParams& cp) const;
};

struct SigmaOmegaState {
    double eps = 0.0;
    std::vector<double> r;
    std::vector<double> phi, chi, wplus, wminus;
    double residual_norm = 0.0;

    std::size_t nodes() const noexcept { return r.size(); }
    double h() const { return r.at(1) - r.at(0); }
    /// Interleaved (phi, chi, W+, W-) per node.
    std::vector<double> pack() const;
    void unpack(std::span<const double> z);
};

/// Residual blocks. first[j] and second[j] hold interval equations; first[N]
/// is phi(R) and second[0] is chi(0).
struct SigmaOmegaResidual {
    std::vector<double> first, second, wplus, wminus;

    double norm() const;  ///< max norm over all four blocks
};

/// Xi(0) = (phi, phi'/(1 - phi^2), -(a/4) phi^2 + chi^2/4, -phi^2) with phi = sin Q sampled on the nodes.
SigmaOmegaState limit_state(const GroundState& gs, const ContinuationParams& cp, const SigmaOmegaGrid& grid = {});

/// Certifies the ground state for (a, b, 3) and samples Xi(0).
SigmaOmegaState limit_state(const ContinuationParams& cp, const SigmaOmegaGrid& grid = {});

/// eps must lie in [0, 0.5).
SigmaOmegaResidual residual(double eps, const SigmaOmegaState& xi, const ContinuationParams& cp);

/// (eps R(eps) (-Delta) + 1)^{-1} applied to (s+, s-), via the eigenvectors (1, eps) and (1, -eps)
/// of R(eps) and two tridiagonal Helmholtz solves.
void apply_resolvent(double eps, const ContinuationParams& cp, std::span<const double> r, std::span<const double> sp,
                     std::span<const double> sm, std::vector<double>& wp, std::vector<double>& wm);

/// Jacobian of the system with the field rows multiplied by eps R(-Delta) + 1.
/// Rows and columns follow SigmaOmegaState::pack.
BandMatrix jacobian(double eps, const SigmaOmegaState& xi, const ContinuationParams& cp);

/// dK(eps, xi)[eta], eta packed as in SigmaOmegaState::pack.
SigmaOmegaResidual jacobian_apply(double eps, const SigmaOmegaState& xi, const ContinuationParams& cp,
                                  std::span<const double> eta);

struct NewtonOptions {
    double tol = 1e-10;
    int max_iter = 50;
    int max_halvings = 30;
};

struct NewtonResult {
    SigmaOmegaState state;
    int iterations = 0;
    bool converged = false;
    std::string message;
};

NewtonResult newton_solve(double eps, const SigmaOmegaState& initial, const ContinuationParams& cp,
                          const NewtonOptions& opt = {});

/// sqrt(sum over fields of sum_j h r_j^2 (e^2 + e'^2 + e''^2)), centred differences.
double distance_to_limit(const SigmaOmegaState& xi, const SigmaOmegaState& limit);

struct BranchPoint {
    double eps = 0.0;
    SigmaOmegaState state;
    int newton_iters = 0;
    double distance_to_limit = 0.0;

    double phi_at_0() const { return state.phi.front(); }
    double chi_peak() const;
};

struct Branch {
    SigmaOmegaState limit;  ///< discrete root at eps = 0
    std::vector<BranchPoint> points;
    bool truncated = false;
    std::string diagnostics;
};

/// Warm-started Newton along eps_list (ascending, starting at 0). A failed step is
/// retried through up to max_substeps bisections of the eps step.
Branch continue_branch(std::span<const double> eps_list, const ContinuationParams& cp, const SigmaOmegaState& guess,
                       const NewtonOptions& opt = {}, int max_substeps = 6);

struct ResolventSample {
    double eps = 0.0;
    double x = 0.0;
    double eig_small = 0.0;
    double eig_large = 0.0;
    double eig_error = 0.0;  ///< |eig_small - (1 + 2Cx)| / (1 + 2Cx)
    double inverse_norm = 0.0;
};

struct ResolventReport {
    std::vector<ResolventSample> samples;
    double max_eig_error = 0.0;
    double max_inverse_norm = 0.0;

    bool pass(double tol = 1e-12) const noexcept { return max_eig_error <= tol && max_inverse_norm <= 1.0 + tol; }
};

/// M = x [[2C + eps^2 D, eps D], [eps^3 D, 2C + eps^2 D]] + 1 on the product of the samples.
ResolventReport resolvent_bound_check(const ContinuationParams& cp, std::span<const double> eps_samples,
                                      std::span<const double> x_samples);

struct PhysicalCouplings {
    double m_sigma = 0.0;
    double m_omega = 0.0;
    double g_sigma = 0.0;
    double g_omega = 0.0;
    double mu = 0.0;
};

/// Requires theta m > lambda.
PhysicalCouplings physical_parameters(const ContinuationParams& cp, double m);

/// Inverse of physical_parameters; eps is set to 1/m.
ContinuationParams continuation_parameters(const PhysicalCouplings& pc, double m);

struct PhysicalProfiles {
    double m = 0.0;
    std::vector<double> x;
    std::vector<double> phi, chi;
    std::vector<double> wplus, wminus;
    std::vector<double> S, V;
};

PhysicalProfiles unscale_state(const SigmaOmegaState& xi, const ContinuationParams& cp, double m);

/// Residuals of the unscaled radial system, each as max |residual| / max |largest term|.
struct PhysicalResidual {
    double first = 0.0, second = 0.0, wplus = 0.0, wminus = 0.0;

    double max() const;
};

PhysicalResidual physical_residual(const PhysicalProfiles& pp, const ContinuationParams& cp);

}  // namespace nucleon
