#pragma once

// Radial sectors of -Delta - F'(Q) and of the linearized operators L1, L2.
//
// Cell-centred grid r_i = (i - 1/2) h, i = 1..N, h = R/N, Dirichlet at R.
// Divergence form with cell weights w_i = (r_{i+1/2}^d - r_{i-1/2}^d)/(d h)
// (w = 1 for d = 1); the symmetric tridiagonal T = D^{1/2} M D^{-1/2},
// D = diag w_i, is what gets stored. The centrifugal term is the cell
// integral of l(l+d-2) r^{d-3} (r/r_i)^l.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "nucleon/shooting.hpp"

namespace nucleon {

inline constexpr std::size_t kDefaultSectorN = 16000;
inline constexpr double kDefaultKernelTol = 1e-6;

/// 30/sqrt(b)
double default_sector_radius(const Params& p);

struct SectorOperator {
    std::string name;  ///< "A", "L1" or "L2"
    int ell = 0;
    int d = 3;
    std::size_t N = 0;
    double R = 0.0;
    double h = 0.0;
    std::vector<double> r;       ///< cell centres
    std::vector<double> weight;  ///< cell weights w_i
    std::vector<double> Q;       ///< profile at r_i
    std::vector<double> dQ;
    std::vector<double> diag, off;
    std::vector<std::string> warnings;

    /// M v = D^{-1/2} T D^{1/2} v, the operator acting on grid functions.
    std::vector<double> apply(std::span<const double> v) const;
};

/// A^(l) v = -v'' - ((d-1)/r) v' + l(l+d-2)/r^2 v - F'(Q) v.
/// d = 1 admits l = 0 (even) and l = 1 (odd) only.
SectorOperator assemble_sector_A(const GroundState& gs, int ell, std::size_t N, double R);

/// L1 = -div(grad eta / cos^2 Q) + V1 eta in sector l, face coefficients 1/(cos Q_i cos Q_{i+1}).
SectorOperator assemble_L1_direct(const GroundState& gs, int ell, std::size_t N, double R);

/// L2 = -div(grad eta / cos^2 Q) + (Q'^2 / cos^2 Q - a sin^2 Q + b) eta, l = 0.
SectorOperator assemble_L2_direct(const GroundState& gs, std::size_t N, double R);

/// diag(1/cos Q) T_A diag(1/cos Q): the cos-conjugated Schrodinger form of L1.
SectorOperator conjugate_by_cos(const SectorOperator& A);

/// max_ij |X_ij - Y_ij| / max_ij |Y_ij| over the tridiagonal band.
double relative_entry_deviation(const SectorOperator& x, const SectorOperator& y);

struct SpectralReport {
    std::string name;
    int ell = 0;
    std::vector<double> eigenvalues;
    /// Grid functions v on op.r with sum_i w_i h v_i^2 = 1.
    std::vector<std::vector<double>> eigenvectors;
    std::vector<std::size_t> kernel_candidates;
    /// |<v_k, f>| / (|v_k| |f|) in the weighted inner product, when a reference f is given.
    std::vector<double> correlations;
    int negative_count = 0;
};

/// k smallest eigenpairs by Sturm multisection and inverse iteration.
SpectralReport lowest_eigenpairs(const SectorOperator& op, int k, double kernel_tol = kDefaultKernelTol,
                                 std::span<const double> reference = {});

/// Weighted inner product sum_i w_i h f_i g_i on the operator grid.
double weighted_inner(const SectorOperator& op, std::span<const double> f, std::span<const double> g);

}  // namespace nucleon
