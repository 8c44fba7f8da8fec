#pragma once

// Symmetric tridiagonal eigenproblems: Sturm multisection for eigenvalues,
// inverse iteration (LAPACK dgttrf/dgttrs) for eigenvectors.

#include <span>
#include <vector>

namespace nucleon {

/// Number of eigenvalues strictly below x.
int sturm_count(std::span<const double> diag, std::span<const double> off, double x);

/// k smallest eigenvalues in ascending order, each bracketed to a few ulps.
std::vector<double> tridiag_lowest(std::span<const double> diag, std::span<const double> off, int k);

/// Unit eigenvector for the eigenvalue lambda, orthogonalized against the
/// given vectors; sign fixed so that the largest component is positive.
std::vector<double> tridiag_eigenvector(std::span<const double> diag, std::span<const double> off, double lambda,
                                        const std::vector<std::vector<double>>& previous);

}  // namespace nucleon
