#pragma once

// Small helpers on uniform radial grids r_k = k h, k = 0..n-1.

#include <span>
#include <vector>

namespace nucleon {

enum class Parity { Even, Odd };

/// Composite Simpson rule on a uniform grid; an odd interval count is closed
/// with the 3/8 rule on the last three intervals.
double simpson(std::span<const double> f, double h);

/// Sixth-order central first derivative. Values left of r = 0 are filled by
/// reflection with the given parity, values past the end are taken as zero.
std::vector<double> fd6_first(std::span<const double> f, double h, Parity parity);

/// Sixth-order central second derivative, same boundary handling.
std::vector<double> fd6_second(std::span<const double> f, double h, Parity parity);

/// n equally spaced points from 0 with step h.
std::vector<double> uniform_grid(std::size_t n, double h);

}  // namespace nucleon
