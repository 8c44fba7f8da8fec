#pragma once

// Inner loops with a scalar reference and an AVX2 variant, chosen at run time.

#include <cstddef>
#include <optional>

namespace nucleon::kernels {

enum class Isa { Scalar, Avx2 };

const char* isa_name(Isa isa) noexcept;

/// True when the binary carries the AVX2 path and the CPU supports it.
bool avx2_available() noexcept;

/// ISA used by the dispatching entry points below.
Isa active_isa() noexcept;

/// Pins dispatch to one ISA (tests); std::nullopt restores auto-detection.
/// Requesting Avx2 on a machine without it falls back to Scalar.
void force_isa(std::optional<Isa> isa) noexcept;

/// sum_i w[i] x[i] y[i]
double weighted_dot(const double* w, const double* x, const double* y, std::size_t n) noexcept;

/// Sturm counts of the symmetric tridiagonal (diag, off) for four shifts:
/// counts[j] = number of eigenvalues < shifts[j]. off2 holds squared
/// off-diagonals (n-1 entries). Pivots smaller than pivmin are replaced by -pivmin.
void sturm_count4(const double* diag, const double* off2, std::size_t n, const double* shifts, double pivmin,
                  int* counts) noexcept;

/// Quadratic sources of the rescaled sigma-omega map:
///   sp = ka * phi^2 + kc * chi^2
///   sm = la * phi^2 + lc * chi^2
void quadratic_sources(const double* phi, const double* chi, std::size_t n, double ka, double kc, double la,
                       double lc, double* sp, double* sm) noexcept;

namespace scalar {
double weighted_dot(const double* w, const double* x, const double* y, std::size_t n) noexcept;
void sturm_count4(const double* diag, const double* off2, std::size_t n, const double* shifts, double pivmin,
                  int* counts) noexcept;
void quadratic_sources(const double* phi, const double* chi, std::size_t n, double ka, double kc, double la,
                       double lc, double* sp, double* sm) noexcept;
}  // namespace scalar

#if defined(NUCLEON_HAVE_AVX2)
namespace avx2 {
double weighted_dot(const double* w, const double* x, const double* y, std::size_t n) noexcept;
void sturm_count4(const double* diag, const double* off2, std::size_t n, const double* shifts, double pivmin,
                  int* counts) noexcept;
void quadratic_sources(const double* phi, const double* chi, std::size_t n, double ka, double kc, double la,
                       double lc, double* sp, double* sm) noexcept;
}  // namespace avx2
#endif

}  // namespace nucleon::kernels
