#include <atomic>

#include "nucleon/kernels.hpp"

namespace nucleon::kernels {

namespace {

// -1 auto, otherwise static_cast<int>(Isa)
std::atomic<int> g_forced{-1};

bool detect_avx2() noexcept {
#if defined(NUCLEON_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

}  // namespace

const char* isa_name(Isa isa) noexcept { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

bool avx2_available() noexcept {
    static const bool ok = detect_avx2();
    return ok;
}

Isa active_isa() noexcept {
    const int f = g_forced.load(std::memory_order_relaxed);
    if (f == static_cast<int>(Isa::Scalar)) return Isa::Scalar;
    return avx2_available() ? Isa::Avx2 : Isa::Scalar;
}

void force_isa(std::optional<Isa> isa) noexcept { g_forced.store(isa ? static_cast<int>(*isa) : -1); }

double weighted_dot(const double* w, const double* x, const double* y, std::size_t n) noexcept {
#if defined(NUCLEON_HAVE_AVX2)
    if (active_isa() == Isa::Avx2) return avx2::weighted_dot(w, x, y, n);
#endif
    return scalar::weighted_dot(w, x, y, n);
}

void sturm_count4(const double* diag, const double* off2, std::size_t n, const double* shifts, double pivmin,
                  int* counts) noexcept {
#if defined(NUCLEON_HAVE_AVX2)
    if (active_isa() == Isa::Avx2) return avx2::sturm_count4(diag, off2, n, shifts, pivmin, counts);
#endif
    scalar::sturm_count4(diag, off2, n, shifts, pivmin, counts);
}

void quadratic_sources(const double* phi, const double* chi, std::size_t n, double ka, double kc, double la,
                       double lc, double* sp, double* sm) noexcept {
#if defined(NUCLEON_HAVE_AVX2)
    if (active_isa() == Isa::Avx2) return avx2::quadratic_sources(phi, chi, n, ka, kc, la, lc, sp, sm);
#endif
    scalar::quadratic_sources(phi, chi, n, ka, kc, la, lc, sp, sm);
}

}  // namespace nucleon::kernels
