#include <immintrin.h>

#include "nucleon/kernels.hpp"

namespace nucleon::kernels::avx2 {

double weighted_dot(const double* w, const double* x, const double* y, std::size_t n) noexcept {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256d a0 = _mm256_mul_pd(_mm256_loadu_pd(w + i), _mm256_loadu_pd(x + i));
        const __m256d a1 = _mm256_mul_pd(_mm256_loadu_pd(w + i + 4), _mm256_loadu_pd(x + i + 4));
        acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(a0, _mm256_loadu_pd(y + i)));
        acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(a1, _mm256_loadu_pd(y + i + 4)));
    }
    for (; i + 4 <= n; i += 4) {
        const __m256d a0 = _mm256_mul_pd(_mm256_loadu_pd(w + i), _mm256_loadu_pd(x + i));
        acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(a0, _mm256_loadu_pd(y + i)));
    }
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, _mm256_add_pd(acc0, acc1));
    double s = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
    for (; i < n; ++i) s += w[i] * x[i] * y[i];
    return s;
}

// One lane per shift; identical operation order to the scalar path.
void sturm_count4(const double* diag, const double* off2, std::size_t n, const double* shifts, double pivmin,
                  int* counts) noexcept {
    const __m256d x = _mm256_loadu_pd(shifts);
    const __m256d pm = _mm256_set1_pd(pivmin);
    const __m256d neg_pm = _mm256_set1_pd(-pivmin);
    const __m256d zero = _mm256_setzero_pd();
    const __m256d abs_mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
    __m256i cnt = _mm256_setzero_si256();

    __m256d q = _mm256_sub_pd(_mm256_set1_pd(diag[0]), x);
    __m256d small = _mm256_cmp_pd(_mm256_and_pd(q, abs_mask), pm, _CMP_LT_OQ);
    q = _mm256_blendv_pd(q, neg_pm, small);
    cnt = _mm256_sub_epi64(cnt, _mm256_castpd_si256(_mm256_cmp_pd(q, zero, _CMP_LT_OQ)));
    for (std::size_t i = 1; i < n; ++i) {
        const __m256d t = _mm256_div_pd(_mm256_set1_pd(off2[i - 1]), q);
        q = _mm256_sub_pd(_mm256_sub_pd(_mm256_set1_pd(diag[i]), x), t);
        small = _mm256_cmp_pd(_mm256_and_pd(q, abs_mask), pm, _CMP_LT_OQ);
        q = _mm256_blendv_pd(q, neg_pm, small);
        cnt = _mm256_sub_epi64(cnt, _mm256_castpd_si256(_mm256_cmp_pd(q, zero, _CMP_LT_OQ)));
    }
    alignas(32) long long c[4];
    _mm256_store_si256(reinterpret_cast<__m256i*>(c), cnt);
    for (int j = 0; j < 4; ++j) counts[j] = static_cast<int>(c[j]);
}

void quadratic_sources(const double* phi, const double* chi, std::size_t n, double ka, double kc, double la,
                       double lc, double* sp, double* sm) noexcept {
    const __m256d vka = _mm256_set1_pd(ka), vkc = _mm256_set1_pd(kc);
    const __m256d vla = _mm256_set1_pd(la), vlc = _mm256_set1_pd(lc);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d p = _mm256_loadu_pd(phi + i);
        const __m256d c = _mm256_loadu_pd(chi + i);
        const __m256d p2 = _mm256_mul_pd(p, p);
        const __m256d c2 = _mm256_mul_pd(c, c);
        _mm256_storeu_pd(sp + i, _mm256_add_pd(_mm256_mul_pd(vka, p2), _mm256_mul_pd(vkc, c2)));
        _mm256_storeu_pd(sm + i, _mm256_add_pd(_mm256_mul_pd(vla, p2), _mm256_mul_pd(vlc, c2)));
    }
    for (; i < n; ++i) {
        const double p2 = phi[i] * phi[i];
        const double c2 = chi[i] * chi[i];
        sp[i] = ka * p2 + kc * c2;
        sm[i] = la * p2 + lc * c2;
    }
}

}  // namespace nucleon::kernels::avx2
