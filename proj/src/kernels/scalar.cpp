#include <cmath>

#include "nucleon/kernels.hpp"

namespace nucleon::kernels::scalar {

double weighted_dot(const double* w, const double* x, const double* y, std::size_t n) noexcept {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += w[i] * x[i] * y[i];
    return s;
}

void sturm_count4(const double* diag, const double* off2, std::size_t n, const double* shifts, double pivmin,
                  int* counts) noexcept {
    for (int j = 0; j < 4; ++j) {
        const double x = shifts[j];
        int c = 0;
        double q = diag[0] - x;
        if (std::fabs(q) < pivmin) q = -pivmin;
        if (q < 0.0) ++c;
        for (std::size_t i = 1; i < n; ++i) {
            q = (diag[i] - x) - off2[i - 1] / q;
            if (std::fabs(q) < pivmin) q = -pivmin;
            if (q < 0.0) ++c;
        }
        counts[j] = c;
    }
}

void quadratic_sources(const double* phi, const double* chi, std::size_t n, double ka, double kc, double la,
                       double lc, double* sp, double* sm) noexcept {
    for (std::size_t i = 0; i < n; ++i) {
        const double p2 = phi[i] * phi[i];
        const double c2 = chi[i] * chi[i];
        sp[i] = ka * p2 + kc * c2;
        sm[i] = la * p2 + lc * c2;
    }
}

}  // namespace nucleon::kernels::scalar
