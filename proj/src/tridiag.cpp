#include "nucleon/tridiag.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cfloat>
#include <cmath>

#include "nucleon/errors.hpp"
#include "nucleon/kernels.hpp"

namespace nucleon {

namespace {

struct Prepared {
    std::vector<double> off2;
    double pivmin = DBL_MIN;
    double lo = 0.0, hi = 0.0;
};

Prepared prepare(std::span<const double> diag, std::span<const double> off) {
    const std::size_t n = diag.size();
    if (n == 0) throw ParameterError("tridiagonal matrix is empty");
    if (off.size() + 1 != n) throw ParameterError("off-diagonal must have n-1 entries");
    Prepared p;
    p.off2.resize(off.size());
    double emax = 1.0;
    for (std::size_t i = 0; i < off.size(); ++i) {
        p.off2[i] = off[i] * off[i];
        emax = std::max(emax, p.off2[i]);
    }
    p.pivmin = DBL_MIN * emax;
    p.lo = diag[0];
    p.hi = diag[0];
    for (std::size_t i = 0; i < n; ++i) {
        const double e = (i > 0 ? std::abs(off[i - 1]) : 0.0) + (i + 1 < n ? std::abs(off[i]) : 0.0);
        p.lo = std::min(p.lo, diag[i] - e);
        p.hi = std::max(p.hi, diag[i] + e);
    }
    const double pad = 2.0 * DBL_EPSILON * std::max(std::abs(p.lo), std::abs(p.hi)) + p.pivmin;
    p.lo -= pad;
    p.hi += pad;
    return p;
}

}  // namespace

int sturm_count(std::span<const double> diag, std::span<const double> off, double x) {
    const Prepared p = prepare(diag, off);
    const double shifts[4] = {x, x, x, x};
    int counts[4];
    kernels::sturm_count4(diag.data(), p.off2.data(), diag.size(), shifts, p.pivmin, counts);
    return counts[0];
}

std::vector<double> tridiag_lowest(std::span<const double> diag, std::span<const double> off, int k) {
    const int n = static_cast<int>(diag.size());
    if (k < 1 || k > n) throw ParameterError("tridiag_lowest: need 1 <= k <= n");
    const Prepared p = prepare(diag, off);
    std::vector<double> out;
    out.reserve(k);
    for (int j = 0; j < k; ++j) {
        // Invariant: count(lo) <= j < count(hi).
        double lo = j > 0 ? std::max(p.lo, out.back() - p.pivmin) : p.lo;
        double hi = p.hi;
        for (int pass = 0; pass < 400; ++pass) {
            const double width = hi - lo;
            const double tol = 2.0 * DBL_EPSILON * std::max(std::abs(lo), std::abs(hi)) + p.pivmin;
            if (width <= tol) break;
            double shifts[4];
            for (int m = 0; m < 4; ++m) shifts[m] = lo + width * (m + 1) / 5.0;
            int counts[4];
            kernels::sturm_count4(diag.data(), p.off2.data(), diag.size(), shifts, p.pivmin, counts);
            double new_lo = lo, new_hi = hi;
            for (int m = 0; m < 4; ++m) {
                if (counts[m] <= j) new_lo = shifts[m];
            }
            for (int m = 3; m >= 0; --m) {
                if (counts[m] > j) new_hi = shifts[m];
            }
            if (new_lo == lo && new_hi == hi) break;
            lo = new_lo;
            hi = new_hi;
        }
        out.push_back(0.5 * (lo + hi));
    }
    return out;
}

std::vector<double> tridiag_eigenvector(std::span<const double> diag, std::span<const double> off, double lambda,
                                        const std::vector<std::vector<double>>& previous) {
    const lapack_int n = static_cast<lapack_int>(diag.size());
    if (off.size() + 1 != diag.size()) throw ParameterError("off-diagonal must have n-1 entries");
    double scale = 0.0;
    for (double d : diag) scale = std::max(scale, std::abs(d));
    for (double e : off) scale = std::max(scale, std::abs(e));

    std::vector<double> dl, d, du, du2(std::max<lapack_int>(n - 2, 1));
    std::vector<lapack_int> ipiv(n);
    double sigma = lambda;
    lapack_int info = 1;
    for (int attempt = 0; attempt < 8 && info != 0; ++attempt) {
        dl.assign(off.begin(), off.end());
        du.assign(off.begin(), off.end());
        d.assign(diag.begin(), diag.end());
        for (double& v : d) v -= sigma;
        info = LAPACKE_dgttrf(n, dl.data(), d.data(), du.data(), du2.data(), ipiv.data());
        if (info < 0) throw NumericalError("dgttrf rejected its arguments");
        if (info > 0) sigma += 4.0 * DBL_EPSILON * std::max(scale, 1.0) * (attempt + 1);
    }
    if (info != 0) throw NumericalError("inverse iteration: shifted matrix stays singular");

    std::vector<double> x(n);
    for (lapack_int i = 0; i < n; ++i) x[i] = 1.0 + 0.25 * std::sin(0.7 * i + 0.3);
    auto orthonormalize = [&] {
        for (const auto& q : previous) {
            double c = 0.0;
            for (lapack_int i = 0; i < n; ++i) c += q[i] * x[i];
            for (lapack_int i = 0; i < n; ++i) x[i] -= c * q[i];
        }
        double nn = 0.0;
        for (double v : x) nn += v * v;
        nn = std::sqrt(nn);
        if (!(nn > 0.0) || !std::isfinite(nn)) throw NumericalError("inverse iteration: degenerate iterate");
        for (double& v : x) v /= nn;
    };
    orthonormalize();
    for (int it = 0; it < 4; ++it) {
        if (LAPACKE_dgttrs(LAPACK_COL_MAJOR, 'N', n, 1, dl.data(), d.data(), du.data(), du2.data(), ipiv.data(),
                           x.data(), n) != 0)
            throw NumericalError("dgttrs failed");
        orthonormalize();
    }
    std::size_t imax = 0;
    for (lapack_int i = 1; i < n; ++i)
        if (std::abs(x[i]) > std::abs(x[imax])) imax = i;
    if (x[imax] < 0.0)
        for (double& v : x) v = -v;
    return x;
}

}  // namespace nucleon
