#include "nucleon/banded.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>

#include "nucleon/errors.hpp"

namespace nucleon {

BandMatrix::BandMatrix(std::size_t n, int kl, int ku) : n_(n), kl_(kl), ku_(ku), ldab_(2 * kl + ku + 1) {
    if (n == 0 || kl < 0 || ku < 0) throw ParameterError("BandMatrix: bad shape");
    ab_.assign(static_cast<std::size_t>(ldab_) * n, 0.0);
}

std::size_t BandMatrix::index(std::size_t i, std::size_t j) const {
    const long d = static_cast<long>(i) - static_cast<long>(j);
    if (i >= n_ || j >= n_ || d > kl_ || -d > ku_) throw ParameterError("BandMatrix: entry outside the band");
    // Row kl + ku + i - j of column j (0-based) in dgbsv layout.
    return j * static_cast<std::size_t>(ldab_) + static_cast<std::size_t>(kl_ + ku_ + d);
}

void BandMatrix::add(std::size_t i, std::size_t j, double v) { ab_[index(i, j)] += v; }

double BandMatrix::get(std::size_t i, std::size_t j) const {
    const long d = static_cast<long>(i) - static_cast<long>(j);
    if (d > kl_ || -d > ku_) return 0.0;
    return ab_[index(i, j)];
}

std::vector<double> BandMatrix::multiply(std::span<const double> x) const {
    if (x.size() != n_) throw ParameterError("BandMatrix::multiply: size mismatch");
    std::vector<double> y(n_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) {
        const std::size_t i0 = j > static_cast<std::size_t>(ku_) ? j - ku_ : 0;
        const std::size_t i1 = std::min(n_ - 1, j + kl_);
        for (std::size_t i = i0; i <= i1; ++i) y[i] += ab_[index(i, j)] * x[j];
    }
    return y;
}

std::vector<double> BandMatrix::solve(std::span<const double> rhs) const {
    if (rhs.size() != n_) throw ParameterError("BandMatrix::solve: size mismatch");
    std::vector<double> ab = ab_;
    std::vector<double> x(rhs.begin(), rhs.end());
    std::vector<lapack_int> ipiv(n_);
    const lapack_int n = static_cast<lapack_int>(n_);
    const lapack_int info = LAPACKE_dgbsv(LAPACK_COL_MAJOR, n, kl_, ku_, 1, ab.data(), ldab_, ipiv.data(), x.data(), n);
    if (info > 0) throw NumericalError("banded solve: matrix is singular (dgbsv info " + std::to_string(info) + ")");
    if (info < 0) throw NumericalError("banded solve: invalid argument to dgbsv");
    return x;
}

double BandMatrix::inverse_norm1_estimate() const {
    std::vector<double> ab = ab_;
    std::vector<lapack_int> ipiv(n_);
    const lapack_int n = static_cast<lapack_int>(n_);
    double anorm = 0.0;
    for (std::size_t j = 0; j < n_; ++j) {
        double s = 0.0;
        for (int d = -ku_; d <= kl_; ++d) {
            const long i = static_cast<long>(j) + d;
            if (i >= 0 && i < n) s += std::abs(ab_[index(static_cast<std::size_t>(i), j)]);
        }
        anorm = std::max(anorm, s);
    }
    if (LAPACKE_dgbtrf(LAPACK_COL_MAJOR, n, n, kl_, ku_, ab.data(), ldab_, ipiv.data()) != 0)
        throw NumericalError("banded factorization failed");
    double rcond = 0.0;
    if (LAPACKE_dgbcon(LAPACK_COL_MAJOR, '1', n, kl_, ku_, ab.data(), ldab_, ipiv.data(), anorm, &rcond) != 0)
        throw NumericalError("dgbcon failed");
    return 1.0 / (rcond * anorm);
}

}  // namespace nucleon
