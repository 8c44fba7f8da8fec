#pragma once

// General banded matrix in LAPACK band storage, solved with dgbsv.

#include <cstddef>
#include <span>
#include <vector>

namespace nucleon {

class BandMatrix {
public:
    BandMatrix(std::size_t n, int kl, int ku);

    std::size_t size() const noexcept { return n_; }
    int kl() const noexcept { return kl_; }
    int ku() const noexcept { return ku_; }

    /// Adds v at (i, j); throws if (i, j) lies outside the band.
    void add(std::size_t i, std::size_t j, double v);
    double get(std::size_t i, std::size_t j) const;

    /// y = A x
    std::vector<double> multiply(std::span<const double> x) const;

    /// Solves A x = rhs (LU with partial pivoting); the matrix is left intact.
    std::vector<double> solve(std::span<const double> rhs) const;

    /// Estimate of ||A^{-1}||_1 from dgbcon.
    double inverse_norm1_estimate() const;

private:
    std::size_t index(std::size_t i, std::size_t j) const;

    std::size_t n_;
    int kl_, ku_, ldab_;
    std::vector<double> ab_;  ///< column-major, ldab x n
};

}  // namespace nucleon
