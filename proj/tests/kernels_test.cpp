#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "nucleon/kernels.hpp"

using namespace nucleon::kernels;

namespace {

std::vector<double> random_vec(std::size_t n, unsigned seed, double lo, double hi) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(n);
    for (double& x : v) x = u(rng);
    return v;
}

struct Restore {
    ~Restore() { force_isa(std::nullopt); }
};

}  // namespace

TEST_CASE("scalar weighted dot against long double") {
    for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 1001u}) {
        const auto w = random_vec(n, 1, 0.0, 1.0), x = random_vec(n, 2, -1.0, 1.0), y = random_vec(n, 3, -1.0, 1.0);
        long double ref = 0.0L, mag = 0.0L;
        for (std::size_t i = 0; i < n; ++i) {
            ref += static_cast<long double>(w[i]) * x[i] * y[i];
            mag += std::abs(static_cast<long double>(w[i]) * x[i] * y[i]);
        }
        CHECK(std::abs(scalar::weighted_dot(w.data(), x.data(), y.data(), n) - static_cast<double>(ref)) <=
              1e-14 * static_cast<double>(mag) + 1e-300);
    }
}

TEST_CASE("dispatch honours force_isa") {
    Restore restore;
    force_isa(Isa::Scalar);
    CHECK(active_isa() == Isa::Scalar);
    force_isa(Isa::Avx2);
    CHECK(active_isa() == (avx2_available() ? Isa::Avx2 : Isa::Scalar));
    force_isa(std::nullopt);
    CHECK(active_isa() == (avx2_available() ? Isa::Avx2 : Isa::Scalar));
    CHECK(std::string(isa_name(Isa::Scalar)) == "scalar");
}

TEST_CASE("SIMD and scalar kernels agree") {
    Restore restore;
    for (std::size_t n : {1u, 2u, 5u, 8u, 13u, 4097u}) {
        const auto w = random_vec(n, 4, 0.0, 1.0), x = random_vec(n, 5, -1.0, 1.0), y = random_vec(n, 6, -1.0, 1.0);
        force_isa(Isa::Scalar);
        const double d0 = weighted_dot(w.data(), x.data(), y.data(), n);
        force_isa(Isa::Avx2);
        const double d1 = weighted_dot(w.data(), x.data(), y.data(), n);
        double mag = 0.0;
        for (std::size_t i = 0; i < n; ++i) mag += std::abs(w[i] * x[i] * y[i]);
        CHECK(std::abs(d0 - d1) <= 1e-14 * mag);

        const auto diag = random_vec(n, 7, 1.0, 3.0), off = random_vec(n, 8, -1.0, 1.0);
        std::vector<double> off2(n > 0 ? n - 1 : 0);
        for (std::size_t i = 0; i + 1 < n; ++i) off2[i] = off[i] * off[i];
        const double shifts[4] = {0.5, 1.7, 2.0, 4.5};
        int c0[4], c1[4];
        force_isa(Isa::Scalar);
        sturm_count4(diag.data(), off2.data(), n, shifts, 1e-300, c0);
        force_isa(Isa::Avx2);
        sturm_count4(diag.data(), off2.data(), n, shifts, 1e-300, c1);
        for (int j = 0; j < 4; ++j) CHECK(c0[j] == c1[j]);

        std::vector<double> sp0(n), sm0(n), sp1(n), sm1(n);
        force_isa(Isa::Scalar);
        quadratic_sources(x.data(), y.data(), n, 0.5, -0.25, 0.9, -0.01, sp0.data(), sm0.data());
        force_isa(Isa::Avx2);
        quadratic_sources(x.data(), y.data(), n, 0.5, -0.25, 0.9, -0.01, sp1.data(), sm1.data());
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(sp0[i] == doctest::Approx(sp1[i]).epsilon(1e-15));
            CHECK(sm0[i] == doctest::Approx(sm1[i]).epsilon(1e-15));
            CHECK(sp0[i] == doctest::Approx(0.5 * x[i] * x[i] - 0.25 * y[i] * y[i]).epsilon(1e-15));
        }
    }
}

TEST_CASE("Sturm kernel counts a diagonal matrix") {
    std::vector<double> diag{1.0, 2.0, 3.0, 4.0, 5.0}, off2(4, 0.0);
    const double shifts[4] = {0.0, 2.5, 3.5, 10.0};
    int c[4];
    sturm_count4(diag.data(), off2.data(), diag.size(), shifts, 1e-300, c);
    CHECK(c[0] == 0);
    CHECK(c[1] == 2);
    CHECK(c[2] == 3);
    CHECK(c[3] == 5);
}
