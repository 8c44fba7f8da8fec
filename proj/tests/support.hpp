#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "nucleon/sigma_omega.hpp"

namespace nucleon::testing {

/// Sum of a few random Fourier modes damped by exp(-r/4) on each field,
/// scaled to the requested distance_to_limit norm. chi(0) and phi(R) stay fixed.
inline SigmaOmegaState smooth_perturbation(const SigmaOmegaState& base, double size, unsigned seed = 2024) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> amp(-1.0, 1.0), freq(0.2, 1.5), phase(0.0, 6.283185307179586);
    const std::size_t n = base.nodes();
    const double R = base.r.back();
    std::vector<std::vector<double>> bump(4, std::vector<double>(n, 0.0));
    for (auto& f : bump)
        for (int mode = 0; mode < 4; ++mode) {
            const double A = amp(rng), k = freq(rng), ph = phase(rng);
            for (std::size_t j = 0; j < n; ++j) {
                const double r = base.r[j];
                f[j] += A * std::cos(k * r + ph) * std::exp(-r / 4.0) * (1.0 - r / R);
            }
        }
    for (std::size_t j = 0; j < n; ++j) bump[1][j] *= base.r[j] / (1.0 + base.r[j]);
    SigmaOmegaState out = base;
    for (std::size_t j = 0; j < n; ++j) {
        out.phi[j] += bump[0][j];
        out.chi[j] += bump[1][j];
        out.wplus[j] += bump[2][j];
        out.wminus[j] += bump[3][j];
    }
    const double scale = size / distance_to_limit(out, base);
    for (std::size_t j = 0; j < n; ++j) {
        out.phi[j] = base.phi[j] + scale * bump[0][j];
        out.chi[j] = base.chi[j] + scale * bump[1][j];
        out.wplus[j] = base.wplus[j] + scale * bump[2][j];
        out.wminus[j] = base.wminus[j] + scale * bump[3][j];
    }
    return out;
}

/// The same construction as a packed direction of unit size.
inline std::vector<double> smooth_direction(const SigmaOmegaState& base, unsigned seed = 7) {
    const SigmaOmegaState p = smooth_perturbation(base, 1.0, seed);
    std::vector<double> a = p.pack(), b = base.pack();
    for (std::size_t i = 0; i < a.size(); ++i) a[i] -= b[i];
    return a;
}

/// Least-squares slope of log y against log x.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace nucleon::testing
