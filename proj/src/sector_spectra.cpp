#include "nucleon/sector_spectra.hpp"

#include <algorithm>
#include <cmath>

#include "nucleon/errors.hpp"
#include "nucleon/kernels.hpp"
#include "nucleon/tridiag.hpp"

namespace nucleon {

namespace {

enum class Kind { A, L1, L2 };

void check_sector(const Params& p, int ell) {
    if (ell < 0) throw ParameterError("sector index l must be >= 0");
    if (p.d == 1 && ell > 1) throw ParameterError("d = 1 has only the sectors l = 0 (even) and l = 1 (odd)");
}

SectorOperator assemble(const GroundState& gs, Kind kind, int ell, std::size_t N, double R) {
    const Params& p = gs.params;
    check_sector(p, ell);
    if (N < 16) throw ParameterError("sector grid needs N >= 16");
    if (!(R > 0.0)) throw ParameterError("sector radius R must be positive");

    SectorOperator op;
    op.name = kind == Kind::A ? "A" : kind == Kind::L1 ? "L1" : "L2";
    op.ell = ell;
    op.d = p.d;
    op.N = N;
    op.R = R;
    op.h = R / static_cast<double>(N);
    const double h = op.h;
    if (1.0 / (std::sqrt(p.b) * h) < 10.0)
        op.warnings.push_back("fewer than 10 grid points per decay length 1/sqrt(b)");

    op.r.resize(N);
    op.weight.resize(N);
    for (std::size_t i = 0; i < N; ++i) {
        op.r[i] = (static_cast<double>(i) + 0.5) * h;
        const double lo = static_cast<double>(i) * h, hi = lo + h;
        op.weight[i] = p.d == 1 ? 1.0 : (std::pow(hi, p.d) - std::pow(lo, p.d)) / (p.d * h);
    }
    gs.sample(op.r, op.Q, op.dQ);

    std::vector<double> c(N);
    for (std::size_t i = 0; i < N; ++i) {
        c[i] = std::cos(op.Q[i]);
        if (kind != Kind::A && c[i] * c[i] < 1e-10)
            throw DomainError("linearized operator: 1 - phi^2 < 1e-10 on the grid");
    }
    auto kappa = [&](std::size_t i, std::size_t j) { return kind == Kind::A ? 1.0 : 1.0 / (c[i] * c[j]); };
    auto face_weight = [&](double rf) { return p.d == 1 ? 1.0 : std::pow(rf, p.d - 1); };

    const double cent = static_cast<double>(ell) * (ell + p.d - 2.0);
    std::vector<double> S_diag(N, 0.0), S_off(N - 1, 0.0);
    const double ih2 = 1.0 / (h * h);
    for (std::size_t i = 0; i + 1 < N; ++i) {
        const double f = face_weight((static_cast<double>(i) + 1.0) * h) * kappa(i, i + 1);
        S_diag[i] += f * ih2;
        S_diag[i + 1] += f * ih2;
        S_off[i] = -f * ih2;
    }
    S_diag[N - 1] += 2.0 * face_weight(R) * kappa(N - 1, N - 1) * ih2;
    if (p.d == 1 && ell == 1) S_diag[0] += 2.0 * kappa(0, 0) * ih2;

    // cell integral of r^{d-3} (r/r_i)^l, exact on the regular behaviour r^l at the origin
    auto centrifugal = [&](std::size_t i) {
        if (cent == 0.0) return 0.0;
        const double lo = static_cast<double>(i) * h, hi = lo + h, m = p.d - 2.0 + ell;
        return cent * (std::pow(hi, m) - std::pow(lo, m)) / (m * h * std::pow(op.r[i], ell));
    };
    for (std::size_t i = 0; i < N; ++i) {
        const double q = op.Q[i], dq = op.dQ[i];
        const double s = std::sin(q), cc = c[i] * c[i];
        double pot = 0.0;
        switch (kind) {
            case Kind::A:
                pot = -raw::Fprime(q, p);
                break;
            case Kind::L1:
                pot = -dq * dq / cc - 2.0 * s * s * dq * dq / (cc * cc) +
                      2.0 * s * raw::F(q, p) / (cc * c[i]) - 3.0 * p.a * s * s + p.b;
                break;
            case Kind::L2:
                pot = dq * dq / cc - p.a * s * s + p.b;
                break;
        }
        S_diag[i] += op.weight[i] * pot + (kind == Kind::A ? 1.0 : 1.0 / cc) * centrifugal(i);
    }

    op.diag.resize(N);
    op.off.resize(N - 1);
    for (std::size_t i = 0; i < N; ++i) op.diag[i] = S_diag[i] / op.weight[i];
    for (std::size_t i = 0; i + 1 < N; ++i) op.off[i] = S_off[i] / std::sqrt(op.weight[i] * op.weight[i + 1]);
    return op;
}

}  // namespace

double default_sector_radius(const Params& p) { return 30.0 / std::sqrt(p.b); }

std::vector<double> SectorOperator::apply(std::span<const double> v) const {
    if (v.size() != N) throw ParameterError("SectorOperator::apply: size mismatch");
    std::vector<double> out(N);
    for (std::size_t i = 0; i < N; ++i) {
        double s = diag[i] * v[i];
        const double sw = std::sqrt(weight[i]);
        if (i > 0) s += off[i - 1] * std::sqrt(weight[i - 1]) / sw * v[i - 1];
        if (i + 1 < N) s += off[i] * std::sqrt(weight[i + 1]) / sw * v[i + 1];
        out[i] = s;
    }
    return out;
}

SectorOperator assemble_sector_A(const GroundState& gs, int ell, std::size_t N, double R) {
    return assemble(gs, Kind::A, ell, N, R);
}

SectorOperator assemble_L1_direct(const GroundState& gs, int ell, std::size_t N, double R) {
    return assemble(gs, Kind::L1, ell, N, R);
}

SectorOperator assemble_L2_direct(const GroundState& gs, std::size_t N, double R) {
    return assemble(gs, Kind::L2, 0, N, R);
}

SectorOperator conjugate_by_cos(const SectorOperator& A) {
    SectorOperator out = A;
    out.name = "cos-conjugated A";
    std::vector<double> ic(A.N);
    for (std::size_t i = 0; i < A.N; ++i) ic[i] = 1.0 / std::cos(A.Q[i]);
    for (std::size_t i = 0; i < A.N; ++i) out.diag[i] = A.diag[i] * ic[i] * ic[i];
    for (std::size_t i = 0; i + 1 < A.N; ++i) out.off[i] = A.off[i] * ic[i] * ic[i + 1];
    return out;
}

double relative_entry_deviation(const SectorOperator& x, const SectorOperator& y) {
    if (x.N != y.N) throw ParameterError("relative_entry_deviation: size mismatch");
    double dev = 0.0, ref = 0.0;
    for (std::size_t i = 0; i < x.N; ++i) {
        dev = std::max(dev, std::abs(x.diag[i] - y.diag[i]));
        ref = std::max(ref, std::abs(y.diag[i]));
    }
    for (std::size_t i = 0; i + 1 < x.N; ++i) {
        dev = std::max(dev, std::abs(x.off[i] - y.off[i]));
        ref = std::max(ref, std::abs(y.off[i]));
    }
    return dev / ref;
}

double weighted_inner(const SectorOperator& op, std::span<const double> f, std::span<const double> g) {
    if (f.size() != op.N || g.size() != op.N) throw ParameterError("weighted_inner: size mismatch");
    return op.h * kernels::weighted_dot(op.weight.data(), f.data(), g.data(), op.N);
}

SpectralReport lowest_eigenpairs(const SectorOperator& op, int k, double kernel_tol,
                                 std::span<const double> reference) {
    if (k < 1 || static_cast<std::size_t>(k) > op.N) throw ParameterError("lowest_eigenpairs: bad count");
    if (!reference.empty() && reference.size() != op.N)
        throw ParameterError("lowest_eigenpairs: reference has wrong size");
    SpectralReport rep;
    rep.name = op.name;
    rep.ell = op.ell;
    rep.eigenvalues = tridiag_lowest(op.diag, op.off, k);
    rep.negative_count = sturm_count(op.diag, op.off, 0.0);

    std::vector<std::vector<double>> w;
    const double ref_norm = reference.empty() ? 0.0 : std::sqrt(weighted_inner(op, reference, reference));
    for (int j = 0; j < k; ++j) {
        w.push_back(tridiag_eigenvector(op.diag, op.off, rep.eigenvalues[j], w));
        std::vector<double> v(op.N);
        const double ih = 1.0 / std::sqrt(op.h);
        for (std::size_t i = 0; i < op.N; ++i) v[i] = w.back()[i] / std::sqrt(op.weight[i]) * ih;
        if (std::abs(rep.eigenvalues[j]) < kernel_tol) rep.kernel_candidates.push_back(j);
        if (!reference.empty()) {
            const double vn = std::sqrt(weighted_inner(op, v, v));
            rep.correlations.push_back(std::abs(weighted_inner(op, v, reference)) / (vn * ref_norm));
        }
        rep.eigenvectors.push_back(std::move(v));
    }
    return rep;
}

}  // namespace nucleon
