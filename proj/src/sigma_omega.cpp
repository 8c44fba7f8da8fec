#include "nucleon/sigma_omega.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <optional>

#include "nucleon/errors.hpp"
#include "nucleon/kernels.hpp"

namespace nucleon {

namespace {

constexpr int kKl = 5;
constexpr int kKu = 6;

void check_eps(double eps) {
    if (!(eps >= 0.0) || !(eps < kMaxContinuationEps))
        throw ParameterError("eps must lie in [0, 0.5)");
}

void check_state(const SigmaOmegaState& xi) {
    const std::size_t n = xi.nodes();
    if (n < 8) throw ParameterError("sigma-omega state needs at least 8 nodes");
    if (xi.phi.size() != n || xi.chi.size() != n || xi.wplus.size() != n || xi.wminus.size() != n)
        throw ParameterError("sigma-omega state: field sizes differ from the grid");
    if (xi.r.front() != 0.0) throw ParameterError("sigma-omega grid must start at r = 0");
}

/// 2x2 matrix eps R(eps) as (r11, r12, r21), r22 = r11.
struct EpsR {
    double r11, r12, r21;
};

EpsR eps_r(double eps, const ContinuationParams& cp) {
    const double den = 2.0 * (cp.C + cp.D * eps * eps);
    const double dc = cp.D / cp.C;
    return {eps * (2.0 + eps * eps * dc) / den, eps * eps * dc / den, eps * eps * eps * eps * dc / den};
}

/// -Delta_h on the nodes as a tridiagonal (lo, mid, up); the last row is zero.
struct Laplacian {
    std::vector<double> lo, mid, up;
};

Laplacian minus_laplacian(std::span<const double> r) {
    const std::size_t n = r.size();
    const double h = r[1] - r[0];
    const double ih2 = 1.0 / (h * h);
    Laplacian L;
    L.lo.assign(n - 1, 0.0);
    L.mid.assign(n, 0.0);
    L.up.assign(n - 1, 0.0);
    L.mid[0] = 6.0 * ih2;
    L.up[0] = -6.0 * ih2;
    for (std::size_t j = 1; j + 1 < n; ++j) {
        const double rm = r[j] - 0.5 * h, rp = r[j] + 0.5 * h;
        const double vol = r[j] * r[j] + h * h / 12.0;
        const double am = rm * rm * ih2 / vol, ap = rp * rp * ih2 / vol;
        L.lo[j - 1] = -am;
        L.mid[j] = am + ap;
        L.up[j] = -ap;
    }
    return L;
}

std::vector<double> apply_tridiag(const Laplacian& L, std::span<const double> w) {
    const std::size_t n = w.size();
    std::vector<double> out(n);
    for (std::size_t j = 0; j < n; ++j) {
        double s = L.mid[j] * w[j];
        if (j > 0) s += L.lo[j - 1] * w[j - 1];
        if (j + 1 < n) s += L.up[j] * w[j + 1];
        out[j] = s;
    }
    return out;
}

/// Solves (1 + kappa L) z = y.
std::vector<double> helmholtz_solve(const Laplacian& L, double kappa, std::vector<double> y) {
    const std::size_t n = y.size();
    std::vector<double> dl(n - 1), d(n), du(n - 1);
    for (std::size_t j = 0; j < n; ++j) d[j] = 1.0 + kappa * L.mid[j];
    for (std::size_t j = 0; j + 1 < n; ++j) {
        dl[j] = kappa * L.lo[j];
        du[j] = kappa * L.up[j];
    }
    const lapack_int info =
        LAPACKE_dgtsv(LAPACK_COL_MAJOR, static_cast<lapack_int>(n), 1, dl.data(), d.data(), du.data(), y.data(),
                      static_cast<lapack_int>(n));
    if (info != 0) throw NumericalError("Helmholtz solve failed (dgtsv info " + std::to_string(info) + ")");
    return y;
}

struct SourceCoefficients {
    double ka, kc, la, lc;
};

SourceCoefficients source_coefficients(double eps, double a) {
    return {a / 4.0, -0.25 + eps * a / 16.0, 1.0 - eps * a / 4.0, -eps * eps * a / 16.0};
}

/// Integrals of r^2, r^2 (r_b - r)/h and r^2 (r - r_a)/h over [r_a, r_a + h].
struct IntervalWeights {
    double i0, ia, ib;
};

IntervalWeights interval_weights(double ra, double h) {
    return {h * (ra * ra + ra * h + h * h / 3.0), h * (0.5 * ra * ra + ra * h / 3.0 + h * h / 12.0),
            h * (0.5 * ra * ra + 2.0 * ra * h / 3.0 + 0.25 * h * h)};
}

/// Blocks (i), (ii) and the sources F + H.
void flow_blocks(double eps, const SigmaOmegaState& xi, const ContinuationParams& cp, SigmaOmegaResidual& res,
                 std::vector<double>& sp, std::vector<double>& sm) {
    const std::size_t n = xi.nodes();
    const std::size_t N = n - 1;
    const double h = xi.h();
    const double b = cp.b();
    res.first.assign(n, 0.0);
    res.second.assign(n, 0.0);
    for (std::size_t j = 0; j < N; ++j) {
        const double wm = 0.5 * (xi.wminus[j] + xi.wminus[j + 1]);
        const double cm = 0.5 * (xi.chi[j] + xi.chi[j + 1]);
        res.first[j] = (xi.phi[j + 1] - xi.phi[j]) / h - (1.0 + wm - eps * b / 4.0) * cm;

        const double ra = xi.r[j], rb = xi.r[j + 1];
        const IntervalWeights iw = interval_weights(ra, h);
        const double ga = (4.0 * xi.wplus[j] + b) * xi.phi[j];
        const double gb = (4.0 * xi.wplus[j + 1] + b) * xi.phi[j + 1];
        res.second[j + 1] = (rb * rb * xi.chi[j + 1] - ra * ra * xi.chi[j] - iw.ia * ga - iw.ib * gb) / iw.i0;
    }
    res.first[N] = xi.phi[N];
    res.second[0] = xi.chi[0];

    const SourceCoefficients sc = source_coefficients(eps, cp.a());
    sp.resize(n);
    sm.resize(n);
    kernels::quadratic_sources(xi.phi.data(), xi.chi.data(), n, sc.ka, sc.kc, sc.la, sc.lc, sp.data(), sm.data());
}

double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

/// Residual with the field rows multiplied by eps R(-Delta) + 1, in pack order.
std::vector<double> premultiplied(double eps, const SigmaOmegaState& xi, const ContinuationParams& cp) {
    SigmaOmegaResidual res;
    std::vector<double> sp, sm;
    flow_blocks(eps, xi, cp, res, sp, sm);
    const std::size_t n = xi.nodes();
    const Laplacian L = minus_laplacian(xi.r);
    const std::vector<double> lp = apply_tridiag(L, xi.wplus), lm = apply_tridiag(L, xi.wminus);
    const EpsR er = eps_r(eps, cp);
    std::vector<double> out(4 * n);
    for (std::size_t j = 0; j < n; ++j) {
        out[4 * j] = res.second[j];
        out[4 * j + 1] = res.first[j];
        out[4 * j + 2] = xi.wplus[j] + er.r11 * lp[j] + er.r12 * lm[j] + sp[j];
        out[4 * j + 3] = xi.wminus[j] + er.r21 * lp[j] + er.r11 * lm[j] + sm[j];
    }
    return out;
}

void add_tridiag_row(BandMatrix& J, const Laplacian& L, std::size_t row, std::size_t j, std::size_t field,
                     double scale, std::size_t n) {
    if (scale == 0.0) return;
    if (j > 0) J.add(row, 4 * (j - 1) + field, scale * L.lo[j - 1]);
    J.add(row, 4 * j + field, scale * L.mid[j]);
    if (j + 1 < n) J.add(row, 4 * (j + 1) + field, scale * L.up[j]);
}

}  // namespace

void ContinuationParams::validate() const {
    if (!(C > 0.0)) throw ParameterError("C must be positive");
    if (!(D > 0.0)) throw ParameterError("D must be positive");
    if (!(theta > 0.0)) throw ParameterError("theta must be positive");
    if (!(lambda > 0.0)) throw ParameterError("lambda must be positive");
    if (!(mu > 0.0)) throw ParameterError("mu must be positive");
    if (!(eps >= 0.0)) throw ParameterError("eps must be non-negative");
    if (!(lambda > 2.0 * mu * theta)) throw ParameterError("need lambda > 2 mu theta");
}

double SigmaOmegaGrid::resolved_R(const ContinuationParams& cp) const {
    return R > 0.0 ? R : 30.0 / std::sqrt(cp.b());
}

std::vector<double> SigmaOmegaState::pack() const {
    const std::size_t n = nodes();
    std::vector<double> z(4 * n);
    for (std::size_t j = 0; j < n; ++j) {
        z[4 * j] = phi[j];
        z[4 * j + 1] = chi[j];
        z[4 * j + 2] = wplus[j];
        z[4 * j + 3] = wminus[j];
    }
    return z;
}

void SigmaOmegaState::unpack(std::span<const double> z) {
    const std::size_t n = nodes();
    if (z.size() != 4 * n) throw ParameterError("SigmaOmegaState::unpack: size mismatch");
    phi.resize(n);
    chi.resize(n);
    wplus.resize(n);
    wminus.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        phi[j] = z[4 * j];
        chi[j] = z[4 * j + 1];
        wplus[j] = z[4 * j + 2];
        wminus[j] = z[4 * j + 3];
    }
}

double SigmaOmegaResidual::norm() const {
    return std::max({max_abs(first), max_abs(second), max_abs(wplus), max_abs(wminus)});
}

SigmaOmegaState limit_state(const GroundState& gs, const ContinuationParams& cp, const SigmaOmegaGrid& grid) {
    cp.validate();
    const Params& p = gs.params;
    if (p.d != 3) throw ParameterError("the sigma-omega system lives in d = 3");
    if (std::abs(p.a - cp.a()) > 1e-12 * cp.a() || std::abs(p.b - cp.b()) > 1e-12 * cp.b())
        throw ParameterError("ground state parameters differ from (2 lambda/theta, 2 mu)");
    if (grid.N < 8) throw ParameterError("sigma-omega grid needs N >= 8");
    const double R = grid.resolved_R(cp);
    const std::size_t n = grid.N + 1;
    const double h = R / static_cast<double>(grid.N);

    SigmaOmegaState xi;
    xi.eps = 0.0;
    xi.r.resize(n);
    for (std::size_t j = 0; j < n; ++j) xi.r[j] = static_cast<double>(j) * h;
    std::vector<double> q, dq;
    gs.sample(xi.r, q, dq);
    const double a = cp.a();
    xi.phi.resize(n);
    xi.chi.resize(n);
    xi.wplus.resize(n);
    xi.wminus.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double c = std::cos(q[j]);
        xi.phi[j] = std::sin(q[j]);
        xi.chi[j] = dq[j] / c;
        xi.wplus[j] = -0.25 * a * xi.phi[j] * xi.phi[j] + 0.25 * xi.chi[j] * xi.chi[j];
        xi.wminus[j] = -xi.phi[j] * xi.phi[j];
    }
    xi.residual_norm = residual(0.0, xi, cp).norm();
    return xi;
}

SigmaOmegaState limit_state(const ContinuationParams& cp, const SigmaOmegaGrid& grid) {
    cp.validate();
    return limit_state(find_ground_state(cp.nls(), ShootControls{}), cp, grid);
}

void apply_resolvent(double eps, const ContinuationParams& cp, std::span<const double> r, std::span<const double> sp,
                     std::span<const double> sm, std::vector<double>& wp, std::vector<double>& wm) {
    check_eps(eps);
    const std::size_t n = r.size();
    if (sp.size() != n || sm.size() != n) throw ParameterError("apply_resolvent: size mismatch");
    if (eps == 0.0) {
        wp.assign(sp.begin(), sp.end());
        wm.assign(sm.begin(), sm.end());
        return;
    }
    const Laplacian L = minus_laplacian(r);
    std::vector<double> y1(n), y2(n);
    for (std::size_t j = 0; j < n; ++j) {
        y1[j] = 0.5 * (sp[j] + sm[j] / eps);
        y2[j] = 0.5 * (sp[j] - sm[j] / eps);
    }
    const std::vector<double> z1 = helmholtz_solve(L, eps / cp.C, std::move(y1));
    const std::vector<double> z2 = helmholtz_solve(L, eps / (cp.C + cp.D * eps * eps), std::move(y2));
    wp.resize(n);
    wm.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        wp[j] = z1[j] + z2[j];
        wm[j] = eps * (z1[j] - z2[j]);
    }
}

SigmaOmegaResidual residual(double eps, const SigmaOmegaState& xi, const ContinuationParams& cp) {
    check_eps(eps);
    check_state(xi);
    SigmaOmegaResidual res;
    std::vector<double> sp, sm, gp, gm;
    flow_blocks(eps, xi, cp, res, sp, sm);
    apply_resolvent(eps, cp, xi.r, sp, sm, gp, gm);
    const std::size_t n = xi.nodes();
    res.wplus.resize(n);
    res.wminus.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        res.wplus[j] = xi.wplus[j] + gp[j];
        res.wminus[j] = xi.wminus[j] + gm[j];
    }
    return res;
}

BandMatrix jacobian(double eps, const SigmaOmegaState& xi, const ContinuationParams& cp) {
    check_eps(eps);
    check_state(xi);
    const std::size_t n = xi.nodes();
    const std::size_t N = n - 1;
    const double h = xi.h();
    const double b = cp.b();
    BandMatrix J(4 * n, kKl, kKu);

    J.add(0, 1, 1.0);
    J.add(4 * N + 1, 4 * N, 1.0);
    for (std::size_t j = 0; j < N; ++j) {
        const std::size_t row1 = 4 * j + 1;
        const double wm = 0.5 * (xi.wminus[j] + xi.wminus[j + 1]);
        const double cm = 0.5 * (xi.chi[j] + xi.chi[j + 1]);
        const double coef = 1.0 + wm - eps * b / 4.0;
        for (std::size_t k : {j, j + 1}) {
            J.add(row1, 4 * k, k == j ? -1.0 / h : 1.0 / h);
            J.add(row1, 4 * k + 1, -0.5 * coef);
            J.add(row1, 4 * k + 3, -0.5 * cm);
        }

        const std::size_t row2 = 4 * (j + 1);
        const double ra = xi.r[j], rb = xi.r[j + 1];
        const IntervalWeights iw = interval_weights(ra, h);
        J.add(row2, 4 * j + 1, -ra * ra / iw.i0);
        J.add(row2, 4 * (j + 1) + 1, rb * rb / iw.i0);
        const double wa = iw.ia / iw.i0, wb = iw.ib / iw.i0;
        J.add(row2, 4 * j, -wa * (4.0 * xi.wplus[j] + b));
        J.add(row2, 4 * j + 2, -wa * 4.0 * xi.phi[j]);
        J.add(row2, 4 * (j + 1), -wb * (4.0 * xi.wplus[j + 1] + b));
        J.add(row2, 4 * (j + 1) + 2, -wb * 4.0 * xi.phi[j + 1]);
    }

    const Laplacian L = minus_laplacian(xi.r);
    const EpsR er = eps_r(eps, cp);
    const SourceCoefficients sc = source_coefficients(eps, cp.a());
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t rp = 4 * j + 2, rm = 4 * j + 3;
        J.add(rp, rp, 1.0);
        J.add(rm, rm, 1.0);
        add_tridiag_row(J, L, rp, j, 2, er.r11, n);
        add_tridiag_row(J, L, rp, j, 3, er.r12, n);
        add_tridiag_row(J, L, rm, j, 2, er.r21, n);
        add_tridiag_row(J, L, rm, j, 3, er.r11, n);
        J.add(rp, 4 * j, 2.0 * sc.ka * xi.phi[j]);
        J.add(rp, 4 * j + 1, 2.0 * sc.kc * xi.chi[j]);
        J.add(rm, 4 * j, 2.0 * sc.la * xi.phi[j]);
        J.add(rm, 4 * j + 1, 2.0 * sc.lc * xi.chi[j]);
    }
    return J;
}

SigmaOmegaResidual jacobian_apply(double eps, const SigmaOmegaState& xi, const ContinuationParams& cp,
                                  std::span<const double> eta) {
    const BandMatrix J = jacobian(eps, xi, cp);
    const std::vector<double> y = J.multiply(eta);
    const std::size_t n = xi.nodes();
    SigmaOmegaResidual out;
    out.first.resize(n);
    out.second.resize(n);
    std::vector<double> gp(n), gm(n);
    for (std::size_t j = 0; j < n; ++j) {
        out.second[j] = y[4 * j];
        out.first[j] = y[4 * j + 1];
        gp[j] = y[4 * j + 2];
        gm[j] = y[4 * j + 3];
    }
    apply_resolvent(eps, cp, xi.r, gp, gm, out.wplus, out.wminus);
    return out;
}

NewtonResult newton_solve(double eps, const SigmaOmegaState& initial, const ContinuationParams& cp,
                          const NewtonOptions& opt) {
    check_eps(eps);
    check_state(initial);
    cp.validate();
    NewtonResult out;
    out.state = initial;
    out.state.eps = eps;
    double norm = residual(eps, out.state, cp).norm();
    if (!std::isfinite(norm)) throw NumericalError("newton_solve: initial residual is not finite");
    while (true) {
        out.state.residual_norm = norm;
        if (norm < opt.tol) {
            out.converged = true;
            return out;
        }
        if (out.iterations >= opt.max_iter) {
            out.message = "no convergence after " + std::to_string(opt.max_iter) + " iterations, residual " +
                          std::to_string(norm);
            return out;
        }
        const BandMatrix J = jacobian(eps, out.state, cp);
        std::vector<double> rhs = premultiplied(eps, out.state, cp);
        for (double& v : rhs) v = -v;
        const std::vector<double> step = J.solve(rhs);
        const std::vector<double> z = out.state.pack();

        double t = 1.0;
        bool accepted = false;
        SigmaOmegaState trial = out.state;
        std::vector<double> zt(z.size());
        for (int k = 0; k <= opt.max_halvings; ++k, t *= 0.5) {
            for (std::size_t i = 0; i < z.size(); ++i) zt[i] = z[i] + t * step[i];
            trial.unpack(zt);
            const double tn = residual(eps, trial, cp).norm();
            if (std::isfinite(tn) && tn < norm) {
                out.state = trial;
                norm = tn;
                accepted = true;
                break;
            }
        }
        ++out.iterations;
        if (!accepted) {
            out.message = "step halving exhausted at residual " + std::to_string(norm);
            out.state.residual_norm = norm;
            return out;
        }
    }
}

double distance_to_limit(const SigmaOmegaState& xi, const SigmaOmegaState& limit) {
    check_state(xi);
    check_state(limit);
    const std::size_t n = xi.nodes();
    if (limit.nodes() != n || std::abs(limit.r.back() - xi.r.back()) > 1e-12 * xi.r.back())
        throw ParameterError("distance_to_limit: states live on different grids");
    const double h = xi.h();
    double total = 0.0;
    const std::vector<double>* a[] = {&xi.phi, &xi.chi, &xi.wplus, &xi.wminus};
    const std::vector<double>* c[] = {&limit.phi, &limit.chi, &limit.wplus, &limit.wminus};
    std::vector<double> e(n);
    for (int f = 0; f < 4; ++f) {
        for (std::size_t j = 0; j < n; ++j) e[j] = (*a[f])[j] - (*c[f])[j];
        for (std::size_t j = 0; j < n; ++j) {
            const double w = h * xi.r[j] * xi.r[j];
            double s = e[j] * e[j];
            if (j > 0 && j + 1 < n) {
                const double d1 = (e[j + 1] - e[j - 1]) / (2.0 * h);
                const double d2 = (e[j + 1] - 2.0 * e[j] + e[j - 1]) / (h * h);
                s += d1 * d1 + d2 * d2;
            }
            total += w * s;
        }
    }
    return std::sqrt(total);
}

double BranchPoint::chi_peak() const { return max_abs(state.chi); }

Branch continue_branch(std::span<const double> eps_list, const ContinuationParams& cp, const SigmaOmegaState& guess,
                       const NewtonOptions& opt, int max_substeps) {
    cp.validate();
    if (eps_list.empty() || eps_list.front() != 0.0) throw ParameterError("eps list must start at 0");
    for (std::size_t i = 1; i < eps_list.size(); ++i)
        if (!(eps_list[i] > eps_list[i - 1])) throw ParameterError("eps list must be strictly ascending");
    for (double e : eps_list) check_eps(e);

    Branch br;
    NewtonResult base = newton_solve(0.0, guess, cp, opt);
    if (!base.converged) {
        br.truncated = true;
        br.diagnostics = "eps = 0: " + base.message;
        return br;
    }
    br.limit = base.state;
    br.points.push_back({0.0, base.state, base.iterations, 0.0});

    int iters = 0;
    std::string failure;
    auto advance = [&](auto&& self, const SigmaOmegaState& from, double target, int depth) -> std::optional<SigmaOmegaState> {
        NewtonResult nr = newton_solve(target, from, cp, opt);
        iters += nr.iterations;
        if (nr.converged) return nr.state;
        failure = nr.message;
        if (depth >= max_substeps) return std::nullopt;
        const double mid = 0.5 * (from.eps + target);
        auto half = self(self, from, mid, depth + 1);
        if (!half) return std::nullopt;
        return self(self, *half, target, depth + 1);
    };

    for (std::size_t i = 1; i < eps_list.size(); ++i) {
        iters = 0;
        auto next = advance(advance, br.points.back().state, eps_list[i], 0);
        if (!next) {
            br.truncated = true;
            br.diagnostics = "eps = " + std::to_string(eps_list[i]) + ": " + failure;
            break;
        }
        br.points.push_back({eps_list[i], *next, iters, distance_to_limit(*next, br.limit)});
    }
    return br;
}

ResolventReport resolvent_bound_check(const ContinuationParams& cp, std::span<const double> eps_samples,
                                      std::span<const double> x_samples) {
    if (!(cp.C > 0.0) || !(cp.D >= 0.0)) throw ParameterError("resolvent check needs C > 0 and D >= 0");
    ResolventReport rep;
    for (double eps : eps_samples) {
        for (double x : x_samples) {
            if (!(eps >= 0.0) || !(x >= 0.0)) throw ParameterError("resolvent samples must be non-negative");
            const double m11 = 1.0 + x * (2.0 * cp.C + eps * eps * cp.D);
            const double m12 = x * eps * cp.D;
            const double m21 = x * eps * eps * eps * cp.D;
            const double m22 = m11;
            const double det = m11 * m22 - m12 * m21;
            const double half_tr = 0.5 * (m11 + m22);
            const double disc = std::sqrt(0.25 * (m11 - m22) * (m11 - m22) + m12 * m21);
            ResolventSample s;
            s.eps = eps;
            s.x = x;
            s.eig_large = half_tr + disc;
            s.eig_small = det / s.eig_large;
            const double expected = 1.0 + 2.0 * cp.C * x;
            s.eig_error = std::abs(s.eig_small - expected) / expected;
            const double e = 0.5 * (m11 + m22), f = 0.5 * (m11 - m22);
            const double g = 0.5 * (m21 + m12), hh = 0.5 * (m21 - m12);
            const double sigma_max = std::hypot(e, hh) + std::hypot(f, g);
            s.inverse_norm = sigma_max / std::abs(det);
            rep.max_eig_error = std::max(rep.max_eig_error, s.eig_error);
            rep.max_inverse_norm = std::max(rep.max_inverse_norm, s.inverse_norm);
            rep.samples.push_back(s);
        }
    }
    return rep;
}

PhysicalCouplings physical_parameters(const ContinuationParams& cp, double m) {
    cp.validate();
    if (!(m > 0.0)) throw ParameterError("mass scale m must be positive");
    if (!(cp.theta * m > cp.lambda)) throw ParameterError("need theta m > lambda for a real omega coupling");
    PhysicalCouplings pc;
    pc.m_sigma = std::sqrt(cp.C) * m;
    pc.m_omega = std::sqrt(cp.C * m * m + cp.D);
    pc.g_sigma = pc.m_sigma * std::sqrt(cp.theta * m);
    pc.g_omega = pc.m_omega * std::sqrt(cp.theta * m - cp.lambda);
    pc.mu = cp.mu;
    return pc;
}

ContinuationParams continuation_parameters(const PhysicalCouplings& pc, double m) {
    if (!(m > 0.0) || !(pc.m_sigma > 0.0) || !(pc.m_omega > 0.0))
        throw ParameterError("masses must be positive");
    ContinuationParams cp;
    const double gs = pc.g_sigma / pc.m_sigma, gw = pc.g_omega / pc.m_omega;
    cp.C = pc.m_sigma * pc.m_sigma / (m * m);
    cp.D = pc.m_omega * pc.m_omega - pc.m_sigma * pc.m_sigma;
    cp.theta = gs * gs / m;
    cp.lambda = gs * gs - gw * gw;
    cp.mu = pc.mu;
    cp.eps = 1.0 / m;
    return cp;
}

PhysicalProfiles unscale_state(const SigmaOmegaState& xi, const ContinuationParams& cp, double m) {
    check_state(xi);
    cp.validate();
    if (!(m > 0.0)) throw ParameterError("mass scale m must be positive");
    const std::size_t n = xi.nodes();
    const double sm = std::sqrt(m), st = std::sqrt(cp.theta);
    PhysicalProfiles pp;
    pp.m = m;
    pp.x.resize(n);
    pp.phi.resize(n);
    pp.chi.resize(n);
    pp.wplus.resize(n);
    pp.wminus.resize(n);
    pp.S.resize(n);
    pp.V.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        pp.x[j] = xi.r[j] / sm;
        pp.phi[j] = xi.phi[j] / st;
        pp.chi[j] = xi.chi[j] / (2.0 * st * sm);
        pp.wplus[j] = xi.wplus[j];
        pp.wminus[j] = m * xi.wminus[j];
        pp.S[j] = pp.wplus[j] + pp.wminus[j];
        pp.V[j] = pp.wplus[j] - pp.wminus[j];
    }
    return pp;
}

double PhysicalResidual::max() const { return std::max({first, second, wplus, wminus}); }

PhysicalResidual physical_residual(const PhysicalProfiles& pp, const ContinuationParams& cp) {
    const std::size_t n = pp.x.size();
    if (n < 8) throw ParameterError("physical_residual: grid too short");
    const double m = pp.m;
    const PhysicalCouplings pc = physical_parameters(cp, m);
    const double is2 = 1.0 / (pc.m_sigma * pc.m_sigma), iw2 = 1.0 / (pc.m_omega * pc.m_omega);
    const double c1 = 0.5 * (is2 + iw2), c2 = 0.5 * (is2 - iw2);
    const double h = pp.x[1] - pp.x[0];
    const double lam = cp.lambda, mu = cp.mu, tm = cp.theta * m;

    auto lap = [&](const std::vector<double>& w, std::size_t j) {
        return (w[j + 1] - 2.0 * w[j] + w[j - 1]) / (h * h) + (w[j + 1] - w[j - 1]) / (h * pp.x[j]);
    };

    double num[4] = {0, 0, 0, 0}, den[4] = {0, 0, 0, 0};
    for (std::size_t j = 1; j + 1 < n; ++j) {
        const double x = pp.x[j];
        const double phi = pp.phi[j], chi = pp.chi[j];
        const double dphi = (pp.phi[j + 1] - pp.phi[j - 1]) / (2.0 * h);
        const double dchi = (pp.chi[j + 1] - pp.chi[j - 1]) / (2.0 * h);
        const double t1 = (2.0 * m + 2.0 * pp.wminus[j] - mu) * chi;
        const double t2a = 2.0 * chi / x, t2b = (2.0 * pp.wplus[j] + mu) * phi;
        const double lp = lap(pp.wplus, j), lm = lap(pp.wminus, j);
        const double dens = 0.5 * lam * (phi * phi + chi * chi);
        const double sp = -dens + tm * chi * chi, sm = dens - tm * phi * phi;
        const double terms[4][4] = {{dphi, t1, 0, 0},
                                    {dchi, t2a, t2b, 0},
                                    {pp.wplus[j], c1 * lp, c2 * lm, sp},
                                    {pp.wminus[j], c2 * lp, c1 * lm, sm}};
        const double res[4] = {dphi - t1, dchi + t2a - t2b, pp.wplus[j] - c1 * lp - c2 * lm - sp,
                               pp.wminus[j] - c2 * lp - c1 * lm - sm};
        for (int k = 0; k < 4; ++k) {
            num[k] = std::max(num[k], std::abs(res[k]));
            for (double t : terms[k]) den[k] = std::max(den[k], std::abs(t));
        }
    }
    PhysicalResidual out;
    out.first = num[0] / den[0];
    out.second = num[1] / den[1];
    out.wplus = num[2] / den[2];
    out.wminus = num[3] / den[3];
    return out;
}

}  // namespace nucleon
