#include "nucleon/linearization.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nucleon/errors.hpp"
#include "nucleon/grid_ops.hpp"

namespace nucleon {

namespace {

using Stepper = Dop853<4>;

constexpr double kRescaleAt = 1e100;
constexpr double kZeroTol = 1e-13;

Stepper::Rhs coupled_rhs(const Params& p) {
    const double dm1 = p.d - 1.0;
    return [p, dm1](double r, const Stepper::State& y, Stepper::State& f) {
        f[0] = y[1];
        f[1] = -dm1 / r * y[1] - raw::F(y[0], p);
        f[2] = y[3];
        f[3] = -dm1 / r * y[3] - raw::Fprime(y[0], p) * y[2];
    };
}

Stepper::State coupled_start(double y, double r, const Params& p) {
    Stepper::State s;
    taylor_start(y, r, p, s[0], s[1]);
    const double f = raw::F(y, p), fp = raw::Fprime(y, p), fpp = raw::Fsecond(y, p);
    const double v2 = -fp / (2.0 * p.d);
    const double v4 = (fpp * f + fp * fp) / (8.0 * p.d * (p.d + 2.0));
    const double r2 = r * r;
    s[2] = 1.0 + v2 * r2 + v4 * r2 * r2;
    s[3] = 2.0 * v2 * r + 4.0 * v4 * r2 * r;
    return s;
}

}  // namespace

LinearizedSolution solve_linearized(double y, double r_stop, const Params& p, const ShootControls& c,
                                    double fit_span) {
    validate(p);
    c.validate();
    if (!(y > 0.0) || !(y < kHalfPi)) throw DomainError("solve_linearized: y must lie in (0, pi/2)");
    if (!(r_stop > c.r_start)) throw ParameterError("solve_linearized: r_stop must exceed r_start");

    LinearizedSolution out;
    out.y = y;
    std::vector<double> log_abs;
    int rescales = 0;
    const double wr0 = raw::F(y, p);
    double w_drift = 0.0;

    auto record = [&](double r, const Stepper::State& s) {
        out.r.push_back(r);
        out.v.push_back(s[2]);
        out.dv.push_back(s[3]);
        out.rescale_count.push_back(rescales);
        log_abs.push_back(std::log(std::abs(s[2])) + out.log_scale);
        if (p.d == 1 && r > 0.0) {
            const double scale = std::exp(out.log_scale);
            const double w = scale * (s[3] * s[1] + s[2] * raw::F(s[0], p));
            w_drift = std::max(w_drift, std::abs(w - wr0) / std::abs(wr0));
        }
    };

    Stepper::State origin{y, 0.0, 1.0, 0.0};
    record(0.0, origin);
    Stepper st(coupled_rhs(p), c.integrator());
    st.start(c.r_start, coupled_start(y, c.r_start, p));
    record(c.r_start, st.state());

    while (st.step(r_stop)) {
        const auto& prev = st.state_prev();
        const auto& s = st.state();
        if ((prev[2] > 0.0) != (s[2] > 0.0) && s[2] != 0.0) {
            double lo = st.r_prev(), hi = st.r();
            const bool lo_pos = prev[2] > 0.0;
            while (hi - lo > kZeroTol) {
                const double mid = 0.5 * (lo + hi);
                if ((st.dense(mid)[2] > 0.0) == lo_pos)
                    lo = mid;
                else
                    hi = mid;
            }
            const double rz = 0.5 * (lo + hi);
            out.sign_change_radii.push_back(rz);
            out.dv_at_zeros.push_back(st.dense(rz)[3] * std::exp(out.log_scale));
        }
        record(st.r(), s);
        if (std::abs(s[2]) > kRescaleAt || std::abs(s[3]) > kRescaleAt) {
            const double f = std::max(std::abs(s[2]), std::abs(s[3]));
            Stepper::State scaled = s;
            scaled[2] /= f;
            scaled[3] /= f;
            out.log_scale += std::log(f);
            ++rescales;
            st.start(st.r(), scaled);
        }
    }

    const double k = 0.5 * (p.d - 1.0);
    const double r_end = out.r.back();
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < out.r.size(); ++i) {
        const double r = out.r[i];
        if (r < r_end - fit_span || r <= 0.0 || !std::isfinite(log_abs[i])) continue;
        const double z = log_abs[i] + k * std::log(r);
        sx += r;
        sy += z;
        sxx += r * r;
        sxy += r * z;
        ++n;
    }
    if (n >= 3) {
        const double dn = static_cast<double>(n);
        out.growth_rate = (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
    }
    const bool negative_tail = out.v.back() < 0.0 && out.dv.back() < 0.0;
    if (p.d == 1) {
        out.wronskian_drift = w_drift;
        out.divergence_flag = negative_tail && w_drift <= 1e-6;
        out.certificate = "constant Wronskian v'u' - v u''";
    } else {
        out.divergence_flag = negative_tail && out.growth_rate >= 0.5 * std::sqrt(p.b);
        out.certificate = "log-slope fit";
    }
    return out;
}

LinearizedSolution solve_linearized(const Trajectory& base, const Params& p, const ShootControls& c) {
    if (base.size() < 2) throw ParameterError("solve_linearized: base trajectory is empty");
    return solve_linearized(base.y, base.r.back(), p, c);
}

std::vector<double> variation_by_differences(double y, double delta, const Params& p, const ShootControls& c,
                                             std::span<const double> radii) {
    if (!(delta > 0.0)) throw ParameterError("variation_by_differences: delta must be positive");
    std::vector<double> up, dup, dn, ddn;
    sample_shot(y + delta, p, c, radii, up, dup);
    sample_shot(y - delta, p, c, radii, dn, ddn);
    std::vector<double> out(radii.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (up[i] - dn[i]) / (2.0 * delta);
    return out;
}

std::vector<double> variation_at(double y, const Params& p, const ShootControls& c, std::span<const double> radii) {
    validate(p);
    c.validate();
    std::vector<std::size_t> order(radii.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return radii[i] < radii[j]; });
    double r_far = c.r_start;
    for (double r : radii) r_far = std::max(r_far, r);
    std::vector<double> out(radii.size());
    Stepper st(coupled_rhs(p), c.integrator());
    st.start(c.r_start, coupled_start(y, c.r_start, p));
    for (std::size_t idx : order) {
        const double r = radii[idx];
        if (r <= c.r_start) {
            out[idx] = coupled_start(y, r, p)[2];
            continue;
        }
        while (st.r() < r) st.step(r_far);
        out[idx] = r == st.r() ? st.state()[2] : st.dense(r)[2];
    }
    return out;
}

bool WronskianReport::all_pass() const noexcept {
    return !identities.empty() &&
           std::all_of(identities.begin(), identities.end(), [](const IdentityResidual& x) { return x.pass; });
}

WronskianReport wronskian_checks(const GroundState& gs, double r_lo, double r_hi) {
    const Params& p = gs.params;
    const auto& r = gs.grid;
    const std::size_t n = r.size();
    if (n < 16) throw ParameterError("wronskian_checks: ground-state grid too short");
    const double h = r[1] - r[0];

    WronskianReport rep;
    rep.r_lo = r_lo > 0.0 ? r_lo : 0.5;
    rep.r_hi = r_hi > 0.0 ? r_hi : gs.r_reliable - 0.5;
    if (!(rep.r_hi > rep.r_lo)) throw ParameterError("wronskian_checks: empty window");

    std::vector<double> rq(n);
    for (std::size_t i = 0; i < n; ++i) rq[i] = r[i] * gs.dQ[i];

    struct Case {
        const char* name;
        const std::vector<double>* f;
        Parity parity;
        int kind;
    };
    const Case cases[] = {{"L(Q) = Q F'(Q) - F(Q)", &gs.Q, Parity::Even, 0},
                          {"L(rQ') = -2 F(Q)", &rq, Parity::Even, 1},
                          {"L(Q') = ((d-1)/r^2) Q'", &gs.dQ, Parity::Odd, 2}};
    const double dm1 = p.d - 1.0;
    for (const Case& cs : cases) {
        const auto d1 = fd6_first(*cs.f, h, cs.parity);
        const auto d2 = fd6_second(*cs.f, h, cs.parity);
        double num = 0.0, rhs_max = 0.0, d2_max = 0.0;
        for (std::size_t i = 1; i < n; ++i) {
            if (r[i] < rep.r_lo || r[i] > rep.r_hi) continue;
            const double q = gs.Q[i];
            const double fi = (*cs.f)[i];
            const double lhs = d2[i] + dm1 / r[i] * d1[i] + raw::Fprime(q, p) * fi;
            double rhs = 0.0;
            if (cs.kind == 0) rhs = q * raw::Fprime(q, p) - raw::F(q, p);
            if (cs.kind == 1) rhs = -2.0 * raw::F(q, p);
            if (cs.kind == 2) rhs = dm1 / (r[i] * r[i]) * gs.dQ[i];
            num = std::max(num, std::abs(lhs - rhs));
            rhs_max = std::max(rhs_max, std::abs(rhs));
            d2_max = std::max(d2_max, std::abs(d2[i]));
        }
        const double denom = rhs_max > 0.0 ? rhs_max : d2_max;
        IdentityResidual res;
        res.name = cs.name;
        res.relative_error = num / denom;
        res.pass = res.relative_error < rep.threshold;
        rep.identities.push_back(res);
    }
    return rep;
}

}  // namespace nucleon
