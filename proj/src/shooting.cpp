#include "nucleon/shooting.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nucleon/errors.hpp"
#include "nucleon/grid_ops.hpp"

namespace nucleon {

namespace {

using Stepper = Dop853<2>;

constexpr double kEventTol = 1e-13;
constexpr double kStationaryGap = 1e-12;
constexpr double kReliableRel = 1e-7;
constexpr double kFitRel = 1e-3;

Stepper::Rhs radial_rhs(const Params& p) {
    const double dm1 = p.d - 1.0;
    return [p, dm1](double r, const Stepper::State& y, Stepper::State& f) {
        f[0] = y[1];
        f[1] = -dm1 / r * y[1] - raw::F(y[0], p);
    };
}

template <class G>
double locate(const Stepper& st, G&& g) {
    double lo = st.r_prev(), hi = st.r();
    double g_lo = g(st.state_prev());
    while (hi - lo > kEventTol) {
        const double mid = 0.5 * (lo + hi);
        const double g_mid = g(st.dense(mid));
        if ((g_mid > 0.0) == (g_lo > 0.0)) {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

void push(Trajectory& t, double r, double u, double du, const Params& p) {
    t.r.push_back(r);
    t.u.push_back(u);
    t.du.push_back(du);
    t.H.push_back(hamiltonian(u, du, p));
}

bool in_funnel(double u, double du, double y, const Params& p) {
    if (!(u > 0.0) || u >= 0.05 * y || !(du < 0.0)) return false;
    const double scale = 0.5 * (du * du + p.b * u * u);
    return std::abs(hamiltonian(u, du, p)) <= 0.25 * scale;
}

void check_initial(double y, const Params& p) {
    if (!(y > 0.0) || !(y < kHalfPi)) throw DomainError("shoot: y must lie in (0, pi/2), got " + std::to_string(y));
    if (y < kStationaryGap || kHalfPi - y < kStationaryGap)
        throw DomainError("shoot: y is within 1e-12 of a stationary value");
    if (p.b <= p.a && std::abs(y - p.stationary_angle()) < kStationaryGap)
        throw DomainError("shoot: y = arcsin(sqrt(b/a)) is a stationary solution");
}

}  // namespace

double ShootControls::resolved_r_max(const Params& p) const { return r_max > 0.0 ? r_max : 40.0 / std::sqrt(p.b); }

void ShootControls::validate() const {
    if (!(r_start > 0.0)) throw ParameterError("r_start must be positive");
    if (r_max != 0.0 && !(r_max > r_start)) throw ParameterError("r_max must exceed r_start");
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw ParameterError("tolerances must be positive");
    if (!(bisect_tol > 0.0)) throw ParameterError("bisect_tol must be positive");
    if (!(h_min > 0.0) || !(h_max >= h_min)) throw ParameterError("need 0 < h_min <= h_max");
    if (!(funnel_floor > 0.0) || !(funnel_floor < 0.05)) throw ParameterError("funnel_floor must lie in (0, 0.05)");
    if (!(grid_step > 0.0)) throw ParameterError("grid_step must be positive");
}

IntegratorOptions ShootControls::integrator() const {
    IntegratorOptions o;
    o.rel_tol = rel_tol;
    o.abs_tol = abs_tol;
    o.h_min = h_min;
    o.h_max = h_max;
    return o;
}

const char* verdict_name(Verdict v) noexcept {
    switch (v) {
        case Verdict::SPlus: return "SPlus";
        case Verdict::SZero: return "SZero";
        case Verdict::SMinus: return "SMinus";
        case Verdict::Unresolved: return "Unresolved";
    }
    return "Unresolved";
}

void taylor_start(double y, double r, const Params& p, double& u, double& du) {
    const double c2 = -raw::F(y, p) / (2.0 * p.d);
    const double c4 = -raw::Fprime(y, p) * c2 / (4.0 * (p.d + 2.0));
    const double r2 = r * r;
    u = y + c2 * r2 + c4 * r2 * r2;
    du = 2.0 * c2 * r + 4.0 * c4 * r2 * r;
}

ShotResult shoot(double y, const Params& p, const ShootControls& c) {
    validate(p);
    c.validate();
    check_initial(y, p);
    const double r_max = c.resolved_r_max(p);

    ShotResult res;
    Trajectory& t = res.traj;
    Classification& cls = res.cls;
    t.y = y;
    push(t, 0.0, y, 0.0, p);

    Stepper st(radial_rhs(p), c.integrator());
    Stepper::State s0;
    taylor_start(y, c.r_start, p, s0[0], s0[1]);
    st.start(c.r_start, s0);
    push(t, c.r_start, s0[0], s0[1], p);
    const bool du_positive = s0[1] > 0.0;

    while (st.step(r_max)) {
        const auto& s = st.state();
        const auto& prev = st.state_prev();
        const bool u_event = prev[0] > 0.0 && s[0] <= 0.0;
        const bool du_event = du_positive ? s[1] <= 0.0 : s[1] >= 0.0;

        double r_u = std::numeric_limits<double>::infinity();
        double r_du = std::numeric_limits<double>::infinity();
        if (u_event) r_u = locate(st, [](const Stepper::State& z) { return z[0]; });
        if (du_event) r_du = locate(st, [](const Stepper::State& z) { return z[1]; });

        if (u_event && r_u <= r_du) {
            const auto z = st.dense(r_u);
            push(t, r_u, 0.0, z[1], p);
            cls.r_event = r_u;
            cls.certificate = z[1];
            if (z[1] < 0.0) {
                cls.tag = Verdict::SMinus;
                cls.note = "u vanishes before u'";
            } else {
                cls.tag = Verdict::Unresolved;
                cls.note = "u vanished with u' >= 0";
            }
            return res;
        }
        if (du_event) {
            const auto z = st.dense(r_du);
            push(t, r_du, z[0], 0.0, p);
            const double h = hamiltonian(z[0], 0.0, p);
            cls.r_event = r_du;
            cls.certificate = h;
            if (h < 0.0) {
                cls.tag = Verdict::SPlus;
                cls.note = "u' vanishes with H < 0";
            } else {
                cls.tag = Verdict::Unresolved;
                cls.note = "u' vanished with H >= 0";
            }
            return res;
        }

        push(t, st.r(), s[0], s[1], p);
        if (c.stop_in_funnel && in_funnel(s[0], s[1], y, p) && s[0] < c.funnel_floor * y) {
            cls.tag = Verdict::SZero;
            cls.r_event = st.r();
            cls.certificate = s[0] / y;
            cls.note = "decay funnel";
            return res;
        }
    }

    const double u_end = t.u.back(), du_end = t.du.back();
    cls.r_event = t.r.back();
    if (in_funnel(u_end, du_end, y, p)) {
        cls.tag = Verdict::SZero;
        cls.certificate = u_end / y;
        cls.note = "decay funnel at r_max";
    } else if (t.H.back() < 0.0) {
        cls.tag = Verdict::SPlus;
        cls.certificate = t.H.back();
        cls.note = "stationary-attracted";
    } else {
        cls.tag = Verdict::Unresolved;
        cls.certificate = t.H.back();
        cls.note = "no event by r_max";
    }
    return res;
}

void sample_shot(double y, const Params& p, const ShootControls& c, std::span<const double> radii,
                 std::vector<double>& u, std::vector<double>& du) {
    validate(p);
    c.validate();
    u.assign(radii.size(), 0.0);
    du.assign(radii.size(), 0.0);
    std::vector<std::size_t> order(radii.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return radii[i] < radii[j]; });

    double r_far = c.resolved_r_max(p);
    for (double r : radii) r_far = std::max(r_far, r);
    Stepper st(radial_rhs(p), c.integrator());
    Stepper::State s0;
    taylor_start(y, c.r_start, p, s0[0], s0[1]);
    st.start(c.r_start, s0);
    for (std::size_t idx : order) {
        const double r = radii[idx];
        if (r < 0.0) throw DomainError("sample_shot: negative radius");
        if (r <= c.r_start) {
            taylor_start(y, r, p, u[idx], du[idx]);
            continue;
        }
        while (st.r() < r) st.step(r_far);
        const auto z = r == st.r() ? st.state() : st.dense(r);
        u[idx] = z[0];
        du[idx] = z[1];
    }
}

DecayFit decay_fit(const Trajectory& traj, const Params& p, double r_limit) {
    const double k = 0.5 * (p.d - 1.0);
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::size_t n = 0;
    DecayFit fit;
    fit.r_lo = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const double r = traj.r[i], u = traj.u[i];
        if (r > r_limit || r <= 0.0 || !(u > 1e-10) || !(u < 1e-3)) continue;
        const double z = std::log(u) + k * std::log(r);
        sx += r;
        sy += z;
        sxx += r * r;
        sxy += r * z;
        ++n;
        fit.r_lo = std::min(fit.r_lo, r);
        fit.r_hi = std::max(fit.r_hi, r);
    }
    if (n < 20)
        throw NumericalError("decay_fit: window too short (" + std::to_string(n) + " samples, need 20)");
    const double dn = static_cast<double>(n);
    const double slope = (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
    const double icpt = (sy - slope * sx) / dn;
    fit.rate = -slope;
    fit.C = std::exp(icpt);
    fit.samples = n;
    return fit;
}

double GroundState::tail_value(double r) const {
    const double nu = 0.5 * (params.d - 2.0);
    const double kb = std::sqrt(params.b);
    return tail_amplitude * std::pow(r, -nu) * std::cyl_bessel_k(std::abs(nu), kb * r);
}

double GroundState::tail_derivative(double r) const {
    const double nu = 0.5 * (params.d - 2.0);
    const double kb = std::sqrt(params.b);
    return -tail_amplitude * kb * std::pow(r, -nu) * std::cyl_bessel_k(std::abs(nu + 1.0), kb * r);
}

void GroundState::sample(std::span<const double> radii, std::vector<double>& q, std::vector<double>& dq) const {
    std::vector<double> inner;
    std::vector<std::size_t> inner_idx;
    q.assign(radii.size(), 0.0);
    dq.assign(radii.size(), 0.0);
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (radii[i] <= r_reliable) {
            inner.push_back(radii[i]);
            inner_idx.push_back(i);
        } else {
            q[i] = tail_value(radii[i]);
            dq[i] = tail_derivative(radii[i]);
        }
    }
    std::vector<double> u, du;
    sample_shot(y_bar, params, controls, inner, u, du);
    for (std::size_t k = 0; k < inner_idx.size(); ++k) {
        q[inner_idx[k]] = u[k];
        dq[inner_idx[k]] = du[k];
    }
}

GroundState find_ground_state(const Params& p, const ShootControls& c) {
    validate(p);
    c.validate();
    if (!p.ground_state_regime()) throw RegimeError("no solution for a ≤ 2b");

    ShootControls cc = c;
    cc.stop_in_funnel = false;
    const double threshold = p.threshold_angle();

    auto verdict = [&](double y) {
        ShootControls trial = cc;
        ShotResult s = shoot(y, p, trial);
        // Shots too close to the separatrix to resolve by r_max get one longer run.
        if (s.cls.tag == Verdict::SZero || s.cls.tag == Verdict::Unresolved) {
            trial.r_max = 2.0 * cc.resolved_r_max(p);
            s = shoot(y, p, trial);
        }
        return s.cls.tag;
    };

    double lo = 0.5 * threshold;
    if (verdict(lo) != Verdict::SPlus) throw CertificateError("find_ground_state: no SPlus witness below threshold");
    double hi = std::numeric_limits<double>::quiet_NaN();
    for (int k = 1; k <= 40; ++k) {
        const double y = kHalfPi - std::ldexp(kHalfPi - threshold, -k);
        if (y >= kHalfPi - kStationaryGap) break;
        if (verdict(y) == Verdict::SMinus) {
            hi = y;
            break;
        }
    }
    if (std::isnan(hi)) throw CertificateError("find_ground_state: no SMinus witness found above threshold");

    while (hi - lo > c.bisect_tol) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const Verdict v = verdict(mid);
        if (v == Verdict::SPlus) {
            lo = mid;
        } else if (v == Verdict::SMinus) {
            hi = mid;
        } else {
            break;
        }
    }
    if (hi - lo > c.bisect_tol)
        throw CertificateError("find_ground_state: bracket stalled at width " + std::to_string(hi - lo));

    GroundState gs;
    gs.params = p;
    gs.controls = c;
    gs.y_lo = lo;
    gs.y_hi = hi;
    gs.y_bar = 0.5 * (lo + hi);

    // Witness deviation on a common grid marks where the profile stops being trustworthy.
    const double r_max = c.resolved_r_max(p);
    const double h = c.grid_step;
    const std::size_t n = static_cast<std::size_t>(std::floor(r_max / h)) + 1;
    const std::vector<double> grid = uniform_grid(n, h);
    std::vector<double> u_lo, du_lo, u_hi, du_hi, u_mid, du_mid;
    sample_shot(lo, p, c, grid, u_lo, du_lo);
    sample_shot(hi, p, c, grid, u_hi, du_hi);
    sample_shot(gs.y_bar, p, c, grid, u_mid, du_mid);
    std::size_t i_rel = 0, i_fit = 0;
    bool rel_done = false;
    for (std::size_t i = 1; i < n; ++i) {
        const double dev = std::abs(u_hi[i] - u_lo[i]);
        const double ref = std::abs(u_mid[i]);
        if (!rel_done) {
            if (dev > kReliableRel * ref || !(du_mid[i] < 0.0)) {
                rel_done = true;
            } else {
                i_rel = i;
            }
        }
        if (dev > kFitRel * ref || !(u_mid[i] > 0.0)) break;
        i_fit = i;
    }
    if (i_rel < 2) throw CertificateError("find_ground_state: witnesses separate immediately");
    gs.r_reliable = grid[i_rel];
    gs.r_fit_limit = grid[std::max(i_fit, i_rel)];

    ShotResult mid_shot = shoot(gs.y_bar, p, cc);
    Trajectory& t = mid_shot.traj;
    std::size_t keep = 0;
    while (keep < t.size() && t.r[keep] <= gs.r_fit_limit) ++keep;
    t.r.resize(keep);
    t.u.resize(keep);
    t.du.resize(keep);
    t.H.resize(keep);
    gs.traj = std::move(t);

    const double nu = 0.5 * (p.d - 2.0);
    const double rj = gs.r_reliable;
    gs.tail_amplitude = u_mid[i_rel] / (std::pow(rj, -nu) * std::cyl_bessel_k(std::abs(nu), std::sqrt(p.b) * rj));

    gs.decay = decay_fit(gs.traj, p, gs.r_fit_limit);

    gs.grid = grid;
    gs.Q.resize(n);
    gs.dQ.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (i <= i_rel) {
            gs.Q[i] = u_mid[i];
            gs.dQ[i] = du_mid[i];
        } else {
            gs.Q[i] = gs.tail_value(grid[i]);
            gs.dQ[i] = gs.tail_derivative(grid[i]);
        }
    }
    return gs;
}

std::vector<ShotResult> classify_portrait(const Params& p, std::span<const double> ys, const ShootControls& c) {
    std::vector<ShotResult> out;
    out.reserve(ys.size());
    for (double y : ys) out.push_back(shoot(y, p, c));
    return out;
}

MassEnergy mass_and_energy(std::span<const double> r, std::span<const double> q, std::span<const double> dq,
                           const Params& p) {
    if (r.size() != q.size() || r.size() != dq.size()) throw ParameterError("mass_and_energy: size mismatch");
    MassEnergy me;
    if (r.size() < 4) return me;
    const double h = r[1] - r[0];
    if (r[0] != 0.0 || !(h > 0.0)) throw ParameterError("mass_and_energy: grid must be uniform from r = 0");
    const double area = sphere_area(p.d);
    const std::size_t n = r.size();
    std::vector<double> m(n), kin(n), pot(n), kin_raw(n), phi(n);
    for (std::size_t i = 0; i < n; ++i) phi[i] = std::sin(q[i]);
    const std::vector<double> dphi = fd6_first(phi, h, Parity::Even);
    for (std::size_t i = 0; i < n; ++i) {
        const double w = p.d == 1 ? 1.0 : std::pow(r[i], p.d - 1);
        const double s2 = phi[i] * phi[i];
        m[i] = w * s2;
        kin[i] = w * dq[i] * dq[i];
        pot[i] = w * s2 * s2;
        const double gap = 1.0 - s2;
        kin_raw[i] = gap > 0.0 ? w * dphi[i] * dphi[i] / gap : 0.0;
    }
    const double scale = area;
    me.mass = scale * simpson(m, h);
    const double potential = 0.25 * p.a * scale * simpson(pot, h);
    me.energy = 0.5 * scale * simpson(kin, h) - potential;
    me.energy_raw = 0.5 * scale * simpson(kin_raw, h) - potential;
    return me;
}

MassEnergy mass_and_energy(const GroundState& gs) { return mass_and_energy(gs.grid, gs.Q, gs.dQ, gs.params); }

UnitMass rescale_to_unit_mass(const GroundState& gs) {
    const MassEnergy me = mass_and_energy(gs);
    if (!(me.mass > 0.0)) throw DomainError("rescale_to_unit_mass: mass must be positive");
    const int d = gs.params.d;
    const double lambda = std::pow(me.mass, 1.0 / d);

    UnitMass out;
    out.lambda = lambda;
    out.params = Params::make(lambda * lambda * gs.params.a, lambda * lambda * gs.params.b, d);
    GroundState& g = out.gs;
    g = gs;
    g.params = out.params;
    g.controls.r_max = gs.controls.resolved_r_max(gs.params) / lambda;
    g.controls.grid_step = gs.controls.grid_step / lambda;
    g.r_reliable = gs.r_reliable / lambda;
    g.r_fit_limit = gs.r_fit_limit / lambda;
    const double nu = 0.5 * (d - 2.0);
    g.tail_amplitude = gs.tail_amplitude * std::pow(lambda, -nu);
    g.decay.C = gs.decay.C * std::pow(lambda, -0.5 * (d - 1.0));
    g.decay.rate = gs.decay.rate * lambda;
    g.decay.r_lo = gs.decay.r_lo / lambda;
    g.decay.r_hi = gs.decay.r_hi / lambda;
    for (double& r : g.traj.r) r /= lambda;
    for (double& v : g.traj.du) v *= lambda;
    for (std::size_t i = 0; i < g.traj.size(); ++i) g.traj.H[i] = hamiltonian(g.traj.u[i], g.traj.du[i], g.params);
    for (double& r : g.grid) r /= lambda;
    for (double& v : g.dQ) v *= lambda;
    return out;
}

}  // namespace nucleon
