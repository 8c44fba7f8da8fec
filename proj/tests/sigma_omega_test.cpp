#include <doctest.h>

#include <chrono>
#include <cmath>
#include <vector>

#include "nucleon/errors.hpp"
#include "nucleon/sigma_omega.hpp"
#include "support.hpp"

using namespace nucleon;
using nucleon::testing::loglog_slope;
using nucleon::testing::smooth_direction;
using nucleon::testing::smooth_perturbation;

namespace {

const ContinuationParams kCp{};

const GroundState& nls_ground_state() {
    static const GroundState gs = find_ground_state(kCp.nls(), ShootControls{});
    return gs;
}

SigmaOmegaState limit_at(std::size_t N) { return limit_state(nls_ground_state(), kCp, SigmaOmegaGrid{N, 0.0}); }

double sup_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

SigmaOmegaResidual difference(const SigmaOmegaResidual& a, const SigmaOmegaResidual& b, double scale) {
    SigmaOmegaResidual out = a;
    auto sub = [scale](std::vector<double>& x, const std::vector<double>& y) {
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = (x[i] - y[i]) * scale;
    };
    sub(out.first, b.first);
    sub(out.second, b.second);
    sub(out.wplus, b.wplus);
    sub(out.wminus, b.wminus);
    return out;
}

double max_gap(const SigmaOmegaResidual& a, const SigmaOmegaResidual& b) {
    return difference(a, b, 1.0).norm();
}

}  // namespace

TEST_CASE("parameter validation") {
    CHECK_NOTHROW(kCp.validate());
    ContinuationParams bad = kCp;
    bad.lambda = 0.9;
    CHECK_THROWS_AS(bad.validate(), ParameterError);
    bad = kCp;
    bad.C = -1.0;
    CHECK_THROWS_AS(bad.validate(), ParameterError);
    CHECK(kCp.a() == 4.0);
    CHECK(kCp.b() == 1.0);
    const SigmaOmegaState xi = limit_at(400);
    CHECK_THROWS_AS(residual(0.5, xi, kCp), ParameterError);
    CHECK_THROWS_AS(residual(-0.1, xi, kCp), ParameterError);
}

TEST_CASE("limit state") {
    const SigmaOmegaState xi = limit_at(4000);
    const GroundState& gs = nls_ground_state();
    CHECK(xi.nodes() == 4001);
    CHECK(xi.r.back() == doctest::Approx(30.0));
    std::vector<double> q, dq;
    gs.sample(xi.r, q, dq);
    for (std::size_t j = 0; j < xi.nodes(); j += 97) {
        const double phi = std::sin(q[j]);
        CHECK(xi.phi[j] == doctest::Approx(phi).epsilon(1e-14));
        CHECK(xi.chi[j] == doctest::Approx(dq[j] / std::cos(q[j])).epsilon(1e-12));
        CHECK(xi.wminus[j] == doctest::Approx(-phi * phi).epsilon(1e-14));
        CHECK(xi.wplus[j] == doctest::Approx(-phi * phi + 0.25 * xi.chi[j] * xi.chi[j]).epsilon(1e-12));
    }
}

TEST_CASE("field block vanishes at eps = 0") {
    const SigmaOmegaResidual res = residual(0.0, limit_at(2000), kCp);
    CHECK(sup_abs(res.wplus) < 1e-14);
    CHECK(sup_abs(res.wminus) < 1e-14);
    CHECK(res.second[0] == 0.0);
    CHECK(std::abs(res.first.back()) < 1e-12);
}

TEST_CASE("sampled limit residual is second order in h and first order in eps") {
    const double r1 = residual(0.0, limit_at(2000), kCp).norm();
    const double r2 = residual(0.0, limit_at(4000), kCp).norm();
    const double r3 = residual(0.0, limit_at(8000), kCp).norm();
    CHECK(r1 / r2 == doctest::Approx(4.0).epsilon(0.1));
    CHECK(r2 / r3 == doctest::Approx(4.0).epsilon(0.1));

    const SigmaOmegaState xi = limit_at(4000);
    const double e1 = residual(1e-3, xi, kCp).norm(), e2 = residual(1e-2, xi, kCp).norm();
    CHECK(e1 / e2 == doctest::Approx(0.1).epsilon(0.1));
}

TEST_CASE("Jacobian in a W+ direction at eps = 0") {
    const SigmaOmegaState xi = limit_at(200);
    const std::size_t n = xi.nodes();
    const double h = xi.h();
    std::vector<double> eta(4 * n, 0.0), delta(n);
    for (std::size_t j = 0; j < n; ++j) {
        delta[j] = std::cos(0.3 * j);
        eta[4 * j + 2] = delta[j];
    }
    const SigmaOmegaResidual jv = jacobian_apply(0.0, xi, kCp, eta);
    CHECK(sup_abs(jv.first) == 0.0);
    CHECK(sup_abs(jv.wminus) < 1e-14);
    for (std::size_t j = 0; j < n; ++j) CHECK(jv.wplus[j] == doctest::Approx(delta[j]).epsilon(1e-14));
    CHECK(jv.second[0] == 0.0);
    for (std::size_t j = 0; j + 1 < n; ++j) {
        // Simpson is exact for the cubic moments of r^2 against the hat functions
        const double ra = xi.r[j], rm = ra + 0.5 * h, rb = ra + h;
        const double i0 = h / 6.0 * (ra * ra + 4.0 * rm * rm + rb * rb);
        const double ia = h / 6.0 * (ra * ra + 4.0 * rm * rm * 0.5);
        const double ib = h / 6.0 * (4.0 * rm * rm * 0.5 + rb * rb);
        const double expect = -4.0 * (ia * xi.phi[j] * delta[j] + ib * xi.phi[j + 1] * delta[j + 1]) / i0;
        CHECK(jv.second[j + 1] == doctest::Approx(expect).epsilon(1e-12).scale(1e-12));
    }
}

TEST_CASE("Jacobian against directional differences") {
    const SigmaOmegaState xi = limit_at(1000);
    const std::vector<double> eta = smooth_direction(xi);
    const std::vector<double> z = xi.pack();
    for (double eps : {0.0, 0.1}) {
        const SigmaOmegaResidual jv = jacobian_apply(eps, xi, kCp, eta);
        auto fd_error = [&](double t) {
            SigmaOmegaState plus = xi, minus = xi;
            std::vector<double> zp = z, zm = z;
            for (std::size_t i = 0; i < z.size(); ++i) {
                zp[i] += t * eta[i];
                zm[i] -= t * eta[i];
            }
            plus.unpack(zp);
            minus.unpack(zm);
            const SigmaOmegaResidual fd = difference(residual(eps, plus, kCp), residual(eps, minus, kCp), 0.5 / t);
            return max_gap(fd, jv);
        };
        // the system is at most quadratic in the fields, so central differences are exact
        CHECK(fd_error(1e-2) < 1e-9 * jv.norm());
        CHECK(fd_error(1e-1) < 1e-9 * jv.norm());

        const BandMatrix J = jacobian(eps, xi, kCp);
        const std::vector<double> Jeta = J.multiply(eta);
        for (std::size_t j = 0; j + 1 < xi.nodes(); ++j) {
            CHECK(Jeta[4 * j + 1] == doctest::Approx(jv.first[j]).epsilon(1e-12).scale(1.0));
            CHECK(Jeta[4 * (j + 1)] == doctest::Approx(jv.second[j + 1]).epsilon(1e-12).scale(1.0));
        }
    }
}

TEST_CASE("Jacobian stays well conditioned under refinement") {
    std::vector<double> est;
    for (std::size_t N : {500u, 1000u, 2000u}) est.push_back(jacobian(1e-2, limit_at(N), kCp).inverse_norm1_estimate());
    CHECK(est[1] < 1.5 * est[0]);
    CHECK(est[2] < 1.5 * est[1]);
}

TEST_CASE("Newton") {
    const SigmaOmegaState xi0 = limit_at(4000);
    const NewtonResult at0 = newton_solve(0.0, xi0, kCp);
    CHECK(at0.converged);
    CHECK(at0.state.residual_norm < 1e-10);
    CHECK(at0.iterations <= 4);
    const NewtonResult at1 = newton_solve(1e-2, at0.state, kCp);
    CHECK(at1.converged);
    CHECK(at1.state.residual_norm < 1e-10);
    CHECK(residual(1e-2, at1.state, kCp).norm() == doctest::Approx(at1.state.residual_norm));
    CHECK(at1.state.eps == 1e-2);

    NewtonOptions tight;
    tight.max_iter = 1;
    const NewtonResult cut = newton_solve(0.1, at0.state, kCp, tight);
    CHECK_FALSE(cut.converged);
    CHECK(!cut.message.empty());
}

TEST_CASE("branch from the limit") {
    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<double> eps{0.0, 1e-3, 3e-3, 1e-2, 3e-2, 1e-1};
    const Branch br = continue_branch(eps, kCp, limit_at(4000));
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    REQUIRE_FALSE(br.truncated);
    REQUIRE(br.points.size() == eps.size());
    std::vector<double> xs, ds;
    for (std::size_t i = 0; i < eps.size(); ++i) {
        const BranchPoint& pt = br.points[i];
        CHECK(pt.eps == eps[i]);
        CHECK(pt.state.residual_norm < 1e-10);
        CHECK(residual(pt.eps, pt.state, kCp).norm() < 1e-10);
        CHECK(pt.distance_to_limit == doctest::Approx(distance_to_limit(pt.state, br.limit)));
        if (i > 0) {
            xs.push_back(pt.eps);
            ds.push_back(pt.distance_to_limit);
        }
    }
    CHECK(br.points[0].distance_to_limit == 0.0);
    const double slope = loglog_slope(xs, ds);
    INFO("slope " << slope);
    CHECK(slope >= 0.8);
    CHECK(slope <= 1.2);
    CHECK(seconds < 300.0);

    std::vector<double> q, dq;
    nls_ground_state().sample(br.points[1].state.r, q, dq);
    double chi_gap = 0.0;
    for (std::size_t j = 0; j < q.size(); ++j)
        chi_gap = std::max(chi_gap, std::abs(br.points[1].state.chi[j] - dq[j] / std::cos(q[j])));
    CHECK(chi_gap < 5.0 * eps[1]);
}

TEST_CASE("continuation reaches eps = 0.45 and a cold start converges") {
    const std::vector<double> eps{0.0, 0.1, 0.2, 0.3, 0.45};
    const Branch br = continue_branch(eps, kCp, limit_at(2000));
    CHECK_FALSE(br.truncated);
    CHECK(br.points.size() == eps.size());
    const NewtonResult cold = newton_solve(0.3, limit_at(2000), kCp);
    CHECK(cold.converged);
    CHECK(distance_to_limit(cold.state, br.points[3].state) < 1e-8);
}

TEST_CASE("local uniqueness under smooth perturbations") {
    const SigmaOmegaState xi0 = limit_at(4000);
    const NewtonResult base = newton_solve(1e-2, newton_solve(0.0, xi0, kCp).state, kCp);
    REQUIRE(base.converged);
    for (unsigned seed : {1u, 2u, 3u}) {
        const SigmaOmegaState start = smooth_perturbation(base.state, 1e-3, seed);
        CHECK(distance_to_limit(start, base.state) == doctest::Approx(1e-3));
        const NewtonResult again = newton_solve(1e-2, start, kCp);
        REQUIRE(again.converged);
        CHECK(distance_to_limit(again.state, base.state) < 1e-8);
    }
}

TEST_CASE("resolvent bound") {
    std::vector<double> eps_s, x_s{0.0};
    for (int i = 0; i < 50; ++i) eps_s.push_back(0.5 * i / 49.0);
    for (int i = 0; i < 49; ++i) x_s.push_back(std::pow(10.0, -3.0 + 6.0 * i / 48.0));
    const ResolventReport rep = resolvent_bound_check(kCp, eps_s, x_s);
    CHECK(rep.samples.size() == 2500);
    CHECK(rep.pass());
    for (const ResolventSample& s : rep.samples) {
        // independent 2x2 inverse norm through the Gram matrix
        const long double e = s.eps, x = s.x, C = kCp.C, D = kCp.D;
        const long double m11 = 1 + x * (2 * C + e * e * D), m12 = x * e * D, m21 = x * e * e * e * D, m22 = m11;
        const long double g11 = m11 * m11 + m21 * m21, g22 = m12 * m12 + m22 * m22, g12 = m11 * m12 + m21 * m22;
        const long double tr = g11 + g22, det = m11 * m22 - m12 * m21;
        const long double smin2 = det * det / (0.5L * tr + std::sqrt(0.25L * tr * tr - det * det));
        const double inv = static_cast<double>(1.0L / std::sqrt(smin2));
        CHECK(s.inverse_norm == doctest::Approx(inv).epsilon(1e-12));
        CHECK(s.eig_small == doctest::Approx(1.0 + 2.0 * kCp.C * s.x).epsilon(1e-12));
        CHECK(s.eig_large == doctest::Approx(1.0 + 2.0 * kCp.C * s.x + 2.0 * s.eps * s.eps * kCp.D * s.x)
                                 .epsilon(1e-12));
    }
    const std::vector<double> e0{0.0}, e1{0.1}, xs{1.0, 3.0};
    const ResolventReport r0 = resolvent_bound_check(kCp, e0, xs);
    CHECK(r0.samples[1].inverse_norm == doctest::Approx(1.0 / 7.0).epsilon(1e-15));
    const ResolventReport r1 = resolvent_bound_check(kCp, e1, xs);
    CHECK(r1.samples[0].eig_small == doctest::Approx(3.0).epsilon(1e-15));
}

TEST_CASE("physical couplings") {
    const PhysicalCouplings pc = physical_parameters(kCp, 100.0);
    CHECK(pc.m_sigma == doctest::Approx(100.0).epsilon(1e-15));
    CHECK(pc.m_omega == doctest::Approx(std::sqrt(10001.0)).epsilon(1e-15));
    CHECK(pc.g_sigma == doctest::Approx(1000.0).epsilon(1e-15));
    CHECK(pc.g_omega == doctest::Approx(std::sqrt(10001.0) * std::sqrt(98.0)).epsilon(1e-15));
    CHECK(pc.mu == kCp.mu);
    for (double m : {3.0, 10.0, 1000.0}) {
        ContinuationParams cp{1.3, 0.7, 2.0, 2.5, 0.4, 0.0};
        const ContinuationParams back = continuation_parameters(physical_parameters(cp, m), m);
        CHECK(back.C == doctest::Approx(cp.C).epsilon(1e-12));
        // D is recovered from m_omega^2 - C m^2, which cancels C m^2 / D digits
        CHECK(back.D == doctest::Approx(cp.D).epsilon(std::max(1e-12, 1e-15 * cp.C * m * m / cp.D)));
        CHECK(back.theta == doctest::Approx(cp.theta).epsilon(1e-12));
        CHECK(back.lambda == doctest::Approx(cp.lambda).epsilon(1e-12));
        CHECK(back.mu == doctest::Approx(cp.mu).epsilon(1e-12));
        CHECK(back.eps == doctest::Approx(1.0 / m).epsilon(1e-15));
    }
    CHECK_THROWS_AS(physical_parameters(kCp, 2.0), ParameterError);
    CHECK_THROWS_AS(physical_parameters(kCp, -1.0), ParameterError);
}

TEST_CASE("unscaled profiles") {
    const SigmaOmegaState xi = limit_at(1000);
    const PhysicalProfiles one = unscale_state(xi, kCp, 1.0);
    for (std::size_t j = 0; j < xi.nodes(); j += 37) {
        CHECK(one.x[j] == xi.r[j]);
        CHECK(one.phi[j] == doctest::Approx(xi.phi[j]).epsilon(1e-15));
        CHECK(one.chi[j] == doctest::Approx(0.5 * xi.chi[j]).epsilon(1e-15));
        CHECK(one.wminus[j] == doctest::Approx(xi.wminus[j]).epsilon(1e-15));
        CHECK(one.S[j] == doctest::Approx(one.wplus[j] + one.wminus[j]).epsilon(1e-15));
        CHECK(one.V[j] == doctest::Approx(one.wplus[j] - one.wminus[j]).epsilon(1e-15));
    }

    const std::vector<double> eps{0.0, 1e-2, 3e-2, 0.1};
    const Branch br = continue_branch(eps, kCp, limit_at(4000));
    REQUIRE_FALSE(br.truncated);
    for (std::size_t i = 1; i < eps.size(); ++i) {
        const double m = 1.0 / eps[i];
        const PhysicalProfiles pp = unscale_state(br.points[i].state, kCp, m);
        CHECK(pp.S.front() < 0.0);
        CHECK(pp.V.front() > 0.0);
        const PhysicalResidual pr = physical_residual(pp, kCp);
        INFO("eps " << eps[i] << " residual " << pr.max());
        CHECK(pr.max() < 1e-3);
    }
}
