#include <doctest.h>

#include <cmath>
#include <vector>

#include "nucleon/linearization.hpp"

using namespace nucleon;

TEST_CASE("variation along the ground state") {
    for (const Params& p : {Params{4.0, 1.0, 3}, Params{4.0, 1.0, 2}, Params{6.0, 2.0, 3}}) {
        const GroundState gs = find_ground_state(p, ShootControls{});
        const LinearizedSolution ls = solve_linearized(gs.y_bar, gs.r_fit_limit, p, ShootControls{});
        REQUIRE(ls.sign_change_radii.size() == 1);
        CHECK(ls.dv_at_zeros[0] < 0.0);
        CHECK(ls.v.back() < 0.0);
        CHECK(ls.divergence_flag);
        CHECK(ls.growth_rate > 0.5 * std::sqrt(p.b));
        CHECK(ls.v.front() == 1.0);
        CHECK(ls.dv.front() == 0.0);
    }
}

TEST_CASE("d = 1 variation keeps a constant Wronskian") {
    const Params p{4.0, 1.0, 1};
    const GroundState gs = find_ground_state(p, ShootControls{});
    const LinearizedSolution ls = solve_linearized(gs.y_bar, gs.r_fit_limit, p, ShootControls{});
    CHECK(ls.sign_change_radii.size() == 1);
    CHECK(ls.wronskian_drift < 1e-6);
    CHECK(ls.divergence_flag);
}


TEST_CASE("coupled variation against central differences") {
    ShootControls c;
    c.rel_tol = 1e-12;
    c.abs_tol = 1e-14;
    const Params p{4.0, 1.0, 3};
    std::vector<double> radii;
    for (double r = 0.5; r <= 5.0; r += 0.5) radii.push_back(r);
    for (double y : {0.9, 1.2}) {
        const std::vector<double> v = variation_at(y, p, c, radii);
        auto error = [&](double delta) {
            const std::vector<double> fd = variation_by_differences(y, delta, p, c, radii);
            double e = 0.0;
            for (std::size_t i = 0; i < radii.size(); ++i) e = std::max(e, std::abs(fd[i] - v[i]));
            return e;
        };
        const double e1 = error(4e-3), e2 = error(2e-3);
        CHECK(e1 < 1e-3);
        CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.15));
    }
}

TEST_CASE("Wronskian-type identities") {
    for (const Params& p : {Params{4.0, 1.0, 3}, Params{4.0, 1.0, 2}, Params{6.0, 2.0, 3}, Params{4.0, 1.0, 1}}) {
        const GroundState gs = find_ground_state(p, ShootControls{});
        const WronskianReport w = wronskian_checks(gs);
        CHECK(w.identities.size() == 3);
        for (const IdentityResidual& id : w.identities) {
            INFO(id.name << " d=" << p.d << " err=" << id.relative_error);
            CHECK(id.relative_error < 1e-5);
        }
        CHECK(w.all_pass());
    }
}

TEST_CASE("Wronskian identity for Q' by independent second differences") {
    const Params p{4.0, 1.0, 3};
    const GroundState gs = find_ground_state(p, ShootControls{});
    const double h = 1e-3;
    double worst = 0.0, scale = 0.0;
    for (double r = 1.0; r < 6.0; r += 0.25) {
        std::vector<double> radii{r - h, r, r + h}, q, dq;
        gs.sample(radii, q, dq);
        const double lhs = (dq[2] - 2.0 * dq[1] + dq[0]) / (h * h) + 2.0 / r * (dq[2] - dq[0]) / (2.0 * h) +
                           eval_Fprime(q[1], p) * dq[1];
        const double rhs = 2.0 / (r * r) * dq[1];
        worst = std::max(worst, std::abs(lhs - rhs));
        scale = std::max(scale, std::abs(rhs));
    }
    CHECK(worst < 1e-4 * scale);
}
