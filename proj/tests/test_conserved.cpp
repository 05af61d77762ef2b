#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "gkdv/gkdv.hpp"
#include "oracles.hpp"

namespace {

struct Point {
    const char* tag;
    double a, E, c;
};

const Point kSamples[] = {
    {"kdv", 0.0, -0.12, 1.0},
    {"kdv", 0.1, -0.10, 0.8},
    {"mkdv+", 0.0, -0.15, 1.0},
    {"mkdv+", 0.0, 0.1, 1.0},
    {"mkdv-", 0.0, 0.1, -1.0},
};

}  // namespace

TEST_CASE("conserved integrals match the trapezoid oracle") {
    for (const auto& s : kSamples) {
        const auto nl = gkdv::nonlinearity_from_tag(s.tag);
        const auto p = gkdv::solve_wave(nl, s.a, s.E, s.c);
        const auto q = gkdv::conserved_quantities(nl, p);
        const auto tr = oracle::trapezoid_integrals(nl, p);
        const double scale = std::max({1.0, std::abs(tr.M), std::abs(tr.P), std::abs(tr.H)});
        CHECK(std::abs(q[0] - tr.M) < 1e-6 * scale);
        CHECK(std::abs(q[1] - tr.P) < 1e-6 * scale);
        CHECK(std::abs(q[2] - tr.H) < 1e-6 * scale);
    }
}

TEST_CASE("symmetric wells have zero mass") {
    const auto nl = gkdv::make_mkdv(-1);
    const auto p = gkdv::solve_wave(nl, 0.0, 0.1, -1.0);
    const auto q = gkdv::conserved_quantities(nl, p);
    CHECK(std::abs(q[0]) < 1e-10 * std::sqrt(q[1] * p.T));
}

TEST_CASE("gradient identities") {
    for (const auto& s : kSamples) {
        const auto nl = gkdv::nonlinearity_from_tag(s.tag);
        const auto p = gkdv::solve_wave(nl, s.a, s.E, s.c);
        const auto cs = gkdv::gradients(nl, p);
        // M_a = P_E = 2 T_c
        CHECK(gkdv::symmetry_identity_residual(cs) < 1e-7);
        // E dT + a dM + (c/2) dP + dH = 0
        if (std::abs(s.E) > 1e-8) CHECK(gkdv::grad_relation_residual(p, cs) < 1e-6);
    }
}

TEST_CASE("period gradient agrees with the integral route") {
    for (const auto& s : kSamples) {
        const auto nl = gkdv::nonlinearity_from_tag(s.tag);
        const auto p = gkdv::solve_wave(nl, s.a, s.E, s.c);
        const auto cs = gkdv::gradients(nl, p);
        const auto gi = gkdv::period_gradient_integral_route(nl, p);
        for (int k = 0; k < 3; ++k) {
            const double scale = std::max(1.0, std::abs(gi[k]));
            CHECK(std::abs(cs.grad(0, k) - gi[k]) < 1e-6 * scale);
        }
    }
}

TEST_CASE("gradients respond to actual parameter changes") {
    // FD sanity against a wide two-point secant, to rule out a sign slip
    const auto nl = gkdv::make_kdv();
    const auto p = gkdv::solve_wave(nl, 0.0, -0.12, 1.0);
    const auto cs = gkdv::gradients(nl, p);
    const double h = 1e-3;
    const auto lo = gkdv::solve_wave(nl, 0.0, -0.12 - h, 1.0);
    const auto hi = gkdv::solve_wave(nl, 0.0, -0.12 + h, 1.0);
    const double T_E = (hi.T - lo.T) / (2.0 * h);
    CHECK(cs.grad(0, 1) == Catch::Approx(T_E).epsilon(1e-4));
}

TEST_CASE("bracket determinants are consistent with direct minors") {
    const auto nl = gkdv::make_kdv();
    const auto p = gkdv::solve_wave(nl, 0.1, -0.10, 0.8);
    const auto cs = gkdv::gradients(nl, p);
    const auto br = gkdv::brackets(cs);
    Eigen::Matrix3d J;
    for (int r = 0; r < 3; ++r)
        for (int k = 0; k < 3; ++k) J(r, k) = cs.grad(r, k);
    CHECK(br.TMP_aEc == Catch::Approx(J.determinant()).epsilon(1e-12));
    const double tp = cs.grad(0, 1) * cs.grad(2, 2) - cs.grad(0, 2) * cs.grad(2, 1);
    CHECK(br.TP_Ec == Catch::Approx(tp).epsilon(1e-12));
    const double mp = cs.grad(1, 0) * cs.grad(2, 1) - cs.grad(1, 1) * cs.grad(2, 0);
    CHECK(br.MP_aE == Catch::Approx(mp).epsilon(1e-12));
}
