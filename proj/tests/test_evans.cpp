#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "gkdv/gkdv.hpp"

using gkdv::Complex;

TEST_CASE("monodromy determinant is one (trace-free system)") {
    const auto nl = gkdv::make_kdv();
    const auto p = gkdv::solve_wave(nl, 0.0, -0.12, 1.0);
    const auto prof = gkdv::sample_profile(nl, p, 512);
    for (double re : {-0.2, 0.0, 0.2})
        for (double im : {-0.2, 0.0, 0.2}) {
            const auto m = gkdv::monodromy(nl, prof, Complex(re, im));
            CHECK(m.det_residual < 1e-8);
        }
}

TEST_CASE("Evans value at mu = 0 is the closed form (1 - e^{ik})^3") {
    const auto nl = gkdv::make_mkdv(-1);
    const auto p = gkdv::solve_wave(nl, 0.0, 0.1, -1.0);
    const auto prof = gkdv::sample_profile(nl, p, 512);
    const auto m0 = gkdv::monodromy(nl, prof, 0.0);
    for (double kappa : {0.1, 0.3, 1.1, M_PI}) {
        const Complex expect = std::pow(1.0 - std::exp(Complex(0.0, kappa)), 3);
        CHECK(std::abs(gkdv::evans_value(m0, kappa) - expect) < 1e-8);
    }
}

TEST_CASE("D(mu, 0) is real for real mu") {
    const auto nl = gkdv::make_kdv();
    const auto p = gkdv::solve_wave(nl, 0.1, -0.10, 0.8);
    const auto prof = gkdv::sample_profile(nl, p, 512);
    for (double mu : {0.05, 0.21, -0.13, 1.0}) {
        const Complex d = gkdv::evans_value(gkdv::monodromy(nl, prof, mu), 0.0);
        CHECK(std::abs(d.imag()) < 1e-10 * std::max(1e-300, std::abs(d)));
    }
}

TEST_CASE("large real mu gives negative D") {
    const auto nl = gkdv::make_kdv();
    const auto p = gkdv::solve_wave(nl, 0.0, -0.12, 1.0);
    const auto prof = gkdv::sample_profile(nl, p, 512);
    const double lam = 10.0 * std::max(1.0, std::abs(p.c));
    CHECK(gkdv::evans_value(gkdv::monodromy(nl, prof, lam), 0.0).real() < 0.0);
}

TEST_CASE("leading expansion coefficients match the bracket predictions") {
    struct Point {
        const char* tag;
        double a, E, c;
    };
    for (const Point& s : {Point{"kdv", 0.0, -0.12, 1.0}, Point{"mkdv+", 0.0, 0.1, 1.0},
                           Point{"mkdv-", 0.0, 0.1, -1.0}}) {
        const auto nl = gkdv::nonlinearity_from_tag(s.tag);
        const auto p = gkdv::solve_wave(nl, s.a, s.E, s.c);
        const auto prof = gkdv::sample_profile(nl, p, 512);
        const auto br = gkdv::brackets(gkdv::gradients(nl, p));
        const auto fit = gkdv::fit_expansion(nl, prof);
        const double pred30 = -0.5 * br.TMP_aEc;
        const double pred21 = 0.5 * (br.TP_Ec + 2.0 * br.MP_aE);
        CHECK(std::abs(fit.c30 - pred30) <= 1e-3 * std::max(1.0, std::abs(pred30)));
        CHECK(std::abs(fit.c21 - pred21) <= 1e-3 * std::max(1.0, std::abs(pred21)));
        CHECK(std::abs(fit.c03 - Complex(0.0, 1.0)) < 1e-3);
        const double dominant =
            std::max({std::abs(fit.c30), std::abs(fit.c21), std::abs(fit.c03)});
        CHECK(std::abs(fit.c12) < 1e-3 * dominant);
        CHECK(fit.residual < 1e-5);
    }
}

TEST_CASE("coarse profile is rejected, wild fit radius is flagged") {
    const auto nl = gkdv::make_kdv();
    const auto p = gkdv::solve_wave(nl, 0.0, -0.12, 1.0);
    const auto coarse = gkdv::sample_profile(nl, p, 64);
    gkdv::EvansOptions strict;
    strict.interp_tol = 1e-15;
    CHECK_THROWS_AS(gkdv::monodromy(nl, coarse, 0.0, strict), gkdv::ProfileResolutionTooCoarse);

    const auto prof = gkdv::sample_profile(nl, p, 512);
    // a fit radius of order one leaves the asymptotic regime and must not
    // silently return coefficients
    CHECK_THROWS_AS(gkdv::fit_expansion(nl, prof, 2.0, {}, 1e-8), gkdv::FitUnstable);
}

TEST_CASE("spectral curves near the origin follow the cubic branches") {
    const auto nl = gkdv::make_kdv();
    const auto p = gkdv::solve_wave(nl, 0.0, -0.12, 1.0);
    const auto prof = gkdv::sample_profile(nl, p, 512);
    const auto dc = gkdv::dispersion_cubic(gkdv::brackets(gkdv::gradients(nl, p)));
    const double kappa = 0.02;
    const auto roots = gkdv::spectrum_near_origin(nl, prof, kappa, dc.roots);
    for (int j = 0; j < 3; ++j) {
        // each root is a genuine zero of D and lies near its branch seed
        const Complex d = gkdv::evans_value(gkdv::monodromy(nl, prof, roots[j]), kappa);
        CHECK(std::abs(d) < 1e-10);
        const Complex seed = Complex(0.0, kappa) / dc.roots[j];
        CHECK(std::abs(roots[j] - seed) < 0.2 * std::abs(seed));
        // stable KdV wave: spectrum stays on the imaginary axis
        CHECK(std::abs(roots[j].real()) < 1e-6 * std::abs(roots[j]));
    }
}
