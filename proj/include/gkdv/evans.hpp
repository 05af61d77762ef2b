#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>
#include <boost/numeric/odeint.hpp>

#include "gkdv/errors.hpp"
#include "gkdv/modulation.hpp"
#include "gkdv/wave.hpp"

namespace gkdv {

/// Monodromy matrix of the first-order system for d/dx L[u] v = mu v:
/// Y' = H(x,mu) Y with companion rows (0,1,0), (0,0,1),
/// (-f''(u)u_x - mu, c - f'(u), 0).  The coefficient matrix is trace-free,
/// so det M(mu) = 1 identically (Abel).
struct Monodromy {
    Complex mu;
    Eigen::Matrix3cd M;
    double det_residual = 0.0;  // |det M - 1|
};

struct EvansOptions {
    int steps = 2048;           // fixed RK78 steps over [0,T]
    double interp_tol = 1e-11;  // profile interpolation error budget
};

inline Monodromy monodromy(const Nonlinearity& nl, const WaveProfile& prof, Complex mu,
                           const EvansOptions& opt = {}) {
    const WaveParams& p = prof.params;

    // interpolation error estimate: energy residual of the interpolant at
    // interval midpoints (exact at the nodes by construction)
    {
        const int n = static_cast<int>(prof.us.size()) - 1;
        const double dx = p.T / n;
        double worst = 0.0;
        for (int i = 0; i < n; ++i) {
            const auto [u, ux] = prof.at((i + 0.5) * dx);
            const double res =
                std::abs(0.5 * ux * ux - (p.E - effective_potential(nl, p.a, p.c, u)));
            worst = std::max(worst, res);
        }
        if (worst > opt.interp_tol * std::max(1.0, std::abs(p.E)))
            throw ProfileResolutionTooCoarse("profile interpolation error " +
                                             std::to_string(worst) +
                                             " exceeds integrator tolerance");
    }

    namespace ode = boost::numeric::odeint;
    using State = std::array<Complex, 9>;  // row-major 3x3 fundamental matrix

    auto rhs = [&](const State& y, State& dy, double x) {
        const auto [u, ux] = prof.at(x);
        const Complex q0 = -nl.d2f(u) * ux - mu;
        const double q1 = p.c - nl.df(u);
        for (int col = 0; col < 3; ++col) {
            dy[0 + col] = y[3 + col];
            dy[3 + col] = y[6 + col];
            dy[6 + col] = q0 * y[0 + col] + q1 * y[3 + col];
        }
    };

    State y{};
    y[0] = y[4] = y[8] = 1.0;
    ode::runge_kutta_fehlberg78<State> stepper;
    const double h = p.T / opt.steps;
    double x = 0.0;
    for (int k = 0; k < opt.steps; ++k) {
        stepper.do_step(rhs, y, x, h);
        x += h;
    }
    for (const auto& v : y)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw IntegrationFailure("monodromy integration diverged");

    Monodromy m;
    m.mu = mu;
    for (int r = 0; r < 3; ++r)
        for (int col = 0; col < 3; ++col) m.M(r, col) = y[3 * r + col];
    m.det_residual = std::abs(m.M.determinant() - 1.0);
    return m;
}

/// Periodic Evans function D(mu,kappa) = det(M(mu) - e^{i kappa} I).
inline Complex evans_value(const Monodromy& m, double kappa) {
    const Complex rot = std::exp(Complex(0.0, kappa));
    Eigen::Matrix3cd A = m.M;
    A.diagonal().array() -= rot;
    return A.determinant();
}

/// Least-squares fit of D near the origin over the monomials
/// {mu^3, i kappa mu^2, i kappa^2 mu, kappa^3}, with the full fourth-order
/// monomials included as nuisance terms to absorb the remainder.  Expected
/// values: c30 = -{T,M,P}/2, c21 = ({T,P}_{E,c} + 2{M,P}_{a,E})/2, c12 = 0
/// (absent from the expansion; fitted as a sign-convention null check),
/// c03 = i.
struct EvansExpansion {
    Complex c30, c21, c12, c03;
    double residual = 0.0;  // relative LSQ residual
};

struct FitGrids {
    std::vector<Complex> mu;
    std::vector<double> kappa;
};

inline FitGrids make_fit_grids(double radius) {
    FitGrids g;
    g.mu.push_back(0.0);
    for (double mag : {0.5 * radius, radius})
        for (double ph : {0.0, 0.25 * M_PI, 0.5 * M_PI, 0.75 * M_PI})
            g.mu.push_back(mag * std::exp(Complex(0.0, ph)));
    g.kappa = {-radius, -0.5 * radius, 0.0, 0.5 * radius, radius};
    return g;
}

namespace detail {

inline EvansExpansion fit_expansion_once(const Nonlinearity& nl, const WaveProfile& prof,
                                         const FitGrids& g, const EvansOptions& opt) {
    const int rows = static_cast<int>(g.mu.size() * g.kappa.size());
    Eigen::MatrixXcd A(rows, 15);
    Eigen::VectorXcd b(rows);
    const Complex I(0.0, 1.0);
    int r = 0;
    for (const Complex& mu : g.mu) {
        const Monodromy m = monodromy(nl, prof, mu, opt);
        for (double kappa : g.kappa) {
            const Complex k(kappa, 0.0);
            A(r, 0) = mu * mu * mu;
            A(r, 1) = I * k * mu * mu;
            A(r, 2) = I * k * k * mu;
            A(r, 3) = k * k * k;
            A(r, 4) = mu * mu * mu * mu;
            A(r, 5) = mu * mu * mu * k;
            A(r, 6) = mu * mu * k * k;
            A(r, 7) = mu * k * k * k;
            A(r, 8) = k * k * k * k;
            // fifth order, same purpose
            A(r, 9) = mu * mu * mu * mu * mu;
            A(r, 10) = mu * mu * mu * mu * k;
            A(r, 11) = mu * mu * mu * k * k;
            A(r, 12) = mu * mu * k * k * k;
            A(r, 13) = mu * k * k * k * k;
            A(r, 14) = k * k * k * k * k;
            b(r) = evans_value(m, kappa);
            ++r;
        }
    }
    const Eigen::VectorXcd x = A.colPivHouseholderQr().solve(b);
    EvansExpansion e;
    e.c30 = x(0);
    e.c21 = x(1);
    e.c12 = x(2);
    e.c03 = x(3);
    e.residual = (A * x - b).norm() / std::max(1e-300, b.norm());
    return e;
}

}  // namespace detail

inline EvansExpansion fit_expansion(const Nonlinearity& nl, const WaveProfile& prof,
                                    double radius = 1e-2, const EvansOptions& opt = {},
                                    double consistency_tol = 1e-3) {
    const EvansExpansion full = detail::fit_expansion_once(nl, prof, make_fit_grids(radius), opt);
    const EvansExpansion half =
        detail::fit_expansion_once(nl, prof, make_fit_grids(0.5 * radius), opt);
    const double dominant =
        std::max({std::abs(full.c30), std::abs(full.c21), std::abs(full.c03), 1e-300});
    auto moved = [&](Complex a, Complex b2) {
        return std::abs(a - b2) / std::max({std::abs(a), 1e-3 * dominant});
    };
    if (moved(full.c30, half.c30) > consistency_tol || moved(full.c21, half.c21) > consistency_tol ||
        moved(full.c03, half.c03) > consistency_tol)
        throw FitUnstable("half-radius re-fit moved an expansion coefficient beyond tolerance");
    return full;
}

/// Newton (with deflation) on mu -> D(mu,kappa) for the three spectral
/// branches near the origin, seeded from the dispersion cubic roots via
/// mu0 = i kappa / y_j: substituting mu = i kappa / y into the cubic-order
/// expansion of D gives D = -(i kappa^3 / y^3) P(y) + h.o.t., so D vanishes
/// on the branch exactly when y is a root of P.  (The Whitham-side branch
/// carries the opposite sign through the mu -> -mu correspondence.)
inline std::array<Complex, 3> spectrum_near_origin(const Nonlinearity& nl,
                                                   const WaveProfile& prof, double kappa,
                                                   const std::array<Complex, 3>& cubic_roots,
                                                   const EvansOptions& opt = {}) {
    auto D = [&](Complex mu) { return evans_value(monodromy(nl, prof, mu, opt), kappa); };

    std::array<Complex, 3> found{};
    int nfound = 0;
    for (const Complex& y : cubic_roots) {
        if (std::abs(y) < 1e-12) throw RootLost("cubic root at origin: no usable seed");
        const Complex seed = Complex(0.0, kappa) / y;
        const double trust = 0.75 * std::abs(seed) + 0.2 * std::abs(kappa);
        Complex mu = seed;
        auto deflated = [&](Complex z, Complex val) {
            for (int j = 0; j < nfound; ++j) val /= (z - found[j]);
            return val;
        };
        bool converged = false;
        for (int it = 0; it < 50; ++it) {
            const double dstep = 1e-6 * std::max(std::abs(mu), 1e-4 * std::abs(kappa));
            const Complex f0 = deflated(mu, D(mu));
            const Complex fp = deflated(mu + dstep, D(mu + dstep));
            const Complex fm = deflated(mu - dstep, D(mu - dstep));
            const Complex df = (fp - fm) / (2.0 * dstep);
            if (std::abs(df) == 0.0) throw RootLost("vanishing Evans derivative in Newton");
            const Complex delta = f0 / df;
            mu -= delta;
            if (std::abs(mu - seed) > trust) throw RootLost("Newton left the trust region");
            if (std::abs(delta) < 1e-13 * std::max(std::abs(mu), std::abs(kappa))) {
                converged = true;
                break;
            }
        }
        if (!converged) throw RootLost("Newton failed to converge on a spectral branch");
        found[nfound++] = mu;
    }
    return found;
}

}  // namespace gkdv
