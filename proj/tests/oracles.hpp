// Independent oracles used only by the tests.  Each deliberately avoids the
// code path it checks: the period oracle integrates the profile ODE to first
// return, the root counter scans signs on a dense grid, and the conserved
// integrals use the trapezoid rule on an ODE-sampled profile.
#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "gkdv/gkdv.hpp"

namespace oracle {

// Period by first return of (u, u_x) integrated from (u-, 0): advance until
// u_x changes sign twice, then Newton-polish the return time on u_x = 0.
inline double first_return_period(const gkdv::Nonlinearity& nl, const gkdv::WaveParams& p,
                                  double dt_scale = 1e-4) {
    namespace odeint = boost::numeric::odeint;
    using State = std::array<double, 2>;
    auto rhs = [&](const State& y, State& dydx, double) {
        dydx[0] = y[1];
        dydx[1] = -gkdv::potential_slope(nl, p.a, p.c, y[0]);
    };
    odeint::runge_kutta_fehlberg78<State> stepper;
    State y{p.uminus, 0.0};
    const double dt = dt_scale * p.T;
    double t = 0.0;
    int sign_changes = 0;
    double prev_ux = 0.0;
    for (long step = 0; step < 4000000; ++step) {
        const State yprev = y;
        stepper.do_step(rhs, y, t, dt);
        t += dt;
        if (step > 2 && prev_ux * y[1] < 0.0) {
            ++sign_changes;
            if (sign_changes == 2) {
                // Newton on u_x(t) = 0 starting from the bracketed end
                State z = yprev;
                double tz = t - dt;
                for (int it = 0; it < 60; ++it) {
                    const double slope = -gkdv::potential_slope(nl, p.a, p.c, z[0]);
                    const double corr = z[1] / slope;
                    const double h = -corr;
                    stepper.do_step(rhs, z, tz, h);
                    tz += h;
                    if (std::abs(z[1]) < 1e-13 * std::max(1.0, std::abs(slope) * p.T)) break;
                }
                return tz;
            }
        }
        prev_ux = y[1];
    }
    throw std::runtime_error("first_return_period: no return found");
}

// Number of real roots of E - V(u) in [lo, hi] by dense sign scan.
inline int sign_scan_roots(const std::function<double(double)>& g, double lo, double hi,
                           int n = 20000) {
    int count = 0;
    double prev = g(lo);
    for (int i = 1; i <= n; ++i) {
        const double u = lo + (hi - lo) * i / n;
        const double cur = g(u);
        if (prev == 0.0)
            ++count;
        else if (prev * cur < 0.0)
            ++count;
        prev = cur;
    }
    return count;
}

// Trapezoid-rule conserved integrals over one ODE-sampled period.
struct TrapezoidIntegrals {
    double M, P, H;
};

inline TrapezoidIntegrals trapezoid_integrals(const gkdv::Nonlinearity& nl,
                                              const gkdv::WaveParams& p, int n = 20000) {
    namespace odeint = boost::numeric::odeint;
    using State = std::array<double, 2>;
    auto rhs = [&](const State& y, State& dydx, double) {
        dydx[0] = y[1];
        dydx[1] = -gkdv::potential_slope(nl, p.a, p.c, y[0]);
    };
    odeint::runge_kutta_fehlberg78<State> stepper;
    State y{p.uminus, 0.0};
    const double h = p.T / n;
    double M = 0.0, P = 0.0, H = 0.0;
    auto accum = [&](const State& s, double w) {
        M += w * s[0];
        P += w * s[0] * s[0];
        H += w * (0.5 * s[1] * s[1] - nl.F(s[0]));
    };
    accum(y, 0.5 * h);
    for (int i = 0; i < n; ++i) {
        const int sub = 8;
        for (int k = 0; k < sub; ++k) stepper.do_step(rhs, y, i * h + k * h / sub, h / sub);
        accum(y, i + 1 == n ? 0.5 * h : h);
    }
    return {M, P, H};
}

// x(u) on the lower half-orbit by quadrature inversion:
//   x(u) = \int_{u-}^{u} dv / sqrt(2 (E - V(v))).
inline double x_of_u(const gkdv::Nonlinearity& nl, const gkdv::WaveParams& p, double u) {
    // substitute v = u- + (u - u-) s^2 to absorb the left-endpoint square root
    const double span = u - p.uminus;
    auto f = [&](double s) {
        const double v = p.uminus + span * s * s;
        const double ev = p.E - gkdv::effective_potential(nl, p.a, p.c, v);
        if (ev <= 0.0) return 0.0;
        return 2.0 * span * s / std::sqrt(2.0 * ev);
    };
    return gkdv::integrate(f, 0.0, 1.0, 1e-12);
}

// Parameter map of the Galilean shift u -> u + g for f(u) = u^2/2: it fixes
// the orbit shape, hence the period.
struct GalileanImage {
    double a, E, c;
};

inline GalileanImage galilean_kdv(double a, double E, double c, double g) {
    return {a + c * g - g * g, E + a * g + 0.5 * c * g * g - g * g * g / 3.0, c - 2.0 * g};
}

}  // namespace oracle
