#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "gkdv/errors.hpp"
#include "gkdv/nonlinearity.hpp"
#include "gkdv/quadrature.hpp"

namespace gkdv {

/// Effective potential V(u;a,c) = F(u) - a u - (c/2) u^2.  The traveling
/// wave profile is a classical oscillator in this potential at energy E:
/// u_x^2 / 2 = E - V(u).
inline double effective_potential(const Nonlinearity& nl, double a, double c, double u) {
    return nl.F(u) - a * u - 0.5 * c * u * u;
}

/// V'(u) = f(u) - a - c u.
inline double potential_slope(const Nonlinearity& nl, double a, double c, double u) {
    return nl.f(u) - a - c * u;
}

/// Traveling wave parameters (a,E,c) with the derived turning points and period.
struct WaveParams {
    double a = 0.0;
    double E = 0.0;
    double c = 0.0;
    double uminus = 0.0;  // left turning point, simple root of E = V
    double uplus = 0.0;   // right turning point
    double T = 0.0;       // spatial period
};

struct WaveOptions {
    double quad_tol = 1e-12;
    double root_tol = 1e-13;        // |E - V(u±)| < root_tol * max(1,|E|)
    double degeneracy_delta = 1e-8; // |V'(u±)| * (u+ - u-) threshold
};

namespace detail {

// Local minima of V below level E inside [-W, W], by sign scan of V'.
inline std::vector<double> well_minima(const Nonlinearity& nl, double a, double E, double c,
                                       double W) {
    const int n = 8000;
    std::vector<double> mins;
    double up = potential_slope(nl, a, c, -W);
    for (int i = 1; i <= n; ++i) {
        const double u = -W + 2.0 * W * i / n;
        const double vp = potential_slope(nl, a, c, u);
        if (up < 0.0 && vp >= 0.0) {
            // bisect V' to the minimizer
            double lo = -W + 2.0 * W * (i - 1) / n, hi = u;
            for (int k = 0; k < 80; ++k) {
                const double m = 0.5 * (lo + hi);
                (potential_slope(nl, a, c, m) < 0.0 ? lo : hi) = m;
            }
            const double um = 0.5 * (lo + hi);
            if (effective_potential(nl, a, c, um) < E) mins.push_back(um);
        }
        up = vp;
    }
    return mins;
}

// Refine a root of g(u) = E - V(u) inside the bracket [lo,hi] where
// g(lo) and g(hi) have opposite signs: safeguarded Newton with bisection,
// iterated to bracket collapse.  The regularized period integral amplifies
// an endpoint residual eps in E - V(u±) by roughly 1/(edge * |V'| * width),
// so stopping at a fixed |g| tolerance leaves O(1e-8) discontinuities in T
// across parameter space; machine-precision roots are required.
inline double refine_turning_point(const Nonlinearity& nl, double a, double E, double c,
                                   double lo, double hi, double /*tol*/) {
    auto g = [&](double u) { return E - effective_potential(nl, a, c, u); };
    double glo = g(lo), u = 0.5 * (lo + hi);
    for (int it = 0; it < 300; ++it) {
        const double gu = g(u);
        if (gu == 0.0) return u;
        if ((gu > 0.0) == (glo > 0.0)) {
            lo = u;
            glo = gu;
        } else {
            hi = u;
        }
        const double span = std::abs(hi - lo);
        if (span <= 4.0 * 2.22e-16 * std::max(std::abs(lo), std::abs(hi))) return u;
        const double dg = -potential_slope(nl, a, c, u);
        double un = (dg != 0.0) ? u - gu / dg : 0.5 * (lo + hi);
        if (!(un > std::min(lo, hi) && un < std::max(lo, hi))) un = 0.5 * (lo + hi);
        if (un == u) return u;
        u = un;
    }
    return u;
}

}  // namespace detail

/// Locate the simple roots u- < u+ of E = V(u;a,c) bounding a periodic well.
/// With several disjoint wells the one containing bracket_hint wins; absent
/// a hint, the well with the smallest minimum of V.
inline std::pair<double, double> find_turning_points(const Nonlinearity& nl, double a, double E,
                                                     double c,
                                                     std::optional<double> bracket_hint = {},
                                                     const WaveOptions& opt = {}) {
    double umin_fast = 0.0;
    bool have_fast = false;
    if (bracket_hint) {
        // Newton on V' from the hint (V'' = f'(u) - c is analytic); falls
        // back to the window scan if it wanders or hits a maximum.
        double u = *bracket_hint;
        for (int it = 0; it < 60; ++it) {
            const double vp = potential_slope(nl, a, c, u);
            const double vpp = nl.df(u) - c;
            if (vpp <= 0.0) break;
            const double du = vp / vpp;
            u -= du;
            if (std::abs(u - *bracket_hint) > 10.0 * (1.0 + std::abs(*bracket_hint))) break;
            if (std::abs(du) < 1e-12 * (1.0 + std::abs(u))) {
                if (nl.df(u) - c > 0.0 && effective_potential(nl, a, c, u) < E) {
                    umin_fast = u;
                    have_fast = true;
                }
                break;
            }
        }
    }

    // find candidate wells on an expanding window
    std::vector<double> mins;
    if (have_fast) mins.push_back(umin_fast);
    if (!have_fast) {
        for (double W = 4.0 * (1.0 + std::abs(a) + std::abs(c)); W <= 1.1e3; W *= 2.0) {
            mins = detail::well_minima(nl, a, E, c, W);
            if (!mins.empty()) break;
        }
    }
    if (mins.empty())
        throw NoPeriodicOrbit("no local minimum of V below level E in the scanned range");

    double umin = mins.front();
    if (bracket_hint) {
        double best = std::abs(*bracket_hint - umin);
        for (double m : mins) {
            const double d = std::abs(*bracket_hint - m);
            if (d < best) {
                best = d;
                umin = m;
            }
        }
    } else {
        for (double m : mins)
            if (effective_potential(nl, a, c, m) < effective_potential(nl, a, c, umin)) umin = m;
    }

    auto g = [&](double u) { return E - effective_potential(nl, a, c, u); };
    const double g0 = g(umin);
    if (g0 <= 0.0) throw NoPeriodicOrbit("E at or below the well bottom");

    // harmonic width estimate sets the march step
    const double vpp = std::max(1e-8, -(potential_slope(nl, a, c, umin - 1e-5) -
                                        potential_slope(nl, a, c, umin + 1e-5)) /
                                          2e-5);
    const double step = 0.05 * std::max(std::sqrt(2.0 * g0 / vpp), 1e-2 * (1.0 + std::abs(umin)));

    auto march = [&](double dir) {
        double prev = umin;
        double gprev2 = g0, gprev = g0;
        for (int i = 1; i < 200000; ++i) {
            const double u = umin + dir * i * step;
            const double gu = g(u);
            if (gu <= 0.0) return std::pair<double, double>{prev, u};
            // a local minimum of E - V marks a barrier top: if it reaches
            // level E the orbit is homoclinic, not periodic
            if (i >= 2 && gprev < gprev2 && gu > gprev) {
                double lo = umin + dir * (i - 2) * step, hi = u;
                if (lo > hi) std::swap(lo, hi);
                // ternary search for the dip
                for (int k = 0; k < 160; ++k) {
                    const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
                    if (g(m1) < g(m2))
                        hi = m2;
                    else
                        lo = m1;
                }
                const double gdip = g(0.5 * (lo + hi));
                if (gdip < opt.degeneracy_delta * std::max(1.0, std::abs(E)))
                    throw DegenerateOrbit(
                        "barrier top at the orbit energy: homoclinic/degenerate boundary");
            }
            gprev2 = gprev;
            gprev = gu;
            prev = u;
            if (std::abs(u - umin) > 1e4 * (1.0 + std::abs(umin)))
                throw NoPeriodicOrbit("orbit unbounded: E - V does not change sign");
        }
        throw NoPeriodicOrbit("turning point march exhausted");
    };

    const auto [lin, lout] = march(-1.0);
    const auto [rin, rout] = march(+1.0);
    const double tol = opt.root_tol * std::max(1.0, std::abs(E));
    const double um = detail::refine_turning_point(nl, a, E, c, lin, lout, tol);
    const double up = detail::refine_turning_point(nl, a, E, c, rin, rout, tol);

    const double width = up - um;
    if (!(width > 0.0)) throw NoPeriodicOrbit("turning points collapsed");
    const double sm = potential_slope(nl, a, c, um);
    const double sp = potential_slope(nl, a, c, up);
    if (!(sm < 0.0) || !(sp > 0.0) || std::abs(sm) * width < opt.degeneracy_delta ||
        std::abs(sp) * width < opt.degeneracy_delta)
        throw DegenerateOrbit("turning point nearly double (solitary-wave/equilibrium boundary)");

    // E > V strictly between the turning points
    for (int i = 1; i < 512; ++i) {
        const double u = um + width * i / 512.0;
        if (!(g(u) > 0.0)) throw NoPeriodicOrbit("E - V not positive across the well interior");
    }
    return {um, up};
}

namespace detail {

// Smooth positive factor h(u) = (E - V) / ((u - u-)(u+ - u)).
//
// Direct evaluation of E - V(u) carries absolute roundoff ~ eps * |E|, which
// the division by (u - u±) amplifies without bound near the endpoints; that
// turns ulp-level parameter changes into O(1e-11) noise in the period and
// conserved integrals and poisons finite-difference gradients.  Within
// 1e-3 * width of an endpoint we therefore use a one-sided Taylor expansion
// of E - V about the turning point through the V''' = f'' term (exact for
// quadratic f, truncation O((d/width)^3 * f''') otherwise — smooth in the
// parameters, so harmless to differencing).  The interior branch subtracts
// the linearly interpolated endpoint residuals of E - V so a residual eps in
// the turning points does not enter as eps / (u - u±).
inline double smooth_factor(const Nonlinearity& nl, double a, double E, double c, double um,
                            double up, double u) {
    const double width = up - um;
    const double edge = 1e-3 * width;
    if (u - um < edge) {
        const double d = u - um;
        return (-potential_slope(nl, a, c, um) - 0.5 * (nl.df(um) - c) * d -
                nl.d2f(um) * d * d / 6.0) /
               (up - u);
    }
    if (up - u < edge) {
        const double d = up - u;
        return (potential_slope(nl, a, c, up) - 0.5 * (nl.df(up) - c) * d +
                nl.d2f(up) * d * d / 6.0) /
               (u - um);
    }
    const double res_m = E - effective_potential(nl, a, c, um);
    const double res_p = E - effective_potential(nl, a, c, up);
    const double g = E - effective_potential(nl, a, c, u) -
                     (res_m * (up - u) + res_p * (u - um)) / width;
    const double h = g / ((u - um) * (up - u));
    if (!(h > 0.0)) throw QuadratureFailure("regularized integrand factor nonpositive");
    return h;
}

// 2*sqrt(2) * Integral_0^{pi/2} g(u(theta)) / sqrt(h(u(theta))) dtheta with
// u = u- + (u+ - u-) sin^2(theta): the regularized form of
// sqrt(2) * Integral g(u) du / sqrt(E - V).
template <class G>
double complete_integral(const Nonlinearity& nl, double a, double E, double c, double um,
                         double up, const G& g, double quad_tol) {
    auto integrand = [&](double theta) {
        const double s = std::sin(theta);
        const double u = um + (up - um) * s * s;
        return g(u) / std::sqrt(smooth_factor(nl, a, E, c, um, up, u));
    };
    return 2.0 * std::sqrt(2.0) * integrate(integrand, 0.0, 0.5 * M_PI, quad_tol);
}

}  // namespace detail

/// Period T = sqrt(2) * Integral_{u-}^{u+} du / sqrt(E - V), via the
/// sin^2 substitution that removes both endpoint square-root singularities.
inline double period(const Nonlinearity& nl, double a, double E, double c, double um, double up,
                     const WaveOptions& opt = {}) {
    return detail::complete_integral(nl, a, E, c, um, up, [](double) { return 1.0; },
                                     opt.quad_tol);
}

inline double period(const Nonlinearity& nl, const WaveParams& p, const WaveOptions& opt = {}) {
    return period(nl, p.a, p.E, p.c, p.uminus, p.uplus, opt);
}

/// Resolve (a,E,c) to full WaveParams: turning points plus period.
inline WaveParams solve_wave(const Nonlinearity& nl, double a, double E, double c,
                             std::optional<double> bracket_hint = {},
                             const WaveOptions& opt = {}) {
    WaveParams p;
    p.a = a;
    p.E = E;
    p.c = c;
    std::tie(p.uminus, p.uplus) = find_turning_points(nl, a, E, c, bracket_hint, opt);
    p.T = period(nl, p, opt);
    if (!std::isfinite(p.T) || !(p.T > 0.0)) throw QuadratureFailure("period not finite");
    return p;
}

/// One period of the profile sampled on n equal intervals of [0,T], with
/// u(0) = u- and u_x(0) = 0.  Between samples the profile is the two-point
/// quintic Hermite interpolant through (u, u_x, u_xx) at the interval ends.
struct WaveProfile {
    WaveParams params;
    std::vector<double> xs;    // n+1 abscissae, xs[i] = i*T/n
    std::vector<double> us;
    std::vector<double> uxs;
    std::vector<double> uxxs;  // = -V'(u), stored for the interpolant
    int interp_order = 5;

    /// Interpolated (u, u_x) at arbitrary x (periodically extended).
    std::pair<double, double> at(double x) const {
        const double T = params.T;
        double y = std::fmod(x, T);
        if (y < 0.0) y += T;
        const int n = static_cast<int>(us.size()) - 1;
        const double dx = T / n;
        int i = std::min(static_cast<int>(y / dx), n - 1);
        const double t = (y - i * dx) / dx;
        const double u0 = us[i], u1 = us[i + 1];
        const double m0 = dx * uxs[i], m1 = dx * uxs[i + 1];
        const double k0 = dx * dx * uxxs[i], k1 = dx * dx * uxxs[i + 1];
        const double c0 = u0, c1 = m0, c2 = 0.5 * k0;
        const double A = u1 - c0 - c1 - c2;
        const double B = m1 - c1 - 2.0 * c2;
        const double C = k1 - 2.0 * c2;
        const double c3 = 10.0 * A - 4.0 * B + 0.5 * C;
        const double c4 = -15.0 * A + 7.0 * B - C;
        const double c5 = 6.0 * A - 3.0 * B + 0.5 * C;
        const double u = c0 + t * (c1 + t * (c2 + t * (c3 + t * (c4 + t * c5))));
        const double du =
            (c1 + t * (2.0 * c2 + t * (3.0 * c3 + t * (4.0 * c4 + t * 5.0 * c5)))) / dx;
        return {u, du};
    }
};

/// Integrate u'' = -V'(u) from (u-, 0) over [0,T] with a fixed-step 8th
/// order Runge-Kutta (32 substeps per sample interval).
inline WaveProfile sample_profile(const Nonlinearity& nl, const WaveParams& p, int n) {
    if (n < 64) throw ConfigError("sample_profile: n must be >= 64");
    namespace ode = boost::numeric::odeint;
    using State = std::array<double, 2>;

    auto rhs = [&](const State& y, State& dy, double /*x*/) {
        dy[0] = y[1];
        dy[1] = -potential_slope(nl, p.a, p.c, y[0]);
    };

    WaveProfile prof;
    prof.params = p;
    prof.xs.resize(n + 1);
    prof.us.resize(n + 1);
    prof.uxs.resize(n + 1);
    prof.uxxs.resize(n + 1);

    ode::runge_kutta_fehlberg78<State> stepper;
    State y{p.uminus, 0.0};
    const int sub = 32;
    const double h = p.T / (double(n) * sub);
    for (int i = 0; i <= n; ++i) {
        prof.xs[i] = p.T * i / n;
        prof.us[i] = y[0];
        prof.uxs[i] = y[1];
        prof.uxxs[i] = -potential_slope(nl, p.a, p.c, y[0]);
        if (!std::isfinite(y[0]) || !std::isfinite(y[1]))
            throw IntegrationFailure("profile integration diverged");
        if (i == n) break;
        double x = prof.xs[i];
        for (int k = 0; k < sub; ++k) {
            stepper.do_step(rhs, y, x, h);
            x += h;
        }
    }
    return prof;
}

}  // namespace gkdv
