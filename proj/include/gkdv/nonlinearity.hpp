#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "gkdv/errors.hpp"

namespace gkdv {

/// Nonlinearity f defining the gKdV flavor u_t = u_xxx + f(u)_x, together
/// with the antiderivative F (F' = f, F(0) = 0) and the first two
/// derivatives of f.  All four evaluators must be supplied; consistency is
/// checked by validate() rather than by automatic differentiation.
struct Nonlinearity {
    std::string name;
    std::function<double(double)> f;
    std::function<double(double)> F;    // F' = f, F(0) = 0
    std::function<double(double)> df;   // f'
    std::function<double(double)> d2f;  // f''
};

/// f(u) = u^{p+1}, F(u) = u^{p+2}/(p+2).  p = 1 is the KdV.
inline Nonlinearity make_power_law(int p) {
    if (p < 1) throw ConfigError("make_power_law: p must be >= 1, got " + std::to_string(p));
    Nonlinearity nl;
    nl.name = (p == 1) ? "kdv" : ("power:" + std::to_string(p));
    nl.f = [p](double u) { return std::pow(u, p + 1); };
    nl.F = [p](double u) { return std::pow(u, p + 2) / (p + 2); };
    nl.df = [p](double u) { return (p + 1) * std::pow(u, p); };
    nl.d2f = [p](double u) { return double(p + 1) * p * std::pow(u, p - 1); };
    return nl;
}

inline Nonlinearity make_kdv() { return make_power_law(1); }

/// f(u) = sign * u^3, F(u) = sign * u^4 / 4.
inline Nonlinearity make_mkdv(int sign) {
    if (sign != 1 && sign != -1) throw ConfigError("make_mkdv: sign must be +1 or -1");
    const double b = sign;
    Nonlinearity nl;
    nl.name = (sign > 0) ? "mkdv+" : "mkdv-";
    nl.f = [b](double u) { return b * u * u * u; };
    nl.F = [b](double u) { return b * u * u * u * u / 4.0; };
    nl.df = [b](double u) { return 3.0 * b * u * u; };
    nl.d2f = [b](double u) { return 6.0 * b * u; };
    return nl;
}

/// Parse a CLI/config tag: "kdv", "mkdv+", "mkdv-", "power:p".
inline Nonlinearity nonlinearity_from_tag(const std::string& tag) {
    if (tag == "kdv") return make_kdv();
    if (tag == "mkdv+") return make_mkdv(+1);
    if (tag == "mkdv-") return make_mkdv(-1);
    if (tag.rfind("power:", 0) == 0) {
        int p = 0;
        try {
            p = std::stoi(tag.substr(6));
        } catch (const std::exception&) {
            throw ConfigError("bad power-law tag: " + tag);
        }
        return make_power_law(p);
    }
    throw ConfigError("unknown nonlinearity tag: " + tag);
}

/// Max relative mismatch between f and Richardson-extrapolated central
/// differences of F over the sample points (and likewise df vs f, d2f vs df).
inline double validate_nonlinearity(const Nonlinearity& nl, const std::vector<double>& samples) {
    auto check_pair = [](const std::function<double(double)>& prim,
                         const std::function<double(double)>& deriv, double u) {
        const double h = 1e-4 * std::max(1.0, std::abs(u));
        auto cd = [&](double s) { return (prim(u + s) - prim(u - s)) / (2.0 * s); };
        // Richardson: eliminates the O(h^2) term.
        const double r = (4.0 * cd(h / 2.0) - cd(h)) / 3.0;
        const double d = deriv(u);
        return std::abs(r - d) / std::max(1.0, std::abs(d));
    };
    double worst = 0.0;
    for (double u : samples) {
        worst = std::max(worst, check_pair(nl.F, nl.f, u));
        worst = std::max(worst, check_pair(nl.f, nl.df, u));
        worst = std::max(worst, check_pair(nl.df, nl.d2f, u));
    }
    return worst;
}

}  // namespace gkdv
