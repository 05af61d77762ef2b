#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "gkdv/conserved.hpp"
#include "gkdv/errors.hpp"

namespace gkdv {

using Complex = std::complex<double>;

/// Linearized dispersion cubic
///   P(y) = -y^3 + (y/2)({T,P}_{E,c} + 2{M,P}_{a,E}) - (1/2){T,M,P}_{a,E,c}.
/// The discriminant is taken in the monic depressed normalization: for
/// -P(y) = y^3 + pt*y + qt, disc = -4 pt^3 - 27 qt^2.  Only its sign is
/// meaningful; positive means three distinct real roots.
struct DispersionCubic {
    double b3 = -1.0;  // y^3 coefficient (fixed)
    double b1 = 0.0;   // y coefficient
    double b0 = 0.0;   // constant
    double disc = 0.0;
    std::array<Complex, 3> roots{};
};

enum class Verdict { Stable, Unstable, Indeterminate };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Stable: return "Stable";
        case Verdict::Unstable: return "Unstable";
        default: return "Indeterminate";
    }
}

namespace detail {

// Roots of the monic depressed cubic y^3 + p y + q by trig/Cardano, with an
// Eigen companion-matrix fallback when the closed form degrades.
inline std::array<Complex, 3> depressed_cubic_roots(double p, double q) {
    std::array<Complex, 3> r;
    const double disc = -4.0 * p * p * p - 27.0 * q * q;
    if (disc > 0.0) {
        // three real roots (p < 0 necessarily)
        const double m = 2.0 * std::sqrt(-p / 3.0);
        double arg = 3.0 * q / (p * m);
        arg = std::clamp(arg, -1.0, 1.0);
        const double t = std::acos(arg) / 3.0;
        for (int k = 0; k < 3; ++k) r[k] = m * std::cos(t - 2.0 * M_PI * k / 3.0);
    } else {
        const double half_q = 0.5 * q;
        const double s = std::sqrt(std::max(0.0, half_q * half_q + p * p * p / 27.0));
        const double u = std::cbrt(-half_q + ((half_q >= 0.0) ? -s : s));
        // avoid cancellation: pick the larger-magnitude cube root branch
        const double uu = (std::abs(u) > 1e-300) ? u : 0.0;
        const double v = (uu != 0.0) ? -p / (3.0 * uu) : std::cbrt(-q);
        const double real_root = uu + v;
        const double re = -0.5 * real_root;
        const double im = 0.5 * std::sqrt(3.0) * std::abs(uu - v);
        r[0] = real_root;
        r[1] = Complex(re, im);
        r[2] = Complex(re, -im);
    }
    // verify by reconstruction; fall back to the companion matrix if off
    double err = 0.0;
    const double scale = std::max({std::abs(p), std::abs(q), 1.0});
    for (const auto& y : r) err = std::max(err, std::abs(y * y * y + p * y + q));
    if (err > 1e-9 * scale) {
        Eigen::Matrix3d comp = Eigen::Matrix3d::Zero();
        comp(1, 0) = 1.0;
        comp(2, 1) = 1.0;
        comp(0, 2) = -q;
        comp(1, 2) = -p;
        comp(2, 2) = 0.0;
        Eigen::EigenSolver<Eigen::Matrix3d> es(comp);
        for (int k = 0; k < 3; ++k) r[k] = es.eigenvalues()[k];
    }
    return r;
}

}  // namespace detail

/// Assemble P(y) from the Jacobian brackets.
inline DispersionCubic dispersion_cubic(const Brackets& br) {
    DispersionCubic dc;
    dc.b1 = 0.5 * (br.TP_Ec + 2.0 * br.MP_aE);
    dc.b0 = -0.5 * br.TMP_aEc;
    // monic depressed form: -P(y) = y^3 + pt y + qt
    const double pt = -dc.b1;
    const double qt = -dc.b0;
    dc.disc = -4.0 * pt * pt * pt - 27.0 * qt * qt;
    dc.roots = detail::depressed_cubic_roots(pt, qt);
    return dc;
}

/// Sign of the discriminant decides modulational stability; a band of width
/// tol * scale around zero is reported honestly as Indeterminate.
inline Verdict classify_modulational(const DispersionCubic& dc, double tol = 1e-8) {
    const double scale = std::max({std::pow(std::abs(dc.b1), 3.0), dc.b0 * dc.b0, 1.0});
    if (dc.disc > tol * scale) return Verdict::Stable;
    if (dc.disc < -tol * scale) return Verdict::Unstable;
    return Verdict::Indeterminate;
}

/// Co-periodic (kappa = 0) stability index: the sign of {T,M,P}_{a,E,c}.
struct CoperiodicIndex {
    int sign = 0;         // sign of {T,M,P}_{a,E,c}
    bool unstable = false;
    double T_E = 0.0;     // attached for the positive-sign report
    std::string report;
};

inline CoperiodicIndex coperiodic_index(const Brackets& br, double T_E,
                                        double degeneracy_threshold = 1e-9) {
    if (std::abs(br.TMP_aEc) < degeneracy_threshold)
        throw DegenerateIndex("{T,M,P}_{a,E,c} below degeneracy threshold: index undefined");
    CoperiodicIndex ix;
    ix.T_E = T_E;
    if (br.TMP_aEc < 0.0) {
        ix.sign = -1;
        ix.unstable = true;
        ix.report = "unstable to co-periodic perturbations ({T,M,P}_{a,E,c} < 0)";
    } else {
        ix.sign = +1;
        ix.unstable = false;
        ix.report = "stable to co-periodic perturbations provided T_E > 0 (T_E = " +
                    std::to_string(T_E) + ")";
    }
    return ix;
}

}  // namespace gkdv
