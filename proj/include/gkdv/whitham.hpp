#pragma once

#include <array>
#include <cmath>
#include <complex>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "gkdv/conserved.hpp"
#include "gkdv/errors.hpp"
#include "gkdv/modulation.hpp"

namespace gkdv {

/// Linearization of the Whitham modulation system at (a0, E0, s=0), in the
/// row-reduced frame where the flux Jacobian C is the constant matrix
/// diag(1,-2,-omega), omega = 1/T.  s-derivatives are negated c-derivatives
/// (the profile equation depends on c - s only), so everything is built from
/// the (a,E,c) gradient engine.
///
/// A is the characteristic-velocity matrix B^{-1}C: the plane-wave branches
/// are mu = i*eta*kappa/T with eta an eigenvalue of A, and its eigenvalues
/// equal {-T/y_j} for the roots y_j of the dispersion cubic.
struct WhithamLinearization {
    Eigen::Matrix3d B = Eigen::Matrix3d::Zero();  // d(M w, P w, w)/d(a,E,s), row-reduced
    Eigen::Matrix3d C = Eigen::Matrix3d::Zero();  // flux Jacobian at s=0 (diagonal)
    Eigen::Matrix3d A = Eigen::Matrix3d::Zero();  // B^{-1} C
    std::array<Complex, 3> eigs{};
    double T = 0.0;
    ConservedSet cs;
    Brackets br;
};

struct WhithamOptions {
    GradientOptions grad;
    double tmp_threshold = 1e-9;  // |{T,M,P}| below this: not evolutionary
};

inline WhithamLinearization whitham_linearization(const Nonlinearity& nl, const WaveParams& p,
                                                  const WhithamOptions& opt = {}) {
    WhithamLinearization wl;
    wl.cs = gradients(nl, p, opt.grad);
    wl.br = brackets(wl.cs);
    wl.T = wl.cs.T;
    if (std::abs(wl.br.TMP_aEc) < opt.tmp_threshold)
        throw DegenerateIndex("{T,M,P}_{a,E,c} vanishes: Whitham system not of evolutionary type");

    const double w = 1.0 / wl.T;
    const auto& g = wl.cs.grad;  // rows T,M,P,H; cols a,E,c
    // columns (a, E, s) with d/ds = -d/dc
    for (int j = 0; j < 3; ++j) {
        const double sgn = (j == 2) ? -1.0 : 1.0;
        wl.B(0, j) = sgn * w * g(1, j);        // row: omega * dM
        wl.B(1, j) = sgn * w * g(2, j);        // row: omega * dP
        wl.B(2, j) = -sgn * w * w * g(0, j);   // row: d omega = -omega^2 dT
    }
    wl.C = Eigen::Vector3d(1.0, -2.0, -w).asDiagonal();

    Eigen::FullPivLU<Eigen::Matrix3d> lu(wl.B);
    if (!lu.isInvertible()) throw SingularSystem("Whitham matrix B numerically singular");
    wl.A = lu.solve(wl.C);
    Eigen::EigenSolver<Eigen::Matrix3d> es(wl.A);
    for (int k = 0; k < 3; ++k) wl.eigs[k] = es.eigenvalues()[k];
    return wl;
}

/// det(mu B - (i kappa / T) C), the characteristic polynomial of the
/// linearized Whitham system.
inline Complex whitham_char_det(const WhithamLinearization& wl, Complex mu, double kappa) {
    const Complex lam = Complex(0.0, kappa / wl.T);
    Eigen::Matrix3cd M = mu * wl.B.cast<Complex>() - lam * wl.C.cast<Complex>();
    return M.determinant();
}

/// Coefficients d_k of det(mu B - lam C) = sum_k d_k mu^{3-k} lam^k,
/// by column-mixing determinants.
inline std::array<double, 4> whitham_char_coeffs(const WhithamLinearization& wl) {
    auto det_mix = [&](int mask) {
        // bit j of mask set: column j taken from -C, else from B
        Eigen::Matrix3d M;
        for (int j = 0; j < 3; ++j)
            M.col(j) = (mask & (1 << j)) ? (-wl.C.col(j)).eval() : wl.B.col(j);
        return M.determinant();
    };
    std::array<double, 4> d{0.0, 0.0, 0.0, 0.0};
    for (int mask = 0; mask < 8; ++mask) d[__builtin_popcount(mask)] += det_mix(mask);
    return d;
}

/// Evaluate the dispersion cubic P(y) at complex argument.
inline Complex eval_cubic(const DispersionCubic& dc, Complex y) {
    return -y * y * y + dc.b1 * y + dc.b0;
}

struct EquivalenceReport {
    double max_rel_dev = 0.0;  // worst relative deviation over the grid
    int grid_mu = 0;
    int grid_kappa = 0;
};

/// Check det(mu B - (i kappa/T) C) = -(2 mu^3 / T^4) P(-i kappa / mu) on a
/// grid of (mu, kappa); reports the max relative deviation.
inline EquivalenceReport check_equivalence(const WhithamLinearization& wl,
                                           const DispersionCubic& dc, int n_mu = 10,
                                           int n_kappa = 10) {
    EquivalenceReport rep;
    rep.grid_mu = n_mu;
    rep.grid_kappa = n_kappa;
    const double T = wl.T;
    const double T4 = T * T * T * T;
    for (int i = 0; i < n_mu; ++i) {
        const double mu = 0.5 + 1.0 * i / std::max(1, n_mu - 1);
        for (int j = 0; j < n_kappa; ++j) {
            const double kappa = 0.5 + 1.0 * j / std::max(1, n_kappa - 1);
            const Complex lhs = whitham_char_det(wl, mu, kappa);
            const Complex y = Complex(0.0, -kappa / mu);
            const Complex rhs = -2.0 * mu * mu * mu / T4 * eval_cubic(dc, y);
            const double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-300});
            rep.max_rel_dev = std::max(rep.max_rel_dev, std::abs(lhs - rhs) / scale);
        }
    }
    return rep;
}

inline EquivalenceReport check_equivalence(const Nonlinearity& nl, const WaveParams& p,
                                           const WhithamOptions& opt = {}) {
    const WhithamLinearization wl = whitham_linearization(nl, p, opt);
    const DispersionCubic dc = dispersion_cubic(wl.br);
    return check_equivalence(wl, dc);
}

}  // namespace gkdv
