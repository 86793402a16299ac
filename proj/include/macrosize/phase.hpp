#pragma once

// Gaussian phase noise on the photonic side of |up>|A> + |down>|D>, the
// entanglement that survives it, and its reading as a weak photon-number
// measurement by the environment.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "coarse.hpp"
#include "special.hpp"
#include "statekit.hpp"

namespace macrosize {

/// Dense density matrices are refused above this Fock cutoff.
inline constexpr std::size_t kMaxDenseCutoff = 2000;

/// (|up>|A> + |down>|D>)/sqrt2 with both components on a common truncation.
/// Basis index is qubit * (cutoff + 1) + n.
class TwoComponentEntangledState {
public:
    TwoComponentEntangledState(const FockAmplitudeVector& a, const FockAmplitudeVector& d)
    {
        const std::size_t c = std::max(a.cutoff(), d.cutoff());
        if (c > kMaxDenseCutoff)
            throw std::invalid_argument("TwoComponentEntangledState: cutoff " + std::to_string(c) +
                                        " exceeds dense limit " + std::to_string(kMaxDenseCutoff));
        a_ = a.padded(c);
        d_ = d.padded(c);
    }

    const FockAmplitudeVector& component_a() const { return a_; }
    const FockAmplitudeVector& component_d() const { return d_; }
    std::size_t cutoff() const { return a_.cutoff(); }
    std::size_t dimension() const { return 2 * (cutoff() + 1); }

    Eigen::VectorXcd vector() const
    {
        const std::size_t m = cutoff() + 1;
        Eigen::VectorXcd psi(static_cast<Eigen::Index>(2 * m));
        const double w = 1.0 / std::numbers::sqrt2;
        for (std::size_t n = 0; n < m; ++n) {
            psi(static_cast<Eigen::Index>(n)) = w * a_[n];
            psi(static_cast<Eigen::Index>(m + n)) = w * d_[n];
        }
        return psi;
    }

private:
    FockAmplitudeVector a_;
    FockAmplitudeVector d_;
};

struct DephasedJointState {
    Eigen::MatrixXcd rho;
    double dphi = 0.0;
    std::size_t cutoff = 0;
};

/// Factor multiplying the Fock coherence |n><m| under Gaussian phase noise:
/// the characteristic function exp(-dphi^2 (n - m)^2 / 2).
inline double dephasing_factor(double dphi, double photon_gap)
{
    return std::exp(-0.5 * dphi * dphi * photon_gap * photon_gap);
}

inline void dephase_in_place(Eigen::MatrixXcd& rho, std::size_t cutoff, double dphi)
{
    const auto m = static_cast<Eigen::Index>(cutoff + 1);
    for (Eigen::Index i = 0; i < rho.rows(); ++i)
        for (Eigen::Index j = 0; j < rho.cols(); ++j) {
            const double gap = static_cast<double>((i % m) - (j % m));
            rho(i, j) *= dephasing_factor(dphi, gap);
        }
}

inline DephasedJointState apply_phase_noise(const TwoComponentEntangledState& state, double dphi)
{
    if (!(dphi >= 0.0))
        throw std::domain_error("apply_phase_noise: dphi must be >= 0");
    const auto psi = state.vector();
    DephasedJointState out;
    out.rho = psi * psi.adjoint();
    out.dphi = dphi;
    out.cutoff = state.cutoff();
    if (std::isinf(dphi)) {
        // only populations survive
        const auto m = static_cast<Eigen::Index>(out.cutoff + 1);
        for (Eigen::Index i = 0; i < out.rho.rows(); ++i)
            for (Eigen::Index j = 0; j < out.rho.cols(); ++j)
                if (i % m != j % m)
                    out.rho(i, j) = 0.0;
        return out;
    }
    dephase_in_place(out.rho, out.cutoff, dphi);
    return out;
}

/// Further noise on an already dephased state.
inline DephasedJointState apply_phase_noise(const DephasedJointState& state, double dphi)
{
    if (!(dphi >= 0.0) || !std::isfinite(dphi))
        throw std::domain_error("apply_phase_noise: dphi must be finite and >= 0");
    DephasedJointState out = state;
    dephase_in_place(out.rho, out.cutoff, dphi);
    out.dphi = std::hypot(state.dphi, dphi);
    return out;
}

/// Partial transpose on the qubit factor.
inline Eigen::MatrixXcd partial_transpose_qubit(const Eigen::MatrixXcd& rho, std::size_t cutoff)
{
    const auto m = static_cast<Eigen::Index>(cutoff + 1);
    Eigen::MatrixXcd pt(rho.rows(), rho.cols());
    for (Eigen::Index qi = 0; qi < 2; ++qi)
        for (Eigen::Index qj = 0; qj < 2; ++qj)
            pt.block(qi * m, qj * m, m, m) = rho.block(qj * m, qi * m, m, m);
    return pt;
}

/// Sum of |negative eigenvalues| of the qubit partial transpose (0.5 for a
/// maximally entangled qubit pair).
inline double negativity(const DephasedJointState& state)
{
    const Eigen::MatrixXcd pt = partial_transpose_qubit(state.rho, state.cutoff);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(pt, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw numerical_error("negativity: eigenvalue solver failed");
    double neg = 0.0;
    for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i)
        if (solver.eigenvalues()(i) < 0.0)
            neg -= solver.eigenvalues()(i);
    return neg;
}

struct DephasingReport {
    double dphi = 0.0;
    double negativity = 0.0;
    /// negativity relative to the noiseless state
    double fraction = 1.0;
    /// |trace - 1|
    double trace_check = 0.0;
    /// smallest eigenvalue of rho
    double min_eigenvalue = 0.0;
};

inline DephasingReport dephasing_report(const TwoComponentEntangledState& state, double dphi)
{
    const double reference = negativity(apply_phase_noise(state, 0.0));
    if (!(reference > 1e-14))
        throw std::domain_error("dephasing_report: the noiseless state is not entangled");
    const auto noisy = apply_phase_noise(state, dphi);
    DephasingReport r;
    r.dphi = dphi;
    r.negativity = negativity(noisy);
    r.fraction = r.negativity / reference;
    r.trace_check = std::abs(noisy.rho.trace().real() - 1.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(noisy.rho, Eigen::EigenvaluesOnly);
    r.min_eigenvalue = solver.eigenvalues().minCoeff();
    return r;
}

/// Guessing target implied by an entanglement fraction E: (1 + sqrt(1 - E^2)) / 2.
inline double guess_target_for_fraction(double fraction)
{
    return 0.5 * (1.0 + std::sqrt(std::max(0.0, 1.0 - fraction * fraction)));
}

struct PhaseBound {
    double fraction = 1.0;
    double p = 0.5;
    double size = 0.0;
    double dphi = 0.0;
    /// no finite resolution suffices (size 0 at p, or p rounds to 1)
    bool unbounded = false;
};

/// Phase resolution needed to retain the fraction E of the entanglement:
/// sqrt2 erfinv(2P - 1) / Size_P with P = (1 + sqrt(1 - E^2)) / 2. The size
/// is requested from `size_at` at that P.
inline PhaseBound required_phase_resolution(double fraction, const std::function<double(double)>& size_at)
{
    if (!(fraction > 0.0 && fraction <= 1.0))
        throw std::domain_error("required_phase_resolution: fraction must lie in (0, 1]");
    PhaseBound b;
    b.fraction = fraction;
    b.p = guess_target_for_fraction(fraction);
    if (fraction == 1.0 || b.p <= 0.5) {
        b.p = 0.5;
        b.dphi = 0.0;
        return b;
    }
    if (b.p >= 1.0) {
        b.unbounded = true;
        b.dphi = std::numeric_limits<double>::infinity();
        return b;
    }
    b.size = size_at(b.p);
    if (!(b.size > 0.0)) {
        b.unbounded = true;
        b.dphi = std::numeric_limits<double>::infinity();
        return b;
    }
    b.dphi = std::numbers::sqrt2 * erf_inv(2.0 * b.p - 1.0) / b.size;
    return b;
}

/// Spread of the pointer whose weak photon-number measurement reproduces
/// phase noise dphi: 1 / (2 dphi). Infinite at dphi = 0.
inline double pointer_spread_equivalence(double dphi)
{
    if (!(dphi >= 0.0))
        throw std::domain_error("pointer_spread_equivalence: dphi must be >= 0");
    if (dphi == 0.0)
        return std::numeric_limits<double>::infinity();
    return 1.0 / (2.0 * dphi);
}

/// Inverse of pointer_spread_equivalence.
inline double phase_noise_for_spread(double spread)
{
    if (!(spread > 0.0))
        throw std::domain_error("phase_noise_for_spread: spread must be > 0");
    if (std::isinf(spread))
        return 0.0;
    return 1.0 / (2.0 * spread);
}

/// <E0(x - shift)|E0(x)> for a real Gaussian pointer amplitude whose
/// position density has standard deviation `spread`, by Simpson quadrature.
inline double pointer_overlap(double shift, double spread)
{
    if (!(spread > 0.0) || !std::isfinite(spread))
        throw std::domain_error("pointer_overlap: spread must be finite and > 0");
    const double norm = std::pow(2.0 * std::numbers::pi * spread * spread, -0.25);
    auto amp = [&](double x) { return norm * std::exp(-x * x / (4.0 * spread * spread)); };
    const double half = 14.0 * spread + std::abs(shift);
    return simpson([&](double x) { return amp(x - shift) * amp(x); }, -half, half + shift, 8192);
}

/// Lower bound on the environment's probability of telling A from D after
/// phase noise dphi: the smeared-detector guess at sigma = 1/(2 dphi).
inline double environment_guess_bound(const PhotonPMF& a, const PhotonPMF& b, double dphi)
{
    if (!(dphi >= 0.0))
        throw std::domain_error("environment_guess_bound: dphi must be >= 0");
    if (dphi == 0.0)
        return 0.5;
    return guess_probability(a, b, pointer_spread_equivalence(dphi)).guess_probability;
}

} // namespace macrosize
