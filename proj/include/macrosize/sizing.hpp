#pragma once

// Maximal tolerable detector noise and the Fock-calibrated size.
//
// A pair {|M>, |M+N>} is assigned size N. Any other pair is assigned the N
// whose Fock pair reaches the target guessing probability p_g at the same
// maximal noise sigma_max, i.e. size = 2 sqrt2 erfinv(2 p_g - 1) sigma_max.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "coarse.hpp"
#include "errors.hpp"
#include "special.hpp"
#include "statekit.hpp"

namespace macrosize {

inline constexpr double kDefaultGuessTarget = 2.0 / 3.0;

struct SizeReport {
    double p_g = kDefaultGuessTarget;
    /// 0 when the target is unreachable
    double sigma_max = 0.0;
    double size = 0.0;
    /// guessing probability at the smallest probed spread
    double p_at_sigma0 = 0.5;
    int iterations = 0;
    std::string family;
};

struct SigmaSearchOptions {
    /// reachability probe and lower bracket
    double sigma_lo = 1e-3;
    double relative_tolerance = 1e-6;
    int max_doublings = 60;
    int max_iterations = 200;
};

struct SigmaSearch {
    bool reachable = false;
    double sigma_max = 0.0;
    double p_at_sigma0 = 0.5;
    int iterations = 0;
};

inline void check_guess_target(double p_g)
{
    if (!(p_g > 0.5 && p_g < 1.0))
        throw std::domain_error("guess target p_g must lie in (1/2, 1)");
}

/// Largest sigma at which the guessing probability still reaches p_g.
///
/// The guessing probability is nonincreasing in sigma (extra Gaussian noise
/// is a stochastic map), so the root is bracketed between sigma_lo and a
/// doubled upper bound and located by bisection.
inline SigmaSearch max_tolerable_sigma(const PhotonPMF& a, const PhotonPMF& b, double p_g,
                                       const SigmaSearchOptions& opt = {})
{
    check_guess_target(p_g);
    SigmaSearch out;
    auto p_at = [&](double sigma) { return guess_probability(a, b, sigma).guess_probability; };

    out.p_at_sigma0 = p_at(opt.sigma_lo);
    if (out.p_at_sigma0 < p_g)
        return out;
    out.reachable = true;

    double lo = opt.sigma_lo;
    double hi = std::max(1.0, 4.0 * std::abs(a.mean() - b.mean()));
    int doublings = 0;
    while (p_at(hi) >= p_g) {
        lo = hi;
        hi *= 2.0;
        if (++doublings > opt.max_doublings)
            throw numerical_error("max_tolerable_sigma: no upper bracket after " +
                                  std::to_string(opt.max_doublings) + " doublings");
    }

    int it = 0;
    while (hi - lo > opt.relative_tolerance * hi) {
        if (++it > opt.max_iterations)
            throw numerical_error("max_tolerable_sigma: bisection did not converge");
        const double mid = 0.5 * (lo + hi);
        if (p_at(mid) >= p_g)
            lo = mid;
        else
            hi = mid;
    }
    out.sigma_max = 0.5 * (lo + hi);
    out.iterations = it;
    return out;
}

/// Fock-equivalent photon gap for a tolerated spread: 2 sqrt2 erfinv(2 p_g - 1) sigma.
inline double size_from_sigma(double sigma_max, double p_g)
{
    check_guess_target(p_g);
    if (!(sigma_max >= 0.0))
        throw std::domain_error("size_from_sigma: sigma must be >= 0");
    return 2.0 * std::numbers::sqrt2 * erf_inv(2.0 * p_g - 1.0) * sigma_max;
}

inline SizeReport size(const PhotonPMF& a, const PhotonPMF& b, double p_g, std::string family = {},
                       const SigmaSearchOptions& opt = {})
{
    const auto search = max_tolerable_sigma(a, b, p_g, opt);
    SizeReport r;
    r.p_g = p_g;
    r.p_at_sigma0 = search.p_at_sigma0;
    r.iterations = search.iterations;
    r.family = std::move(family);
    if (search.reachable) {
        r.sigma_max = search.sigma_max;
        r.size = size_from_sigma(search.sigma_max, p_g);
    }
    return r;
}

// ---------------------------------------------------------------------------
// Closed forms for the worked examples. All clamp at 0.

/// |0> vs |beta>: |beta|^2 - 2 erfinv(2 p_g - 1)^2. Valid once beta is large.
inline double closed_form_size_1a(double beta2, double p_g)
{
    check_guess_target(p_g);
    const double e = erf_inv(2.0 * p_g - 1.0);
    return std::max(0.0, beta2 - 2.0 * e * e);
}

/// Ideal-detector guessing probability for |alpha> vs D(alpha)|beta> as alpha -> infinity.
inline double limit_guess_1b(double beta)
{
    return 0.5 * (1.0 + std::erf(std::abs(beta) / std::numbers::sqrt2));
}

/// Reachability limit for D(alpha)|+-> at large alpha: (1 + sqrt(2/pi)) / 2.
inline double limit_guess_2()
{
    return 0.5 * (1.0 + std::sqrt(2.0 / std::numbers::pi));
}

/// D(alpha)|+> vs D(alpha)|->: 2 alpha erfinv(t) sqrt(4/(pi t^2) - 2), t = 2p - 1.
///
/// Large-alpha form: both photon statistics are Gaussian of width alpha with
/// means 2 alpha apart, giving P(sigma) = (1 + sqrt(2/pi) / sqrt(1 + sigma^2/alpha^2)) / 2.
/// The size vanishes at the reachability limit (1 + sqrt(2/pi)) / 2.
inline double closed_form_size_2(double alpha, double p_g)
{
    check_guess_target(p_g);
    const double t = 2.0 * p_g - 1.0;
    const double radicand = 4.0 / (std::numbers::pi * t * t) - 2.0;
    if (radicand <= 0.0)
        return 0.0;
    return 2.0 * std::abs(alpha) * erf_inv(t) * std::sqrt(radicand);
}

/// N copies of two tilted two-level states with overlap 1 - eps^2:
/// N eps sqrt(1 - 2 erfinv(2p-1)^2 / (N eps^2 / (1 - eps^2))).
inline double closed_form_size_3(double copies, double epsilon, double p_g)
{
    check_guess_target(p_g);
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw std::domain_error("closed_form_size_3: epsilon must lie in (0, 1)");
    const double e = erf_inv(2.0 * p_g - 1.0);
    const double snr = copies * epsilon * epsilon / (1.0 - epsilon * epsilon);
    const double radicand = 1.0 - 2.0 * e * e / snr;
    if (radicand <= 0.0)
        return 0.0;
    return copies * epsilon * std::sqrt(radicand);
}

// ---------------------------------------------------------------------------
// Rotation of the components on the qubit side

struct RotationGrid {
    std::size_t theta_points = 64;
    std::size_t phi_points = 64;
    bool refine = true;
    /// 0 picks std::thread::hardware_concurrency()
    unsigned threads = 0;
};

struct RotationResult {
    double theta = 0.0;
    double phi = 0.0;
    SizeReport report;
    /// grid points dropped because a rotated component vanished
    std::size_t skipped = 0;
};

namespace detail {

struct RotationSample {
    double theta = 0.0;
    double phi = 0.0;
    double size = -1.0;
    SizeReport report;
    bool valid = false;
};

inline RotationSample evaluate_rotation(const FockAmplitudeVector& a, const FockAmplitudeVector& d, double p_g,
                                        double theta, double phi)
{
    RotationSample s;
    s.theta = theta;
    s.phi = phi;
    try {
        const auto pair = superpose(a, d, theta, phi);
        s.report = size(photon_pmf(pair.a), photon_pmf(pair.d), p_g);
        s.size = s.report.size;
        s.valid = true;
    } catch (const std::domain_error&) {
    }
    return s;
}

// true if x beats the incumbent under (size desc, theta asc, phi asc)
inline bool better(const RotationSample& x, const RotationSample& best)
{
    if (!x.valid)
        return false;
    if (!best.valid || x.size > best.size)
        return true;
    if (x.size < best.size)
        return false;
    if (x.theta != best.theta)
        return x.theta < best.theta;
    return x.phi < best.phi;
}

} // namespace detail

/// Grid search over theta in [0, pi/2) and phi in [0, 2 pi) for the rotated
/// pair of largest size, followed by one golden-section pass along each axis.
/// A refined point replaces the grid optimum only if it gains more than the
/// bisection tolerance. Global optimality is not claimed.
inline RotationResult optimize_rotation(const FockAmplitudeVector& a, const FockAmplitudeVector& d, double p_g,
                                        const RotationGrid& grid = {})
{
    check_guess_target(p_g);
    if (grid.theta_points < 1 || grid.phi_points < 1)
        throw std::invalid_argument("optimize_rotation: empty grid");

    const double dtheta = 0.5 * std::numbers::pi / static_cast<double>(grid.theta_points);
    const double dphi = 2.0 * std::numbers::pi / static_cast<double>(grid.phi_points);
    const std::size_t total = grid.theta_points * grid.phi_points;
    std::vector<detail::RotationSample> samples(total);

    unsigned workers = grid.threads != 0 ? grid.threads : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, total));
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < total; i = next++) {
            const double theta = dtheta * static_cast<double>(i / grid.phi_points);
            const double phi = dphi * static_cast<double>(i % grid.phi_points);
            samples[i] = detail::evaluate_rotation(a, d, p_g, theta, phi);
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < workers; ++t)
            pool.emplace_back(work);
    }

    RotationResult out;
    detail::RotationSample best;
    for (const auto& s : samples) {
        if (!s.valid)
            ++out.skipped;
        else if (detail::better(s, best))
            best = s;
    }
    if (!best.valid)
        throw numerical_error("optimize_rotation: every grid point was degenerate");

    if (grid.refine && best.size > 0.0) {
        const double gain = 1e-6 * best.size;
        auto golden = [&](auto&& objective, double lo, double hi) {
            const double r = 0.5 * (std::sqrt(5.0) - 1.0);
            double x1 = hi - r * (hi - lo), x2 = lo + r * (hi - lo);
            auto f1 = objective(x1), f2 = objective(x2);
            for (int it = 0; it < 30; ++it) {
                if (f1.size >= f2.size) {
                    hi = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = hi - r * (hi - lo);
                    f1 = objective(x1);
                } else {
                    lo = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = lo + r * (hi - lo);
                    f2 = objective(x2);
                }
            }
            return f1.size >= f2.size ? f1 : f2;
        };
        const double t_lo = std::max(0.0, best.theta - dtheta);
        const double t_hi = std::min(0.5 * std::numbers::pi, best.theta + dtheta);
        auto along_theta = golden(
            [&](double t) { return detail::evaluate_rotation(a, d, p_g, t, best.phi); }, t_lo, t_hi);
        if (along_theta.valid && along_theta.size > best.size + gain)
            best = along_theta;
        auto along_phi = golden(
            [&](double p) { return detail::evaluate_rotation(a, d, p_g, best.theta, p); }, best.phi - dphi,
            best.phi + dphi);
        if (along_phi.valid && along_phi.size > best.size + gain) {
            best = along_phi;
            best.phi = std::fmod(best.phi + 2.0 * std::numbers::pi, 2.0 * std::numbers::pi);
        }
    }

    out.theta = best.theta;
    out.phi = best.phi;
    out.report = best.report;
    return out;
}

} // namespace macrosize
