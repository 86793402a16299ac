#pragma once

// The noisy photon-number detector: a pointer displaced by the photon number
// and read out with Gaussian spread sigma. Two components are told apart in a
// single shot with probability (1 + D)/2, D the trace distance of the two
// smeared outcome densities.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "special.hpp"
#include "statekit.hpp"

namespace macrosize {

/// Below this spread the detector is treated as ideal and the discrete
/// distance is returned.
inline constexpr double kDiscreteSigma = 1e-6;

/// Pointer spread of the detector, in photon-number units.
struct SmearModel {
    double sigma = 0.0;

    explicit SmearModel(double s) : sigma(s)
    {
        if (!(s >= 0.0) || !std::isfinite(s))
            throw std::invalid_argument("SmearModel: sigma must be finite and >= 0");
    }

    bool ideal() const { return sigma < kDiscreteSigma; }
};

namespace detail {

// Gaussian terms further than this many sigmas from x are dropped (e^-72).
inline constexpr double kWindowSigmas = 12.0;

// sum_n w_n g_sigma(x - n) over the window around x
inline double mixture_at(std::span<const double> weights, std::size_t lo, std::size_t hi, double sigma, double x)
{
    const double reach = kWindowSigmas * sigma;
    const double first = std::max(static_cast<double>(lo), std::ceil(x - reach));
    const double last = std::min(static_cast<double>(hi), std::floor(x + reach));
    if (first > last)
        return 0.0;
    const double inv = 1.0 / sigma;
    double acc = 0.0;
    for (auto n = static_cast<std::size_t>(first); n <= static_cast<std::size_t>(last); ++n) {
        const double w = weights[n];
        if (w == 0.0)
            continue;
        const double z = (x - static_cast<double>(n)) * inv;
        acc += w * std::exp(-0.5 * z * z);
    }
    return acc * inv / std::sqrt(2.0 * std::numbers::pi);
}

// sum_n w_n * (mass of g_sigma(. - n) on [a, b])
inline double mixture_mass(std::span<const double> weights, std::size_t lo, std::size_t hi, double sigma, double a,
                           double b)
{
    const double reach = kWindowSigmas * sigma;
    const double first = std::max(static_cast<double>(lo), std::isinf(a) ? static_cast<double>(lo)
                                                                          : std::ceil(a - reach));
    const double last = std::min(static_cast<double>(hi), std::isinf(b) ? static_cast<double>(hi)
                                                                        : std::floor(b + reach));
    if (first > last)
        return 0.0;
    double acc = 0.0;
    for (auto n = static_cast<std::size_t>(first); n <= static_cast<std::size_t>(last); ++n) {
        const double w = weights[n];
        if (w == 0.0)
            continue;
        const double dn = static_cast<double>(n);
        acc += w * gaussian_interval_mass(a - dn, b - dn, sigma);
    }
    return acc;
}

struct Support {
    std::size_t lo = 0;
    std::size_t hi = 0;
    bool empty = true;
};

inline Support nonzero_support(std::span<const double> w)
{
    Support s;
    for (std::size_t n = 0; n < w.size(); ++n)
        if (w[n] != 0.0) {
            if (s.empty)
                s.lo = n;
            s.hi = n;
            s.empty = false;
        }
    return s;
}

} // namespace detail

/// p_S(x) = sum_n pmf(n) g_sigma(x - n). Gaussians sit at +n, the mirror
/// image of a pointer read as x + n; distances are reflection invariant.
inline double smeared_density(const PhotonPMF& pmf, double sigma, double x)
{
    if (!(sigma > 0.0))
        throw std::domain_error("smeared_density: sigma must be > 0 (use the discrete path for sigma = 0)");
    return detail::mixture_at(pmf.masses(), 0, pmf.cutoff(), sigma, x);
}

/// Composite Simpson rule on a uniform grid of `intervals` (rounded up to even).
template <typename F>
double simpson(F&& f, double a, double b, std::size_t intervals)
{
    if (intervals < 2)
        intervals = 2;
    if (intervals % 2 != 0)
        ++intervals;
    const double h = (b - a) / static_cast<double>(intervals);
    double acc = f(a) + f(b);
    for (std::size_t i = 1; i < intervals; ++i)
        acc += (i % 2 == 1 ? 4.0 : 2.0) * f(a + h * static_cast<double>(i));
    return acc * h / 3.0;
}

/// The smeared outcome density of one component over its natural support
/// [-8 sigma, cutoff + 8 sigma].
class SmearedDensity {
public:
    SmearedDensity(PhotonPMF pmf, double sigma) : pmf_(std::move(pmf)), sigma_(sigma)
    {
        if (!(sigma > 0.0) || !std::isfinite(sigma))
            throw std::domain_error("SmearedDensity: sigma must be finite and > 0");
        x_min_ = -8.0 * sigma_;
        x_max_ = static_cast<double>(pmf_.cutoff()) + 8.0 * sigma_;
    }

    double operator()(double x) const { return smeared_density(pmf_, sigma_, x); }
    double sigma() const { return sigma_; }
    double x_min() const { return x_min_; }
    double x_max() const { return x_max_; }
    const PhotonPMF& pmf() const { return pmf_; }

    /// Simpson integral over the support with step min(sigma/8, 0.25).
    double integral() const
    {
        const double step = std::min(sigma_ / 8.0, 0.25);
        const auto intervals = static_cast<std::size_t>(std::ceil((x_max_ - x_min_) / step));
        return simpson(*this, x_min_, x_max_, intervals);
    }

private:
    PhotonPMF pmf_;
    double sigma_;
    double x_min_;
    double x_max_;
};

/// How a distance was obtained.
struct QuadratureDiagnostics {
    bool discrete_path = false;
    double step = 0.0;
    std::size_t grid_points = 0;
    std::size_t sign_changes = 0;
    /// Simpson integrals of each density on the scan grid
    double mass_a = 1.0;
    double mass_b = 1.0;
    /// Simpson estimate of the distance on the same grid, for comparison
    double simpson_distance = 0.0;
};

struct TraceDistanceResult {
    double distance = 0.0;
    QuadratureDiagnostics diagnostics;
};

/// 1/2 sum_n |pA(n) - pB(n)|, the sigma -> 0 limit.
inline double discrete_trace_distance(std::span<const double> a, std::span<const double> b)
{
    const std::size_t n = std::max(a.size(), b.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = i < a.size() ? a[i] : 0.0;
        const double y = i < b.size() ? b[i] : 0.0;
        acc += std::abs(x - y);
    }
    return std::clamp(0.5 * acc, 0.0, 1.0);
}

inline double discrete_trace_distance(const PhotonPMF& a, const PhotonPMF& b)
{
    return discrete_trace_distance(a.masses(), b.masses());
}

/// Trace distance of the smeared densities, 1/2 int |pA - pB| dx.
///
/// The difference pA - pB is itself a Gaussian mixture with weights
/// pA(n) - pB(n). It is sampled on a uniform grid of step sigma/8 over
/// [support - 8 sigma, support + 8 sigma] to bracket its sign changes, the
/// roots are refined by bisection, and the integral over each sign-constant
/// interval is taken exactly from Gaussian CDFs. Simpson sums of both
/// densities and of |pA - pB| on the scan grid are kept as diagnostics.
inline TraceDistanceResult trace_distance_detailed(const PhotonPMF& a, const PhotonPMF& b, double sigma)
{
    if (!(sigma >= 0.0) || !std::isfinite(sigma))
        throw std::domain_error("trace_distance: sigma must be finite and >= 0");

    TraceDistanceResult out;
    if (sigma < kDiscreteSigma) {
        out.distance = discrete_trace_distance(a, b);
        out.diagnostics.discrete_path = true;
        out.diagnostics.simpson_distance = out.distance;
        return out;
    }

    const std::size_t len = std::max(a.size(), b.size());
    std::vector<double> pa(len, 0.0), pb(len, 0.0), w(len, 0.0);
    for (std::size_t n = 0; n < len; ++n) {
        pa[n] = a[n];
        pb[n] = b[n];
        w[n] = pa[n] - pb[n];
    }
    const auto sup = detail::nonzero_support(w);
    if (sup.empty) {
        out.diagnostics.step = sigma / 8.0;
        return out;
    }
    const auto full = detail::nonzero_support(pa);
    const auto full_b = detail::nonzero_support(pb);
    const std::size_t lo = std::min(full.lo, full_b.lo);
    const std::size_t hi = std::max(full.hi, full_b.hi);

    const double x0 = static_cast<double>(lo) - 8.0 * sigma;
    const double x1 = static_cast<double>(hi) + 8.0 * sigma;
    auto intervals = static_cast<std::size_t>(std::ceil((x1 - x0) / (sigma / 8.0)));
    intervals = std::max<std::size_t>(intervals + intervals % 2, 2);
    const double h = (x1 - x0) / static_cast<double>(intervals);

    auto diff_at = [&](double x) { return detail::mixture_at(w, sup.lo, sup.hi, sigma, x); };

    std::vector<double> roots;
    double sum_a = 0.0, sum_b = 0.0, sum_abs = 0.0;
    double last_x = 0.0;
    int last_sign = 0;
    for (std::size_t i = 0; i <= intervals; ++i) {
        const double x = x0 + h * static_cast<double>(i);
        const double da = detail::mixture_at(pa, lo, hi, sigma, x);
        const double db = detail::mixture_at(pb, lo, hi, sigma, x);
        const double d = da - db;
        const double wt = (i == 0 || i == intervals) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        sum_a += wt * da;
        sum_b += wt * db;
        sum_abs += wt * std::abs(d);

        const int sign = d > 0.0 ? 1 : (d < 0.0 ? -1 : 0);
        if (sign == 0)
            continue;
        if (last_sign != 0 && sign != last_sign) {
            double left = last_x, right = x;
            for (int it = 0; it < 200 && right - left > 1e-13 * std::max(1.0, std::abs(right)); ++it) {
                const double mid = 0.5 * (left + right);
                const double dm = diff_at(mid);
                if (dm == 0.0) {
                    left = right = mid;
                    break;
                }
                if ((dm > 0.0) == (last_sign > 0))
                    left = mid;
                else
                    right = mid;
            }
            roots.push_back(0.5 * (left + right));
        }
        last_sign = sign;
        last_x = x;
    }

    const double inf = std::numeric_limits<double>::infinity();
    double total = 0.0;
    double left = -inf;
    for (std::size_t r = 0; r <= roots.size(); ++r) {
        const double right = r < roots.size() ? roots[r] : inf;
        total += std::abs(detail::mixture_mass(w, sup.lo, sup.hi, sigma, left, right));
        left = right;
    }

    out.distance = std::clamp(0.5 * total, 0.0, 1.0);
    auto& diag = out.diagnostics;
    diag.step = h;
    diag.grid_points = intervals + 1;
    diag.sign_changes = roots.size();
    diag.mass_a = sum_a * h / 3.0;
    diag.mass_b = sum_b * h / 3.0;
    diag.simpson_distance = 0.5 * sum_abs * h / 3.0;
    return out;
}

inline double trace_distance(const PhotonPMF& a, const PhotonPMF& b, double sigma)
{
    return trace_distance_detailed(a, b, sigma).distance;
}

/// Single-shot guessing probability for the smeared detector.
struct GuessReport {
    double trace_distance = 0.0;
    double guess_probability = 0.5;
    QuadratureDiagnostics diagnostics;
};

inline GuessReport guess_probability(const PhotonPMF& a, const PhotonPMF& b, double sigma)
{
    auto td = trace_distance_detailed(a, b, sigma);
    GuessReport r;
    r.trace_distance = td.distance;
    r.guess_probability = 0.5 * (1.0 + td.distance);
    r.diagnostics = td.diagnostics;
    return r;
}

/// Closed form for {|M>, |M+N>}: (1 + erf(N / (2 sqrt2 sigma))) / 2, for any M.
inline double fock_guess_probability(double photon_gap, double sigma)
{
    if (!(sigma >= 0.0))
        throw std::domain_error("fock_guess_probability: sigma must be >= 0");
    const double gap = std::abs(photon_gap);
    if (gap == 0.0)
        return 0.5;
    if (sigma == 0.0)
        return 1.0;
    return 0.5 * (1.0 + std::erf(gap / (2.0 * std::numbers::sqrt2 * sigma)));
}

/// Bhattacharyya coefficient sum_n sqrt(pA(n) pB(n)).
inline double bhattacharyya_fidelity(std::span<const double> a, std::span<const double> b)
{
    const std::size_t n = std::min(a.size(), b.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        acc += std::sqrt(a[i] * b[i]);
    return acc;
}

inline double bhattacharyya_fidelity(const PhotonPMF& a, const PhotonPMF& b)
{
    return bhattacharyya_fidelity(a.masses(), b.masses());
}

/// Joint law of independent draws: out[i * |b| + j] = a[i] b[j].
inline std::vector<double> product_distribution(std::span<const double> a, std::span<const double> b)
{
    std::vector<double> out;
    out.reserve(a.size() * b.size());
    for (double x : a)
        for (double y : b)
            out.push_back(x * y);
    return out;
}

/// Best single-shot guessing probability from `copies` independent draws of
/// a finite discrete outcome, by exact enumeration of outcome tuples. The
/// maximum-likelihood rule is used; ties are split evenly, which leaves the
/// value at 1/2 sum max(pA, pB).
inline double multi_copy_guess_probability(std::span<const double> a, std::span<const double> b,
                                           std::size_t copies)
{
    if (a.size() != b.size() || a.empty())
        throw std::invalid_argument("multi_copy_guess_probability: alphabets must match and be nonempty");
    if (copies < 1)
        throw std::invalid_argument("multi_copy_guess_probability: need at least one copy");
    const double outcomes = std::pow(static_cast<double>(a.size()), static_cast<double>(copies));
    if (outcomes > 1e8)
        throw std::invalid_argument("multi_copy_guess_probability: outcome space too large to enumerate");

    std::vector<double> ja(a.begin(), a.end());
    std::vector<double> jb(b.begin(), b.end());
    for (std::size_t c = 1; c < copies; ++c) {
        ja = product_distribution(ja, a);
        jb = product_distribution(jb, b);
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < ja.size(); ++i) {
        if (ja[i] > jb[i])
            acc += ja[i];
        else if (jb[i] > ja[i])
            acc += jb[i];
        else
            acc += 0.5 * (ja[i] + jb[i]);
    }
    return 0.5 * acc;
}

} // namespace macrosize
