#pragma once

// Truncated single-mode states, their photon-number statistics, and the
// excitation statistics of product spin ensembles.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace macrosize {

using complex = std::complex<double>;

/// Mass allowed beyond a constructor's cutoff.
inline constexpr double kTailTolerance = 1e-12;

/// Largest truncation any constructor accepts.
inline constexpr std::size_t kMaxCutoff = 200000;

/// Default cutoff for a state of mean photon number mu: ceil(mu + 12 sqrt(mu) + 25).
inline std::size_t default_cutoff(double mu)
{
    if (!(mu >= 0.0) || !std::isfinite(mu))
        throw std::invalid_argument("default_cutoff: mean photon number must be finite and >= 0");
    return static_cast<std::size_t>(std::ceil(mu + 12.0 * std::sqrt(mu) + 25.0));
}

/// Upper bound on P(n > cutoff) for a Poisson law of mean mu.
///
/// Beyond the mode successive ratios p(n+1)/p(n) = mu/(n+1) shrink, so the
/// tail is dominated by a geometric series started at p(cutoff+1).
inline double poisson_tail_bound(double mu, std::size_t cutoff)
{
    if (mu == 0.0)
        return 0.0;
    const double next = static_cast<double>(cutoff) + 1.0;
    const double ratio = mu / (next + 1.0);
    if (ratio >= 1.0)
        return 1.0;
    const double log_p = -mu + next * std::log(mu) - std::lgamma(next + 1.0);
    return std::exp(log_p) / (1.0 - ratio);
}

/// Pure state of one bosonic mode in the Fock basis |0>..|cutoff>.
/// Always normalized.
class FockAmplitudeVector {
public:
    FockAmplitudeVector() : amps_{complex{1.0, 0.0}} {}

    /// Normalizes the given amplitudes; throws on an empty or zero vector.
    explicit FockAmplitudeVector(std::vector<complex> amplitudes) : amps_(std::move(amplitudes))
    {
        if (amps_.empty())
            throw std::invalid_argument("FockAmplitudeVector: no amplitudes");
        double norm2 = 0.0;
        for (const auto& c : amps_)
            norm2 += std::norm(c);
        if (!(norm2 > 0.0) || !std::isfinite(norm2))
            throw std::invalid_argument("FockAmplitudeVector: zero or non-finite norm");
        const double scale = 1.0 / std::sqrt(norm2);
        for (auto& c : amps_)
            c *= scale;
    }

    std::size_t cutoff() const { return amps_.size() - 1; }
    std::size_t dimension() const { return amps_.size(); }
    std::span<const complex> amplitudes() const { return amps_; }
    complex operator[](std::size_t n) const { return n < amps_.size() ? amps_[n] : complex{}; }

    /// Same state embedded in a larger truncation (zero padded).
    FockAmplitudeVector padded(std::size_t cutoff) const
    {
        if (cutoff < this->cutoff())
            throw std::invalid_argument("FockAmplitudeVector::padded: cannot shrink");
        std::vector<complex> out(amps_);
        out.resize(cutoff + 1, complex{});
        return FockAmplitudeVector(std::move(out));
    }

    /// <this|other>, zero padding the shorter vector.
    complex inner(const FockAmplitudeVector& other) const
    {
        complex acc{};
        const std::size_t n = std::min(amps_.size(), other.amps_.size());
        for (std::size_t i = 0; i < n; ++i)
            acc += std::conj(amps_[i]) * other.amps_[i];
        return acc;
    }

    /// Index of the last amplitude with nonzero modulus.
    std::size_t support_end() const
    {
        for (std::size_t i = amps_.size(); i-- > 0;)
            if (amps_[i] != complex{})
                return i;
        return 0;
    }

private:
    std::vector<complex> amps_;
};

/// Probability mass function over photon (or excitation) number 0..cutoff.
class PhotonPMF {
public:
    PhotonPMF() : masses_{1.0} {}

    /// Validates nonnegativity and unit sum within 1e-10. The sum is then
    /// rescaled to 1 to remove accumulated rounding.
    explicit PhotonPMF(std::vector<double> masses) : masses_(std::move(masses))
    {
        if (masses_.empty())
            throw std::invalid_argument("PhotonPMF: no masses");
        double total = 0.0;
        for (double m : masses_) {
            if (!(m >= 0.0) || !std::isfinite(m))
                throw std::invalid_argument("PhotonPMF: masses must be finite and nonnegative");
            total += m;
        }
        if (std::abs(total - 1.0) > 1e-10)
            throw std::invalid_argument("PhotonPMF: masses sum to " + std::to_string(total) + ", not 1");
        for (double& m : masses_)
            m /= total;
    }

    /// Normalizes arbitrary nonnegative weights.
    static PhotonPMF from_weights(std::vector<double> weights)
    {
        double total = 0.0;
        for (double w : weights) {
            if (!(w >= 0.0) || !std::isfinite(w))
                throw std::invalid_argument("PhotonPMF::from_weights: weights must be finite and nonnegative");
            total += w;
        }
        if (!(total > 0.0))
            throw std::invalid_argument("PhotonPMF::from_weights: zero total weight");
        for (double& w : weights)
            w /= total;
        return PhotonPMF(std::move(weights));
    }

    std::size_t cutoff() const { return masses_.size() - 1; }
    std::size_t size() const { return masses_.size(); }
    std::span<const double> masses() const { return masses_; }
    double operator[](std::size_t n) const { return n < masses_.size() ? masses_[n] : 0.0; }

    double mean() const
    {
        double m = 0.0;
        for (std::size_t n = 0; n < masses_.size(); ++n)
            m += static_cast<double>(n) * masses_[n];
        return m;
    }

    double variance() const
    {
        const double mu = mean();
        double v = 0.0;
        for (std::size_t n = 0; n < masses_.size(); ++n) {
            const double d = static_cast<double>(n) - mu;
            v += d * d * masses_[n];
        }
        return v;
    }

    /// n -> cutoff - n
    PhotonPMF reflected() const
    {
        std::vector<double> out(masses_.rbegin(), masses_.rend());
        return PhotonPMF(std::move(out));
    }

private:
    std::vector<double> masses_;
};

// ---------------------------------------------------------------------------
// Constructors

inline FockAmplitudeVector make_fock(std::size_t photons, std::optional<std::size_t> cutoff = std::nullopt)
{
    const std::size_t c = cutoff.value_or(photons);
    if (c < photons)
        throw std::invalid_argument("make_fock: cutoff " + std::to_string(c) + " below photon number " +
                                    std::to_string(photons));
    if (c > kMaxCutoff)
        throw std::invalid_argument("make_fock: cutoff exceeds supported maximum");
    std::vector<complex> amps(c + 1, complex{});
    amps[photons] = 1.0;
    return FockAmplitudeVector(std::move(amps));
}

/// Coherent state |alpha>; c_n = exp(-|alpha|^2/2) alpha^n / sqrt(n!), renormalized.
inline FockAmplitudeVector make_coherent(complex alpha, std::optional<std::size_t> cutoff = std::nullopt)
{
    const double mu = std::norm(alpha);
    const std::size_t c = cutoff.value_or(default_cutoff(mu));
    if (c > kMaxCutoff)
        throw std::invalid_argument("make_coherent: cutoff exceeds supported maximum");
    const double tail = poisson_tail_bound(mu, c);
    if (tail > kTailTolerance)
        throw numerical_error("make_coherent: tail mass bound " + std::to_string(tail) + " above cutoff " +
                              std::to_string(c) + " exceeds tolerance");

    std::vector<complex> amps(c + 1, complex{});
    if (mu == 0.0) {
        amps[0] = 1.0;
        return FockAmplitudeVector(std::move(amps));
    }
    const double log_r = 0.5 * std::log(mu);
    const double arg = std::arg(alpha);
    for (std::size_t n = 0; n <= c; ++n) {
        const double dn = static_cast<double>(n);
        const double log_mag = -0.5 * mu + dn * log_r - 0.5 * std::lgamma(dn + 1.0);
        amps[n] = std::polar(std::exp(log_mag), dn * arg);
    }
    return FockAmplitudeVector(std::move(amps));
}

namespace detail {

// Three-term recurrence along one diagonal of the displacement matrix.
//
// For fixed offset k the normalized elements
//   f_j = sqrt(j!/(j+k)!) |alpha|^k exp(-|alpha|^2/2) L_j^(k)(|alpha|^2)
// obey
//   f_{j+1} sqrt((j+1)(j+1+k)) = (2j+1+k-x) f_j - sqrt(j(j+k)) f_{j-1}.
// The values span hundreds of decades at large |alpha|, so the pair is
// carried as mantissas times exp(log_scale). Requires x > 0.
class DisplacementDiagonal {
public:
    DisplacementDiagonal(double x, std::size_t k, std::span<const double> sqrt_table)
        : x_(x), k_(static_cast<double>(k)), kk_(k), roots_(sqrt_table)
    {
        log_scale_ = -0.5 * x + 0.5 * k_ * std::log(x) - 0.5 * std::lgamma(k_ + 1.0);
    }

    /// Current element f_j.
    double value() const { return cur_ * std::exp(log_scale_); }

    /// Advance j -> j+1.
    void advance()
    {
        const double dj = static_cast<double>(j_);
        const double num = (2.0 * dj + 1.0 + k_ - x_) * cur_ - roots_[j_] * roots_[j_ + kk_] * prev_;
        const double next = num / (roots_[j_ + 1] * roots_[j_ + 1 + kk_]);
        prev_ = cur_;
        cur_ = next;
        ++j_;
        const double mag = std::max(std::abs(prev_), std::abs(cur_));
        if (mag > 1e150) {
            prev_ *= 1e-150;
            cur_ *= 1e-150;
            log_scale_ += 150.0 * std::numbers::ln10;
        } else if (mag < 1e-150 && mag > 0.0) {
            prev_ *= 1e150;
            cur_ *= 1e150;
            log_scale_ -= 150.0 * std::numbers::ln10;
        }
    }

private:
    double x_;
    double k_;
    std::size_t kk_;
    std::span<const double> roots_;
    double log_scale_ = 0.0;
    double cur_ = 1.0;
    double prev_ = 0.0;
    std::size_t j_ = 0;
};

} // namespace detail

/// D(alpha)|state> on the truncated space.
///
/// Matrix elements come from the associated-Laguerre closed form, evaluated
/// by upward recurrence in the smaller index along each diagonal. The output
/// cutoff defaults to the larger of the input cutoff and the default cutoff
/// for (sqrt(<n>) + |alpha|)^2; the mass lost beyond it must stay below
/// kTailTolerance.
inline FockAmplitudeVector displace(const FockAmplitudeVector& state, complex alpha,
                                    std::optional<std::size_t> cutoff = std::nullopt)
{
    double mean_in = 0.0;
    for (std::size_t n = 0; n <= state.cutoff(); ++n)
        mean_in += static_cast<double>(n) * std::norm(state[n]);
    const double reach = std::sqrt(mean_in) + std::abs(alpha);
    const std::size_t c = cutoff.value_or(std::max(state.cutoff(), default_cutoff(reach * reach)));
    if (c < state.support_end())
        throw std::invalid_argument("displace: cutoff below the input support");
    if (c > kMaxCutoff)
        throw std::invalid_argument("displace: cutoff exceeds supported maximum");

    if (alpha == complex{})
        return state.padded(std::max(c, state.cutoff()));

    const std::size_t support = state.support_end();
    const double x = std::norm(alpha);
    const double theta = std::arg(alpha);

    std::vector<double> roots(c + 2);
    for (std::size_t i = 0; i < roots.size(); ++i)
        roots[i] = std::sqrt(static_cast<double>(i));

    std::vector<complex> out(c + 1, complex{});
    for (std::size_t k = 0; k <= c; ++k) {
        const complex below = std::polar(1.0, static_cast<double>(k) * theta);
        const complex above = (k % 2 == 0 ? 1.0 : -1.0) * std::conj(below);
        detail::DisplacementDiagonal diag(x, k, roots);
        // element (j+k, j) for j <= support, and (j, j+k) while j+k <= support
        const std::size_t last = std::min(support, c - k);
        for (std::size_t j = 0; j <= last; ++j) {
            const double f = diag.value();
            if (f != 0.0) {
                out[j + k] += f * below * state[j];
                if (k > 0 && j + k <= support)
                    out[j] += f * above * state[j + k];
            }
            if (j < last)
                diag.advance();
        }
    }

    double norm2 = 0.0;
    for (const auto& v : out)
        norm2 += std::norm(v);
    const double lost = 1.0 - norm2;
    if (lost > kTailTolerance)
        throw numerical_error("displace: tail mass " + std::to_string(lost) + " beyond cutoff " +
                              std::to_string(c) + " exceeds tolerance");
    return FockAmplitudeVector(std::move(out));
}

/// Components after a basis change on the qubit side:
/// (c a + s e^{i phi} d, c d - s e^{-i phi} a), each renormalized.
struct RotatedPair {
    FockAmplitudeVector a;
    FockAmplitudeVector d;
    /// <a|d> of the inputs; nonzero means the components were not orthogonal
    complex input_overlap;
};

inline RotatedPair superpose(const FockAmplitudeVector& a, const FockAmplitudeVector& d, double theta, double phi)
{
    const std::size_t c = std::max(a.cutoff(), d.cutoff());
    const double ct = std::cos(theta);
    const double st = std::sin(theta);
    const complex e = std::polar(1.0, phi);
    std::vector<complex> ra(c + 1), rd(c + 1);
    for (std::size_t n = 0; n <= c; ++n) {
        ra[n] = ct * a[n] + st * e * d[n];
        rd[n] = ct * d[n] - st * std::conj(e) * a[n];
    }
    auto norm_of = [](const std::vector<complex>& v) {
        double s = 0.0;
        for (const auto& z : v)
            s += std::norm(z);
        return s;
    };
    if (norm_of(ra) < 1e-24 || norm_of(rd) < 1e-24)
        throw std::domain_error("superpose: rotated component has zero norm");
    return {FockAmplitudeVector(std::move(ra)), FockAmplitudeVector(std::move(rd)), a.inner(d)};
}

inline PhotonPMF photon_pmf(const FockAmplitudeVector& state)
{
    std::vector<double> masses(state.dimension());
    for (std::size_t n = 0; n < masses.size(); ++n)
        masses[n] = std::norm(state[n]);
    return PhotonPMF(std::move(masses));
}

/// Excitation-number law of N independent two-level systems in
/// cos(theta)|g> + sin(theta)|e>: Binomial(N, sin^2 theta).
inline PhotonPMF spin_excitation_pmf(std::size_t copies, double theta)
{
    if (copies < 1)
        throw std::invalid_argument("spin_excitation_pmf: need at least one copy");
    if (copies > kMaxCutoff)
        throw std::invalid_argument("spin_excitation_pmf: too many copies");
    const double s = std::sin(theta);
    const double c = std::cos(theta);
    std::vector<double> masses(copies + 1, 0.0);
    if (std::abs(s) < 1e-300) {
        masses[0] = 1.0;
        return PhotonPMF(std::move(masses));
    }
    if (std::abs(c) < 1e-300) {
        masses[copies] = 1.0;
        return PhotonPMF(std::move(masses));
    }
    const double dn = static_cast<double>(copies);
    const double log_q = 2.0 * std::log(std::abs(s));
    const double log_p = 2.0 * std::log(std::abs(c));
    const double log_n_fact = std::lgamma(dn + 1.0);
    for (std::size_t k = 0; k <= copies; ++k) {
        const double dk = static_cast<double>(k);
        masses[k] = std::exp(log_n_fact - std::lgamma(dk + 1.0) - std::lgamma(dn - dk + 1.0) + dk * log_q +
                             (dn - dk) * log_p);
    }
    return PhotonPMF::from_weights(std::move(masses));
}

/// Equality modulo a global phase, elementwise within tol.
inline bool equal_up_to_phase(const FockAmplitudeVector& x, const FockAmplitudeVector& y, double tol)
{
    const complex ov = x.inner(y);
    const complex phase = std::abs(ov) > 0.0 ? ov / std::abs(ov) : complex{1.0, 0.0};
    const std::size_t c = std::max(x.cutoff(), y.cutoff());
    for (std::size_t n = 0; n <= c; ++n)
        if (std::abs(x[n] * phase - y[n]) > tol)
            return false;
    return true;
}

} // namespace macrosize
