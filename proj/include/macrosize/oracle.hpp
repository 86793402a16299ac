#pragma once

// Independent checks for the analytic pipeline: a Monte Carlo discrimination
// game, the displacement operator by dense matrix exponential, and the
// biased-coin multi-copy demonstration.

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <thread>
#include <vector>

#include "coarse.hpp"
#include "statekit.hpp"

namespace macrosize {

struct McConfig {
    std::uint64_t samples = 1'000'000;
    std::uint64_t seed = 20130605;
    /// independent substreams; results do not depend on how they are scheduled
    unsigned shards = 8;
};

struct McResult {
    double probability = 0.0;
    double standard_error = 0.0;
    std::uint64_t samples = 0;
    std::uint64_t hits = 0;
    std::uint64_t seed = 0;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// std::mt19937_64 has a fully specified output sequence; the conversions
// below avoid the implementation-defined standard distributions.
class PortableStream {
public:
    PortableStream(std::uint64_t seed, std::uint64_t shard) : engine_(splitmix64(seed ^ splitmix64(shard + 1))) {}

    /// uniform on [0, 1)
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// uniform on (0, 1]
    double uniform_open() { return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53; }

    bool coin() { return (engine_() >> 63) != 0; }

    double normal()
    {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double r = std::sqrt(-2.0 * std::log(uniform_open()));
        const double t = 2.0 * std::numbers::pi * uniform();
        spare_ = r * std::sin(t);
        has_spare_ = true;
        return r * std::cos(t);
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

inline std::vector<double> cumulative(std::span<const double> p)
{
    std::vector<double> c(p.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        acc += p[i];
        c[i] = acc;
    }
    return c;
}

inline std::size_t draw(const std::vector<double>& cdf, double u)
{
    const double target = u * cdf.back();
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
    return static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - cdf.begin(),
                                                             static_cast<std::ptrdiff_t>(cdf.size()) - 1));
}

} // namespace detail

/// Empirical single-shot success rate of the likelihood-ratio guess: a
/// component is picked uniformly, n drawn from its PMF, Gaussian pointer
/// noise added, and the guess goes to the larger smeared density at the
/// outcome. Equal densities are settled by a fair flip from the same stream.
inline McResult mc_guess_probability(const PhotonPMF& a, const PhotonPMF& b, double sigma, const McConfig& cfg = {})
{
    if (!(sigma > 0.0))
        throw std::domain_error("mc_guess_probability: sigma must be > 0");
    if (cfg.samples == 0 || cfg.shards == 0)
        throw std::invalid_argument("mc_guess_probability: need samples and shards");

    const std::size_t len = std::max(a.size(), b.size());
    std::vector<double> w(len);
    for (std::size_t n = 0; n < len; ++n)
        w[n] = a[n] - b[n];
    const auto cdf_a = detail::cumulative(a.masses());
    const auto cdf_b = detail::cumulative(b.masses());

    std::vector<std::uint64_t> hits(cfg.shards, 0);
    auto run_shard = [&](unsigned shard) {
        detail::PortableStream rng(cfg.seed, shard);
        const std::uint64_t count = cfg.samples / cfg.shards + (shard < cfg.samples % cfg.shards ? 1 : 0);
        std::uint64_t local = 0;
        for (std::uint64_t i = 0; i < count; ++i) {
            const bool sent_a = rng.coin();
            const std::size_t n = detail::draw(sent_a ? cdf_a : cdf_b, rng.uniform());
            const double x = static_cast<double>(n) + sigma * rng.normal();
            const double d = detail::mixture_at(w, 0, len - 1, sigma, x);
            const bool guess_a = d > 0.0 ? true : (d < 0.0 ? false : rng.coin());
            if (guess_a == sent_a)
                ++local;
        }
        hits[shard] = local;
    };

    const unsigned workers = std::max(1u, std::min(cfg.shards, std::thread::hardware_concurrency()));
    if (workers <= 1) {
        for (unsigned s = 0; s < cfg.shards; ++s)
            run_shard(s);
    } else {
        std::atomic<unsigned> next{0};
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < workers; ++t)
            pool.emplace_back([&] {
                for (unsigned s = next++; s < cfg.shards; s = next++)
                    run_shard(s);
            });
    }

    McResult r;
    r.seed = cfg.seed;
    r.samples = cfg.samples;
    for (auto h : hits)
        r.hits += h;
    r.probability = static_cast<double>(r.hits) / static_cast<double>(r.samples);
    r.standard_error = std::sqrt(r.probability * (1.0 - r.probability) / static_cast<double>(r.samples));
    return r;
}

/// exp(A) by scaling and squaring with a Taylor kernel.
inline Eigen::MatrixXcd expm_scaling_squaring(const Eigen::MatrixXcd& a)
{
    const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
    int squarings = 0;
    if (norm1 > 0.5)
        squarings = static_cast<int>(std::ceil(std::log2(norm1 / 0.5)));
    const Eigen::MatrixXcd scaled = a / std::ldexp(1.0, squarings);

    Eigen::MatrixXcd result = Eigen::MatrixXcd::Identity(a.rows(), a.cols());
    Eigen::MatrixXcd term = result;
    for (int k = 1; k <= 30; ++k) {
        term = term * scaled / static_cast<double>(k);
        result += term;
        if (term.cwiseAbs().maxCoeff() < 1e-18)
            break;
    }
    for (int s = 0; s < squarings; ++s)
        result = result * result;
    return result;
}

/// Displacement operator on |0>..|cutoff>, computed as exp(alpha a+ - alpha* a)
/// on a space enlarged by half and cropped back.
inline Eigen::MatrixXcd dense_displacement(complex alpha, std::size_t cutoff)
{
    const auto big = static_cast<Eigen::Index>(std::ceil(1.5 * static_cast<double>(cutoff + 1)));
    Eigen::MatrixXcd gen = Eigen::MatrixXcd::Zero(big, big);
    for (Eigen::Index n = 0; n + 1 < big; ++n) {
        const double r = std::sqrt(static_cast<double>(n + 1));
        gen(n + 1, n) += alpha * r;           // alpha a+
        gen(n, n + 1) -= std::conj(alpha) * r; // -alpha* a
    }
    const auto full = expm_scaling_squaring(gen);
    const auto m = static_cast<Eigen::Index>(cutoff + 1);
    return full.topLeftCorner(m, m);
}

/// Guessing probability for `copies` tosses of one of two mirrored biased
/// coins {p, 1-p} and {1-p, p}.
inline double coin_multi_copy_guess(double p, std::size_t copies)
{
    if (!(p >= 0.0 && p <= 1.0))
        throw std::domain_error("coin_multi_copy_guess: bias must lie in [0, 1]");
    const double a[2] = {p, 1.0 - p};
    const double b[2] = {1.0 - p, p};
    return multi_copy_guess_probability(a, b, copies);
}

/// Bhattacharyya coefficient of the two coins after `copies` tosses,
/// computed on the product distribution.
inline double coin_multi_copy_fidelity(double p, std::size_t copies)
{
    std::vector<double> a{p, 1.0 - p};
    std::vector<double> b{1.0 - p, p};
    std::vector<double> ja = a, jb = b;
    for (std::size_t c = 1; c < copies; ++c) {
        ja = product_distribution(ja, a);
        jb = product_distribution(jb, b);
    }
    return bhattacharyya_fidelity(ja, jb);
}

} // namespace macrosize
