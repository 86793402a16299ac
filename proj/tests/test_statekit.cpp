#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "macrosize/oracle.hpp"
#include "macrosize/statekit.hpp"

using namespace macrosize;

namespace {

double sum_masses(const PhotonPMF& p)
{
    double s = 0.0;
    for (double m : p.masses())
        s += m;
    return s;
}

// <a> from amplitudes: sum_n sqrt(n) conj(c_{n-1}) c_n
complex annihilation_expectation(const FockAmplitudeVector& s)
{
    complex acc{};
    for (std::size_t n = 1; n <= s.cutoff(); ++n)
        acc += std::sqrt(static_cast<double>(n)) * std::conj(s[n - 1]) * s[n];
    return acc;
}

} // namespace

TEST(MakeFock, VacuumAndDelta)
{
    const auto vac = make_fock(0, 4);
    ASSERT_EQ(vac.cutoff(), 4u);
    EXPECT_EQ(vac[0], complex(1.0, 0.0));
    for (std::size_t n = 1; n <= 4; ++n)
        EXPECT_EQ(vac[n], complex{});

    const auto three = make_fock(3, 8);
    for (std::size_t n = 0; n <= 8; ++n)
        EXPECT_EQ(std::abs(three[n]), n == 3 ? 1.0 : 0.0);
    EXPECT_EQ(photon_pmf(three).mean(), 3.0);
}

TEST(MakeFock, CutoffTooSmall)
{
    EXPECT_THROW(make_fock(5, 4), std::invalid_argument);
}

TEST(MakeCoherent, ZeroIsVacuum)
{
    const auto s = make_coherent(0.0);
    EXPECT_EQ(s[0], complex(1.0, 0.0));
    EXPECT_NEAR(photon_pmf(s).mean(), 0.0, 0.0);
}

TEST(MakeCoherent, PoissonStatistics)
{
    const auto pmf = photon_pmf(make_coherent(2.0));
    // e^-4 to 30 digits
    EXPECT_NEAR(pmf[0], 0.0183156388887341802937180212732, 1e-15);
    EXPECT_NEAR(pmf.mean(), 4.0, 1e-8);
    EXPECT_NEAR(pmf.variance(), 4.0, 1e-8);
}

TEST(MakeCoherent, TailCheck)
{
    EXPECT_THROW(make_coherent(5.0, 30), numerical_error);
    EXPECT_NO_THROW(make_coherent(5.0, default_cutoff(25.0)));
}

TEST(MakeCoherent, PhaseFollowsArgument)
{
    const auto s = make_coherent(std::polar(1.5, 0.7));
    for (std::size_t n = 1; n < 6; ++n)
        EXPECT_NEAR(std::arg(s[n] / s[0]), std::remainder(0.7 * static_cast<double>(n), 2 * std::numbers::pi), 1e-12);
}

TEST(DefaultCutoff, Policy)
{
    EXPECT_EQ(default_cutoff(0.0), 25u);
    EXPECT_EQ(default_cutoff(400.0), 665u);
    EXPECT_LT(poisson_tail_bound(400.0, default_cutoff(400.0)), kTailTolerance);
    EXPECT_LT(poisson_tail_bound(2704.0, default_cutoff(2704.0)), kTailTolerance);
}

TEST(Displace, VacuumGivesCoherent)
{
    for (complex alpha : {complex(3.0, 0.0), complex(-1.2, 2.1), complex(0.0, -4.5)}) {
        const auto c = make_coherent(alpha);
        const auto d = displace(make_fock(0), alpha, c.cutoff());
        for (std::size_t n = 0; n <= c.cutoff(); ++n)
            EXPECT_NEAR(std::abs(d[n] - c[n]), 0.0, 1e-9) << "alpha=" << alpha << " n=" << n;
    }
}

TEST(Displace, InverseRestoresState)
{
    const FockAmplitudeVector s(std::vector<complex>{{0.3, 0.1}, {-0.5, 0.2}, {0.0, 0.6}, {0.2, 0.0}});
    for (complex alpha : {complex(2.0, 0.0), complex(1.0, -1.5)}) {
        const auto there = displace(s, alpha);
        const auto back = displace(there, -alpha, there.cutoff());
        EXPECT_TRUE(equal_up_to_phase(back, s.padded(back.cutoff()), 1e-8));
    }
}

TEST(Displace, MatchesDenseOracle)
{
    const std::size_t cutoff = 60;
    const auto dense = dense_displacement(3.0, cutoff);
    const auto s = displace(make_fock(1, cutoff), 3.0, cutoff);
    for (std::size_t n = 0; n <= cutoff; ++n)
        EXPECT_NEAR(std::abs(s[n] - dense(static_cast<Eigen::Index>(n), 1)), 0.0, 1e-8);

    // complex displacement acting on a generic state
    const complex alpha(1.1, -0.8);
    const auto dense2 = dense_displacement(alpha, cutoff);
    const FockAmplitudeVector v(std::vector<complex>{{0.5, 0.0}, {0.0, 0.5}, {-0.5, 0.0}, {0.0, -0.5}});
    const auto out = displace(v, alpha, cutoff);
    for (std::size_t m = 0; m <= cutoff; ++m) {
        complex expected{};
        for (std::size_t n = 0; n < 4; ++n)
            expected += dense2(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n)) * v[n];
        EXPECT_NEAR(std::abs(out[m] - expected), 0.0, 1e-8);
    }
}

TEST(Displace, LargeAmplitudeStaysUnitary)
{
    // 2500 photons: the raw Laguerre terms span hundreds of decades
    const auto plus = FockAmplitudeVector(std::vector<complex>{1.0, 1.0});
    const auto out = displace(plus, 50.0);
    double norm2 = 0.0;
    for (auto c : out.amplitudes())
        norm2 += std::norm(c);
    EXPECT_NEAR(norm2, 1.0, 1e-10);
    EXPECT_NEAR(photon_pmf(out).mean(), 2500.0 + 1.0 / 2.0 + 50.0, 1e-6);
}

TEST(Displace, MeanShiftInvariant)
{
    const FockAmplitudeVector s(std::vector<complex>{{0.6, 0.0}, {0.0, 0.48}, {0.64, 0.0}});
    for (complex alpha : {complex(0.5, 0.0), complex(2.0, 1.0), complex(-3.0, 0.5)}) {
        const double mean_in = photon_pmf(s).mean();
        const complex a = annihilation_expectation(s);
        const double expected = mean_in + std::norm(alpha) + 2.0 * std::real(std::conj(alpha) * a);
        const auto out = displace(s, alpha);
        EXPECT_NEAR(photon_pmf(out).mean(), expected, 1e-6) << "alpha=" << alpha;
    }
}

TEST(Displace, CutoffTooSmallForTail)
{
    EXPECT_THROW(displace(make_fock(0), 5.0, 20), numerical_error);
}

TEST(Superpose, IdentityRotation)
{
    const auto a = make_fock(0, 3);
    const auto d = make_fock(2, 3);
    const auto r = superpose(a, d, 0.0, 1.3);
    EXPECT_TRUE(equal_up_to_phase(r.a, a, 1e-15));
    EXPECT_TRUE(equal_up_to_phase(r.d, d, 1e-15));
}

TEST(Superpose, HadamardLike)
{
    const auto r = superpose(make_fock(0, 1), make_fock(1), std::numbers::pi / 4, 0.0);
    const double h = 1.0 / std::sqrt(2.0);
    EXPECT_NEAR(std::abs(r.a[0] - h), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(r.a[1] - h), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(r.d[0] + h), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(r.d[1] - h), 0.0, 1e-15);
}

TEST(Superpose, OrthonormalInputsStayOrthonormal)
{
    const auto a = make_coherent(1.0, 40);
    // Gram-Schmidt partner of a
    std::vector<complex> raw(41);
    for (std::size_t n = 0; n <= 40; ++n)
        raw[n] = make_fock(2, 40)[n] - a.inner(make_fock(2, 40)) * a[n];
    const FockAmplitudeVector d(raw);
    ASSERT_NEAR(std::abs(a.inner(d)), 0.0, 1e-12);
    for (double theta : {0.1, 0.7, 1.3})
        for (double phi : {0.0, 2.0, 4.5}) {
            const auto r = superpose(a, d, theta, phi);
            EXPECT_NEAR(std::abs(r.a.inner(r.d)), 0.0, 1e-10);
            EXPECT_NEAR(std::abs(r.a.inner(r.a)), 1.0, 1e-10);
        }
}

TEST(Superpose, ZeroNormResult)
{
    const auto a = make_fock(0, 2);
    const FockAmplitudeVector minus_a(std::vector<complex>{-1.0, 0.0, 0.0});
    EXPECT_THROW(superpose(a, minus_a, std::numbers::pi / 4, 0.0), std::domain_error);
}

TEST(Superpose, RecordsOverlap)
{
    const auto r = superpose(make_coherent(1.0), make_coherent(-1.0), 0.3, 0.0);
    EXPECT_NEAR(std::real(r.input_overlap), std::exp(-2.0), 1e-12);
}

TEST(PhotonPmf, CatComponentsConfused)
{
    const double beta = std::sqrt(40.0);
    const auto plus = photon_pmf(make_coherent(beta / 2));
    const auto minus = photon_pmf(make_coherent(-beta / 2));
    ASSERT_EQ(plus.size(), minus.size());
    for (std::size_t n = 0; n < plus.size(); ++n)
        EXPECT_NEAR(plus[n], minus[n], 1e-15);
}

TEST(PhotonPmf, DisplacedPlusMinusSeparatedByTwoAlpha)
{
    const double alpha = 20.0;
    const double h = 1.0 / std::sqrt(2.0);
    const auto p = photon_pmf(displace(FockAmplitudeVector(std::vector<complex>{h, h}), alpha));
    const auto m = photon_pmf(displace(FockAmplitudeVector(std::vector<complex>{h, -h}), alpha));
    EXPECT_NEAR(p.mean() - m.mean(), 2.0 * alpha, 0.01 * 2.0 * alpha);
}

TEST(PhotonPmf, RejectsBadMasses)
{
    EXPECT_THROW(PhotonPMF(std::vector<double>{0.5, 0.6}), std::invalid_argument);
    EXPECT_THROW(PhotonPMF(std::vector<double>{1.1, -0.1}), std::invalid_argument);
    EXPECT_NO_THROW(PhotonPMF(std::vector<double>{0.25, 0.75}));
}

TEST(SpinExcitation, Extremes)
{
    const auto ground = spin_excitation_pmf(7, 0.0);
    EXPECT_EQ(ground[0], 1.0);
    const auto excited = spin_excitation_pmf(7, std::numbers::pi / 2);
    EXPECT_EQ(excited[7], 1.0);
}

TEST(SpinExcitation, BinomialMoments)
{
    for (std::size_t n : {1u, 10u, 500u, 5000u})
        for (double theta : {0.2, std::numbers::pi / 4 + 0.15, 1.4}) {
            const auto pmf = spin_excitation_pmf(n, theta);
            const double q = std::pow(std::sin(theta), 2);
            EXPECT_NEAR(pmf.mean(), static_cast<double>(n) * q, 1e-9 * std::max<double>(1.0, n));
            EXPECT_NEAR(pmf.variance(), static_cast<double>(n) * q * (1 - q), 1e-9 * std::max<double>(1.0, n));
        }
}

TEST(SpinExcitation, NeedsACopy)
{
    EXPECT_THROW(spin_excitation_pmf(0, 0.3), std::invalid_argument);
}

TEST(Constructors, Normalized)
{
    const double h = 1.0 / std::sqrt(2.0);
    for (const auto& pmf : {photon_pmf(make_fock(4)), photon_pmf(make_coherent({3.0, -1.0})),
                            photon_pmf(displace(FockAmplitudeVector(std::vector<complex>{h, -h}), 7.0)),
                            spin_excitation_pmf(300, 0.6)})
        EXPECT_NEAR(sum_masses(pmf), 1.0, 1e-10);
}
