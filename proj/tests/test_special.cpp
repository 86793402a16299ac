#include <gtest/gtest.h>

#include <boost/math/special_functions/erf.hpp>

#include "macrosize/special.hpp"

using namespace macrosize;

TEST(ErfInv, MatchesBoostAcrossRange)
{
    for (double y = -0.999; y < 1.0; y += 0.0371) {
        const double expected = boost::math::erf_inv(y);
        EXPECT_NEAR(erf_inv(y), expected, 1e-14 * std::max(1.0, std::abs(expected))) << "y=" << y;
    }
}

TEST(ErfInv, UpperTail)
{
    for (double y : {0.9999, 0.999999, 1.0 - 1e-10})
        EXPECT_NEAR(erf_inv(y), boost::math::erf_inv(y), 1e-9) << "y=" << y;
}

TEST(ErfInv, RoundTripsThroughErf)
{
    for (double x = -4.0; x <= 4.0; x += 0.125)
        EXPECT_NEAR(erf_inv(std::erf(x)), x, 1e-9 * std::max(1.0, std::abs(x) * 1e3));
}

TEST(ErfInv, EdgeValues)
{
    EXPECT_EQ(erf_inv(0.0), 0.0);
    EXPECT_TRUE(std::isinf(erf_inv(1.0)));
    EXPECT_TRUE(std::isinf(erf_inv(-1.0)));
    EXPECT_THROW(erf_inv(1.5), std::domain_error);
}

TEST(GaussianIntervalMass, MatchesErfDifference)
{
    EXPECT_NEAR(gaussian_interval_mass(-1.0, 1.0, 1.0), std::erf(1.0 / std::sqrt(2.0)), 1e-15);
    EXPECT_NEAR(gaussian_interval_mass(-INFINITY, INFINITY, 3.0), 1.0, 1e-15);
    EXPECT_NEAR(gaussian_interval_mass(0.0, INFINITY, 0.2), 0.5, 1e-15);
    // far tail keeps relative accuracy
    const double tail = gaussian_interval_mass(30.0, INFINITY, 1.0);
    EXPECT_NEAR(tail / (0.5 * std::erfc(30.0 / std::sqrt(2.0))), 1.0, 1e-12);
}
