#include "priomac/fuzzy.h"

#include "fuzzy-oracle.h"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

using namespace priomac;
using priomac::testing::OracleCore;

TEST(TriangularSet, ShouldersAndPeaks)
{
    const TriangularSet low{0.0, 0.0, 0.5};
    const TriangularSet mid{0.0, 0.5, 1.0};
    EXPECT_DOUBLE_EQ(low.Membership(0.0), 1.0);
    EXPECT_DOUBLE_EQ(low.Membership(0.25), 0.5);
    EXPECT_DOUBLE_EQ(low.Membership(0.5), 0.0);
    EXPECT_DOUBLE_EQ(mid.Membership(0.5), 1.0);
    EXPECT_DOUBLE_EQ(mid.Membership(0.75), 0.5);
    EXPECT_DOUBLE_EQ(mid.Membership(1.5), 0.0);
}

TEST(FuzzyCore, CentreInputGivesCentreScore)
{
    EXPECT_NEAR(FuzzyCore(0.5, 0.5, 0.5), 0.5, 1e-9);
}

TEST(FuzzyCore, MatchesIndependentOracle)
{
    std::mt19937_64 gen(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 1000; ++i)
    {
        const double d = u(gen);
        const double e = u(gen);
        const double s = u(gen);
        ASSERT_NEAR(FuzzyCore(d, e, s), OracleCore(d, e, s), 1e-9) << d << ' ' << e << ' ' << s;
    }
    for (double d : {0.0, 0.5, 1.0})
    {
        for (double e : {0.0, 0.5, 1.0})
        {
            for (double s : {0.0, 0.5, 1.0})
            {
                EXPECT_NEAR(FuzzyCore(d, e, s), OracleCore(d, e, s), 1e-9);
            }
        }
    }
}

TEST(FuzzyCore, RuleDirections)
{
    // Near, charged and backlogged outranks far, drained and idle.
    EXPECT_GT(FuzzyCore(0.0, 1.0, 1.0), FuzzyCore(1.0, 0.0, 0.0));
    EXPECT_GT(FuzzyCore(0.1, 0.5, 1.0), FuzzyCore(0.1, 0.5, 0.1));
}

TEST(FuzzyCore, RejectsInputsOutsideTheUnitInterval)
{
    EXPECT_THROW(FuzzyCore(-0.1, 0.5, 0.5), std::invalid_argument);
    EXPECT_THROW(FuzzyCore(0.5, 1.1, 0.5), std::invalid_argument);
    EXPECT_THROW(FuzzyCore(0.5, 0.5, std::numeric_limits<double>::quiet_NaN()), std::invalid_argument);
}

TEST(Priority, EmergencyFlagDominates)
{
    std::mt19937_64 gen(7);
    const FuzzyScales scales;
    std::uniform_real_distribution<double> dist(0.0, scales.areaDiagonalM);
    std::uniform_real_distribution<double> energy(0.0, scales.initialEnergyJ);
    std::uniform_int_distribution<std::uint32_t> slots(0, 40);
    auto draw = [&](bool flag) {
        return FuzzyInputs{dist(gen), energy(gen), slots(gen), flag};
    };
    for (int i = 0; i < 10000; ++i)
    {
        const auto flagged = draw(true);
        const auto plain = draw(false);
        ASSERT_GE(Priority(flagged, scales), Priority(plain, scales));
    }
    EXPECT_DOUBLE_EQ(PriorityFromCore(0.0, true), 0.5);
    EXPECT_DOUBLE_EQ(PriorityFromCore(1.0, false), 0.5);
}

TEST(Normalize, ScalesAndClamps)
{
    const FuzzyScales scales;
    const auto n = Normalize(FuzzyInputs{scales.areaDiagonalM / 2, 30000.0, 50, false}, scales);
    EXPECT_DOUBLE_EQ(n.distance, 0.5);
    EXPECT_DOUBLE_EQ(n.energy, 1.0);
    EXPECT_DOUBLE_EQ(n.slots, 1.0);
    EXPECT_DOUBLE_EQ(Normalize(FuzzyInputs{0.0, 13500.0, 5, false}, scales).slots, 0.25);
    EXPECT_THROW(Normalize(FuzzyInputs{100.0, 1.0, 1, false}, scales), std::invalid_argument);
}
