#include "priomac/scheduler.h"
#include "priomac/traffic.h"

#include <gtest/gtest.h>

#include <set>

using namespace priomac;

TEST(NextArrival, ReferenceIntervals)
{
    EXPECT_EQ(NextArrival({TrafficClass::Normal, Seconds(10), SimTime{0}}, SimTime{0}), Seconds(10));
    EXPECT_EQ(NextArrival({TrafficClass::Emergency, Seconds(120), SimTime{0}}, Seconds(119)), Seconds(120));
    EXPECT_EQ(NextArrival({TrafficClass::Normal, Seconds(10), Seconds(3)}, Seconds(13)), Seconds(23));
    EXPECT_EQ(NextArrival({TrafficClass::Normal, Seconds(10), Seconds(3)}, SimTime{0}), Seconds(3));
}

TEST(InsertByPriority, EmergencyAheadOfNormalFifoWithinClass)
{
    std::deque<Packet> q;
    InsertByPriority(q, Packet{1, 1, TrafficClass::Normal});
    InsertByPriority(q, Packet{2, 1, TrafficClass::Emergency});
    InsertByPriority(q, Packet{3, 1, TrafficClass::Normal});
    InsertByPriority(q, Packet{4, 1, TrafficClass::Emergency});
    std::vector<PacketId> ids;
    for (const auto& p : q)
    {
        ids.push_back(p.id);
    }
    EXPECT_EQ(ids, (std::vector<PacketId>{2, 4, 1, 3}));
}

TEST(Population, LayoutAndProfiles)
{
    const Population pop = BuildPopulation(20, 6, TrafficParams{}, 9);
    ASSERT_EQ(pop.members.size(), 20u);
    EXPECT_EQ(pop.sink, 21u);
    EXPECT_DOUBLE_EQ(pop.sinkPos.x, 25.0);
    EXPECT_DOUBLE_EQ(pop.sinkPos.y, 25.0);
    int emergency = 0;
    for (std::size_t i = 0; i < pop.members.size(); ++i)
    {
        const auto& m = pop.members[i];
        EXPECT_EQ(m.id, i + 1);
        EXPECT_GE(m.pos.x, 0.0);
        EXPECT_LE(m.pos.x, 50.0);
        EXPECT_GE(m.pos.y, 0.0);
        EXPECT_LE(m.pos.y, 50.0);
        EXPECT_LT(m.normal.phase, Seconds(10));
        if (m.emergency)
        {
            ++emergency;
            EXPECT_LT(m.emergency->phase, Seconds(120));
        }
    }
    EXPECT_EQ(emergency, 6);
    EXPECT_THROW(BuildPopulation(20, 21, TrafficParams{}, 9), std::invalid_argument);
}

TEST(Population, EmergencySubsetsAreNestedAcrossLoads)
{
    std::set<NodeId> previous;
    const Population base = BuildPopulation(20, 0, TrafficParams{}, 5);
    for (std::uint32_t k = 0; k <= 20; ++k)
    {
        const Population pop = BuildPopulation(20, k, TrafficParams{}, 5);
        std::set<NodeId> chosen;
        for (const auto& m : pop.members)
        {
            const auto& b = base.Member(m.id);
            EXPECT_EQ(m.pos.x, b.pos.x);
            EXPECT_EQ(m.normal.phase, b.normal.phase);
            if (m.emergency)
            {
                chosen.insert(m.id);
            }
        }
        EXPECT_EQ(chosen.size(), k);
        for (NodeId id : previous)
        {
            EXPECT_TRUE(chosen.contains(id)) << "k=" << k << " lost node " << id;
        }
        previous = chosen;
    }
}

TEST(TrafficGenerator, CountsMatchPhaseArithmetic)
{
    const Population pop = BuildPopulation(20, 5, TrafficParams{}, 3);
    Scheduler sched;
    std::vector<Packet> seen;
    TrafficGenerator gen(sched, pop, 34, [&](const Packet& p) { seen.push_back(p); });
    gen.Start();
    const SimTime end = Seconds(5000);
    sched.Run(end);

    std::uint64_t normal = 0;
    std::uint64_t emergency = 0;
    for (const auto& m : pop.members)
    {
        normal += (end - m.normal.phase) / m.normal.interval + 1;
        if (m.emergency)
        {
            emergency += (end - m.emergency->phase) / m.emergency->interval + 1;
        }
    }
    EXPECT_EQ(gen.Generated(TrafficClass::Normal), normal);
    EXPECT_EQ(gen.Generated(TrafficClass::Emergency), emergency);
    EXPECT_EQ(seen.size(), normal + emergency);

    std::set<PacketId> ids;
    for (const auto& p : seen)
    {
        EXPECT_TRUE(ids.insert(p.id).second);
        EXPECT_EQ(p.payloadBytes, 34u);
        const auto& cfg = pop.Member(p.src);
        const auto& profile = p.cls == TrafficClass::Normal ? cfg.normal : *cfg.emergency;
        EXPECT_EQ((p.genTime - profile.phase) % profile.interval, SimTime{0});
    }
}
