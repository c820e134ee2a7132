#include "priomac/experiment.h"
#include "priomac/fps-mac.h"

#include "scenarios.h"

#include <gtest/gtest.h>

#include <sstream>

using namespace priomac;
using priomac::testing::ParseTrace;

TEST(FpsGeometry, ReferenceFrameLayout)
{
    const auto g = FpsGeometry::Derive(FpsParams{}, 34, 250'000);
    EXPECT_EQ(g.eis, Micros(256 + 352 + 1000));
    EXPECT_EQ(g.control, Micros(960 + 1000));
    EXPECT_EQ(g.slot, Micros(1248 + 352 + 1000));
    EXPECT_EQ(g.FrameLength(), Micros(1608 + 1960 + 20 * 2600));
}

TEST(RunSetup, SinkHeadsAndRichestMemberIsSurrogate)
{
    std::vector<SetupNode> nodes{{1, 10.0, false}, {2, 30.0, false}, {3, 30.0, false}, {4, 5.0, true}};
    const auto s = RunSetup(nodes, 20);
    EXPECT_EQ(s.ch, 4u);
    EXPECT_EQ(s.surrogateCh, 2u);
    EXPECT_EQ(s.slotOrder, (std::vector<NodeId>{1, 2, 3}));

    std::vector<SetupNode> noSink{{1, 1.0, false}};
    EXPECT_THROW(RunSetup(noSink, 20), std::invalid_argument);
}

namespace
{

SlotRequest
Req(NodeId node, double distance, bool emergency, bool normal = true)
{
    // Half-charged and fully backlogged: distance decides the fuzzy score.
    return SlotRequest{node, FuzzyInputs{distance, 13500.0, 20, emergency}, normal};
}

} // namespace

TEST(BuildFrame, EmergencyRequestsStealTheFirstSlots)
{
    const auto g = FpsGeometry::Derive(FpsParams{}, 34, 250'000);
    std::vector<SlotRequest> reqs{Req(1, 5.0, false), Req(2, 30.0, true), Req(3, 30.0, false), Req(4, 5.0, true)};
    const auto f = BuildFrame(g, 7, Seconds(1), reqs, FuzzyScales{});
    EXPECT_EQ(f.mode, FrameMode::Emergency);
    ASSERT_EQ(f.slots.size(), 4u);
    EXPECT_EQ(f.slots[0].purpose, SlotPurpose::Emergency);
    EXPECT_EQ(f.slots[1].purpose, SlotPurpose::Emergency);
    EXPECT_EQ(f.slots[2].purpose, SlotPurpose::Normal);
    // Within a group the nearer node ranks first.
    EXPECT_EQ(f.slots[0].node, 4u);
    EXPECT_EQ(f.slots[1].node, 2u);
    EXPECT_EQ(f.slots[2].node, 1u);
    EXPECT_EQ(f.slots[3].node, 3u);
    EXPECT_EQ(f.eis.start, Seconds(1));
    EXPECT_EQ(f.slots[0].span.start, Seconds(1) + g.eis + g.control);
    for (std::size_t i = 1; i < f.slots.size(); ++i)
    {
        EXPECT_EQ(f.slots[i].span.start, f.slots[i - 1].span.end);
    }
    EXPECT_EQ(f.SlotOf(3), &f.slots[3]);
    EXPECT_EQ(f.SlotOf(9), nullptr);
}

TEST(BuildFrame, PeriodicWhenNobodyIndicated)
{
    const auto g = FpsGeometry::Derive(FpsParams{}, 34, 250'000);
    std::vector<SlotRequest> reqs{Req(1, 5.0, false), Req(2, 5.0, false, false)};
    const auto f = BuildFrame(g, 0, SimTime{0}, reqs, FuzzyScales{});
    EXPECT_EQ(f.mode, FrameMode::Periodic);
    ASSERT_EQ(f.slots.size(), 1u);
    EXPECT_EQ(f.slots[0].node, 1u);
}

TEST(BuildFrame, TruncatesToTheFrame)
{
    FpsParams p;
    p.slotsPerFrame = 3;
    const auto g = FpsGeometry::Derive(p, 34, 250'000);
    std::vector<SlotRequest> reqs;
    for (NodeId n = 1; n <= 6; ++n)
    {
        reqs.push_back(Req(n, 10.0, n == 6));
    }
    const auto f = BuildFrame(g, 0, SimTime{0}, reqs, FuzzyScales{});
    ASSERT_EQ(f.slots.size(), 3u);
    EXPECT_EQ(f.slots[0].node, 6u);
}

TEST(EisContend, OutcomesFollowTransmitterCount)
{
    StreamBank bank(3);
    std::vector<NodeId> one{5};
    const auto always = EisContend(one, 1.0, 0.0, bank);
    EXPECT_EQ(always.result, EisResult::Winner);
    EXPECT_EQ(always.Acknowledged(), std::optional<NodeId>(5));

    const auto lost = EisContend(one, 1.0, 1.0, bank);
    EXPECT_EQ(lost.result, EisResult::Winner);
    EXPECT_FALSE(lost.Acknowledged());

    std::vector<NodeId> two{1, 2};
    EXPECT_EQ(EisContend(two, 1.0, 0.0, bank).result, EisResult::Collision);
    EXPECT_EQ(EisContend({}, 1.0, 0.0, bank).result, EisResult::Empty);
}

TEST(EisContend, PersistenceRateIsHonoured)
{
    StreamBank bank(11);
    std::vector<NodeId> one{1};
    int sent = 0;
    for (int i = 0; i < 10000; ++i)
    {
        sent += EisContend(one, 0.5, 0.0, bank).transmitters.size();
    }
    EXPECT_GT(sent, 4800);
    EXPECT_LT(sent, 5200);
}

TEST(FpsRun, NoEmergencyNodesMeansNoEmergencyFrames)
{
    SimConfig c;
    c.protocol = Protocol::Fps;
    c.nEmergency = 0;
    c.duration = Seconds(500);
    const auto r = RunOnce(c);
    EXPECT_GT(r.counters.frames, 0u);
    EXPECT_EQ(r.counters.emergencyFrames, 0u);
    EXPECT_EQ(r.emergency.generated, 0u);
    EXPECT_FALSE(r.emergency.meanUs);
}

TEST(FpsRun, DataStaysInsideAssignedSlots)
{
    SimConfig c;
    c.protocol = Protocol::Fps;
    c.nEmergency = 18;
    c.duration = Seconds(600);
    std::ostringstream os;
    Trace trace(os);
    const auto r = RunOnce(c, trace);
    EXPECT_EQ(r.counters.dataCollisions, 0u);
    EXPECT_EQ(r.counters.slotViolations, 0u);
    std::size_t dataTx = 0;
    for (const auto& l : ParseTrace(os.str()))
    {
        if (l.kind == "tx-start" && l.Get("frame") == "data-whole")
        {
            ++dataTx;
            const auto start = std::stoll(l.Get("slot_start"));
            const auto end = std::stoll(l.Get("slot_end"));
            EXPECT_GE(l.t, start);
            EXPECT_LE(std::stoll(l.Get("end")), end);
        }
    }
    EXPECT_EQ(dataTx, r.counters.dataTransmissions);
    EXPECT_GT(r.counters.emergencyFrames, 0u);
    for (const auto* s : {&r.emergency, &r.normal})
    {
        EXPECT_EQ(s->delivered + s->dropped + s->inFlight, s->generated);
    }
}

TEST(FpsRun, EnergyTimeClosesPerNode)
{
    SimConfig c;
    c.protocol = Protocol::Fps;
    c.duration = Seconds(300);
    const auto r = RunOnce(c);
    for (const auto& n : r.energy)
    {
        EXPECT_EQ(n.ledger.TotalTime(), c.duration) << "node " << n.node;
    }
}
