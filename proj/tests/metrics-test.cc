#include "priomac/energy.h"
#include "priomac/metrics.h"

#include <gtest/gtest.h>

using namespace priomac;

namespace
{

Packet
Make(PacketId id, TrafficClass cls, SimTime gen = SimTime{0})
{
    Packet p;
    p.id = id;
    p.src = 1;
    p.cls = cls;
    p.genTime = gen;
    return p;
}

} // namespace

TEST(RecordDelivery, DelayIsDeliveryMinusGeneration)
{
    MetricsCollector m;
    const auto p = Make(1, TrafficClass::Normal);
    m.OnGenerated(p);
    EXPECT_EQ(m.RecordDelivery(p, Micros(1248)).Delay(), Micros(1248));
    EXPECT_THROW(m.RecordDelivery(p, Micros(2000)), std::logic_error);

    const auto q = Make(2, TrafficClass::Normal, Micros(50));
    m.OnGenerated(q);
    EXPECT_THROW(m.RecordDelivery(q, Micros(50)), std::invalid_argument);
}

TEST(RecordDrop, IgnoredAfterDelivery)
{
    MetricsCollector m;
    const auto p = Make(1, TrafficClass::Emergency);
    m.OnGenerated(p);
    m.RecordDelivery(p, Micros(10));
    EXPECT_FALSE(m.RecordDrop(p));
    EXPECT_EQ(m.Dropped()[ClassIndex(TrafficClass::Emergency)], 0u);
}

TEST(EnergyLedger, StatePowers)
{
    EnergyLedger l;
    EXPECT_NEAR(l.Update(RadioState::Transmit, Micros(1000)), 52.2, 1e-9);
    EXPECT_NEAR(l.Update(RadioState::Transmit, SimTime{0}), 52.2, 1e-9);
    EnergyLedger s;
    EXPECT_NEAR(s.Update(RadioState::Sleep, Seconds(1)), 20.0, 1e-9);
    EXPECT_THROW(s.Update(RadioState::Sleep, Micros(-1)), std::invalid_argument);
    EXPECT_THROW(RadioStateFromString("dozing"), std::invalid_argument);
    EXPECT_EQ(RadioStateFromString("rx"), RadioState::Receive);
}

TEST(RadioMeter, DurationsCloseOverTheRun)
{
    RadioMeter m(PowerModel{}, RadioState::Idle);
    m.Switch(Micros(100), RadioState::Transmit);
    m.Switch(Micros(350), RadioState::Sleep);
    m.Flush(Micros(1000));
    EXPECT_EQ(m.Ledger().TotalTime(), Micros(1000));
    EXPECT_EQ(m.Ledger().StateTime(RadioState::Transmit), Micros(250));
    EXPECT_NEAR(m.Ledger().TotalUj(), 1.28 * 0.1 + 52.2 * 0.25 + 0.02 * 0.65, 1e-9);
}

TEST(Summarize, MeansConservationAndAbsence)
{
    MetricsCollector m;
    std::vector<Packet> packets;
    for (PacketId i = 1; i <= 1000; ++i)
    {
        packets.push_back(Make(i, TrafficClass::Normal));
        m.OnGenerated(packets.back());
    }
    for (PacketId i = 1; i <= 990; ++i)
    {
        m.RecordDelivery(packets[i - 1], Micros(i % 2 == 0 ? 2000 : 4000));
    }
    for (PacketId i = 991; i <= 1000; ++i)
    {
        m.RecordDrop(packets[i - 1]);
    }
    std::vector<NodeEnergy> energy{{1, false, EnergyLedger{}}, {2, true, EnergyLedger{}}};
    energy[0].ledger.Update(RadioState::Receive, Seconds(1));
    energy[1].ledger.Update(RadioState::Receive, Seconds(1));

    const auto r = Summarize(m.Samples(), energy, m.Generated(), m.Dropped());
    EXPECT_DOUBLE_EQ(*r.normal.meanUs, 3000.0);
    EXPECT_EQ(r.normal.generated, 1000u);
    EXPECT_EQ(r.normal.delivered, 990u);
    EXPECT_EQ(r.normal.dropped, 10u);
    EXPECT_EQ(r.normal.inFlight, 0u);
    EXPECT_FALSE(r.emergency.meanUs);
    EXPECT_EQ(r.all.delivered, 990u);
    // Members only: the sink is excluded from the aggregate.
    EXPECT_NEAR(r.memberEnergyUj, 59100.0, 1e-6);
    EXPECT_NEAR(*r.energyPerDeliveredUj, 59100.0 / 990.0, 1e-9);
}

TEST(Summarize, MedianAndP95)
{
    MetricsCollector m;
    for (PacketId i = 1; i <= 20; ++i)
    {
        const auto p = Make(i, TrafficClass::Emergency);
        m.OnGenerated(p);
        m.RecordDelivery(p, Micros(static_cast<std::int64_t>(i) * 100));
    }
    const auto r = Summarize(m.Samples(), {}, m.Generated(), m.Dropped());
    EXPECT_DOUBLE_EQ(*r.emergency.meanUs, 1050.0);
    EXPECT_DOUBLE_EQ(*r.emergency.p95Us, 1900.0);
    EXPECT_DOUBLE_EQ(*r.emergency.medianUs, 1050.0);
}
