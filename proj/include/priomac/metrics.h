#pragma once

#include "priomac/energy.h"
#include "priomac/sim-time.h"
#include "priomac/traffic.h"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <unordered_set>
#include <vector>

namespace priomac
{

struct DelaySample
{
    PacketId packet = 0;
    NodeId src = 0;
    TrafficClass cls = TrafficClass::Normal;
    SimTime genTime{0};
    SimTime deliveryTime{0};

    SimTime Delay() const { return deliveryTime - genTime; }
};

/// Per-class packet counts, indexed by TrafficClass.
using ClassCounts = std::array<std::uint64_t, 2>;

inline std::size_t
ClassIndex(TrafficClass cls)
{
    return static_cast<std::size_t>(cls);
}

/**
 * Tracks the fate of every generated packet. Each packet ends in exactly one
 * of delivered, dropped, or (implicitly) in flight.
 */
class MetricsCollector
{
  public:
    void OnGenerated(const Packet& packet);

    /// Throws on a duplicate delivery, a delivery of a dropped packet, or delivery_time <= gen_time.
    const DelaySample& RecordDelivery(const Packet& packet, SimTime deliveryTime);

    /**
     * Record that the source gave up on a packet. Returns false and changes
     * nothing when the sink already delivered it (the source only missed the
     * final acknowledgment).
     */
    bool RecordDrop(const Packet& packet);

    bool IsDelivered(PacketId id) const { return m_delivered.contains(id); }

    std::span<const DelaySample> Samples() const { return m_samples; }
    const ClassCounts& Generated() const { return m_generated; }
    const ClassCounts& Dropped() const { return m_dropped; }

  private:
    std::vector<DelaySample> m_samples;
    std::unordered_set<PacketId> m_delivered;
    std::unordered_set<PacketId> m_droppedIds;
    ClassCounts m_generated{};
    ClassCounts m_dropped{};
};

struct ClassStats
{
    std::optional<double> meanUs; // absent when nothing was delivered
    std::optional<double> medianUs;
    std::optional<double> p95Us;
    std::uint64_t generated = 0;
    std::uint64_t delivered = 0;
    std::uint64_t dropped = 0;
    std::uint64_t inFlight = 0;
};

struct NodeEnergy
{
    NodeId node = 0;
    bool isSink = false;
    EnergyLedger ledger;
};

/// Protocol-level safety counters reported next to the delay and energy numbers.
struct ProtocolCounters
{
    std::uint64_t dataTransmissions = 0;
    std::uint64_t dataCollisions = 0;      // data frames destroyed on the channel
    std::uint64_t corruptedAccepted = 0;   // corrupted frames a receiver accepted (must stay 0)
    std::uint64_t frames = 0;              // TDMA frames (FPS only)
    std::uint64_t emergencyFrames = 0;     // TDMA frames in EMERGENCY mode
    std::uint64_t eisCollisions = 0;
    std::uint64_t ackLosses = 0;
    std::uint64_t slotViolations = 0;      // data transmissions outside the owner's slot (must stay 0)
};

struct RunReport
{
    ClassStats emergency;
    ClassStats normal;
    ClassStats all;
    std::vector<NodeEnergy> energy;
    /// Energy of the battery-powered members; the sink is reported per node but excluded here.
    double memberEnergyUj = 0.0;
    std::optional<double> energyPerDeliveredUj;
    ProtocolCounters counters;
    SimTime duration{0};

    const ClassStats& For(TrafficClass cls) const { return cls == TrafficClass::Emergency ? emergency : normal; }
};

/**
 * Reduce a finished run. Means are over delivered packets only; dropped and
 * in-flight counts are reported separately.
 */
RunReport Summarize(std::span<const DelaySample> samples,
                    std::span<const NodeEnergy> energy,
                    const ClassCounts& generated,
                    const ClassCounts& dropped);

} // namespace priomac
