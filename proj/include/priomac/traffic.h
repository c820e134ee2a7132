#pragma once

#include "priomac/rng-stream.h"
#include "priomac/scheduler.h"
#include "priomac/sim-time.h"

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <vector>

namespace priomac
{

enum class TrafficClass : std::uint8_t
{
    Normal,
    Emergency,
};

const char* ToString(TrafficClass cls);

struct Packet
{
    PacketId id = 0;
    NodeId src = 0;
    TrafficClass cls = TrafficClass::Normal;
    SimTime genTime{0};
    std::uint32_t payloadBytes = 34;
};

struct TrafficProfile
{
    TrafficClass cls = TrafficClass::Normal;
    SimTime interval = Seconds(10);
    /// Offset of the first generation instant, in [0, interval).
    SimTime phase{0};
};

/// Insert keeping EMERGENCY packets ahead of NORMAL ones; within a class, arrival order.
void InsertByPriority(std::deque<Packet>& queue, const Packet& packet);

/// Smallest phase + k * interval strictly greater than now.
SimTime NextArrival(const TrafficProfile& profile, SimTime now);

struct Position
{
    double x = 0.0;
    double y = 0.0;
};

double Distance(const Position& a, const Position& b);

struct NodeConfig
{
    NodeId id = 0;
    Position pos;
    TrafficProfile normal;
    std::optional<TrafficProfile> emergency;
};

struct Population
{
    std::vector<NodeConfig> members; // ids 1..n, ascending
    NodeId sink = 0;                 // n + 1
    Position sinkPos;
    double areaM = 50.0;

    const NodeConfig& Member(NodeId id) const { return members.at(id - 1); }
};

struct TrafficParams
{
    SimTime normalInterval = Seconds(10);
    SimTime emergencyInterval = Seconds(120);
    double areaM = 50.0;
};

/**
 * Build the star cluster: members 1..nTotal with NORMAL profiles, a uniformly
 * chosen subset of nEmergency members additionally carrying an EMERGENCY
 * profile, uniform positions in the square area and the sink (id nTotal + 1)
 * at its centre.
 *
 * Positions, phases and the selection permutation come from per-node
 * substreams, so for a fixed seed the emergency subsets are nested in
 * nEmergency and every node's phases do not depend on nEmergency.
 */
Population BuildPopulation(std::uint32_t nTotal, std::uint32_t nEmergency, const TrafficParams& params, std::uint64_t seed);

/// Drives periodic packet generation for every profile of a population.
class TrafficGenerator
{
  public:
    using Sink = std::function<void(const Packet&)>;

    TrafficGenerator(Scheduler& scheduler, const Population& population, std::uint32_t payloadBytes, Sink sink);

    /// Schedule the first arrival of every profile.
    void Start();

    std::uint64_t Generated(TrafficClass cls) const { return m_generated[static_cast<std::size_t>(cls)]; }

  private:
    void Arrive(NodeId src, TrafficProfile profile);

    Scheduler& m_scheduler;
    const Population& m_population;
    std::uint32_t m_payloadBytes;
    Sink m_sink;
    PacketId m_nextId = 1;
    std::uint64_t m_generated[2] = {0, 0};
};

} // namespace priomac
