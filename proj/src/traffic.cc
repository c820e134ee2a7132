#include "priomac/traffic.h"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace priomac
{

const char*
ToString(TrafficClass cls)
{
    return cls == TrafficClass::Emergency ? "EMERGENCY" : "NORMAL";
}

void
InsertByPriority(std::deque<Packet>& queue, const Packet& packet)
{
    auto pos = queue.end();
    if (packet.cls == TrafficClass::Emergency)
    {
        pos = std::find_if(queue.begin(), queue.end(), [](const Packet& p) { return p.cls == TrafficClass::Normal; });
    }
    queue.insert(pos, packet);
}

SimTime
NextArrival(const TrafficProfile& profile, SimTime now)
{
    if (profile.interval <= SimTime{0})
    {
        throw std::invalid_argument("NextArrival: interval must be positive");
    }
    if (now < profile.phase)
    {
        return profile.phase;
    }
    const auto k = (now - profile.phase) / profile.interval + 1;
    return profile.phase + k * profile.interval;
}

double
Distance(const Position& a, const Position& b)
{
    return std::hypot(a.x - b.x, a.y - b.y);
}

Population
BuildPopulation(std::uint32_t nTotal, std::uint32_t nEmergency, const TrafficParams& params, std::uint64_t seed)
{
    if (nTotal == 0)
    {
        throw std::invalid_argument("BuildPopulation: at least one member node is required");
    }
    if (nEmergency > nTotal)
    {
        throw std::invalid_argument(
            fmt::format("BuildPopulation: n_emergency {} exceeds member count {}", nEmergency, nTotal));
    }

    Population pop;
    pop.areaM = params.areaM;
    pop.sink = nTotal + 1;
    pop.sinkPos = Position{params.areaM / 2.0, params.areaM / 2.0};

    for (NodeId id = 1; id <= nTotal; ++id)
    {
        NodeConfig node;
        node.id = id;
        RngStream placement = MakeStream(seed, id, StreamPurpose::Placement);
        node.pos.x = placement.Uniform01() * params.areaM;
        node.pos.y = placement.Uniform01() * params.areaM;

        RngStream phase = MakeStream(seed, id, StreamPurpose::Phase);
        auto drawPhase = [&phase](SimTime interval) {
            return Micros(static_cast<std::int64_t>(phase.Uniform01() * static_cast<double>(interval.count())));
        };
        node.normal = TrafficProfile{TrafficClass::Normal, params.normalInterval, drawPhase(params.normalInterval)};
        // Drawn unconditionally so the phase does not depend on subset membership.
        const SimTime emergencyPhase = drawPhase(params.emergencyInterval);
        node.emergency = TrafficProfile{TrafficClass::Emergency, params.emergencyInterval, emergencyPhase};
        pop.members.push_back(node);
    }

    // Fisher-Yates over the member ids; the first nEmergency are event detectors.
    std::vector<NodeId> order(nTotal);
    std::iota(order.begin(), order.end(), NodeId{1});
    RngStream selection = MakeStream(seed, 0, StreamPurpose::Selection);
    for (std::uint32_t i = nTotal - 1; i > 0; --i)
    {
        std::swap(order[i], order[selection.UniformInt(0, i)]);
    }
    std::vector<bool> chosen(nTotal + 1, false);
    for (std::uint32_t i = 0; i < nEmergency; ++i)
    {
        chosen[order[i]] = true;
    }
    for (auto& node : pop.members)
    {
        if (!chosen[node.id])
        {
            node.emergency.reset();
        }
    }
    return pop;
}

TrafficGenerator::TrafficGenerator(Scheduler& scheduler,
                                   const Population& population,
                                   std::uint32_t payloadBytes,
                                   Sink sink)
    : m_scheduler(scheduler),
      m_population(population),
      m_payloadBytes(payloadBytes),
      m_sink(std::move(sink))
{
}

void
TrafficGenerator::Start()
{
    for (const auto& node : m_population.members)
    {
        std::vector<TrafficProfile> profiles{node.normal};
        if (node.emergency)
        {
            profiles.push_back(*node.emergency);
        }
        for (const auto& profile : profiles)
        {
            const NodeId src = node.id;
            m_scheduler.Schedule(profile.phase, src, EventKind::Arrival, [this, src, profile] {
                Arrive(src, profile);
            });
        }
    }
}

void
TrafficGenerator::Arrive(NodeId src, TrafficProfile profile)
{
    const SimTime now = m_scheduler.Now();
    Packet p;
    p.id = m_nextId++;
    p.src = src;
    p.cls = profile.cls;
    p.genTime = now;
    p.payloadBytes = m_payloadBytes;
    ++m_generated[static_cast<std::size_t>(p.cls)];

    m_scheduler.Schedule(NextArrival(profile, now), src, EventKind::Arrival, [this, src, profile] {
        Arrive(src, profile);
    });
    m_sink(p);
}

} // namespace priomac
