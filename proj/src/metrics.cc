#include "priomac/metrics.h"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace priomac
{

void
MetricsCollector::OnGenerated(const Packet& packet)
{
    ++m_generated[ClassIndex(packet.cls)];
}

const DelaySample&
MetricsCollector::RecordDelivery(const Packet& packet, SimTime deliveryTime)
{
    if (deliveryTime <= packet.genTime)
    {
        throw std::invalid_argument(fmt::format("RecordDelivery: packet {} delivered at {} us, not after generation at {} us",
                                                packet.id,
                                                deliveryTime.count(),
                                                packet.genTime.count()));
    }
    if (m_delivered.contains(packet.id))
    {
        throw std::logic_error(fmt::format("RecordDelivery: packet {} delivered twice", packet.id));
    }
    if (m_droppedIds.contains(packet.id))
    {
        throw std::logic_error(fmt::format("RecordDelivery: packet {} was already dropped", packet.id));
    }
    m_delivered.insert(packet.id);
    m_samples.push_back(DelaySample{packet.id, packet.src, packet.cls, packet.genTime, deliveryTime});
    return m_samples.back();
}

bool
MetricsCollector::RecordDrop(const Packet& packet)
{
    if (m_delivered.contains(packet.id))
    {
        return false;
    }
    if (!m_droppedIds.insert(packet.id).second)
    {
        throw std::logic_error(fmt::format("RecordDrop: packet {} dropped twice", packet.id));
    }
    ++m_dropped[ClassIndex(packet.cls)];
    return true;
}

namespace
{

ClassStats
Reduce(std::vector<double> delays, std::uint64_t generated, std::uint64_t dropped)
{
    ClassStats s;
    s.generated = generated;
    s.delivered = delays.size();
    s.dropped = dropped;
    if (s.delivered + s.dropped > s.generated)
    {
        throw std::logic_error("Summarize: more packets finished than were generated");
    }
    s.inFlight = generated - s.delivered - dropped;
    if (delays.empty())
    {
        return s;
    }
    std::sort(delays.begin(), delays.end());
    double sum = 0.0;
    for (double d : delays)
    {
        sum += d;
    }
    const std::size_t n = delays.size();
    s.meanUs = sum / static_cast<double>(n);
    s.medianUs = (n % 2 == 1) ? delays[n / 2] : (delays[n / 2 - 1] + delays[n / 2]) / 2.0;
    // nearest-rank percentile
    const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(n)));
    s.p95Us = delays[std::max<std::size_t>(rank, 1) - 1];
    return s;
}

} // namespace

RunReport
Summarize(std::span<const DelaySample> samples,
          std::span<const NodeEnergy> energy,
          const ClassCounts& generated,
          const ClassCounts& dropped)
{
    std::vector<double> byClass[2];
    std::vector<double> all;
    all.reserve(samples.size());
    for (const auto& s : samples)
    {
        const auto d = static_cast<double>(s.Delay().count());
        byClass[ClassIndex(s.cls)].push_back(d);
        all.push_back(d);
    }

    RunReport r;
    const auto normalIdx = ClassIndex(TrafficClass::Normal);
    const auto emergencyIdx = ClassIndex(TrafficClass::Emergency);
    r.normal = Reduce(std::move(byClass[normalIdx]), generated[normalIdx], dropped[normalIdx]);
    r.emergency = Reduce(std::move(byClass[emergencyIdx]), generated[emergencyIdx], dropped[emergencyIdx]);
    r.all = Reduce(std::move(all), generated[0] + generated[1], dropped[0] + dropped[1]);

    r.energy.assign(energy.begin(), energy.end());
    for (const auto& e : r.energy)
    {
        if (!e.isSink)
        {
            r.memberEnergyUj += e.ledger.TotalUj();
        }
    }
    if (r.all.delivered > 0)
    {
        r.energyPerDeliveredUj = r.memberEnergyUj / static_cast<double>(r.all.delivered);
    }
    return r;
}

} // namespace priomac
