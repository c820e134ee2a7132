#include "priomac/channel.h"

#include <fmt/format.h>

#include <algorithm>
#include <stdexcept>

namespace priomac
{

namespace
{
// Ended transmissions older than this are forgotten by carrier sensing.
constexpr SimTime kHistorySpan = Seconds(10);
} // namespace

SimTime
TxDuration(std::uint32_t bytes, std::uint32_t bitrateBps)
{
    if (bytes == 0)
    {
        throw std::invalid_argument("TxDuration: empty frame");
    }
    if (bitrateBps == 0)
    {
        throw std::invalid_argument("TxDuration: zero bit rate");
    }
    const std::uint64_t bits = static_cast<std::uint64_t>(bytes) * 8 * 1'000'000;
    return Micros(static_cast<std::int64_t>((bits + bitrateBps - 1) / bitrateBps));
}

const char*
ToString(FrameKind kind)
{
    switch (kind)
    {
    case FrameKind::DataFragment:
        return "data-fragment";
    case FrameKind::DataWhole:
        return "data-whole";
    case FrameKind::Indication:
        return "indication";
    case FrameKind::Ack:
        return "ack";
    case FrameKind::ScheduleBroadcast:
        return "schedule-broadcast";
    }
    return "unknown";
}

Channel::Channel(Scheduler& scheduler, RadioParams params)
    : m_scheduler(scheduler),
      m_params(params)
{
}

void
Channel::Attach(NodeId node, ChannelListener& listener)
{
    m_listeners[node] = &listener;
}

SimTime
Channel::TxDuration(std::uint32_t bytes) const
{
    return priomac::TxDuration(bytes, m_params.bitrateBps);
}

Transmission
Channel::BeginTx(NodeId src, std::uint32_t bytes, FrameKind kind, FrameHeader header)
{
    const SimTime now = m_scheduler.Now();
    if (IsTransmitting(src))
    {
        throw std::logic_error(fmt::format("Channel: node {} started a {} while already transmitting at {} us",
                                           src,
                                           ToString(kind),
                                           now.count()));
    }

    Transmission tx;
    tx.id = m_nextId++;
    tx.src = src;
    tx.start = now;
    tx.end = now + TxDuration(bytes);
    tx.airtimeBytes = bytes;
    tx.kind = kind;
    tx.header = header;

    for (auto& other : m_active)
    {
        // Frames ending exactly now are over but may not have been dispatched yet.
        if (other.end > now)
        {
            other.corrupted = true;
            tx.corrupted = true;
        }
    }
    m_active.push_back(tx);
    ++m_txCount[static_cast<std::size_t>(kind)];

    const std::uint64_t id = tx.id;
    m_scheduler.Schedule(tx.end, src, EventKind::TxEnd, [this, id] { EndTx(id); });

    for (auto& [node, listener] : m_listeners)
    {
        if (node != src)
        {
            listener->OnTxStart(tx);
        }
    }
    return tx;
}

void
Channel::EndTx(std::uint64_t id)
{
    auto it = std::find_if(m_active.begin(), m_active.end(), [id](const Transmission& t) { return t.id == id; });
    if (it == m_active.end())
    {
        throw std::logic_error("Channel: end of unknown transmission");
    }
    const Transmission tx = *it;
    m_active.erase(it);

    const SimTime now = m_scheduler.Now();
    m_history.emplace_back(tx.start, tx.end);
    while (!m_history.empty() && m_history.front().second + kHistorySpan < now)
    {
        m_history.pop_front();
    }
    if (tx.corrupted)
    {
        ++m_corrupted[static_cast<std::size_t>(tx.kind)];
    }

    if (auto self = m_listeners.find(tx.src); self != m_listeners.end())
    {
        self->second->OnOwnTxEnd(tx);
    }
    for (auto& [node, listener] : m_listeners)
    {
        if (node != tx.src)
        {
            listener->OnTxEnd(tx);
        }
    }
    if (!IsBusy())
    {
        for (auto& [node, listener] : m_listeners)
        {
            listener->OnChannelIdle();
        }
    }
}

bool
Channel::CarrierSense(NodeId /*node*/, SimTime window) const
{
    if (window < m_params.cca)
    {
        throw std::invalid_argument(
            fmt::format("CarrierSense: window {} us shorter than CCA {} us", window.count(), m_params.cca.count()));
    }
    const SimTime now = m_scheduler.Now();
    const SimTime from = now - window;
    auto overlaps = [&](SimTime start, SimTime end) { return start < now && end > from; };
    for (const auto& t : m_active)
    {
        if (overlaps(t.start, t.end))
        {
            return true;
        }
    }
    return std::any_of(m_history.begin(), m_history.end(), [&](const auto& iv) {
        return overlaps(iv.first, iv.second);
    });
}

bool
Channel::IsBusy() const
{
    const SimTime now = m_scheduler.Now();
    return std::any_of(m_active.begin(), m_active.end(), [now](const Transmission& t) {
        return t.start <= now && now < t.end;
    });
}

bool
Channel::IsTransmitting(NodeId node) const
{
    const SimTime now = m_scheduler.Now();
    return std::any_of(m_active.begin(), m_active.end(), [&](const Transmission& t) {
        return t.src == node && t.end > now;
    });
}

} // namespace priomac
