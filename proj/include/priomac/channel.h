#pragma once

#include "priomac/scheduler.h"
#include "priomac/sim-time.h"

#include <array>
#include <cstdint>
#include <deque>
#include <map>
#include <vector>

namespace priomac
{

struct RadioParams
{
    std::uint32_t bitrateBps = 250'000;
    SimTime cca = Micros(128);
};

/// ceil(bytes * 8 * 1e6 / bitrate) microseconds. Zero bytes throws.
SimTime TxDuration(std::uint32_t bytes, std::uint32_t bitrateBps);

enum class FrameKind : std::uint8_t
{
    DataFragment,
    DataWhole,
    Indication,
    Ack,
    ScheduleBroadcast,
};

constexpr std::size_t kFrameKindCount = 5;

const char* ToString(FrameKind kind);

/// MAC header fields carried by every frame; receivers decode them only if uncorrupted.
struct FrameHeader
{
    NodeId dst = 0;
    PacketId packet = 0;
    std::uint16_t index = 0;
    std::uint16_t count = 1;
    std::uint16_t payloadBytes = 0;
};

struct Transmission
{
    std::uint64_t id = 0;
    NodeId src = 0;
    SimTime start{0};
    SimTime end{0};
    std::uint32_t airtimeBytes = 0;
    FrameKind kind = FrameKind::DataWhole;
    bool corrupted = false;
    FrameHeader header;
};

class ChannelListener
{
  public:
    virtual ~ChannelListener() = default;

    /// Another node started transmitting at Now().
    virtual void OnTxStart(const Transmission&) {}
    /// Another node's transmission ended; check tx.corrupted before decoding.
    virtual void OnTxEnd(const Transmission&) {}
    /// This node's own transmission ended.
    virtual void OnOwnTxEnd(const Transmission&) {}
    /// The medium just became idle.
    virtual void OnChannelIdle() {}
};

/**
 * Single shared half-duplex broadcast medium.
 *
 * Every attached node hears every transmission. Any temporal overlap of two
 * transmissions destroys both (no capture). Intervals are half-open, so
 * back-to-back frames do not collide.
 */
class Channel
{
  public:
    Channel(Scheduler& scheduler, RadioParams params);

    Channel(const Channel&) = delete;
    Channel& operator=(const Channel&) = delete;

    void Attach(NodeId node, ChannelListener& listener);

    SimTime TxDuration(std::uint32_t bytes) const;
    const RadioParams& Params() const { return m_params; }

    Transmission BeginTx(NodeId src, std::uint32_t bytes, FrameKind kind, FrameHeader header = {});

    /// True (busy) iff any transmission was on air at some instant of [now - window, now).
    bool CarrierSense(NodeId node, SimTime window) const;
    /// True iff a transmission is on air at this instant.
    bool IsBusy() const;
    bool IsTransmitting(NodeId node) const;

    std::uint64_t TxCount(FrameKind kind) const { return m_txCount[static_cast<std::size_t>(kind)]; }
    std::uint64_t CorruptedCount(FrameKind kind) const { return m_corrupted[static_cast<std::size_t>(kind)]; }

  private:
    void EndTx(std::uint64_t id);

    Scheduler& m_scheduler;
    RadioParams m_params;
    std::map<NodeId, ChannelListener*> m_listeners;
    std::vector<Transmission> m_active;
    std::deque<std::pair<SimTime, SimTime>> m_history;
    std::uint64_t m_nextId = 1;
    std::array<std::uint64_t, kFrameKindCount> m_txCount{};
    std::array<std::uint64_t, kFrameKindCount> m_corrupted{};
};

} // namespace priomac
