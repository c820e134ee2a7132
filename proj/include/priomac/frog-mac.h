#pragma once

#include "priomac/channel.h"
#include "priomac/energy.h"
#include "priomac/fragmentation.h"
#include "priomac/metrics.h"
#include "priomac/rng-stream.h"
#include "priomac/scheduler.h"
#include "priomac/trace.h"
#include "priomac/traffic.h"

#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <unordered_map>
#include <variant>
#include <vector>

namespace priomac
{

/**
 * Access timing of the fragmentation MAC.
 *
 * Two inequalities carry the protocol: an urgent contender's longest wait
 * (ifsHigh + highBackoffMax units) fits inside the inter-fragment gap, and
 * ifsLow exceeds the gap. Validate() rejects timings that break either.
 */
struct FrogTiming
{
    SimTime ifsHigh = Micros(192);
    SimTime ifsLow = Micros(1000);
    SimTime interFragmentGap = Micros(800);
    SimTime backoffUnit = Micros(160);
    std::uint32_t highBackoffMax = 3;
    std::uint32_t lowBackoffMax = 7;
    std::uint32_t ackBytes = 11;
    std::uint32_t maxRetries = 8;
    SimTime ackTurnaround = Micros(0);

    SimTime MaxHighWait() const { return ifsHigh + backoffUnit * highBackoffMax; }
    SimTime MaxLowWait() const { return ifsLow + backoffUnit * lowBackoffMax; }
    void Validate() const;
};

struct FrogParams
{
    FrogTiming timing;
    std::uint32_t fragmentSize = 8;
    std::uint32_t headerBytes = 5;
};

struct FragmentCursor
{
    PacketId packet = 0;
    std::vector<Fragment> fragments;
    std::size_t next = 0; // index of the fragment to send next
};

/// The frame a node would put on air next.
struct TxUnit
{
    Packet packet;
    FrameKind kind = FrameKind::DataWhole;
    FrameHeader header;
    std::uint32_t airtimeBytes = 0;
};

/**
 * Per-node MAC state. The queue keeps EMERGENCY packets ahead of NORMAL
 * ones, each class in generation order; the cursor exists only while a
 * NORMAL packet is partially on air.
 */
class FrogNodeState
{
  public:
    void Enqueue(const Packet& packet);

    bool Empty() const { return m_queue.empty(); }
    std::size_t Size() const { return m_queue.size(); }
    const Packet& Head() const { return m_queue.front(); }
    const std::deque<Packet>& Queue() const { return m_queue; }

    /// Head-of-queue unit; opens a fragmentation cursor for a fresh NORMAL head.
    TxUnit CurrentUnit(const FrogParams& params);

    const std::optional<FragmentCursor>& Cursor() const { return m_cursor; }
    /// At least one fragment of the head packet has been acknowledged.
    bool MidPacket() const { return m_cursor && m_cursor->next > 0; }

    std::uint32_t Retries() const { return m_retries; }

    /// Remove the head packet and its cursor.
    Packet PopHead();
    void AdvanceCursor();
    std::uint32_t BumpRetries() { return ++m_retries; }
    void ResetRetries() { m_retries = 0; }

  private:

    std::deque<Packet> m_queue;
    std::optional<FragmentCursor> m_cursor;
    std::uint32_t m_retries = 0;
};

/// Carrier sense for `window` (IFS plus backoff), then transmit the head unit if the medium stayed idle.
struct SenseThenTransmit
{
    SimTime window{0};
    std::uint32_t backoffSlots = 0;
    bool urgent = false;
};

struct DeferUntilIdle
{
};

/// Another node's fragment burst holds the medium until the given instant.
struct DeferUntil
{
    SimTime until{0};
};

using AccessAction = std::variant<SenseThenTransmit, DeferUntilIdle, DeferUntil>;

/**
 * Decide how the node contends for its head-of-queue unit. Urgent heads use
 * ifsHigh and a {0..highBackoffMax} backoff and ignore reservations; NORMAL
 * heads use ifsLow and {0..lowBackoffMax}.
 */
AccessAction AccessAttempt(const FrogNodeState& state,
                           const FrogTiming& timing,
                           bool channelBusy,
                           std::optional<SimTime> reservedUntil,
                           RngStream& rng);

enum class CompletionKind
{
    PacketDone,       // whole packet or final fragment acknowledged
    ContinueAfterGap, // fragment acknowledged, more to send after the gap
    Retry,            // not acknowledged, resend the same unit
    Drop,             // retry limit exceeded
};

struct CompletionAction
{
    CompletionKind kind = CompletionKind::Retry;
    Packet packet; // the head packet the completion refers to
};

/// Advance the node state after the ack (or its absence) for the unit just sent.
CompletionAction OnFragmentComplete(FrogNodeState& state, const FrogTiming& timing, bool acked);

class FrogNetwork;

/// Member node running the fragmentation MAC.
class FrogNode : public ChannelListener
{
  public:
    enum class Phase
    {
        Idle,
        Gap,
        WaitIdle,
        NavWait,
        Contend,
        Tx,
        AwaitAck,
    };

    FrogNode(FrogNetwork& net, NodeId id, std::uint64_t seed);

    void Enqueue(const Packet& packet);

    void OnTxStart(const Transmission& tx) override;
    void OnTxEnd(const Transmission& tx) override;
    void OnOwnTxEnd(const Transmission& tx) override;
    void OnChannelIdle() override;

    NodeId Id() const { return m_id; }
    Phase CurrentPhase() const { return m_phase; }
    const FrogNodeState& State() const { return m_state; }
    RadioMeter& Meter() { return m_meter; }
    const RadioMeter& Meter() const { return m_meter; }

  private:
    void TryAccess();
    void Transmit();
    void Complete(bool acked);
    void CancelPending();
    bool ReservationHeld() const;
    void RefreshRadio();

    FrogNetwork& m_net;
    NodeId m_id;
    FrogNodeState m_state;
    RngStream m_rng;
    RadioMeter m_meter;
    Phase m_phase = Phase::Idle;
    EventId m_pending;
    SimTime m_txAt{0};
    SimTime m_window{0};
    std::optional<TxUnit> m_inFlight;
    std::optional<NodeId> m_reservationOwner;
    SimTime m_reservationDeadline{0};
};

/// Cluster sink: reassembles fragments and acknowledges every clean data frame.
class FrogSink : public ChannelListener
{
  public:
    FrogSink(FrogNetwork& net, NodeId id);

    void OnTxStart(const Transmission& tx) override;
    void OnTxEnd(const Transmission& tx) override;
    void OnOwnTxEnd(const Transmission& tx) override;
    void OnChannelIdle() override;

    NodeId Id() const { return m_id; }
    RadioMeter& Meter() { return m_meter; }
    const RadioMeter& Meter() const { return m_meter; }
    const Reassembler& Reassembly() const { return m_reassembler; }

  private:
    void SendAck(FrameHeader header, std::optional<PacketId> completes);

    FrogNetwork& m_net;
    NodeId m_id;
    Reassembler m_reassembler;
    RadioMeter m_meter;
    std::unordered_map<std::uint64_t, PacketId> m_pendingDelivery; // ack tx id -> packet
};

/// A star cluster of FrogNode members around one FrogSink, sharing one Channel.
class FrogNetwork
{
  public:
    FrogNetwork(Scheduler& scheduler,
                Channel& channel,
                const Population& population,
                const FrogParams& params,
                MetricsCollector& metrics,
                Trace& trace,
                PowerModel power,
                std::uint64_t seed);

    /// Hand a freshly generated packet to its source node.
    void Inject(const Packet& packet);
    /// Charge every radio meter up to the end of the run.
    void Finish(SimTime end);

    std::vector<NodeEnergy> Energy() const;
    const ProtocolCounters& Counters() const { return m_counters; }
    const Packet& Lookup(PacketId id) const { return m_packets.at(id); }

    FrogNode& Member(NodeId id) { return *m_members.at(id - 1); }
    FrogSink& Sink() { return *m_sink; }

    Scheduler& Sched() { return m_scheduler; }
    Channel& Medium() { return m_channel; }
    const FrogParams& Params() const { return m_params; }
    MetricsCollector& Metrics() { return m_metrics; }
    Trace& Tracer() { return m_trace; }
    ProtocolCounters& MutableCounters() { return m_counters; }
    const PowerModel& Power() const { return m_power; }

  private:
    Scheduler& m_scheduler;
    Channel& m_channel;
    FrogParams m_params;
    MetricsCollector& m_metrics;
    Trace& m_trace;
    PowerModel m_power;
    std::vector<std::unique_ptr<FrogNode>> m_members;
    std::unique_ptr<FrogSink> m_sink;
    std::unordered_map<PacketId, Packet> m_packets;
    ProtocolCounters m_counters;
};

} // namespace priomac
