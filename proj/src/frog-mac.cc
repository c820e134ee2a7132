#include "priomac/frog-mac.h"

#include <fmt/format.h>

#include <algorithm>
#include <stdexcept>

namespace priomac
{

void
FrogTiming::Validate() const
{
    if (backoffUnit <= SimTime{0} || interFragmentGap <= SimTime{0})
    {
        throw std::invalid_argument("frog timing: backoff unit and inter-fragment gap must be positive");
    }
    if (MaxHighWait() >= interFragmentGap)
    {
        throw std::invalid_argument(fmt::format("frog timing: ifs_high + {} backoff units ({} us) must be shorter than "
                                                "the inter-fragment gap ({} us)",
                                                highBackoffMax,
                                                MaxHighWait().count(),
                                                interFragmentGap.count()));
    }
    if (ifsLow <= interFragmentGap)
    {
        throw std::invalid_argument(fmt::format("frog timing: ifs_low ({} us) must exceed the inter-fragment gap ({} us)",
                                                ifsLow.count(),
                                                interFragmentGap.count()));
    }
    if (ackBytes == 0)
    {
        throw std::invalid_argument("frog timing: ack must carry at least one byte");
    }
}

// ---------------------------------------------------------------------------
// Node state

void
FrogNodeState::Enqueue(const Packet& packet)
{
    InsertByPriority(m_queue, packet);
}

TxUnit
FrogNodeState::CurrentUnit(const FrogParams& params)
{
    if (m_queue.empty())
    {
        throw std::logic_error("FrogNodeState: no unit to send from an empty queue");
    }
    const Packet& head = m_queue.front();
    TxUnit unit;
    unit.packet = head;
    unit.header.packet = head.id;
    if (head.cls == TrafficClass::Emergency)
    {
        unit.kind = FrameKind::DataWhole;
        unit.header.index = 0;
        unit.header.count = 1;
        unit.header.payloadBytes = static_cast<std::uint16_t>(head.payloadBytes);
        unit.airtimeBytes = head.payloadBytes + params.headerBytes;
        return unit;
    }

    if (!m_cursor || m_cursor->packet != head.id)
    {
        m_cursor = FragmentCursor{head.id, FragmentPacket(head, params.fragmentSize, params.headerBytes), 0};
    }
    const Fragment& f = m_cursor->fragments.at(m_cursor->next);
    unit.kind = FrameKind::DataFragment;
    unit.header.index = f.index;
    unit.header.count = f.count;
    unit.header.payloadBytes = f.payloadBytes;
    unit.airtimeBytes = f.AirtimeBytes();
    return unit;
}

Packet
FrogNodeState::PopHead()
{
    Packet p = m_queue.front();
    m_queue.pop_front();
    if (m_cursor && m_cursor->packet == p.id)
    {
        m_cursor.reset();
    }
    m_retries = 0;
    return p;
}

void
FrogNodeState::AdvanceCursor()
{
    if (!m_cursor)
    {
        throw std::logic_error("FrogNodeState: advancing without a fragmentation cursor");
    }
    ++m_cursor->next;
}

// ---------------------------------------------------------------------------
// Pure transitions

AccessAction
AccessAttempt(const FrogNodeState& state,
              const FrogTiming& timing,
              bool channelBusy,
              std::optional<SimTime> reservedUntil,
              RngStream& rng)
{
    if (state.Empty())
    {
        throw std::logic_error("AccessAttempt: empty queue");
    }
    const bool urgent = state.Head().cls == TrafficClass::Emergency;
    if (!urgent && reservedUntil)
    {
        return DeferUntil{*reservedUntil};
    }
    if (channelBusy)
    {
        return DeferUntilIdle{};
    }
    const std::uint32_t slots = rng.UniformInt(0, urgent ? timing.highBackoffMax : timing.lowBackoffMax);
    const SimTime ifs = urgent ? timing.ifsHigh : timing.ifsLow;
    return SenseThenTransmit{ifs + timing.backoffUnit * slots, slots, urgent};
}

CompletionAction
OnFragmentComplete(FrogNodeState& state, const FrogTiming& timing, bool acked)
{
    if (state.Empty())
    {
        throw std::logic_error("OnFragmentComplete: empty queue");
    }
    CompletionAction action;
    action.packet = state.Head();

    if (!acked)
    {
        if (state.BumpRetries() > timing.maxRetries)
        {
            state.PopHead();
            action.kind = CompletionKind::Drop;
        }
        else
        {
            action.kind = CompletionKind::Retry;
        }
        return action;
    }

    state.ResetRetries();
    if (action.packet.cls == TrafficClass::Emergency)
    {
        state.PopHead();
        action.kind = CompletionKind::PacketDone;
        return action;
    }
    const auto& cursor = state.Cursor();
    if (!cursor || cursor->packet != action.packet.id)
    {
        throw std::logic_error("OnFragmentComplete: fragment acknowledged without a matching cursor");
    }
    if (cursor->next + 1 >= cursor->fragments.size())
    {
        state.PopHead();
        action.kind = CompletionKind::PacketDone;
    }
    else
    {
        state.AdvanceCursor();
        action.kind = CompletionKind::ContinueAfterGap;
    }
    return action;
}

// ---------------------------------------------------------------------------
// FrogNode

FrogNode::FrogNode(FrogNetwork& net, NodeId id, std::uint64_t seed)
    : m_net(net),
      m_id(id),
      m_rng(MakeStream(seed, id, StreamPurpose::Backoff)),
      m_meter(net.Power(), RadioState::Idle)
{
}

void
FrogNode::Enqueue(const Packet& packet)
{
    m_state.Enqueue(packet);
    const bool urgent = packet.cls == TrafficClass::Emergency;
    switch (m_phase)
    {
    case Phase::Idle:
        TryAccess();
        break;
    case Phase::Gap:
    case Phase::NavWait:
    case Phase::Contend:
        // An urgent arrival does not wait out our own gap or a normal-priority contention.
        if (urgent && m_state.Head().id == packet.id)
        {
            TryAccess();
        }
        break;
    case Phase::WaitIdle:
    case Phase::Tx:
    case Phase::AwaitAck:
        break;
    }
    RefreshRadio();
}

void
FrogNode::CancelPending()
{
    m_net.Sched().Cancel(m_pending);
}

bool
FrogNode::ReservationHeld() const
{
    return m_reservationOwner.has_value() && !m_state.MidPacket() && m_net.Sched().Now() < m_reservationDeadline;
}

void
FrogNode::TryAccess()
{
    CancelPending();
    if (m_state.Empty())
    {
        m_phase = Phase::Idle;
        RefreshRadio();
        return;
    }

    auto& sched = m_net.Sched();
    const SimTime now = sched.Now();
    if (m_reservationOwner && now >= m_reservationDeadline)
    {
        m_reservationOwner.reset();
    }
    std::optional<SimTime> reserved;
    if (ReservationHeld())
    {
        reserved = m_reservationDeadline;
    }

    const AccessAction action = AccessAttempt(m_state, m_net.Params().timing, m_net.Medium().IsBusy(), reserved, m_rng);
    if (const auto* sense = std::get_if<SenseThenTransmit>(&action))
    {
        m_phase = Phase::Contend;
        m_window = sense->window;
        m_txAt = now + sense->window;
        m_pending = sched.Schedule(m_txAt, m_id, EventKind::CcaDone, [this] { Transmit(); });
        m_net.Tracer().Record(now,
                              m_id,
                              "sense",
                              "pkt={} urgent={} backoff={} tx_at={}",
                              m_state.Head().id,
                              sense->urgent ? 1 : 0,
                              sense->backoffSlots,
                              m_txAt.count());
    }
    else if (const auto* until = std::get_if<DeferUntil>(&action))
    {
        m_phase = Phase::NavWait;
        m_pending = sched.Schedule(until->until, m_id, EventKind::Timer, [this] { TryAccess(); });
        m_net.Tracer().Record(now, m_id, "defer", "reason=reservation owner={} until={}", *m_reservationOwner,
                              until->until.count());
    }
    else
    {
        m_phase = Phase::WaitIdle;
        m_net.Tracer().Record(now, m_id, "defer", "reason=busy");
    }
    RefreshRadio();
}

void
FrogNode::Transmit()
{
    m_pending = EventId();
    Channel& medium = m_net.Medium();
    if (medium.CarrierSense(m_id, m_window))
    {
        // Should have been caught by OnTxStart; fall back to deferring.
        m_phase = Phase::WaitIdle;
        if (!medium.IsBusy())
        {
            TryAccess();
        }
        return;
    }

    const TxUnit unit = m_state.CurrentUnit(m_net.Params());
    FrameHeader header = unit.header;
    header.dst = m_net.Sink().Id();
    const Transmission tx = medium.BeginTx(m_id, unit.airtimeBytes, unit.kind, header);
    m_inFlight = unit;
    m_phase = Phase::Tx;
    ++m_net.MutableCounters().dataTransmissions;
    m_net.Tracer().Record(tx.start,
                          m_id,
                          "tx-start",
                          "frame={} pkt={} frag={}/{} bytes={} end={}",
                          ToString(unit.kind),
                          header.packet,
                          header.index,
                          header.count,
                          unit.airtimeBytes,
                          tx.end.count());
    RefreshRadio();
}

void
FrogNode::OnOwnTxEnd(const Transmission& tx)
{
    if (tx.kind != FrameKind::DataFragment && tx.kind != FrameKind::DataWhole)
    {
        return;
    }
    auto& sched = m_net.Sched();
    m_net.Tracer().Record(tx.end,
                          m_id,
                          "tx-end",
                          "frame={} pkt={} frag={}/{} corrupted={}",
                          ToString(tx.kind),
                          tx.header.packet,
                          tx.header.index,
                          tx.header.count,
                          tx.corrupted ? 1 : 0);
    if (tx.corrupted)
    {
        ++m_net.MutableCounters().dataCollisions;
    }
    m_phase = Phase::AwaitAck;
    const auto& timing = m_net.Params().timing;
    const SimTime timeout = timing.ackTurnaround + m_net.Medium().TxDuration(timing.ackBytes) + Micros(1);
    m_pending = sched.ScheduleIn(timeout, m_id, EventKind::Timer, [this] {
        m_pending = EventId();
        m_net.Tracer().Record(m_net.Sched().Now(), m_id, "ack-timeout", "pkt={}", m_inFlight->packet.id);
        Complete(false);
    });
    RefreshRadio();
}

void
FrogNode::OnTxStart(const Transmission&)
{
    // A frame starting exactly at our transmit instant is not detectable; we collide with it.
    if (m_phase == Phase::Contend && m_txAt > m_net.Sched().Now())
    {
        CancelPending();
        m_phase = Phase::WaitIdle;
    }
    RefreshRadio();
}

void
FrogNode::OnTxEnd(const Transmission& tx)
{
    if (!tx.corrupted)
    {
        if (tx.kind == FrameKind::Ack && tx.header.dst == m_id && m_phase == Phase::AwaitAck && m_inFlight &&
            tx.header.packet == m_inFlight->header.packet && tx.header.index == m_inFlight->header.index)
        {
            CancelPending();
            m_net.Tracer().Record(tx.end, m_id, "ack-rx", "pkt={} frag={}/{}", tx.header.packet, tx.header.index,
                                  tx.header.count);
            Complete(true);
            return;
        }
        if (tx.kind == FrameKind::DataFragment && tx.src != m_id)
        {
            // Overheard burst header: low-priority traffic keeps clear until the burst ends.
            if (tx.header.index + 1 < tx.header.count)
            {
                const auto& t = m_net.Params().timing;
                m_reservationOwner = tx.src;
                m_reservationDeadline = tx.end + t.ackTurnaround + m_net.Medium().TxDuration(t.ackBytes) +
                                        t.interFragmentGap + t.MaxLowWait() + t.backoffUnit;
            }
            else if (m_reservationOwner == tx.src)
            {
                m_reservationOwner.reset();
                if (m_phase == Phase::NavWait)
                {
                    TryAccess();
                    return;
                }
            }
        }
    }
    RefreshRadio();
}

void
FrogNode::OnChannelIdle()
{
    const SimTime now = m_net.Sched().Now();
    if (m_reservationOwner && now < m_reservationDeadline)
    {
        // The owner restarts its gap timing from this idle instant after a preemption.
        const auto& t = m_net.Params().timing;
        m_reservationDeadline = std::max(m_reservationDeadline, now + t.interFragmentGap + t.MaxLowWait() + t.backoffUnit);
    }
    if (m_phase == Phase::WaitIdle)
    {
        TryAccess();
        return;
    }
    RefreshRadio();
}

void
FrogNode::Complete(bool acked)
{
    const auto& timing = m_net.Params().timing;
    const CompletionAction action = OnFragmentComplete(m_state, timing, acked);
    const SimTime now = m_net.Sched().Now();
    m_inFlight.reset();
    switch (action.kind)
    {
    case CompletionKind::PacketDone:
        TryAccess();
        break;
    case CompletionKind::ContinueAfterGap:
        m_phase = Phase::Gap;
        m_pending = m_net.Sched().ScheduleIn(timing.interFragmentGap, m_id, EventKind::Timer, [this] {
            m_pending = EventId();
            TryAccess();
        });
        RefreshRadio();
        break;
    case CompletionKind::Retry:
        m_net.Tracer().Record(now, m_id, "retry", "pkt={} attempt={}", action.packet.id, m_state.Retries());
        TryAccess();
        break;
    case CompletionKind::Drop:
        if (m_net.Metrics().RecordDrop(action.packet))
        {
            m_net.Tracer().Record(now, m_id, "drop", "pkt={} class={}", action.packet.id, ToString(action.packet.cls));
        }
        TryAccess();
        break;
    }
}

void
FrogNode::RefreshRadio()
{
    const SimTime now = m_net.Sched().Now();
    RadioState next = RadioState::Idle;
    if (m_phase == Phase::Tx)
    {
        next = RadioState::Transmit;
    }
    else if (!m_state.Empty() || m_phase == Phase::AwaitAck || m_net.Medium().IsBusy())
    {
        next = RadioState::Receive;
    }
    if (next != m_meter.State())
    {
        m_meter.Switch(now, next);
    }
}

// ---------------------------------------------------------------------------
// FrogSink

FrogSink::FrogSink(FrogNetwork& net, NodeId id)
    : m_net(net),
      m_id(id),
      m_meter(net.Power(), RadioState::Receive)
{
}

void
FrogSink::OnTxStart(const Transmission&)
{
}

void
FrogSink::OnChannelIdle()
{
}

void
FrogSink::OnTxEnd(const Transmission& tx)
{
    if (tx.kind != FrameKind::DataFragment && tx.kind != FrameKind::DataWhole)
    {
        return;
    }
    if (tx.header.dst != m_id)
    {
        return;
    }
    m_net.Tracer().Record(tx.end,
                          m_id,
                          "rx",
                          "src={} pkt={} frag={}/{} corrupted={}",
                          tx.src,
                          tx.header.packet,
                          tx.header.index,
                          tx.header.count,
                          tx.corrupted ? 1 : 0);
    if (tx.corrupted)
    {
        return;
    }

    const auto result = m_reassembler.Accept(tx.src, tx.header.packet, tx.header.index, tx.header.count,
                                             tx.header.payloadBytes);
    std::optional<PacketId> completes;
    if (result.status == Reassembler::Status::Completed)
    {
        if (result.payloadBytes != m_net.Lookup(tx.header.packet).payloadBytes)
        {
            throw std::logic_error(fmt::format("FrogSink: packet {} reassembled to {} bytes",
                                               tx.header.packet,
                                               result.payloadBytes));
        }
        completes = tx.header.packet;
    }

    FrameHeader ack;
    ack.dst = tx.src;
    ack.packet = tx.header.packet;
    ack.index = tx.header.index;
    ack.count = tx.header.count;
    m_net.Sched().ScheduleIn(m_net.Params().timing.ackTurnaround, m_id, EventKind::TxStart, [this, ack, completes] {
        SendAck(ack, completes);
    });
}

void
FrogSink::SendAck(FrameHeader header, std::optional<PacketId> completes)
{
    Channel& medium = m_net.Medium();
    if (medium.IsTransmitting(m_id))
    {
        return;
    }
    const SimTime now = m_net.Sched().Now();
    m_meter.Switch(now, RadioState::Transmit);
    const Transmission tx = medium.BeginTx(m_id, m_net.Params().timing.ackBytes, FrameKind::Ack, header);
    m_net.Tracer().Record(now, m_id, "tx-start", "frame=ack dst={} pkt={} frag={}/{} end={}", header.dst,
                          header.packet, header.index, header.count, tx.end.count());
    if (completes)
    {
        m_pendingDelivery.emplace(tx.id, *completes);
    }
}

void
FrogSink::OnOwnTxEnd(const Transmission& tx)
{
    const SimTime now = m_net.Sched().Now();
    m_meter.Switch(now, RadioState::Receive);
    auto it = m_pendingDelivery.find(tx.id);
    if (it == m_pendingDelivery.end())
    {
        return;
    }
    const Packet& packet = m_net.Lookup(it->second);
    m_pendingDelivery.erase(it);
    const DelaySample& s = m_net.Metrics().RecordDelivery(packet, now);
    m_net.Tracer().Record(now, m_id, "deliver", "src={} pkt={} class={} delay_us={}", packet.src, packet.id,
                          ToString(packet.cls), s.Delay().count());
}

// ---------------------------------------------------------------------------
// FrogNetwork

FrogNetwork::FrogNetwork(Scheduler& scheduler,
                         Channel& channel,
                         const Population& population,
                         const FrogParams& params,
                         MetricsCollector& metrics,
                         Trace& trace,
                         PowerModel power,
                         std::uint64_t seed)
    : m_scheduler(scheduler),
      m_channel(channel),
      m_params(params),
      m_metrics(metrics),
      m_trace(trace),
      m_power(power)
{
    m_params.timing.Validate();
    if (m_params.fragmentSize == 0)
    {
        throw std::invalid_argument("frog: fragment size must be positive");
    }
    for (const auto& node : population.members)
    {
        m_members.push_back(std::make_unique<FrogNode>(*this, node.id, seed));
        m_channel.Attach(node.id, *m_members.back());
    }
    m_sink = std::make_unique<FrogSink>(*this, population.sink);
    m_channel.Attach(population.sink, *m_sink);
}

void
FrogNetwork::Inject(const Packet& packet)
{
    m_packets.emplace(packet.id, packet);
    m_metrics.OnGenerated(packet);
    m_trace.Record(packet.genTime, packet.src, "arrival", "pkt={} class={}", packet.id, ToString(packet.cls));
    Member(packet.src).Enqueue(packet);
}

void
FrogNetwork::Finish(SimTime end)
{
    for (auto& m : m_members)
    {
        m->Meter().Flush(end);
    }
    m_sink->Meter().Flush(end);
}

std::vector<NodeEnergy>
FrogNetwork::Energy() const
{
    std::vector<NodeEnergy> out;
    for (const auto& m : m_members)
    {
        out.push_back(NodeEnergy{m->Id(), false, m->Meter().Ledger()});
    }
    out.push_back(NodeEnergy{m_sink->Id(), true, m_sink->Meter().Ledger()});
    return out;
}

} // namespace priomac
