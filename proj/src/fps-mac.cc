#include "priomac/fps-mac.h"

#include <fmt/format.h>

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace priomac
{

const char*
ToString(FrameMode mode)
{
    return mode == FrameMode::Emergency ? "EMERGENCY" : "PERIODIC";
}

const char*
ToString(SlotPurpose purpose)
{
    return purpose == SlotPurpose::Emergency ? "EMERGENCY" : "NORMAL";
}

const char*
ToString(EisResult r)
{
    switch (r)
    {
    case EisResult::Empty:
        return "empty";
    case EisResult::Winner:
        return "winner";
    case EisResult::Collision:
        return "collision";
    }
    return "unknown";
}

FpsGeometry
FpsGeometry::Derive(const FpsParams& params, std::uint32_t payloadBytes, std::uint32_t bitrateBps)
{
    if (params.slotsPerFrame == 0)
    {
        throw std::invalid_argument("fps: slots_per_frame must be positive");
    }
    const SimTime ack = TxDuration(params.ackBytes, bitrateBps);
    FpsGeometry g;
    g.slot = TxDuration(payloadBytes + params.headerBytes, bitrateBps) + params.ackTurnaround + ack + params.guard;
    g.eis = TxDuration(params.indicationBytes, bitrateBps) + params.ackTurnaround + ack + params.guard;
    g.control = TxDuration(params.scheduleBytes, bitrateBps) + params.guard;
    g.slotsPerFrame = params.slotsPerFrame;
    return g;
}

ClusterSchedule
RunSetup(std::span<const SetupNode> nodes, std::uint32_t slotsPerFrame)
{
    ClusterSchedule s;
    s.slotsPerFrame = slotsPerFrame;
    std::optional<NodeId> sink;
    std::optional<SetupNode> best;
    for (const auto& n : nodes)
    {
        if (n.isSink)
        {
            if (sink)
            {
                throw std::invalid_argument("RunSetup: more than one sink");
            }
            sink = n.id;
            continue;
        }
        s.slotOrder.push_back(n.id);
        if (!best || n.residualEnergyJ > best->residualEnergyJ ||
            (n.residualEnergyJ == best->residualEnergyJ && n.id < best->id))
        {
            best = n;
        }
    }
    if (!sink)
    {
        throw std::invalid_argument("RunSetup: no sink among the nodes");
    }
    if (!best)
    {
        throw std::invalid_argument("RunSetup: a cluster needs at least one member");
    }
    s.ch = *sink;
    s.surrogateCh = best->id;
    std::sort(s.slotOrder.begin(), s.slotOrder.end());
    return s;
}

const DataSlot*
TdmaFrame::SlotOf(NodeId node) const
{
    auto it = std::find_if(slots.begin(), slots.end(), [node](const DataSlot& s) { return s.node == node; });
    return it == slots.end() ? nullptr : &*it;
}

std::string
TdmaFrame::Describe() const
{
    std::string out = fmt::format("idx={} mode={} slots=", index, ToString(mode));
    for (std::size_t i = 0; i < slots.size(); ++i)
    {
        const auto& s = slots[i];
        out += fmt::format("{}{}:{}:{}:{}",
                           i == 0 ? "" : ",",
                           s.node,
                           s.purpose == SlotPurpose::Emergency ? 'E' : 'N',
                           s.span.start.count(),
                           s.span.end.count());
    }
    if (slots.empty())
    {
        out += "-";
    }
    return out;
}

TdmaFrame
BuildFrame(const FpsGeometry& geometry,
           std::uint64_t index,
           SimTime frameStart,
           std::span<const SlotRequest> requests,
           const FuzzyScales& scales)
{
    struct Ranked
    {
        NodeId node;
        double priority;
        bool emergency;
    };
    std::vector<Ranked> urgent;
    std::vector<Ranked> periodic;
    for (const auto& r : requests)
    {
        const double p = Priority(r.inputs, scales);
        if (r.inputs.emergencyBit)
        {
            urgent.push_back({r.node, p, true});
        }
        else if (r.hasNormal)
        {
            periodic.push_back({r.node, p, false});
        }
    }
    auto byPriority = [](const Ranked& a, const Ranked& b) {
        if (a.priority != b.priority)
        {
            return a.priority > b.priority;
        }
        return a.node < b.node;
    };
    std::sort(urgent.begin(), urgent.end(), byPriority);
    std::sort(periodic.begin(), periodic.end(), byPriority);

    TdmaFrame f;
    f.index = index;
    f.eis = TimeSpan{frameStart, frameStart + geometry.eis};
    f.control = TimeSpan{f.eis.end, f.eis.end + geometry.control};
    SimTime at = f.control.end;
    auto assign = [&](const Ranked& r) {
        if (f.slots.size() >= geometry.slotsPerFrame || f.SlotOf(r.node) != nullptr)
        {
            return;
        }
        f.slots.push_back(DataSlot{TimeSpan{at, at + geometry.slot},
                                   r.node,
                                   r.emergency ? SlotPurpose::Emergency : SlotPurpose::Normal});
        at += geometry.slot;
    };
    std::for_each(urgent.begin(), urgent.end(), assign);
    std::for_each(periodic.begin(), periodic.end(), assign);
    f.mode = std::any_of(f.slots.begin(), f.slots.end(), [](const DataSlot& s) {
        return s.purpose == SlotPurpose::Emergency;
    })
                 ? FrameMode::Emergency
                 : FrameMode::Periodic;
    return f;
}

EisOutcome
EisContend(std::span<const NodeId> contenders, double persistence, double ackLoss, StreamBank& streams)
{
    EisOutcome out;
    for (NodeId n : contenders)
    {
        if (streams.Get(n, StreamPurpose::Persistence).Bernoulli(persistence))
        {
            out.transmitters.push_back(n);
        }
    }
    if (out.transmitters.empty())
    {
        out.result = EisResult::Empty;
    }
    else if (out.transmitters.size() == 1)
    {
        out.result = EisResult::Winner;
        out.winner = out.transmitters.front();
        out.ackLost = streams.Get(*out.winner, StreamPurpose::AckLoss).Bernoulli(ackLoss);
    }
    else
    {
        out.result = EisResult::Collision;
    }
    return out;
}

// ---------------------------------------------------------------------------
// FpsMember

FpsMember::FpsMember(FpsCluster& cluster, const NodeConfig& config)
    : m_cluster(cluster),
      m_id(config.id),
      m_pos(config.pos),
      m_meter(cluster.Power(), RadioState::Sleep)
{
}

bool
FpsMember::HasEmergency() const
{
    return !m_queue.empty() && m_queue.front().cls == TrafficClass::Emergency;
}

bool
FpsMember::HasNormal() const
{
    return !m_queue.empty() && m_queue.back().cls == TrafficClass::Normal;
}

bool
FpsMember::Fail(const Packet& p)
{
    return ++m_failures[p.id] > m_cluster.Params().maxRetries;
}

bool
FpsMember::SlotTransmit(const DataSlot& slot)
{
    auto& sched = m_cluster.Sched();
    const SimTime now = sched.Now();
    const SimTime exchange = m_cluster.Medium().TxDuration(m_cluster.DataBytes()) + m_cluster.Params().ackTurnaround +
                             m_cluster.Medium().TxDuration(m_cluster.Params().ackBytes);
    if (slot.node != m_id || !slot.span.Contains(now) || now + exchange > slot.span.end)
    {
        ++m_cluster.MutableCounters().slotViolations;
        throw std::logic_error(fmt::format("FpsMember {}: transmission at {} us outside its slot [{}, {}) owned by {}",
                                           m_id,
                                           now.count(),
                                           slot.span.start.count(),
                                           slot.span.end.count(),
                                           slot.node));
    }
    if (m_queue.empty())
    {
        m_cluster.Tracer().Record(now, m_id, "slot-idle", "slot_start={}", slot.span.start.count());
        return false;
    }
    const Packet p = m_queue.front();
    m_inFlight = p;
    m_meter.Switch(now, RadioState::Transmit);
    FrameHeader h;
    h.dst = m_cluster.Head().Id();
    h.packet = p.id;
    h.payloadBytes = static_cast<std::uint16_t>(p.payloadBytes);
    const Transmission tx = m_cluster.Medium().BeginTx(m_id, m_cluster.DataBytes(), FrameKind::DataWhole, h);
    ++m_cluster.MutableCounters().dataTransmissions;
    m_cluster.Tracer().Record(now,
                              m_id,
                              "tx-start",
                              "frame=data-whole pkt={} class={} purpose={} slot_start={} slot_end={} end={}",
                              p.id,
                              ToString(p.cls),
                              ToString(slot.purpose),
                              slot.span.start.count(),
                              slot.span.end.count(),
                              tx.end.count());
    sched.Schedule(slot.span.end, m_id, EventKind::Timer, [this, id = p.id] { SlotExpired(id); });
    return true;
}

void
FpsMember::SlotExpired(PacketId id)
{
    if (!m_inFlight || m_inFlight->id != id)
    {
        return;
    }
    const SimTime now = m_cluster.Sched().Now();
    const Packet p = *m_inFlight;
    m_inFlight.reset();
    m_meter.Switch(now, RadioState::Sleep);
    m_cluster.Tracer().Record(now, m_id, "ack-timeout", "pkt={}", p.id);
    Failed(now, p);
}

void
FpsMember::Failed(SimTime now, const Packet& p)
{
    if (!Fail(p))
    {
        m_cluster.Tracer().Record(now, m_id, "retry", "pkt={} failures={}", p.id, m_failures[p.id]);
        return;
    }
    auto it = std::find_if(m_queue.begin(), m_queue.end(), [&](const Packet& q) { return q.id == p.id; });
    m_queue.erase(it);
    Forget(p.id);
    m_cluster.Metrics().RecordDrop(p);
    m_cluster.Tracer().Record(now, m_id, "drop", "pkt={} class={}", p.id, ToString(p.cls));
}

void
FpsMember::OnOwnTxEnd(const Transmission& tx)
{
    const SimTime now = m_cluster.Sched().Now();
    // Wait for the CH acknowledgment in both the EIS and the data slot.
    m_meter.Switch(now, RadioState::Receive);
    if (tx.kind == FrameKind::DataWhole)
    {
        m_cluster.Tracer().Record(now, m_id, "tx-end", "frame=data-whole pkt={} corrupted={}", tx.header.packet,
                                  tx.corrupted ? 1 : 0);
        if (tx.corrupted)
        {
            ++m_cluster.MutableCounters().dataCollisions;
        }
    }
    else if (tx.kind == FrameKind::Indication)
    {
        m_cluster.Tracer().Record(now, m_id, "tx-end", "frame=indication corrupted={}", tx.corrupted ? 1 : 0);
    }
}

void
FpsMember::OnTxEnd(const Transmission& tx)
{
    if (tx.kind != FrameKind::Ack || tx.header.dst != m_id || !m_inFlight)
    {
        return;
    }
    if (tx.header.packet != m_inFlight->id)
    {
        return;
    }
    const SimTime now = m_cluster.Sched().Now();
    const Packet p = *m_inFlight;
    m_inFlight.reset();
    m_meter.Switch(now, RadioState::Sleep);

    auto& streams = m_cluster.Streams();
    const bool lost =
        tx.corrupted || streams.Get(m_id, StreamPurpose::AckLoss).Bernoulli(m_cluster.Params().ackLossProb);
    if (!lost)
    {
        auto it = std::find_if(m_queue.begin(), m_queue.end(), [&](const Packet& q) { return q.id == p.id; });
        m_queue.erase(it);
        Forget(p.id);
        const DelaySample& s = m_cluster.Metrics().RecordDelivery(p, now);
        m_cluster.Tracer().Record(now, m_id, "deliver", "src={} pkt={} class={} delay_us={}", p.src, p.id,
                                  ToString(p.cls), s.Delay().count());
        return;
    }

    ++m_cluster.MutableCounters().ackLosses;
    m_cluster.Tracer().Record(now, m_id, "ack-lost", "pkt={}", p.id);
    Failed(now, p);
}

// ---------------------------------------------------------------------------
// FpsHead

FpsHead::FpsHead(FpsCluster& cluster, NodeId id)
    : m_cluster(cluster),
      m_id(id),
      m_meter(cluster.Power(), RadioState::Sleep)
{
}

void
FpsHead::OnTxEnd(const Transmission& tx)
{
    if (tx.header.dst != m_id || (tx.kind != FrameKind::Indication && tx.kind != FrameKind::DataWhole))
    {
        return;
    }
    const SimTime now = m_cluster.Sched().Now();
    m_cluster.Tracer().Record(now, m_id, "rx", "src={} frame={} pkt={} corrupted={}", tx.src, ToString(tx.kind),
                              tx.header.packet, tx.corrupted ? 1 : 0);
    if (tx.corrupted)
    {
        return;
    }
    FrameHeader ack;
    ack.dst = tx.src;
    ack.packet = tx.header.packet;
    m_cluster.Sched().ScheduleIn(m_cluster.Params().ackTurnaround, m_id, EventKind::TxStart, [this, ack] {
        const SimTime t = m_cluster.Sched().Now();
        m_meter.Switch(t, RadioState::Transmit);
        const Transmission a = m_cluster.Medium().BeginTx(m_id, m_cluster.Params().ackBytes, FrameKind::Ack, ack);
        m_cluster.Tracer().Record(t, m_id, "tx-start", "frame=ack dst={} pkt={} end={}", ack.dst, ack.packet,
                                  a.end.count());
    });
}

void
FpsHead::OnOwnTxEnd(const Transmission& tx)
{
    const SimTime now = m_cluster.Sched().Now();
    const auto& frame = m_cluster.CurrentFrame();
    // Keep listening through the EIS and control windows; a slot ack ends the exchange.
    const bool dataPhase = tx.kind == FrameKind::Ack && frame && now >= frame->control.end;
    m_meter.Switch(now, dataPhase ? RadioState::Sleep : RadioState::Receive);
}

// ---------------------------------------------------------------------------
// FpsCluster

FpsCluster::FpsCluster(Scheduler& scheduler,
                       Channel& channel,
                       const Population& population,
                       const FpsParams& params,
                       std::uint32_t payloadBytes,
                       MetricsCollector& metrics,
                       Trace& trace,
                       PowerModel power,
                       std::uint64_t seed)
    : m_scheduler(scheduler),
      m_channel(channel),
      m_params(params),
      m_payloadBytes(payloadBytes),
      m_metrics(metrics),
      m_trace(trace),
      m_power(power),
      m_streams(seed),
      m_geometry(FpsGeometry::Derive(params, payloadBytes, channel.Params().bitrateBps))
{
    if (params.persistence < 0.0 || params.persistence > 1.0 || params.ackLossProb < 0.0 || params.ackLossProb > 1.0)
    {
        throw std::invalid_argument("fps: probabilities must lie in [0, 1]");
    }
    for (const auto& node : population.members)
    {
        m_members.push_back(std::make_unique<FpsMember>(*this, node));
        m_channel.Attach(node.id, *m_members.back());
    }
    m_head = std::make_unique<FpsHead>(*this, population.sink);
    m_sinkPos = population.sinkPos;
    m_channel.Attach(population.sink, *m_head);
}

double
FpsCluster::ResidualEnergyJ(const FpsMember& m) const
{
    return m_params.scales.initialEnergyJ - m.Meter().Ledger().TotalUj() * 1e-6;
}

void
FpsCluster::Start(SimTime start)
{
    std::vector<SetupNode> nodes;
    for (const auto& m : m_members)
    {
        nodes.push_back(SetupNode{m->Id(), ResidualEnergyJ(*m), false});
    }
    nodes.push_back(SetupNode{m_head->Id(), m_params.scales.initialEnergyJ, true});
    m_schedule = RunSetup(nodes, m_params.slotsPerFrame);
    m_trace.Record(start, m_head->Id(), "setup", "ch={} surrogate={} slots_per_frame={} frame_us={}", m_schedule.ch,
                   m_schedule.surrogateCh, m_schedule.slotsPerFrame, m_geometry.FrameLength().count());
    m_scheduler.Schedule(start, m_head->Id(), EventKind::FrameBoundary, [this, start] { FrameStart(0, start); });
}

void
FpsCluster::Inject(const Packet& packet)
{
    m_metrics.OnGenerated(packet);
    m_trace.Record(packet.genTime, packet.src, "arrival", "pkt={} class={}", packet.id, ToString(packet.cls));
    InsertByPriority(Member(packet.src).Queue(), packet);
}

void
FpsCluster::FrameStart(std::uint64_t index, SimTime start)
{
    m_frameStart = start;
    ++m_counters.frames;
    m_frame.reset();

    // Everyone listens through the EIS and control windows.
    for (auto& m : m_members)
    {
        m->SetIndicated(false);
        m->Meter().Switch(start, RadioState::Receive);
    }
    m_head->Meter().Switch(start, RadioState::Receive);

    // Contenders: nodes with fresh or previously buffered event traffic.
    m_contenders.clear();
    for (auto& m : m_members)
    {
        if (m->HasEmergency())
        {
            m_contenders.push_back(m->Id());
        }
    }
    m_eis = EisContend(m_contenders, m_params.persistence, m_params.ackLossProb, m_streams);
    if (!m_contenders.empty())
    {
        m_trace.Record(start, m_head->Id(), "eis", "frame={} contenders={} transmitters={} result={} ack_lost={}",
                       index, m_contenders.size(), m_eis.transmitters.size(), ToString(m_eis.result),
                       m_eis.ackLost ? 1 : 0);
    }
    if (m_eis.result == EisResult::Collision)
    {
        ++m_counters.eisCollisions;
    }
    if (m_eis.result == EisResult::Winner && m_eis.ackLost)
    {
        ++m_counters.ackLosses;
    }
    if (auto acked = m_eis.Acknowledged())
    {
        Member(*acked).SetIndicated(true);
    }

    const SimTime indicationAt = start + m_channel.Params().cca;
    for (NodeId n : m_eis.transmitters)
    {
        m_scheduler.Schedule(indicationAt, n, EventKind::TxStart, [this, n] {
            FpsMember& m = Member(n);
            const SimTime now = m_scheduler.Now();
            m.Meter().Switch(now, RadioState::Transmit);
            FrameHeader h;
            h.dst = m_head->Id();
            m_channel.BeginTx(n, m_params.indicationBytes, FrameKind::Indication, h);
            m_trace.Record(now, n, "tx-start", "frame=indication");
        });
    }

    m_scheduler.Schedule(start + m_geometry.eis, m_head->Id(), EventKind::FrameBoundary, [this, index] {
        ControlStart(index);
    });
    const SimTime next = start + m_geometry.FrameLength();
    m_scheduler.Schedule(next, m_head->Id(), EventKind::FrameBoundary, [this, index, next] {
        FrameStart(index + 1, next);
    });
}

void
FpsCluster::ControlStart(std::uint64_t index)
{
    const SimTime now = m_scheduler.Now();

    // EIS bookkeeping: contenders without an acknowledged indication wait for the next frame.
    for (NodeId n : m_contenders)
    {
        FpsMember& m = Member(n);
        if (m.Indicated() || !m.HasEmergency())
        {
            continue;
        }
        const Packet p = m.Queue().front();
        if (m.Fail(p))
        {
            m.Queue().pop_front();
            m.Forget(p.id);
            m_metrics.RecordDrop(p);
            m_trace.Record(now, n, "drop", "pkt={} class={}", p.id, ToString(p.cls));
        }
    }

    std::vector<SlotRequest> requests;
    for (auto& m : m_members)
    {
        if (m->Queue().empty())
        {
            continue;
        }
        SlotRequest r;
        r.node = m->Id();
        r.inputs.distanceM = Distance(m->Pos(), m_sinkPos);
        r.inputs.residualEnergyJ = ResidualEnergyJ(*m);
        r.inputs.slotsRequired = static_cast<std::uint32_t>(m->Queue().size());
        r.inputs.emergencyBit = m->Indicated() && m->HasEmergency();
        r.hasNormal = m->HasNormal();
        requests.push_back(r);
    }
    m_frame = BuildFrame(m_geometry, index, m_frameStart, requests, m_params.scales);
    if (m_frame->mode == FrameMode::Emergency)
    {
        ++m_counters.emergencyFrames;
    }
    m_trace.Record(now, m_head->Id(), "frame", "{}", m_frame->Describe());

    // Schedule announcement.
    m_head->Meter().Switch(now, RadioState::Transmit);
    m_channel.BeginTx(m_head->Id(), m_params.scheduleBytes, FrameKind::ScheduleBroadcast, FrameHeader{});

    m_scheduler.Schedule(m_frame->control.end, m_head->Id(), EventKind::FrameBoundary, [this] { ControlEnd(); });
    for (const DataSlot& slot : m_frame->slots)
    {
        m_scheduler.Schedule(slot.span.start, slot.node, EventKind::TxStart, [this, slot] {
            FpsMember& m = Member(slot.node);
            m_head->Meter().Switch(m_scheduler.Now(), RadioState::Receive);
            if (!m.SlotTransmit(slot))
            {
                m_head->Meter().Switch(m_scheduler.Now(), RadioState::Sleep);
            }
        });
    }
}

void
FpsCluster::ControlEnd()
{
    const SimTime now = m_scheduler.Now();
    for (auto& m : m_members)
    {
        m->Meter().Switch(now, RadioState::Sleep);
    }
    m_head->Meter().Switch(now, RadioState::Sleep);
}

void
FpsCluster::Finish(SimTime end)
{
    for (auto& m : m_members)
    {
        m->Meter().Flush(end);
    }
    m_head->Meter().Flush(end);
}

std::vector<NodeEnergy>
FpsCluster::Energy() const
{
    std::vector<NodeEnergy> out;
    for (const auto& m : m_members)
    {
        out.push_back(NodeEnergy{m->Id(), false, m->Meter().Ledger()});
    }
    out.push_back(NodeEnergy{m_head->Id(), true, m_head->Meter().Ledger()});
    return out;
}

} // namespace priomac
