#pragma once

#include "priomac/channel.h"
#include "priomac/energy.h"
#include "priomac/fuzzy.h"
#include "priomac/metrics.h"
#include "priomac/rng-stream.h"
#include "priomac/scheduler.h"
#include "priomac/trace.h"
#include "priomac/traffic.h"

#include <deque>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace priomac
{

struct FpsParams
{
    std::uint32_t slotsPerFrame = 20;
    std::uint32_t headerBytes = 5;
    std::uint32_t ackBytes = 11;
    std::uint32_t indicationBytes = 8;
    std::uint32_t scheduleBytes = 30;
    SimTime guard = Micros(1000);
    SimTime ackTurnaround = Micros(0);
    double persistence = 0.5;
    double ackLossProb = 0.01;
    std::uint32_t maxRetries = 50;
    FuzzyScales scales;
};

struct TimeSpan
{
    SimTime start{0};
    SimTime end{0};

    bool Contains(SimTime t) const { return start <= t && t < end; }
    SimTime Length() const { return end - start; }
};

/// Fixed frame layout: EIS window, control window, then slotsPerFrame equal data slots.
struct FpsGeometry
{
    SimTime eis{0};
    SimTime control{0};
    SimTime slot{0};
    std::uint32_t slotsPerFrame = 0;

    SimTime FrameLength() const { return eis + control + slot * slotsPerFrame; }

    static FpsGeometry Derive(const FpsParams& params, std::uint32_t payloadBytes, std::uint32_t bitrateBps);
};

struct ClusterSchedule
{
    NodeId ch = 0;
    NodeId surrogateCh = 0;
    std::vector<NodeId> slotOrder;
    std::uint32_t slotsPerFrame = 0;
};

struct SetupNode
{
    NodeId id = 0;
    double residualEnergyJ = 0.0;
    bool isSink = false;
};

/**
 * Setup phase: the sink is the cluster head, the member with the most
 * residual energy (lowest id on ties) is the surrogate, and the initial slot
 * order is member id ascending. The routing tree is the depth-1 star.
 */
ClusterSchedule RunSetup(std::span<const SetupNode> nodes, std::uint32_t slotsPerFrame);

enum class FrameMode : std::uint8_t
{
    Periodic,
    Emergency,
};

enum class SlotPurpose : std::uint8_t
{
    Normal,
    Emergency,
};

const char* ToString(FrameMode mode);
const char* ToString(SlotPurpose purpose);

struct DataSlot
{
    TimeSpan span;
    NodeId node = 0;
    SlotPurpose purpose = SlotPurpose::Normal;
};

struct TdmaFrame
{
    std::uint64_t index = 0;
    FrameMode mode = FrameMode::Periodic;
    TimeSpan eis;
    TimeSpan control;
    std::vector<DataSlot> slots;

    const DataSlot* SlotOf(NodeId node) const;
    std::string Describe() const;
};

/// One member's scheduling request for the frame being built.
struct SlotRequest
{
    NodeId node = 0;
    FuzzyInputs inputs;
    bool hasNormal = false; // queued NORMAL data: a periodic claimant
};

/**
 * Build the frame. Nodes with emergencyBit get slots first (stolen from
 * periodic claimants), then periodic claimants, each group by Priority()
 * descending with node id ascending on ties, truncated to slotsPerFrame.
 * The frame is EMERGENCY iff some slot has EMERGENCY purpose.
 */
TdmaFrame BuildFrame(const FpsGeometry& geometry,
                     std::uint64_t index,
                     SimTime frameStart,
                     std::span<const SlotRequest> requests,
                     const FuzzyScales& scales);

enum class EisResult : std::uint8_t
{
    Empty,     // no indication on air
    Winner,    // exactly one indication
    Collision, // two or more indications
};

const char* ToString(EisResult r);

struct EisOutcome
{
    EisResult result = EisResult::Empty;
    std::optional<NodeId> winner;
    std::vector<NodeId> transmitters;
    bool ackLost = false; // winner missed the CH acknowledgment

    /// Winner whose handshake completed.
    std::optional<NodeId> Acknowledged() const
    {
        return (result == EisResult::Winner && !ackLost) ? winner : std::nullopt;
    }
};

/**
 * EIS contention: every contender, having sensed the slot idle, transmits its
 * indication with probability persistence (its own Persistence stream). One
 * transmitter wins; its acknowledgment is lost with probability ackLoss
 * (its AckLoss stream).
 */
EisOutcome EisContend(std::span<const NodeId> contenders, double persistence, double ackLoss, StreamBank& streams);

class FpsCluster;

class FpsMember : public ChannelListener
{
  public:
    FpsMember(FpsCluster& cluster, const NodeConfig& config);

    void OnOwnTxEnd(const Transmission& tx) override;
    void OnTxEnd(const Transmission& tx) override;

    /// Transmit in the given slot. Throws std::logic_error outside the slot or for a slot owned by another node.
    bool SlotTransmit(const DataSlot& slot);

    NodeId Id() const { return m_id; }
    const Position& Pos() const { return m_pos; }
    std::deque<Packet>& Queue() { return m_queue; }
    const std::deque<Packet>& Queue() const { return m_queue; }
    bool HasEmergency() const;
    bool HasNormal() const;
    RadioMeter& Meter() { return m_meter; }
    const RadioMeter& Meter() const { return m_meter; }

    /// Acknowledged in this frame's EIS: the emergency bit of its next request.
    bool Indicated() const { return m_indicated; }
    void SetIndicated(bool v) { m_indicated = v; }

    /// Count a failed attempt for the packet; true when it must be dropped.
    bool Fail(const Packet& p);
    void Forget(PacketId id) { m_failures.erase(id); }

  private:
    void Failed(SimTime now, const Packet& p);
    void SlotExpired(PacketId id);

    FpsCluster& m_cluster;
    NodeId m_id;
    Position m_pos;
    std::deque<Packet> m_queue;
    RadioMeter m_meter;
    std::optional<Packet> m_inFlight;
    std::unordered_map<PacketId, std::uint32_t> m_failures;
    bool m_indicated = false;
};

class FpsHead : public ChannelListener
{
  public:
    FpsHead(FpsCluster& cluster, NodeId id);

    void OnOwnTxEnd(const Transmission& tx) override;
    void OnTxEnd(const Transmission& tx) override;

    NodeId Id() const { return m_id; }
    RadioMeter& Meter() { return m_meter; }
    const RadioMeter& Meter() const { return m_meter; }

  private:
    FpsCluster& m_cluster;
    NodeId m_id;
    RadioMeter m_meter;
};

/// The TDMA cluster: a head (the sink) driving frames over its members.
class FpsCluster
{
  public:
    FpsCluster(Scheduler& scheduler,
               Channel& channel,
               const Population& population,
               const FpsParams& params,
               std::uint32_t payloadBytes,
               MetricsCollector& metrics,
               Trace& trace,
               PowerModel power,
               std::uint64_t seed);

    /// Run the setup phase and schedule the first frame at `start`.
    void Start(SimTime start = SimTime{0});
    void Inject(const Packet& packet);
    void Finish(SimTime end);

    std::vector<NodeEnergy> Energy() const;
    const ProtocolCounters& Counters() const { return m_counters; }
    const ClusterSchedule& Schedule() const { return m_schedule; }
    const FpsGeometry& Geometry() const { return m_geometry; }
    const std::optional<TdmaFrame>& CurrentFrame() const { return m_frame; }

    FpsMember& Member(NodeId id) { return *m_members.at(id - 1); }
    FpsHead& Head() { return *m_head; }

    Scheduler& Sched() { return m_scheduler; }
    Channel& Medium() { return m_channel; }
    const FpsParams& Params() const { return m_params; }
    MetricsCollector& Metrics() { return m_metrics; }
    Trace& Tracer() { return m_trace; }
    ProtocolCounters& MutableCounters() { return m_counters; }
    StreamBank& Streams() { return m_streams; }
    const PowerModel& Power() const { return m_power; }
    std::uint32_t DataBytes() const { return m_payloadBytes + m_params.headerBytes; }
    double ResidualEnergyJ(const FpsMember& m) const;
    const Position& SinkPos() const { return m_sinkPos; }

  private:
    void FrameStart(std::uint64_t index, SimTime start);
    void ControlStart(std::uint64_t index);
    void ControlEnd();

    Scheduler& m_scheduler;
    Channel& m_channel;
    FpsParams m_params;
    std::uint32_t m_payloadBytes;
    MetricsCollector& m_metrics;
    Trace& m_trace;
    PowerModel m_power;
    StreamBank m_streams;
    FpsGeometry m_geometry;
    std::vector<std::unique_ptr<FpsMember>> m_members;
    std::unique_ptr<FpsHead> m_head;
    Position m_sinkPos;
    ClusterSchedule m_schedule;
    std::optional<TdmaFrame> m_frame;
    SimTime m_frameStart{0};
    std::vector<NodeId> m_contenders;
    EisOutcome m_eis;
    ProtocolCounters m_counters;
};

} // namespace priomac
