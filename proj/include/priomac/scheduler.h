#pragma once

#include "priomac/sim-time.h"

#include <cstdint>
#include <functional>
#include <queue>
#include <unordered_set>
#include <vector>

namespace priomac
{

enum class EventKind : std::uint8_t
{
    Arrival,
    TxStart,
    TxEnd,
    CcaDone,
    Timer,
    FrameBoundary,
};

const char* ToString(EventKind kind);

/// Handle returned by Scheduler::Schedule; a default-constructed handle is never pending.
class EventId
{
  public:
    EventId() = default;

    std::uint64_t Uid() const { return m_uid; }
    bool IsValid() const { return m_uid != 0; }

  private:
    friend class Scheduler;
    explicit EventId(std::uint64_t uid)
        : m_uid(uid)
    {
    }

    std::uint64_t m_uid = 0;
};

/**
 * Single-threaded discrete-event engine.
 *
 * Events fire in (time, owner id, insertion sequence) order. Scheduling in
 * the past is a protocol bug and throws std::logic_error.
 */
class Scheduler
{
  public:
    using Callback = std::function<void()>;

    EventId Schedule(SimTime at, NodeId owner, EventKind kind, Callback cb);
    EventId ScheduleIn(SimTime delay, NodeId owner, EventKind kind, Callback cb);

    /// Cancelling a dispatched or already-cancelled event is a no-op.
    void Cancel(EventId& id);
    bool IsPending(const EventId& id) const;

    /// Dispatch every event with fire time <= until, then park the clock at until.
    void Run(SimTime until);
    /// Dispatch the next event only. Returns false when the queue is empty.
    bool Step();

    SimTime Now() const { return m_now; }
    std::uint64_t Dispatched() const { return m_dispatched; }
    std::size_t PendingCount() const { return m_live.size(); }

  private:
    struct Entry
    {
        SimTime at;
        NodeId owner;
        std::uint64_t seq;
        EventKind kind;
        Callback cb;
    };

    struct Later
    {
        bool operator()(const Entry& a, const Entry& b) const
        {
            if (a.at != b.at)
            {
                return a.at > b.at;
            }
            if (a.owner != b.owner)
            {
                return a.owner > b.owner;
            }
            return a.seq > b.seq;
        }
    };

    void Dispatch(Entry& e);

    std::priority_queue<Entry, std::vector<Entry>, Later> m_queue;
    std::unordered_set<std::uint64_t> m_live;
    SimTime m_now{0};
    std::uint64_t m_nextSeq = 1;
    std::uint64_t m_dispatched = 0;
};

} // namespace priomac
