#include "priomac/scheduler.h"

#include <fmt/format.h>

#include <stdexcept>

namespace priomac
{

const char*
ToString(EventKind kind)
{
    switch (kind)
    {
    case EventKind::Arrival:
        return "arrival";
    case EventKind::TxStart:
        return "tx-start";
    case EventKind::TxEnd:
        return "tx-end";
    case EventKind::CcaDone:
        return "cca-done";
    case EventKind::Timer:
        return "timer";
    case EventKind::FrameBoundary:
        return "frame-boundary";
    }
    return "unknown";
}

EventId
Scheduler::Schedule(SimTime at, NodeId owner, EventKind kind, Callback cb)
{
    if (at < m_now)
    {
        throw std::logic_error(fmt::format("Scheduler: event '{}' for node {} at {} us is before now ({} us)",
                                           ToString(kind),
                                           owner,
                                           at.count(),
                                           m_now.count()));
    }
    const std::uint64_t seq = m_nextSeq++;
    m_queue.push(Entry{at, owner, seq, kind, std::move(cb)});
    m_live.insert(seq);
    return EventId(seq);
}

EventId
Scheduler::ScheduleIn(SimTime delay, NodeId owner, EventKind kind, Callback cb)
{
    return Schedule(m_now + delay, owner, kind, std::move(cb));
}

void
Scheduler::Cancel(EventId& id)
{
    if (id.IsValid())
    {
        m_live.erase(id.m_uid);
        id = EventId();
    }
}

bool
Scheduler::IsPending(const EventId& id) const
{
    return id.IsValid() && m_live.contains(id.m_uid);
}

void
Scheduler::Dispatch(Entry& e)
{
    m_now = e.at;
    ++m_dispatched;
    e.cb();
}

bool
Scheduler::Step()
{
    while (!m_queue.empty())
    {
        // priority_queue::top is const; the entry is popped immediately so moving is safe.
        Entry e = std::move(const_cast<Entry&>(m_queue.top()));
        m_queue.pop();
        if (m_live.erase(e.seq) == 0)
        {
            continue; // cancelled
        }
        Dispatch(e);
        return true;
    }
    return false;
}

void
Scheduler::Run(SimTime until)
{
    while (!m_queue.empty())
    {
        if (m_queue.top().at > until)
        {
            break;
        }
        Entry e = std::move(const_cast<Entry&>(m_queue.top()));
        m_queue.pop();
        if (m_live.erase(e.seq) == 0)
        {
            continue;
        }
        Dispatch(e);
    }
    if (m_now < until)
    {
        m_now = until;
    }
}

} // namespace priomac
