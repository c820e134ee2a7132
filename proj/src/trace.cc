#include "priomac/trace.h"

namespace priomac
{

void
Trace::Write(SimTime t, NodeId node, std::string_view kind, std::string_view detail)
{
    *m_os << t.count() << ' ' << node << ' ' << kind;
    if (!detail.empty())
    {
        *m_os << ' ' << detail;
    }
    *m_os << '\n';
}

} // namespace priomac
