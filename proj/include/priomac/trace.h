#pragma once

#include "priomac/sim-time.h"

#include <fmt/format.h>

#include <ostream>
#include <string_view>

namespace priomac
{

/**
 * Line-per-event trace writer: "time_us node kind detail...".
 *
 * A default-constructed Trace is disabled and costs one branch per record.
 */
class Trace
{
  public:
    Trace() = default;
    explicit Trace(std::ostream& os)
        : m_os(&os)
    {
    }

    bool Enabled() const { return m_os != nullptr; }

    template <typename... Args>
    void Record(SimTime t, NodeId node, std::string_view kind, fmt::format_string<Args...> detail, Args&&... args)
    {
        if (m_os == nullptr)
        {
            return;
        }
        Write(t, node, kind, fmt::format(detail, std::forward<Args>(args)...));
    }

  private:
    void Write(SimTime t, NodeId node, std::string_view kind, std::string_view detail);

    std::ostream* m_os = nullptr;
};

} // namespace priomac
