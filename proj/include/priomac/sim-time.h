#pragma once

#include <chrono>
#include <cstdint>

namespace priomac
{

/// Virtual clock value: integer microseconds since simulation start.
using SimTime = std::chrono::microseconds;

using NodeId = std::uint32_t;
using PacketId = std::uint64_t;

constexpr SimTime
Micros(std::int64_t us)
{
    return SimTime{us};
}

constexpr SimTime
Seconds(std::int64_t s)
{
    return SimTime{s * 1'000'000};
}

} // namespace priomac
