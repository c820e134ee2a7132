#include "priomac/fragmentation.h"

#include <fmt/format.h>

#include <algorithm>
#include <stdexcept>

namespace priomac
{

std::vector<Fragment>
FragmentPacket(const Packet& packet, std::uint32_t fragmentSize, std::uint32_t headerBytes)
{
    if (packet.cls == TrafficClass::Emergency)
    {
        throw std::invalid_argument(fmt::format("FragmentPacket: EMERGENCY packet {} is never fragmented", packet.id));
    }
    if (fragmentSize == 0)
    {
        throw std::invalid_argument("FragmentPacket: fragment size must be positive");
    }
    if (fragmentSize > packet.payloadBytes)
    {
        throw std::invalid_argument(fmt::format("FragmentPacket: fragment size {} exceeds payload of {} bytes",
                                                fragmentSize,
                                                packet.payloadBytes));
    }

    const std::uint32_t count = (packet.payloadBytes + fragmentSize - 1) / fragmentSize;
    std::vector<Fragment> out;
    out.reserve(count);
    std::uint32_t offset = 0;
    for (std::uint32_t i = 0; i < count; ++i)
    {
        Fragment f;
        f.packetId = packet.id;
        f.index = static_cast<std::uint16_t>(i);
        f.count = static_cast<std::uint16_t>(count);
        f.offset = offset;
        f.payloadBytes = static_cast<std::uint16_t>(std::min(fragmentSize, packet.payloadBytes - offset));
        f.headerBytes = static_cast<std::uint16_t>(headerBytes);
        offset += f.payloadBytes;
        out.push_back(f);
    }
    return out;
}

std::uint32_t
AirtimeOverhead(const Packet& packet, std::uint32_t fragmentSize, std::uint32_t headerBytes)
{
    std::uint32_t total = 0;
    for (const auto& f : FragmentPacket(packet, fragmentSize, headerBytes))
    {
        total += f.AirtimeBytes();
    }
    return total;
}

Reassembler::Result
Reassembler::Accept(NodeId src,
                    PacketId packet,
                    std::uint16_t index,
                    std::uint16_t count,
                    std::uint16_t payloadBytes,
                    std::span<const std::uint8_t> content)
{
    if (count == 0 || index >= count)
    {
        throw std::invalid_argument(fmt::format("Reassembler: fragment index {} outside count {}", index, count));
    }
    const auto key = std::make_pair(src, packet);
    if (m_done.contains(key))
    {
        return Result{Status::Duplicate, 0, {}};
    }

    auto& part = m_partial[key];
    if (part.have.empty())
    {
        part.have.assign(count, false);
        part.sizes.assign(count, 0);
        part.parts.resize(count);
    }
    else if (part.have.size() != count)
    {
        throw std::invalid_argument(fmt::format("Reassembler: inconsistent fragment count for packet {}", packet));
    }
    if (part.have[index])
    {
        return Result{Status::Duplicate, 0, {}};
    }
    part.have[index] = true;
    part.sizes[index] = payloadBytes;
    part.parts[index].assign(content.begin(), content.end());
    ++part.received;
    if (part.received < count)
    {
        return Result{Status::Pending, 0, {}};
    }

    Result done;
    done.status = Status::Completed;
    for (std::uint16_t i = 0; i < count; ++i)
    {
        done.payloadBytes += part.sizes[i];
        done.payload.insert(done.payload.end(), part.parts[i].begin(), part.parts[i].end());
    }
    m_partial.erase(key);
    m_done.insert(key);
    return done;
}

} // namespace priomac
