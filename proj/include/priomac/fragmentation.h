#pragma once

#include "priomac/sim-time.h"
#include "priomac/traffic.h"

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <utility>
#include <vector>

namespace priomac
{

struct Fragment
{
    PacketId packetId = 0;
    std::uint16_t index = 0;
    std::uint16_t count = 1;
    std::uint32_t offset = 0; // into the packet payload
    std::uint16_t payloadBytes = 0;
    std::uint16_t headerBytes = 0;

    std::uint32_t AirtimeBytes() const { return payloadBytes + headerBytes; }
    bool IsLast() const { return index + 1 == count; }
};

/**
 * Split a NORMAL packet into ceil(payload / fragmentSize) fragments. All but
 * the last carry exactly fragmentSize bytes.
 *
 * Throws std::invalid_argument for fragmentSize 0, fragmentSize larger than
 * the payload, or an EMERGENCY packet (those always go out whole).
 */
std::vector<Fragment> FragmentPacket(const Packet& packet, std::uint32_t fragmentSize, std::uint32_t headerBytes);

/// Total bytes on air for a fragmented packet: payload + count * header.
std::uint32_t AirtimeOverhead(const Packet& packet, std::uint32_t fragmentSize, std::uint32_t headerBytes);

/// Sink-side reassembly keyed by (source, packet id). Duplicate fragments are idempotent.
class Reassembler
{
  public:
    enum class Status
    {
        Pending,
        Completed,
        Duplicate,
    };

    struct Result
    {
        Status status = Status::Pending;
        std::uint32_t payloadBytes = 0;    // valid when Completed
        std::vector<std::uint8_t> payload; // concatenated content, if content was supplied
    };

    Result Accept(NodeId src,
                  PacketId packet,
                  std::uint16_t index,
                  std::uint16_t count,
                  std::uint16_t payloadBytes,
                  std::span<const std::uint8_t> content = {});

    std::size_t PendingCount() const { return m_partial.size(); }
    bool IsComplete(NodeId src, PacketId packet) const { return m_done.contains({src, packet}); }

  private:
    struct Partial
    {
        std::vector<bool> have;
        std::vector<std::uint16_t> sizes;
        std::vector<std::vector<std::uint8_t>> parts;
        std::uint16_t received = 0;
    };

    std::map<std::pair<NodeId, PacketId>, Partial> m_partial;
    std::set<std::pair<NodeId, PacketId>> m_done;
};

} // namespace priomac
