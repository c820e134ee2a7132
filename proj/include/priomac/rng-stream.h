#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <utility>

namespace priomac
{

/**
 * A seeded pseudo-random substream.
 *
 * Every (seed, stream) pair maps to an independent mt19937_64 state. The
 * bounded draws are implemented here rather than with the std distributions,
 * whose output is implementation-defined, so traces are reproducible across
 * standard libraries.
 */
class RngStream
{
  public:
    RngStream(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t Next();
    /// Uniform integer in [lo, hi], inclusive.
    std::uint32_t UniformInt(std::uint32_t lo, std::uint32_t hi);
    /// Uniform double in [0, 1) with 53 bits of resolution.
    double Uniform01();
    bool Bernoulli(double p);

    std::uint64_t Seed() const { return m_seed; }
    std::uint64_t Stream() const { return m_stream; }

  private:
    std::uint64_t m_seed;
    std::uint64_t m_stream;
    std::mt19937_64 m_engine;
};

/// Substream purposes. Stream index = node id * kStreamStride + purpose.
enum class StreamPurpose : std::uint64_t
{
    Placement = 0,
    Phase = 1,
    Backoff = 2,
    Persistence = 3,
    AckLoss = 4,
    Selection = 5,
};

constexpr std::uint64_t kStreamStride = 8;

inline RngStream
MakeStream(std::uint64_t seed, std::uint32_t node, StreamPurpose purpose)
{
    return RngStream(seed, node * kStreamStride + static_cast<std::uint64_t>(purpose));
}

/// Lazily created per-(node, purpose) substreams of one seed.
class StreamBank
{
  public:
    explicit StreamBank(std::uint64_t seed)
        : m_seed(seed)
    {
    }

    RngStream& Get(std::uint32_t node, StreamPurpose purpose)
    {
        const auto key = std::make_pair(node, purpose);
        auto it = m_streams.find(key);
        if (it == m_streams.end())
        {
            it = m_streams.emplace(key, MakeStream(m_seed, node, purpose)).first;
        }
        return it->second;
    }

    std::uint64_t Seed() const { return m_seed; }

  private:
    std::uint64_t m_seed;
    std::map<std::pair<std::uint32_t, StreamPurpose>, RngStream> m_streams;
};

} // namespace priomac
