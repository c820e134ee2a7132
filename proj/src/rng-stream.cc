#include "priomac/rng-stream.h"

#include <stdexcept>

namespace priomac
{

namespace
{

std::uint64_t
SplitMix64(std::uint64_t& state)
{
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t
MixSeed(std::uint64_t seed, std::uint64_t stream)
{
    std::uint64_t state = seed;
    std::uint64_t a = SplitMix64(state);
    state ^= stream * 0xd1342543de82ef95ULL;
    std::uint64_t b = SplitMix64(state);
    return a ^ (b << 1);
}

} // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream)
    : m_seed(seed),
      m_stream(stream),
      m_engine(MixSeed(seed, stream))
{
}

std::uint64_t
RngStream::Next()
{
    return m_engine();
}

std::uint32_t
RngStream::UniformInt(std::uint32_t lo, std::uint32_t hi)
{
    if (hi < lo)
    {
        throw std::invalid_argument("RngStream::UniformInt: empty range");
    }
    const std::uint64_t span = static_cast<std::uint64_t>(hi) - lo + 1;
    // Rejection sampling removes modulo bias.
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % span);
    std::uint64_t r;
    do
    {
        r = Next();
    } while (r >= limit);
    return lo + static_cast<std::uint32_t>(r % span);
}

double
RngStream::Uniform01()
{
    return static_cast<double>(Next() >> 11) * 0x1.0p-53;
}

bool
RngStream::Bernoulli(double p)
{
    if (p <= 0.0)
    {
        return false;
    }
    if (p >= 1.0)
    {
        return true;
    }
    return Uniform01() < p;
}

} // namespace priomac
