#pragma once

#include "priomac/config.h"
#include "priomac/metrics.h"
#include "priomac/trace.h"

#include <array>
#include <filesystem>
#include <span>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace priomac
{

/// Run one simulation. Records go to `trace` when it is enabled.
RunReport RunOnce(const SimConfig& config, Trace& trace);
RunReport RunOnce(const SimConfig& config);

/// Write the full event trace of one run to `path`.
RunReport EmitTrace(const SimConfig& config, const std::filesystem::path& path);

enum class Experiment : std::uint8_t
{
    Fig4, // fragment size x emergency nodes, both protocols
    Fig5, // emergency nodes at fragment size 8, both protocols
};

const char* ToString(Experiment e);
Experiment ExperimentFromString(std::string_view name);

struct SweepSpec
{
    Experiment experiment = Experiment::Fig5;
    std::vector<std::uint64_t> seeds; // empty means 1..10
    SimConfig base;                   // per-point values are overwritten
    unsigned threads = 0;             // 0 means hardware concurrency

    static constexpr std::array<std::uint32_t, 6> kEmergencyGrid{3, 6, 9, 12, 15, 18};
    static constexpr std::array<std::uint32_t, 5> kFragmentGrid{2, 4, 8, 16, 32};

    std::vector<std::uint64_t> Seeds() const;
    /// Every (protocol, n_emergency, fragment_size, seed) configuration, in output order.
    std::vector<SimConfig> Points() const;
};

/// One CSV row.
struct SweepRow
{
    Protocol protocol = Protocol::Frog;
    std::uint32_t nEmergency = 0;
    std::optional<std::uint32_t> fragmentSize;
    std::uint64_t seed = 0;
    std::optional<double> meanDelayEmergencyUs;
    std::optional<double> meanDelayNormalUs;
    std::optional<double> meanDelayAllUs;
    std::uint64_t delivered = 0;
    std::uint64_t dropped = 0;
    std::optional<double> energyPerDeliveredUj;

    static SweepRow From(const SimConfig& config, const RunReport& report);
};

/// Run every point of the spec; rows come back in deterministic order whatever the thread count.
std::vector<SweepRow> RunSweep(const SweepSpec& spec);

void WriteCsv(std::span<const SweepRow> rows, std::ostream& out);

/// Mean and sample standard deviation across seeds for each (protocol, n_emergency, fragment_size).
struct PlotPoint
{
    Protocol protocol = Protocol::Frog;
    std::uint32_t nEmergency = 0;
    std::optional<std::uint32_t> fragmentSize;
    std::size_t seeds = 0;
    struct Stat
    {
        std::optional<double> mean;
        std::optional<double> stddev;
        std::size_t n = 0;
    };
    Stat emergency;
    Stat normal;
    Stat all;
    Stat energy;
};

std::vector<PlotPoint> Aggregate(std::span<const SweepRow> rows);
void WritePlotData(std::span<const PlotPoint> points, std::ostream& out);

/// Writes <dir>/<experiment>.csv and <dir>/<experiment>.dat; returns the CSV path.
std::filesystem::path WriteSweep(const SweepSpec& spec,
                                 std::span<const SweepRow> rows,
                                 const std::filesystem::path& dir);

} // namespace priomac
