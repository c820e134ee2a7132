#include "priomac/experiment.h"

#include "priomac/channel.h"
#include "priomac/fps-mac.h"
#include "priomac/frog-mac.h"
#include "priomac/scheduler.h"
#include "priomac/traffic.h"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <tuple>
#include <ostream>
#include <thread>

namespace priomac
{

namespace
{

RunReport
Collect(const MetricsCollector& metrics, std::vector<NodeEnergy> energy, const ProtocolCounters& counters, SimTime end)
{
    RunReport report = Summarize(metrics.Samples(), energy, metrics.Generated(), metrics.Dropped());
    report.counters = counters;
    report.duration = end;
    return report;
}

} // namespace

RunReport
RunOnce(const SimConfig& config, Trace& trace)
{
    config.Validate();
    Scheduler scheduler;
    Channel channel(scheduler, config.radio);
    const Population population = BuildPopulation(config.nNodes, config.nEmergency, config.traffic, config.seed);
    MetricsCollector metrics;

    if (config.protocol == Protocol::Frog)
    {
        FrogParams params = config.frog;
        params.fragmentSize = config.EffectiveFragmentSize();
        FrogNetwork net(scheduler, channel, population, params, metrics, trace, config.power, config.seed);
        TrafficGenerator gen(scheduler, population, config.payloadBytes, [&net](const Packet& p) { net.Inject(p); });
        gen.Start();
        scheduler.Run(config.duration);
        net.Finish(config.duration);
        ProtocolCounters counters = net.Counters();
        counters.dataCollisions = channel.CorruptedCount(FrameKind::DataFragment) +
                                  channel.CorruptedCount(FrameKind::DataWhole);
        return Collect(metrics, net.Energy(), counters, config.duration);
    }

    FpsParams params = config.fps;
    params.scales.slotsPerFrame = params.slotsPerFrame;
    params.scales.areaDiagonalM = config.traffic.areaM * std::sqrt(2.0);
    FpsCluster cluster(scheduler, channel, population, params, config.payloadBytes, metrics, trace, config.power,
                       config.seed);
    TrafficGenerator gen(scheduler, population, config.payloadBytes, [&cluster](const Packet& p) { cluster.Inject(p); });
    cluster.Start();
    gen.Start();
    scheduler.Run(config.duration);
    cluster.Finish(config.duration);
    ProtocolCounters counters = cluster.Counters();
    counters.dataCollisions = channel.CorruptedCount(FrameKind::DataWhole);
    return Collect(metrics, cluster.Energy(), counters, config.duration);
}

RunReport
RunOnce(const SimConfig& config)
{
    Trace disabled;
    return RunOnce(config, disabled);
}

RunReport
EmitTrace(const SimConfig& config, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
    {
        throw std::runtime_error(fmt::format("cannot open trace file '{}'", path.string()));
    }
    Trace trace(out);
    RunReport report = RunOnce(config, trace);
    out.flush();
    if (!out)
    {
        throw std::runtime_error(fmt::format("failed writing trace file '{}'", path.string()));
    }
    return report;
}

const char*
ToString(Experiment e)
{
    return e == Experiment::Fig4 ? "fig4" : "fig5";
}

Experiment
ExperimentFromString(std::string_view name)
{
    if (name == "fig4")
    {
        return Experiment::Fig4;
    }
    if (name == "fig5")
    {
        return Experiment::Fig5;
    }
    throw std::invalid_argument(fmt::format("unknown experiment '{}' (expected fig4 or fig5)", name));
}

std::vector<std::uint64_t>
SweepSpec::Seeds() const
{
    if (!seeds.empty())
    {
        return seeds;
    }
    std::vector<std::uint64_t> out(10);
    std::iota(out.begin(), out.end(), 1);
    return out;
}

std::vector<SimConfig>
SweepSpec::Points() const
{
    std::vector<SimConfig> out;
    const auto seedList = Seeds();
    auto add = [&](Protocol protocol, std::uint32_t nEmergency, std::optional<std::uint32_t> fragment) {
        for (std::uint64_t seed : seedList)
        {
            SimConfig c = base;
            c.protocol = protocol;
            c.nEmergency = nEmergency;
            c.fragmentSize = fragment;
            c.seed = seed;
            out.push_back(c);
        }
    };
    for (std::uint32_t n : kEmergencyGrid)
    {
        if (experiment == Experiment::Fig4)
        {
            add(Protocol::Fps, n, std::nullopt);
            for (std::uint32_t f : kFragmentGrid)
            {
                add(Protocol::Frog, n, f);
            }
        }
        else
        {
            add(Protocol::Fps, n, std::nullopt);
            add(Protocol::Frog, n, 8);
        }
    }
    // Row order: (n_emergency, fragment_size or 0, protocol, seed).
    std::stable_sort(out.begin(), out.end(), [](const SimConfig& a, const SimConfig& b) {
        auto key = [](const SimConfig& c) {
            return std::tuple(c.nEmergency, c.fragmentSize.value_or(0), static_cast<int>(c.protocol), c.seed);
        };
        return key(a) < key(b);
    });
    return out;
}

SweepRow
SweepRow::From(const SimConfig& config, const RunReport& report)
{
    SweepRow row;
    row.protocol = config.protocol;
    row.nEmergency = config.nEmergency;
    if (config.protocol == Protocol::Frog)
    {
        row.fragmentSize = config.EffectiveFragmentSize();
    }
    row.seed = config.seed;
    row.meanDelayEmergencyUs = report.emergency.meanUs;
    row.meanDelayNormalUs = report.normal.meanUs;
    row.meanDelayAllUs = report.all.meanUs;
    row.delivered = report.all.delivered;
    row.dropped = report.all.dropped;
    row.energyPerDeliveredUj = report.energyPerDeliveredUj;
    return row;
}

std::vector<SweepRow>
RunSweep(const SweepSpec& spec)
{
    const std::vector<SimConfig> points = spec.Points();
    std::vector<SweepRow> rows(points.size());
    unsigned threads = spec.threads != 0 ? spec.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(points.size(), 1)));

    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(threads);
    auto worker = [&](unsigned w) {
        try
        {
            for (std::size_t i = next++; i < points.size(); i = next++)
            {
                rows[i] = SweepRow::From(points[i], RunOnce(points[i]));
            }
        }
        catch (...)
        {
            errors[w] = std::current_exception();
            next = points.size();
        }
    };
    if (threads <= 1)
    {
        worker(0);
    }
    else
    {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < threads; ++w)
        {
            pool.emplace_back(worker, w);
        }
    }
    for (auto& e : errors)
    {
        if (e)
        {
            std::rethrow_exception(e);
        }
    }
    return rows;
}

namespace
{

std::string
Opt(const std::optional<double>& v)
{
    return v ? fmt::format("{:.3f}", *v) : std::string("NA");
}

std::string
OptU(const std::optional<std::uint32_t>& v)
{
    return v ? fmt::format("{}", *v) : std::string("NA");
}

PlotPoint::Stat
Reduce(const std::vector<double>& xs)
{
    PlotPoint::Stat s;
    s.n = xs.size();
    if (xs.empty())
    {
        return s;
    }
    double sum = 0.0;
    for (double x : xs)
    {
        sum += x;
    }
    const double mean = sum / static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs)
    {
        ss += (x - mean) * (x - mean);
    }
    s.mean = mean;
    s.stddev = xs.size() > 1 ? std::sqrt(ss / static_cast<double>(xs.size() - 1)) : 0.0;
    return s;
}

} // namespace

void
WriteCsv(std::span<const SweepRow> rows, std::ostream& out)
{
    out << "protocol,n_emergency,fragment_size,seed,mean_delay_emergency_us,mean_delay_normal_us,"
           "mean_delay_all_us,delivered,dropped,energy_per_delivered_uj\n";
    for (const auto& r : rows)
    {
        out << fmt::format("{},{},{},{},{},{},{},{},{},{}\n",
                           ToString(r.protocol),
                           r.nEmergency,
                           OptU(r.fragmentSize),
                           r.seed,
                           Opt(r.meanDelayEmergencyUs),
                           Opt(r.meanDelayNormalUs),
                           Opt(r.meanDelayAllUs),
                           r.delivered,
                           r.dropped,
                           Opt(r.energyPerDeliveredUj));
    }
}

std::vector<PlotPoint>
Aggregate(std::span<const SweepRow> rows)
{
    using Key = std::tuple<std::uint32_t, std::uint32_t, int>;
    std::map<Key, std::vector<const SweepRow*>> groups;
    for (const auto& r : rows)
    {
        groups[Key{r.nEmergency, r.fragmentSize.value_or(0), static_cast<int>(r.protocol)}].push_back(&r);
    }
    std::vector<PlotPoint> out;
    for (const auto& [key, members] : groups)
    {
        PlotPoint p;
        p.protocol = members.front()->protocol;
        p.nEmergency = members.front()->nEmergency;
        p.fragmentSize = members.front()->fragmentSize;
        p.seeds = members.size();
        auto column = [&](auto field) {
            std::vector<double> xs;
            for (const SweepRow* r : members)
            {
                if (const auto& v = r->*field)
                {
                    xs.push_back(*v);
                }
            }
            return Reduce(xs);
        };
        p.emergency = column(&SweepRow::meanDelayEmergencyUs);
        p.normal = column(&SweepRow::meanDelayNormalUs);
        p.all = column(&SweepRow::meanDelayAllUs);
        p.energy = column(&SweepRow::energyPerDeliveredUj);
        out.push_back(p);
    }
    return out;
}

void
WritePlotData(std::span<const PlotPoint> points, std::ostream& out)
{
    out << "# protocol n_emergency fragment_size seeds emergency_mean_us emergency_sd_us normal_mean_us "
           "normal_sd_us all_mean_us all_sd_us energy_mean_uj energy_sd_uj\n";
    for (const auto& p : points)
    {
        out << fmt::format("{} {} {} {} {} {} {} {} {} {} {} {}\n",
                           ToString(p.protocol),
                           p.nEmergency,
                           OptU(p.fragmentSize),
                           p.seeds,
                           Opt(p.emergency.mean),
                           Opt(p.emergency.stddev),
                           Opt(p.normal.mean),
                           Opt(p.normal.stddev),
                           Opt(p.all.mean),
                           Opt(p.all.stddev),
                           Opt(p.energy.mean),
                           Opt(p.energy.stddev));
    }
}

std::filesystem::path
WriteSweep(const SweepSpec& spec, std::span<const SweepRow> rows, const std::filesystem::path& dir)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
    {
        throw std::runtime_error(fmt::format("cannot create output directory '{}': {}", dir.string(), ec.message()));
    }
    auto write = [](const std::filesystem::path& path, auto&& body) {
        std::ofstream out(path, std::ios::binary);
        if (!out)
        {
            throw std::runtime_error(fmt::format("cannot open '{}' for writing", path.string()));
        }
        body(out);
        out.flush();
        if (!out)
        {
            throw std::runtime_error(fmt::format("failed writing '{}'", path.string()));
        }
    };
    const auto csv = dir / fmt::format("{}.csv", ToString(spec.experiment));
    const auto dat = dir / fmt::format("{}.dat", ToString(spec.experiment));
    write(csv, [&](std::ostream& o) { WriteCsv(rows, o); });
    const auto points = Aggregate(rows);
    write(dat, [&](std::ostream& o) { WritePlotData(points, o); });
    return csv;
}

} // namespace priomac
